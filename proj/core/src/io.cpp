#include "salp/io.hpp"

#include <fstream>
#include <sstream>

namespace salp {

Rat parse_rat(const std::string& text) {
    auto slash = text.find('/');
    try {
        if (slash == std::string::npos) {
            Rat q{Int(text)};
            return q;
        }
        Int num(text.substr(0, slash));
        Int den(text.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator");
        Rat q(num, den);
        q.canonicalize();
        return q;
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("malformed rational: " + text);
    }
}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> toks;
    std::istringstream is(line);
    std::string t;
    while (is >> t) {
        if (t[0] == '#') break;
        toks.push_back(t);
    }
    return toks;
}

int parse_int(const std::string& tok, int line_no) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return v;
    } catch (const std::exception&) {
        throw ParseError(line_no, "expected an integer, got '" + tok + "'");
    }
}

}  // namespace

Structure parse_structure(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    int line_no = 0;

    std::string name = "structure";
    int domain = -1;
    struct RelDecl {
        std::string name;
        int arity;
        bool full;
        std::vector<Tup> tuples;
        int line;
    };
    std::vector<RelDecl> rels;

    while (std::getline(is, line)) {
        ++line_no;
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        const std::string& head = toks[0];
        if (head == "structure") {
            if (toks.size() != 2) throw ParseError(line_no, "usage: structure <name>");
            name = toks[1];
        } else if (head == "domain") {
            if (toks.size() != 2) throw ParseError(line_no, "usage: domain <n>");
            domain = parse_int(toks[1], line_no);
            if (domain < 1) throw ParseError(line_no, "domain must be a positive integer");
        } else if (head == "relation") {
            if (toks.size() != 3 && !(toks.size() == 4 && toks[3] == "full"))
                throw ParseError(line_no, "usage: relation <name> <arity> [full]");
            RelDecl d;
            d.name = toks[1];
            d.arity = parse_int(toks[2], line_no);
            d.full = toks.size() == 4;
            d.line = line_no;
            if (d.arity < 1) throw ParseError(line_no, "arity must be >= 1");
            rels.push_back(std::move(d));
        } else if (head == "t") {
            if (rels.empty()) throw ParseError(line_no, "tuple before any relation");
            auto& d = rels.back();
            if (d.full) throw ParseError(line_no, "tuples not allowed in a full relation");
            if (static_cast<int>(toks.size()) - 1 != d.arity)
                throw ParseError(line_no, "tuple arity mismatch for relation " + d.name);
            Tup t;
            for (std::size_t i = 1; i < toks.size(); ++i)
                t.push_back(parse_int(toks[i], line_no));
            d.tuples.push_back(std::move(t));
        } else {
            throw ParseError(line_no, "unknown directive '" + head + "'");
        }
    }
    if (domain < 1) throw ParseError(line_no, "missing domain declaration");

    Signature sig;
    for (const auto& d : rels) sig.symbols.push_back({d.name, d.arity});
    Structure s(name, sig, domain);
    for (std::size_t r = 0; r < rels.size(); ++r) {
        const auto& d = rels[r];
        if (d.full) {
            s.set_full(static_cast<int>(r));
            continue;
        }
        for (const auto& t : d.tuples) {
            try {
                s.add_tuple(static_cast<int>(r), t);
            } catch (const std::exception& e) {
                throw ParseError(d.line, e.what());
            }
        }
    }
    return s;
}

std::string serialize_structure(const Structure& s) {
    std::ostringstream os;
    os << "structure " << s.name() << "\n";
    os << "domain " << s.domain_size() << "\n";
    for (int r = 0; r < s.relation_count(); ++r) {
        const auto& sym = s.signature().symbols[r];
        os << "relation " << sym.name << " " << sym.arity;
        if (s.relation(r).full) {
            os << " full\n";
            continue;
        }
        os << "\n";
        for (const auto& t : s.relation(r).tuples) {
            os << "  t";
            for (int e : t) os << " " << e;
            os << "\n";
        }
    }
    return os.str();
}

Structure load_structure_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_structure(buf.str());
}

std::string dump_tensor(const CubicalTensor& t) {
    std::ostringstream os;
    for (const auto& [code, v] : t.entries()) {
        Tup idx = decode_tuple(code, t.base(), t.order());
        for (std::size_t i = 0; i < idx.size(); ++i) os << (i ? " " : "") << idx[i];
        os << " " << rat_str(v) << "\n";
    }
    return os.str();
}

CubicalTensor parse_tensor_block(const std::string& text, int base, int order) {
    CubicalTensor t(base, order);
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        auto toks = tokenize(line);
        if (toks.empty()) continue;
        if (static_cast<int>(toks.size()) != order + 1)
            throw ParseError(line_no, "tensor line needs " + std::to_string(order) +
                                          " indices and a value");
        Tup idx;
        for (int i = 0; i < order; ++i) idx.push_back(parse_int(toks[i], line_no));
        t.set(idx, parse_rat(toks[order]));
    }
    return t;
}

std::uint64_t content_hash(const Structure& s) {
    const std::string text = serialize_structure(s);
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string hash_hex(std::uint64_t h) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[h & 0xf];
        h >>= 4;
    }
    return out;
}

}  // namespace salp
