#include "salp/structures.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <stdexcept>

namespace salp {

Caps& caps() {
    static Caps c;
    return c;
}

std::int64_t checked_pow(std::int64_t v, int e, std::int64_t cap) {
    std::int64_t r = 1;
    for (int i = 0; i < e; ++i) {
        if (v != 0 && r > cap / v + 1) throw CapExceeded("power size exceeds cap");
        r *= v;
        if (r > cap) throw CapExceeded("power size exceeds cap");
    }
    return r;
}

int Signature::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < symbols.size(); ++i)
        if (symbols[i].name == name) return static_cast<int>(i);
    return -1;
}

Structure::Structure(std::string name, Signature sig, int domain_size)
    : name_(std::move(name)), sig_(std::move(sig)), n_(domain_size) {
    if (n_ < 1) throw std::invalid_argument("empty domain");
    std::set<std::string> seen;
    for (const auto& s : sig_.symbols) {
        if (s.arity < 1) throw std::invalid_argument("arity must be >= 1: " + s.name);
        if (!seen.insert(s.name).second)
            throw std::invalid_argument("duplicate relation symbol: " + s.name);
    }
    rels_.resize(sig_.symbols.size());
}

void Structure::add_tuple(int rel, Tup t) {
    const int r = arity(rel);
    if (static_cast<int>(t.size()) != r)
        throw std::invalid_argument("tuple length does not match arity of " +
                                    sig_.symbols[rel].name);
    for (int e : t)
        if (e < 1 || e > n_)
            throw std::out_of_range("tuple entry " + std::to_string(e) +
                                    " outside domain [" + std::to_string(n_) + "]");
    auto& rl = rels_[rel];
    if (rl.full) throw std::invalid_argument("cannot add tuples to a full relation");
    if (std::find(rl.tuples.begin(), rl.tuples.end(), t) != rl.tuples.end())
        throw std::invalid_argument("duplicate tuple in relation " + sig_.symbols[rel].name);
    rl.tuples.push_back(std::move(t));
}

void Structure::set_full(int rel) {
    if (!rels_[rel].tuples.empty())
        throw std::invalid_argument("relation already has explicit tuples");
    rels_[rel].full = true;
}

int Structure::add_symbol(const std::string& name, int arity) {
    if (sig_.index_of(name) >= 0)
        throw std::invalid_argument("relation symbol exists: " + name);
    if (arity < 1) throw std::invalid_argument("arity must be >= 1");
    sig_.symbols.push_back({name, arity});
    rels_.emplace_back();
    return static_cast<int>(sig_.symbols.size()) - 1;
}

std::int64_t Structure::tuple_count(int rel) const {
    const auto& rl = rels_[rel];
    if (!rl.full) return static_cast<std::int64_t>(rl.tuples.size());
    return checked_pow(n_, arity(rel), std::numeric_limits<std::int64_t>::max() / 2);
}

std::vector<Tup> Structure::tuples_of(int rel) const {
    const auto& rl = rels_[rel];
    if (!rl.full) return rl.tuples;
    const int r = arity(rel);
    const std::int64_t total = checked_pow(n_, r, caps().enumeration);
    std::vector<Tup> out;
    out.reserve(total);
    for (std::int64_t c = 1; c <= total; ++c) out.push_back(decode_tuple(c, n_, r));
    return out;
}

bool Structure::contains(int rel, const Tup& t) const {
    const auto& rl = rels_[rel];
    if (static_cast<int>(t.size()) != arity(rel)) return false;
    if (rl.full) {
        for (int e : t)
            if (e < 1 || e > n_) return false;
        return true;
    }
    return std::find(rl.tuples.begin(), rl.tuples.end(), t) != rl.tuples.end();
}

std::int64_t encode_tuple(const Tup& t, int n) {
    std::int64_t code = 0;
    for (int e : t) code = code * n + (e - 1);
    return code + 1;
}

Tup decode_tuple(std::int64_t code, int n, int k) {
    std::int64_t c = code - 1;
    Tup t(k);
    for (int i = k - 1; i >= 0; --i) {
        t[i] = static_cast<int>(c % n) + 1;
        c /= n;
    }
    return t;
}

std::string enhancement_name(int k) { return "__R" + std::to_string(k); }

bool is_enhancement_symbol(const std::string& name) {
    if (name.size() < 4 || name.compare(0, 3, "__R") != 0) return false;
    return std::all_of(name.begin() + 3, name.end(), [](char c) { return c >= '0' && c <= '9'; });
}

bool is_enhanced(const Structure& a, int k) {
    int idx = a.signature().index_of(enhancement_name(k));
    if (idx < 0) return false;
    if (a.arity(idx) != k) return false;
    if (a.relation(idx).full) return true;
    return a.tuple_count(idx) ==
           checked_pow(a.domain_size(), k, std::numeric_limits<std::int64_t>::max() / 2);
}

Structure clique(int p) {
    if (p < 1) throw std::invalid_argument("clique order must be >= 1");
    Structure s("K" + std::to_string(p), Signature{{{"E", 2}}}, p);
    for (int a = 1; a <= p; ++a)
        for (int b = 1; b <= p; ++b)
            if (a != b) s.add_tuple(0, {a, b});
    return s;
}

Structure directed_cycle(int p) {
    if (p < 1) throw std::invalid_argument("cycle order must be >= 1");
    Structure s("C" + std::to_string(p), Signature{{{"E", 2}}}, p);
    for (int a = 1; a <= p; ++a) s.add_tuple(0, {a, a % p + 1});
    return s;
}

Structure enhance(const Structure& a, int k) {
    if (k < 1) throw std::invalid_argument("enhancement level must be >= 1");
    const std::string nm = enhancement_name(k);
    if (a.signature().index_of(nm) >= 0)
        throw std::invalid_argument("structure already carries " + nm);
    Structure out = a;
    int rel = out.add_symbol(nm, k);
    const std::int64_t total =
        checked_pow(a.domain_size(), k, std::numeric_limits<std::int64_t>::max() / 2);
    if (total > 100'000) {
        out.set_full(rel);
    } else {
        check_cap(total, caps().enumeration, "enhance");
        for (std::int64_t c = 1; c <= total; ++c)
            out.add_tuple(rel, decode_tuple(c, a.domain_size(), k));
    }
    return out;
}

Structure enhance_chain(const Structure& a, int k_max) {
    Structure out = a;
    for (int t = 1; t <= k_max; ++t) out = enhance(out, t);
    return out;
}

Structure strip_enhancements(const Structure& a) {
    Signature sig;
    for (const auto& s : a.signature().symbols)
        if (!is_enhancement_symbol(s.name)) sig.symbols.push_back(s);
    Structure out(a.name(), sig, a.domain_size());
    for (int r = 0; r < a.relation_count(); ++r) {
        const auto& sym = a.signature().symbols[r];
        if (is_enhancement_symbol(sym.name)) continue;
        int nr = sig.index_of(sym.name);
        if (a.relation(r).full) {
            for (auto& t : a.tuples_of(r)) out.add_tuple(nr, t);
        } else {
            for (const auto& t : a.relation(r).tuples) out.add_tuple(nr, t);
        }
    }
    return out;
}

Structure power(const Structure& a, int l) {
    if (l < 1) throw std::invalid_argument("power exponent must be >= 1");
    const int n = a.domain_size();
    const std::int64_t domain = checked_pow(n, l, caps().enumeration);
    Structure out(a.name() + "^" + std::to_string(l), a.signature(),
                  static_cast<int>(domain));
    for (int rel = 0; rel < a.relation_count(); ++rel) {
        const int r = a.arity(rel);
        const auto rows = a.tuples_of(rel);
        const std::int64_t m = static_cast<std::int64_t>(rows.size());
        check_cap(checked_pow(m, l, std::numeric_limits<std::int64_t>::max() / 2),
                  caps().enumeration, "power relation");
        // All choices of l rows; columns form the power-relation tuple.
        std::vector<std::size_t> choice(l, 0);
        if (m == 0) continue;
        while (true) {
            Tup t(r);
            for (int j = 0; j < r; ++j) {
                Tup column(l);
                for (int i = 0; i < l; ++i) column[i] = rows[choice[i]][j];
                t[j] = static_cast<int>(encode_tuple(column, n));
            }
            out.add_tuple(rel, std::move(t));
            int pos = l - 1;
            while (pos >= 0 && choice[pos] + 1 == static_cast<std::size_t>(m)) {
                choice[pos] = 0;
                --pos;
            }
            if (pos < 0) break;
            ++choice[pos];
        }
    }
    return out;
}

Structure line_digraph(const Structure& x) {
    int edge_rel = -1;
    for (int r = 0; r < x.relation_count(); ++r) {
        const auto& sym = x.signature().symbols[r];
        if (is_enhancement_symbol(sym.name)) continue;
        if (sym.arity == 2) {
            if (edge_rel >= 0)
                throw std::invalid_argument("line digraph needs a unique binary relation");
            edge_rel = r;
        } else {
            throw std::invalid_argument("line digraph input must be a digraph");
        }
    }
    if (edge_rel < 0) throw std::invalid_argument("no binary relation to take arcs from");

    std::vector<Tup> arcs = x.tuples_of(edge_rel);
    std::sort(arcs.begin(), arcs.end());
    const std::string edge_name = x.signature().symbols[edge_rel].name;
    Structure out("d" + x.name(), Signature{{{edge_name, 2}}},
                  std::max<int>(1, static_cast<int>(arcs.size())));
    if (arcs.empty())
        throw std::invalid_argument("line digraph of an arcless digraph is empty");
    auto arc_index = [&](const Tup& t) {
        auto it = std::lower_bound(arcs.begin(), arcs.end(), t);
        return static_cast<int>(it - arcs.begin()) + 1;
    };
    for (std::size_t i = 0; i < arcs.size(); ++i)
        for (std::size_t j = 0; j < arcs.size(); ++j)
            if (arcs[i][1] == arcs[j][0])
                out.add_tuple(0, {arc_index(arcs[i]), arc_index(arcs[j])});
    return out;
}

bool is_homomorphism(const std::vector<int>& f, const Structure& x, const Structure& a) {
    if (static_cast<int>(f.size()) != x.domain_size()) return false;
    for (int v : f)
        if (v < 1 || v > a.domain_size()) return false;
    if (!(x.signature() == a.signature())) return false;
    for (int rel = 0; rel < x.relation_count(); ++rel) {
        if (a.relation(rel).full) continue;  // everything maps into a full relation
        for (const auto& t : x.tuples_of(rel)) {
            Tup img(t.size());
            for (std::size_t i = 0; i < t.size(); ++i) img[i] = f[t[i] - 1];
            if (!a.contains(rel, img)) return false;
        }
    }
    return true;
}

namespace {

struct SearchContext {
    const Structure& x;
    const Structure& a;
    // Constraints indexed for forward checking: for each vertex, the list of
    // (rel, tuple) whose scope includes it.
    std::vector<std::vector<std::pair<int, const Tup*>>> watch;
    std::vector<std::vector<Tup>> tuple_storage;
    std::int64_t budget;
    std::int64_t nodes = 0;

    SearchContext(const Structure& xx, const Structure& aa, std::int64_t b)
        : x(xx), a(aa), watch(xx.domain_size()), budget(b) {
        tuple_storage.resize(x.relation_count());
        for (int rel = 0; rel < x.relation_count(); ++rel) {
            tuple_storage[rel] = x.tuples_of(rel);
            if (a.relation(rel).full) continue;
            for (const auto& t : tuple_storage[rel])
                for (int v : t) watch[v - 1].push_back({rel, &t});
        }
        for (auto& w : watch) {
            std::sort(w.begin(), w.end());
            w.erase(std::unique(w.begin(), w.end()), w.end());
        }
    }

    // True iff the constraint can still be satisfied given the partial map
    // (unassigned scope entries are wildcards).
    bool tuple_alive(int rel, const Tup& t, const std::vector<int>& f) const {
        for (const auto& cand : a.tuples_of(rel)) {
            bool ok = true;
            for (std::size_t i = 0; i < t.size(); ++i) {
                int fv = f[t[i] - 1];
                if (fv != 0 && fv != cand[i]) { ok = false; break; }
            }
            if (ok) return true;
        }
        return false;
    }

    bool extend(std::vector<int>& f, int v) {
        if (v == x.domain_size()) return true;
        for (int val = 1; val <= a.domain_size(); ++val) {
            if (++nodes > budget) throw CapExceeded("node budget exhausted");
            f[v] = val;
            bool ok = true;
            for (const auto& [rel, t] : watch[v]) {
                if (!tuple_alive(rel, *t, f)) { ok = false; break; }
            }
            if (ok && extend(f, v + 1)) return true;
            f[v] = 0;
        }
        return false;
    }
};

}  // namespace

HomSearchResult find_homomorphism(const Structure& x, const Structure& a,
                                  std::int64_t node_budget) {
    if (!(x.signature() == a.signature()))
        throw std::invalid_argument("find_homomorphism: signature mismatch");
    HomSearchResult res;
    SearchContext ctx(x, a, node_budget);
    std::vector<int> f(x.domain_size(), 0);
    try {
        if (ctx.extend(f, 0)) {
            if (!is_homomorphism(f, x, a))
                throw std::logic_error("search produced a non-homomorphism");
            res.status = SearchStatus::Found;
            res.map = f;
        } else {
            res.status = SearchStatus::None;
        }
    } catch (const CapExceeded&) {
        res.status = SearchStatus::BudgetExhausted;
    }
    res.nodes = ctx.nodes;
    return res;
}

std::int64_t count_homomorphisms_bruteforce(const Structure& x, const Structure& a) {
    if (!(x.signature() == a.signature()))
        throw std::invalid_argument("count_homomorphisms: signature mismatch");
    const int nx = x.domain_size();
    const std::int64_t na = a.domain_size();
    std::int64_t total = checked_pow(na, nx, caps().enumeration);
    std::int64_t count = 0;
    std::vector<int> f(nx, 1);
    for (std::int64_t c = 0; c < total; ++c) {
        if (is_homomorphism(f, x, a)) ++count;
        int pos = nx - 1;
        while (pos >= 0 && f[pos] == na) f[pos--] = 1;
        if (pos < 0) break;
        ++f[pos];
    }
    return count;
}

std::vector<int> compose(const std::vector<int>& outer, const std::vector<int>& inner) {
    std::vector<int> r(inner.size());
    for (std::size_t i = 0; i < inner.size(); ++i) r[i] = outer[inner[i] - 1];
    return r;
}

std::optional<std::vector<int>> inverse_permutation(const std::vector<int>& f) {
    std::vector<int> inv(f.size(), 0);
    for (std::size_t i = 0; i < f.size(); ++i) {
        int v = f[i];
        if (v < 1 || v > static_cast<int>(f.size()) || inv[v - 1] != 0) return std::nullopt;
        inv[v - 1] = static_cast<int>(i) + 1;
    }
    return inv;
}

std::vector<std::vector<int>> automorphisms(const Structure& a) {
    const int n = a.domain_size();
    std::int64_t fact = 1;
    for (int i = 2; i <= n; ++i) fact *= i;
    check_cap(fact, caps().enumeration, "automorphisms");
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i + 1;
    std::vector<std::vector<int>> out;
    do {
        if (!is_homomorphism(perm, a, a)) continue;
        auto inv = inverse_permutation(perm);
        if (inv && is_homomorphism(*inv, a, a)) out.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

}  // namespace salp
