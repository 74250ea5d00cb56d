#include "salp/tensors.hpp"

#include <stdexcept>
#include <limits>

namespace salp {

bool refines(const Tup& s, const Tup& t) {
    if (s.size() != t.size()) throw std::invalid_argument("refines: length mismatch");
    const int k = static_cast<int>(s.size());
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            if (s[i] == s[j] && t[i] != t[j]) return false;
    return true;
}

bool pattern_equiv(const Tup& s, const Tup& t) { return refines(s, t) && refines(t, s); }

int distinct_count(const Tup& x) {
    int d = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        bool seen = false;
        for (std::size_t j = 0; j < i; ++j)
            if (x[j] == x[i]) { seen = true; break; }
        if (!seen) ++d;
    }
    return d;
}

Tup projection(const Tup& x, const Tup& i) {
    Tup out(i.size());
    for (std::size_t p = 0; p < i.size(); ++p) {
        if (i[p] < 1 || i[p] > static_cast<int>(x.size()))
            throw std::out_of_range("projection index out of range");
        out[p] = x[i[p] - 1];
    }
    return out;
}

std::int64_t CubicalTensor::cell_count() const {
    return checked_pow(base_, order_, std::numeric_limits<std::int64_t>::max() / 2);
}

Rat CubicalTensor::at(std::int64_t code) const {
    auto it = m_.find(code);
    return it == m_.end() ? Rat(0) : it->second;
}

Rat CubicalTensor::at(const Tup& idx) const { return at(encode_tuple(idx, base_)); }

void CubicalTensor::set(std::int64_t code, const Rat& v) {
    if (code < 1 || code > cell_count()) throw std::out_of_range("tensor index");
    if (v == 0)
        m_.erase(code);
    else
        m_[code] = v;
}

void CubicalTensor::set(const Tup& idx, const Rat& v) { set(encode_tuple(idx, base_), v); }

void CubicalTensor::add(std::int64_t code, const Rat& v) {
    if (v == 0) return;
    auto [it, fresh] = m_.try_emplace(code, v);
    if (!fresh) {
        it->second += v;
        if (it->second == 0) m_.erase(it);
    }
}

Rat CubicalTensor::sum() const {
    Rat s(0);
    for (const auto& [c, v] : m_) s += v;
    return s;
}

bool CubicalTensor::nonnegative() const {
    for (const auto& [c, v] : m_)
        if (v < 0) return false;
    return true;
}

bool CubicalTensor::is_stochastic() const { return nonnegative() && sum() == 1; }

std::vector<std::int64_t> CubicalTensor::support() const {
    std::vector<std::int64_t> s;
    s.reserve(m_.size());
    for (const auto& [c, v] : m_) s.push_back(c);
    return s;
}

std::vector<Tup> segre_power(const Tup& a, int k) {
    const int r = static_cast<int>(a.size());
    const std::int64_t total = checked_pow(r, k, caps().enumeration);
    std::vector<Tup> out;
    out.reserve(total);
    for (std::int64_t c = 1; c <= total; ++c)
        out.push_back(projection(a, decode_tuple(c, r, k)));
    return out;
}

Tup segre_flatten(const Tup& a, int k, int n) {
    const int r = static_cast<int>(a.size());
    const std::int64_t total = checked_pow(r, k, caps().enumeration);
    Tup out(total);
    for (std::int64_t c = 1; c <= total; ++c)
        out[c - 1] = static_cast<int>(encode_tuple(projection(a, decode_tuple(c, r, k)), n));
    return out;
}

Structure tensor_power(const Structure& a, int k) {
    if (k < 1) throw std::invalid_argument("tensor power level must be >= 1");
    const int n = a.domain_size();
    const std::int64_t domain = checked_pow(n, k, caps().enumeration);
    Signature sig;
    for (const auto& s : a.signature().symbols) {
        std::int64_t ar = checked_pow(s.arity, k, caps().enumeration);
        sig.symbols.push_back({s.name, static_cast<int>(ar)});
    }
    Structure out(a.name() + "(x)" + std::to_string(k), sig, static_cast<int>(domain));
    for (int rel = 0; rel < a.relation_count(); ++rel)
        for (const auto& t : a.tuples_of(rel))
            out.add_tuple(rel, segre_flatten(t, k, n));
    return out;
}

void Tensor::set(const std::vector<int>& idx, const Rat& v) {
    if (v == 0)
        vals.erase(idx);
    else
        vals[idx] = v;
}

Rat Tensor::at(const std::vector<int>& idx) const {
    auto it = vals.find(idx);
    return it == vals.end() ? Rat(0) : it->second;
}

Tensor to_tensor(const CubicalTensor& t) {
    Tensor out;
    out.dims.assign(t.order(), t.base());
    for (const auto& [c, v] : t.entries())
        out.vals[decode_tuple(c, t.base(), t.order())] = v;
    return out;
}

Tensor all_one_tensor(const std::vector<int>& dims) {
    Tensor out;
    out.dims = dims;
    std::int64_t total = 1;
    for (int d : dims) {
        total *= d;
        check_cap(total, caps().enumeration, "all_one_tensor");
    }
    std::vector<int> idx(dims.size(), 1);
    for (;;) {
        out.vals[idx] = 1;
        int pos = static_cast<int>(dims.size()) - 1;
        while (pos >= 0 && idx[pos] == dims[pos]) idx[pos--] = 1;
        if (pos < 0) break;
        ++idx[pos];
    }
    return out;
}

Tensor contract(const Tensor& m, const Tensor& n, int k) {
    const int p = static_cast<int>(m.dims.size()) - k;
    const int s = static_cast<int>(n.dims.size()) - k;
    if (p < 0 || s < 0) throw std::invalid_argument("contract: too few modes");
    for (int j = 0; j < k; ++j)
        if (m.dims[p + j] != n.dims[j])
            throw std::invalid_argument("contract: shared mode sizes differ");
    Tensor out;
    out.dims.assign(m.dims.begin(), m.dims.begin() + p);
    out.dims.insert(out.dims.end(), n.dims.begin() + k, n.dims.end());
    // Group n's entries by their leading k-index for the merge.
    std::map<std::vector<int>, std::vector<std::pair<std::vector<int>, Rat>>> by_lead;
    for (const auto& [idx, v] : n.vals) {
        std::vector<int> lead(idx.begin(), idx.begin() + k);
        std::vector<int> tail(idx.begin() + k, idx.end());
        by_lead[lead].push_back({tail, v});
    }
    for (const auto& [idx, v] : m.vals) {
        std::vector<int> head(idx.begin(), idx.begin() + p);
        std::vector<int> shared(idx.begin() + p, idx.end());
        auto it = by_lead.find(shared);
        if (it == by_lead.end()) continue;
        for (const auto& [tail, w] : it->second) {
            std::vector<int> full = head;
            full.insert(full.end(), tail.begin(), tail.end());
            auto [slot, fresh] = out.vals.try_emplace(full, v * w);
            if (!fresh) slot->second += v * w;
        }
    }
    for (auto it = out.vals.begin(); it != out.vals.end();)
        it = (it->second == 0) ? out.vals.erase(it) : std::next(it);
    return out;
}

CubicalTensor apply_pi(const Tup& i, const CubicalTensor& t) {
    const int k = t.order();
    if (static_cast<int>(i.size()) != k)
        throw std::invalid_argument("apply_pi: index tuple length mismatch");
    CubicalTensor out(t.base(), k);
    for (const auto& [code, v] : t.entries()) {
        Tup b = decode_tuple(code, t.base(), k);
        out.add(encode_tuple(projection(b, i), t.base()), v);
    }
    return out;
}

CubicalTensor apply_p(const Tup& i, const std::vector<Tup>& rel,
                      const std::vector<Rat>& q, int n, int k) {
    if (rel.size() != q.size())
        throw std::invalid_argument("apply_p: q not aligned with relation tuples");
    CubicalTensor out(n, k);
    for (std::size_t idx = 0; idx < rel.size(); ++idx) {
        if (q[idx] == 0) continue;
        const int r = static_cast<int>(rel[idx].size());
        for (int e : i)
            if (e < 1 || e > r) throw std::out_of_range("apply_p: index entry outside [r]");
        out.add(encode_tuple(projection(rel[idx], i), n), q[idx]);
    }
    return out;
}

CubicalTensor sum_out_trailing(const CubicalTensor& t, int m) {
    if (m < 0 || m > t.order()) throw std::invalid_argument("sum_out_trailing");
    if (m == 0) return t;
    const int p = t.order() - m;
    std::int64_t block = checked_pow(t.base(), m, std::numeric_limits<std::int64_t>::max() / 2);
    CubicalTensor out(t.base(), p);
    for (const auto& [code, v] : t.entries()) out.add((code - 1) / block + 1, v);
    return out;
}

std::vector<Rat> marginal_onto_mode(const CubicalTensor& t, int mode) {
    std::vector<Rat> out(t.base(), Rat(0));
    for (const auto& [code, v] : t.entries()) {
        Tup idx = decode_tuple(code, t.base(), t.order());
        out[idx[mode - 1] - 1] += v;
    }
    return out;
}

}  // namespace salp
