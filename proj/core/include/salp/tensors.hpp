#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "salp/rational.hpp"
#include "salp/structures.hpp"

namespace salp {

/// True iff the equality pattern of s refines that of t:
/// s_i = s_j implies t_i = t_j.
bool refines(const Tup& s, const Tup& t);
bool pattern_equiv(const Tup& s, const Tup& t);

/// Number of distinct entries |{x}|.
int distinct_count(const Tup& x);

/// x_i = (x_{i_1}, ..., x_{i_l}); entries of i are 1-based positions in x.
Tup projection(const Tup& x, const Tup& i);

/// Sparse cubical tensor over [base]^order with exact rational entries.
/// Entries are keyed by the mixed-radix encoding; no zeros are stored and
/// iteration is always encoded-index ascending.
class CubicalTensor {
  public:
    CubicalTensor() = default;
    CubicalTensor(int base, int order) : base_(base), order_(order) {}

    int base() const { return base_; }
    int order() const { return order_; }
    std::int64_t cell_count() const;

    Rat at(std::int64_t code) const;  // 1-based encoded index
    Rat at(const Tup& idx) const;
    void set(std::int64_t code, const Rat& v);
    void set(const Tup& idx, const Rat& v);
    void add(std::int64_t code, const Rat& v);

    const std::map<std::int64_t, Rat>& entries() const { return m_; }
    std::size_t nnz() const { return m_.size(); }
    Rat sum() const;
    bool nonnegative() const;
    /// Exact check: nonnegative and sums to 1.
    bool is_stochastic() const;
    std::vector<std::int64_t> support() const;

    bool operator==(const CubicalTensor&) const = default;

  private:
    int base_ = 0;
    int order_ = 0;
    std::map<std::int64_t, Rat> m_;
};

/// Segre power a^(x)k of an r-tuple: position i in [r]^k holds a_i.
/// Returned in encoded-index order over [r]^k.
std::vector<Tup> segre_power(const Tup& a, int k);

/// Flattened Segre power: entry at encoded i is encode(a_i) in [n^k].
Tup segre_flatten(const Tup& a, int k, int n);

/// k-th tensor power: domain [n^k], each arity-r symbol becomes arity r^k,
/// relation elements are flattened Segre powers of the original tuples.
Structure tensor_power(const Structure& a, int k);

/// General sparse tensor for contraction identities; dims are arbitrary.
struct Tensor {
    std::vector<int> dims;
    std::map<std::vector<int>, Rat> vals;  // 1-based indices, no zeros

    void set(const std::vector<int>& idx, const Rat& v);
    Rat at(const std::vector<int>& idx) const;
};

Tensor to_tensor(const CubicalTensor& t);
Tensor all_one_tensor(const std::vector<int>& dims);

/// Contraction over the trailing k modes of m and the leading k modes of n.
Tensor contract(const Tensor& m, const Tensor& n, int k);

/// (Pi_i * T) at a = sum over b with b_i = a of T(b); i in [k]^k. The
/// operator form of the 0/1 tensor Pi_i; the order-2k tensor itself is
/// never materialized.
CubicalTensor apply_pi(const Tup& i, const CubicalTensor& t);

/// (P_i * q) at a in [n]^k = sum over b in rel with b_i = a of q(b), where
/// q is indexed by the listed relation tuples in declaration order.
CubicalTensor apply_p(const Tup& i, const std::vector<Tup>& rel,
                      const std::vector<Rat>& q, int n, int k);

/// Sums out the trailing m modes (contraction with the all-one tensor).
CubicalTensor sum_out_trailing(const CubicalTensor& t, int m);

/// Marginal of t onto a single mode (1-based), as a vector over [base].
std::vector<Rat> marginal_onto_mode(const CubicalTensor& t, int mode);

}  // namespace salp
