#pragma once

#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "salp/exactlp.hpp"
#include "salp/structures.hpp"
#include "salp/tensors.hpp"

namespace salp {

/// Solution of the level-k system: distributions over partial assignments
/// (lambda_v) and over constraint-scope assignments (lambda_c).
struct SASolution {
    /// (sorted vertex set V, images aligned with V) -> value
    std::map<std::pair<std::vector<int>, std::vector<int>>, Rat> lambda_v;
    /// (relation index, tuple index in declaration order,
    ///  images aligned with the sorted distinct scope) -> value
    std::map<std::tuple<int, int, std::vector<int>>, Rat> lambda_c;
};

/// Candidate homomorphism from the k-th tensor power of x into the free
/// structure over the k-th tensor power of a: one stochastic tensor per
/// tuple in x^k.
struct XiMap {
    Structure x, a;
    int level = 0;
    std::map<std::int64_t, CubicalTensor> tensors;  // key: encoded x-tuple

    const CubicalTensor& at_code(std::int64_t code) const;
    const CubicalTensor& at_tuple(const Tup& t) const;
    std::int64_t tuple_count() const;
};

struct BLPSolution {
    /// vertex[x-1][a-1]: stochastic vector over the target domain
    std::vector<std::vector<Rat>> vertex;
    /// (relation index, tuple index) -> stochastic vector over the target
    /// relation in declaration order
    std::map<std::pair<int, int>, std::vector<Rat>> constraint;
};

/// Basic LP relaxation: normalization plus per-position marginal rows.
LinearSystem build_blp(const Structure& x, const Structure& a);

/// Level-k system SA1-SA4. Relations interpreted as a full power of arity
/// <= k contribute no constraint block: their blocks are canonically
/// determined by the V-block through SA2 and are reconstructed on demand.
LinearSystem build_sa(const Structure& x, const Structure& a, int k);

struct SAAcceptance {
    bool accepted = false;
    std::optional<SASolution> solution;  // re-validated before return
};

SAAcceptance sa_accepts(const Structure& x, const Structure& a, int k);

/// Exact check of SA1-SA4 for a complete solution.
bool validate_sa_solution(const SASolution& sol, const Structure& x, const Structure& a,
                          int k, std::string* why = nullptr);
bool validate_blp_solution(const BLPSolution& sol, const Structure& x, const Structure& a,
                           std::string* why = nullptr);

/// lambda_{{x}}(f_{x,a}) read off as tensor entries; enhances the
/// structures at level k when needed.
XiMap solution_to_ximap(const SASolution& sol, Structure x, Structure a, int k);

/// The reverse translation; requires a verified map over k-enhanced
/// structures and reuses the verifier's certifying q vectors.
SASolution ximap_to_solution(const XiMap& xi);

struct FreeHomCheck {
    bool ok = false;
    /// (relation index, tuple index) -> certifying q over the target
    /// relation tuples (declaration order; materialized order when full).
    std::map<std::pair<int, int>, std::vector<Rat>> q;
    std::string failure;  // first violated constraint when !ok
};

/// Membership of xi in the free-structure homomorphism space: solves the
/// per-constraint marginal systems and checks the consistency equation for
/// the level-k enhancement symbol.
FreeHomCheck verify_free_hom(const XiMap& xi);

enum class ConsistencyMode { Full, Sampled };

/// xi(x_i) == Pi_i * xi(x). Full mode quantifies over all i in [k]^k;
/// sampled mode checks transpositions and single identifications only and
/// is a heuristic pre-check, not an acceptance path.
bool check_consistency_eq(const XiMap& xi, ConsistencyMode mode = ConsistencyMode::Full);

/// Level restriction by padding and summing out trailing modes.
XiMap restrict_level(const XiMap& xi, int p);

/// Per-vertex marginals plus the verifier's q vectors, checked against the
/// basic LP equations of the enhancement-free pair.
BLPSolution project_to_blp(const XiMap& xi);

/// Halves the level while moving to line digraphs: a verified level-2k map
/// for a digraph pair yields a verified level-k map for the arc pair.
XiMap transport_line_digraph(const XiMap& xi2k);

/// Builds the chain-enhanced level-2k map required by the transport from a
/// plain accepted digraph pair.
std::optional<XiMap> chain_ximap_for_transport(const Structure& x, const Structure& a, int k2);

/// Group-average over automorphisms of the target; output entries are
/// constant on orbits and the map still verifies.
XiMap symmetrize(const XiMap& xi, const std::vector<std::vector<int>>& auts);

/// Reads a homomorphism off the support of xi((1,...,k)) when |X| = k.
std::vector<int> extract_assignment(const XiMap& xi, const Tup& a);

/// Homomorphism counting through a maximum-support solution.
std::int64_t sa_count_homs(const Structure& x, const Structure& a);

/// xi built from an ordinary homomorphism: point masses.
XiMap point_mass_ximap(const std::vector<int>& hom, Structure x, Structure a, int k);

/// Entry reindexing along a homomorphism h: a -> b between target domains;
/// carries free-structure membership from a-tensors to b-tensors.
XiMap ximap_pushforward(const XiMap& xi, const std::vector<int>& h, Structure b);

/// True when the relation is interpreted as the whole power [n]^arity.
bool relation_is_full_power(const Structure& s, int rel);

/// Canonical representative of a vertex set as a k-tuple (sorted, padded
/// with its last element).
Tup canonical_tuple(const std::vector<int>& sorted_set, int k);

}  // namespace salp
