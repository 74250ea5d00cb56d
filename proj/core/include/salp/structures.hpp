#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "salp/caps.hpp"

namespace salp {

/// A tuple over a domain [n]; entries are 1-based.
using Tup = std::vector<int>;

struct RelationSymbol {
    std::string name;
    int arity = 0;

    bool operator==(const RelationSymbol&) const = default;
};

struct Signature {
    std::vector<RelationSymbol> symbols;

    int index_of(const std::string& name) const;  // -1 if absent
    bool operator==(const Signature&) const = default;
};

/// One interpreted relation. `full` marks an enhancement relation stored
/// implicitly as the whole power [n]^arity; its tuples are materialized on
/// demand, never kept.
struct Relation {
    std::vector<Tup> tuples;  // declaration order, duplicate-free
    bool full = false;

    bool operator==(const Relation&) const = default;
};

/// Finite relational structure over domain [n] = {1..n}.
class Structure {
  public:
    Structure() = default;
    Structure(std::string name, Signature sig, int domain_size);

    const std::string& name() const { return name_; }
    void set_name(std::string n) { name_ = std::move(n); }
    int domain_size() const { return n_; }
    const Signature& signature() const { return sig_; }
    int arity(int rel) const { return sig_.symbols[rel].arity; }
    int relation_count() const { return static_cast<int>(sig_.symbols.size()); }
    const Relation& relation(int rel) const { return rels_[rel]; }

    void add_tuple(int rel, Tup t);              // validates range/arity/dup
    void set_full(int rel);                      // flag enhancement relation
    int add_symbol(const std::string& name, int arity);

    /// Tuple list of a relation; materializes flagged-full relations
    /// (mixed-radix ascending order) subject to the enumeration cap.
    std::vector<Tup> tuples_of(int rel) const;
    std::int64_t tuple_count(int rel) const;
    bool contains(int rel, const Tup& t) const;

    bool operator==(const Structure&) const = default;

  private:
    std::string name_;
    Signature sig_;
    int n_ = 0;
    std::vector<Relation> rels_;
};

/// Mixed-radix (most-significant-first) flattening of [n]^k onto [n^k].
/// Both directions; 1-based on both sides.
std::int64_t encode_tuple(const Tup& t, int n);
Tup decode_tuple(std::int64_t code, int n, int k);

/// Name of the k-ary enhancement symbol.
std::string enhancement_name(int k);
bool is_enhancement_symbol(const std::string& name);
bool is_enhanced(const Structure& a, int k);

Structure clique(int p);
Structure directed_cycle(int p);

/// Adds the reserved k-ary symbol interpreted as the full power [n]^k.
Structure enhance(const Structure& a, int k);
/// enhance for every level in [k_max]; used by the line-digraph transport.
Structure enhance_chain(const Structure& a, int k_max);
/// Drops every enhancement symbol.
Structure strip_enhancements(const Structure& a);

/// L-th (cartesian) power: domain [n^L]; relation tuples are columns of
/// L x ar(R) matrices whose rows lie in the relation.
Structure power(const Structure& a, int l);

/// Digraph on the arcs of the unique binary relation of x; arcs are
/// consecutive arc pairs. Vertex numbering by lexicographic arc order.
/// Enhancement symbols on x are ignored and not carried over.
Structure line_digraph(const Structure& x);

enum class SearchStatus { Found, None, BudgetExhausted };

struct HomSearchResult {
    SearchStatus status = SearchStatus::None;
    std::vector<int> map;  // defined iff status == Found; 1-based values
    std::int64_t nodes = 0;
};

/// Backtracking with forward checking; lexicographic smallest-index /
/// smallest-value order, so witnesses are reproducible.
HomSearchResult find_homomorphism(const Structure& x, const Structure& a,
                                  std::int64_t node_budget = caps().node_budget);

std::int64_t count_homomorphisms_bruteforce(const Structure& x, const Structure& a);

bool is_homomorphism(const std::vector<int>& f, const Structure& x, const Structure& a);

/// All bijective homomorphisms with homomorphic inverse, lexicographic order.
std::vector<std::vector<int>> automorphisms(const Structure& a);

std::vector<int> compose(const std::vector<int>& outer, const std::vector<int>& inner);
std::optional<std::vector<int>> inverse_permutation(const std::vector<int>& f);

}  // namespace salp
