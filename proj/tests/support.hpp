#pragma once

#include <random>
#include <vector>

#include "salp/structures.hpp"

namespace salp::test {

inline constexpr unsigned long kDefaultSeed = 987654321UL;

/// Digraph on n vertices with each arc present independently; loops
/// excluded when loopless is set.
inline Structure random_digraph(std::mt19937_64& rng, int n, double density,
                                bool loopless = false) {
    Structure s("G", Signature{{{"E", 2}}}, n);
    std::bernoulli_distribution arc(density);
    for (int a = 1; a <= n; ++a)
        for (int b = 1; b <= n; ++b) {
            if (loopless && a == b) continue;
            if (arc(rng)) s.add_tuple(0, {a, b});
        }
    return s;
}

/// Digraph whose arc set is a subset (by bitmask) of [n]^2, used for
/// exhaustive small-case enumeration.
inline Structure digraph_from_mask(int n, unsigned mask) {
    Structure s("G", Signature{{{"E", 2}}}, n);
    int bit = 0;
    for (int a = 1; a <= n; ++a)
        for (int b = 1; b <= n; ++b, ++bit)
            if (mask & (1u << bit)) s.add_tuple(0, {a, b});
    return s;
}

/// Canonical key of a one-binary-relation structure up to isomorphism:
/// the minimum arc bitmask over all vertex permutations.
inline unsigned long canonical_digraph_key(const Structure& s) {
    const int n = s.domain_size();
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i + 1;
    unsigned long best = ~0UL;
    do {
        unsigned long mask = 0;
        for (const auto& t : s.relation(0).tuples) {
            int a = perm[t[0] - 1], b = perm[t[1] - 1];
            mask |= 1UL << ((a - 1) * n + (b - 1));
        }
        best = std::min(best, mask);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

}  // namespace salp::test
