#include <random>

#include "doctest.h"
#include "salp/relaxations.hpp"
#include "support.hpp"

using namespace salp;

namespace {

Tup identity_tuple(int k) {
    Tup t(k);
    for (int i = 0; i < k; ++i) t[i] = i + 1;
    return t;
}

/// SA solution induced by a uniform mixture over a set of homomorphisms.
SASolution mixture_solution(const std::vector<std::vector<int>>& homs, const Structure& x,
                            const Structure& a, int k) {
    SASolution sol;
    const Rat w = rat(1, static_cast<long>(homs.size()));
    auto bump = [&](auto& map, const auto& key) {
        auto [it, fresh] = map.try_emplace(key, w);
        if (!fresh) it->second += w;
    };
    // lambda_v over every subset and the induced image vectors.
    std::vector<std::vector<int>> subsets;
    for (unsigned mask = 1; mask < (1u << x.domain_size()); ++mask) {
        std::vector<int> v;
        for (int i = 0; i < x.domain_size(); ++i)
            if (mask & (1u << i)) v.push_back(i + 1);
        if (static_cast<int>(v.size()) <= k) subsets.push_back(v);
    }
    for (const auto& v : subsets)
        for (const auto& h : homs) {
            std::vector<int> images;
            for (int vert : v) images.push_back(h[vert - 1]);
            bump(sol.lambda_v, std::make_pair(v, images));
        }
    for (int rel = 0; rel < x.relation_count(); ++rel) {
        auto xtuples = x.tuples_of(rel);
        for (std::size_t ti = 0; ti < xtuples.size(); ++ti) {
            std::vector<int> set;
            for (int e : xtuples[ti])
                if (std::find(set.begin(), set.end(), e) == set.end()) set.push_back(e);
            std::sort(set.begin(), set.end());
            for (const auto& h : homs) {
                std::vector<int> images;
                for (int vert : set) images.push_back(h[vert - 1]);
                bump(sol.lambda_c, std::make_tuple(rel, static_cast<int>(ti), images));
            }
        }
    }
    // Fill missing keys with zeros so every (V, f) pair is present.
    for (const auto& v : subsets) {
        std::vector<int> f(v.size(), 1);
        while (true) {
            sol.lambda_v.try_emplace({v, f}, Rat(0));
            int pos = static_cast<int>(v.size()) - 1;
            while (pos >= 0 && f[pos] == a.domain_size()) f[pos--] = 1;
            if (pos < 0) break;
            ++f[pos];
        }
    }
    return sol;
}

}  // namespace

TEST_CASE("BLP of K4 into K3 is feasible") {
    auto sys = build_blp(clique(4), clique(3));
    auto res = feasible(sys);
    CHECK(res.status == LPStatus::Feasible);
}

TEST_CASE("BLP is feasible whenever a homomorphism exists") {
    std::mt19937_64 rng(42);
    int done = 0;
    while (done < 8) {
        auto x = test::random_digraph(rng, 3, 0.4);
        auto a = test::random_digraph(rng, 3, 0.6);
        if (find_homomorphism(x, a).status != SearchStatus::Found) continue;
        CHECK(feasible(build_blp(x, a)).status == LPStatus::Feasible);
        ++done;
    }
}

TEST_CASE("loop versus K2 separates level-1 SA from BLP") {
    // The basic LP admits the half-half solution on a loop; the level-1
    // system does not, because its constraint block ranges over functions
    // of the scope rather than over relation tuples.
    Structure loop("L", Signature{{{"E", 2}}}, 1);
    loop.add_tuple(0, {1, 1});
    auto k2 = clique(2);
    CHECK(feasible(build_blp(loop, k2)).status == LPStatus::Feasible);
    CHECK(!sa_accepts(loop, k2, 1).accepted);
}

TEST_CASE("SA acceptance on cliques follows min(k,c) <= d") {
    CHECK(sa_accepts(clique(3), clique(2), 2).accepted);        // min(2,3) <= 2
    CHECK(!sa_accepts(clique(4), clique(3), 4).accepted);       // min(4,4) > 3
    CHECK(sa_accepts(clique(5), clique(3), 3).accepted);        // min(3,5) <= 3
    CHECK(sa_accepts(clique(4), clique(4), 3).accepted);        // homomorphic
    CHECK(sa_accepts(clique(4), clique(3), 3).accepted);        // accepts, yet K4 -/-> K3
    CHECK(find_homomorphism(clique(4), clique(3)).status == SearchStatus::None);
}

TEST_CASE("SA accepts homomorphic instances at any level") {
    std::mt19937_64 rng(1234);
    int done = 0;
    while (done < 6) {
        auto x = test::random_digraph(rng, 3, 0.4);
        auto a = test::random_digraph(rng, 4, 0.5);
        if (find_homomorphism(x, a).status != SearchStatus::Found) continue;
        for (int k : {1, 2, 3}) CHECK(sa_accepts(x, a, k).accepted);
        ++done;
    }
}

TEST_CASE("solution_to_ximap on a point-mass solution") {
    auto x = enhance(clique(3), 2);
    auto a = enhance(clique(3), 2);
    std::vector<int> h{2, 3, 1};
    auto xi = point_mass_ximap(h, x, a, 2);
    auto chk = verify_free_hom(xi);
    CHECK(chk.ok);
    auto sol = ximap_to_solution(xi);
    // 0/1 solution recovering h.
    for (const auto& [key, val] : sol.lambda_v) CHECK((val == 0 || val == 1));
    CHECK(sol.lambda_v.at({{1, 2}, {2, 3}}) == 1);
    auto xi2 = solution_to_ximap(sol, x, a, 2);
    CHECK(xi2.tensors == xi.tensors);
}

TEST_CASE("uniform mixture over Hom(K3,K3) translates to the symmetric map") {
    auto x = clique(3);
    std::vector<std::vector<int>> homs;
    std::vector<int> perm{1, 2, 3};
    do {
        homs.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    auto sol = mixture_solution(homs, x, x, 3);
    auto xi = solution_to_ximap(sol, x, x, 3);  // enhances internally
    const auto& t = xi.at_tuple({1, 2, 3});
    CHECK(t.nnz() == 6);
    for (const auto& [code, v] : t.entries()) {
        CHECK(v == rat(1, 6));
        CHECK(pattern_equiv(decode_tuple(code, 3, 3), {1, 2, 3}));
    }
    for (const auto& [code, t2] : xi.tensors) CHECK(t2.is_stochastic());
    CHECK(verify_free_hom(xi).ok);
}

TEST_CASE("accepted instance: translate, verify, translate back") {
    auto x = enhance(clique(4), 3);
    auto a = enhance(clique(3), 3);
    auto acc = sa_accepts(x, a, 3);
    REQUIRE(acc.accepted);
    auto xi = solution_to_ximap(*acc.solution, x, a, 3);
    auto chk = verify_free_hom(xi);
    REQUIRE(chk.ok);
    auto back = ximap_to_solution(xi);  // validates SA1-SA4 internally
    // Round trip reproduces lambda_v.
    for (const auto& [key, val] : back.lambda_v) CHECK(val == acc.solution->lambda_v.at(key));
}

TEST_CASE("verified maps vanish off the pattern cone") {
    auto x = enhance(clique(4), 2);
    auto a = enhance(clique(3), 2);
    auto acc = sa_accepts(x, a, 2);
    REQUIRE(acc.accepted);
    auto xi = solution_to_ximap(*acc.solution, x, a, 2);
    REQUIRE(verify_free_hom(xi).ok);
    for (const auto& [code, t] : xi.tensors) {
        Tup xt = decode_tuple(code, 4, 2);
        for (const auto& [acode, v] : t.entries())
            CHECK(refines(xt, decode_tuple(acode, 3, 2)));
    }
}

TEST_CASE("consistency equation: identity index always holds") {
    auto x = enhance(clique(3), 2);
    auto acc = sa_accepts(x, x, 2);
    REQUIRE(acc.accepted);
    auto xi = solution_to_ximap(*acc.solution, x, x, 2);
    CHECK(check_consistency_eq(xi, ConsistencyMode::Full));
    CHECK(check_consistency_eq(xi, ConsistencyMode::Sampled));
}

TEST_CASE("consistency equation rejects mismatched marginals") {
    auto x = enhance(clique(2), 2);
    auto a = enhance(clique(2), 2);
    XiMap xi;
    xi.x = x;
    xi.a = a;
    xi.level = 2;
    for (std::int64_t code = 1; code <= 4; ++code) {
        CubicalTensor t(2, 2);
        Tup xt = decode_tuple(code, 2, 2);
        if (xt[0] == xt[1]) {
            t.set(Tup{1, 1}, rat(1, 2));
            t.set(Tup{2, 2}, rat(1, 2));
        } else {
            t.set(Tup{1, 1}, rat(1, 2));  // violates the diagonal marginal
            t.set(Tup{2, 1}, rat(1, 2));
        }
        xi.tensors.emplace(code, std::move(t));
    }
    CHECK(!check_consistency_eq(xi, ConsistencyMode::Full));
    CHECK(!verify_free_hom(xi).ok);
}

TEST_CASE("the non-enhanced table verifies although no homomorphism exists") {
    // Directed 3-cycle against K2 at level 3, no enhancement: the map with
    // values 1/2 on pattern-matching tuples and uniform 1/8 on injective
    // triples is a homomorphism into the free structure.
    auto c3 = directed_cycle(3);
    auto k2 = clique(2);
    XiMap xi;
    xi.x = c3;
    xi.a = k2;
    xi.level = 3;
    for (std::int64_t code = 1; code <= 27; ++code) {
        Tup xt = decode_tuple(code, 3, 3);
        CubicalTensor t(2, 3);
        if (distinct_count(xt) == 3) {
            for (std::int64_t ac = 1; ac <= 8; ++ac) t.set(ac, rat(1, 8));
        } else {
            for (std::int64_t ac = 1; ac <= 8; ++ac)
                if (pattern_equiv(decode_tuple(ac, 2, 3), xt)) t.set(ac, rat(1, 2));
        }
        xi.tensors.emplace(code, std::move(t));
    }
    CHECK(xi.at_tuple({1, 1, 1}).at(Tup{2, 2, 2}) == rat(1, 2));
    CHECK(xi.at_tuple({1, 2, 3}).at(Tup{1, 2, 1}) == rat(1, 8));
    CHECK(verify_free_hom(xi).ok);
    CHECK(find_homomorphism(c3, k2).status == SearchStatus::None);
    // Assignment extraction refuses the non-enhanced input.
    CHECK_THROWS(extract_assignment(xi, {1, 2, 1}));
}

TEST_CASE("restrict_level: top level is the identity") {
    auto x = enhance(clique(3), 2);
    auto acc = sa_accepts(x, x, 2);
    REQUIRE(acc.accepted);
    auto xi = solution_to_ximap(*acc.solution, x, x, 2);
    auto same = restrict_level(xi, 2);
    CHECK(same.tensors == xi.tensors);
}

TEST_CASE("restrict_level produces verified lower-level maps") {
    auto x = enhance(clique(4), 3);
    auto a = enhance(clique(3), 3);
    auto acc = sa_accepts(x, a, 3);
    REQUIRE(acc.accepted);
    auto xi = solution_to_ximap(*acc.solution, x, a, 3);
    auto low = restrict_level(xi, 2);  // verifies internally
    CHECK(low.level == 2);
    CHECK(low.tuple_count() == 16);

    // Restriction of a point mass truncates the tuple.
    auto xe = enhance(clique(3), 3);
    auto pm = point_mass_ximap({1, 2, 3}, xe, xe, 3);
    auto pml = restrict_level(pm, 2);
    CHECK(pml.at_tuple({1, 2}).at(Tup{1, 2}) == 1);
    CHECK(pml.at_tuple({1, 2}).nnz() == 1);
}

TEST_CASE("project_to_blp on the uniform clique map") {
    auto x = enhance(clique(4), 3);
    auto a = enhance(clique(3), 3);
    auto acc = sa_accepts(x, a, 3);
    REQUIRE(acc.accepted);
    auto xi = solution_to_ximap(*acc.solution, x, a, 3);
    auto sym = symmetrize(xi, automorphisms(clique(3)));
    auto blp = project_to_blp(sym);  // validated internally
    for (const auto& vec : blp.vertex)
        for (const auto& v : vec) CHECK(v == rat(1, 3));

    auto pm = point_mass_ximap({2, 1}, enhance(clique(2), 2), enhance(clique(2), 2), 2);
    auto pb = project_to_blp(pm);
    CHECK(pb.vertex[0][1] == 1);
    CHECK(pb.vertex[1][0] == 1);

    // Any verified map means the plain BLP accepts.
    CHECK(feasible(build_blp(clique(4), clique(3))).status == LPStatus::Feasible);
}

TEST_CASE("transport: point mass moves to the induced arc map") {
    auto chain = chain_ximap_for_transport(clique(3), clique(3), 4);
    REQUIRE(chain.has_value());
    auto moved = transport_line_digraph(*chain);  // verifies both ends
    CHECK(moved.level == 2);
    CHECK(moved.x.domain_size() == 6);
    CHECK(moved.a.domain_size() == 6);
}

TEST_CASE("transport rejects bad inputs") {
    auto x = enhance(clique(3), 2);
    auto acc = sa_accepts(x, x, 2);
    REQUIRE(acc.accepted);
    auto xi = solution_to_ximap(*acc.solution, x, x, 2);
    CHECK_THROWS(transport_line_digraph(xi));  // level 2, no chain
}

TEST_CASE("symmetrize: point mass becomes its orbit average") {
    auto xe = enhance(clique(3), 2);
    auto pm = point_mass_ximap({1, 2, 3}, xe, xe, 2);
    auto auts = automorphisms(clique(3));
    REQUIRE(auts.size() == 6);
    auto sym = symmetrize(pm, auts);
    // Weight of each distinct-pair cell: 6 permutations spread over the 6
    // off-diagonal cells.
    CHECK(sym.at_tuple({1, 2}).at(Tup{1, 2}) == rat(1, 6));
    CHECK(sym.at_tuple({1, 2}).at(Tup{3, 2}) == rat(1, 6));
    CHECK(sym.at_tuple({1, 2}).at(Tup{1, 1}) == 0);

    // Trivial group: fixed point.
    auto id_only = std::vector<std::vector<int>>{{1, 2, 3}};
    auto fixed = symmetrize(pm, id_only);
    CHECK(fixed.tensors == pm.tensors);

    // Symmetrizing twice changes nothing.
    auto twice = symmetrize(sym, auts);
    CHECK(twice.tensors == sym.tensors);
}

TEST_CASE("extract_assignment recovers homomorphisms") {
    auto xe = enhance(clique(3), 3);
    auto pm = point_mass_ximap({2, 3, 1}, xe, xe, 3);
    auto f = extract_assignment(pm, {2, 3, 1});
    CHECK(f == std::vector<int>{2, 3, 1});
    CHECK_THROWS(extract_assignment(pm, {1, 2, 3}));  // outside the support

    // Identity from a maximum-support solution.
    auto sys = build_sa(xe, xe, 3);
    auto ms = max_support_solution(sys);
    REQUIRE(!ms.support.empty());
}

TEST_CASE("sa_count_homs matches brute force") {
    CHECK(sa_count_homs(clique(3), clique(3)) == 6);
    CHECK(sa_count_homs(clique(3), clique(2)) == 0);
    Structure pair2("I2", Signature{{{"E", 2}}}, 2);
    CHECK(sa_count_homs(pair2, clique(2)) == 4);
    CHECK(sa_count_homs(clique(2), clique(3)) == 6);

    std::mt19937_64 rng(55);
    for (int trial = 0; trial < 6; ++trial) {
        auto x = test::random_digraph(rng, 3, 0.4);
        auto a = test::random_digraph(rng, 3, 0.5);
        CHECK(sa_count_homs(x, a) == count_homomorphisms_bruteforce(x, a));
    }
}

TEST_CASE("theorem round trip with the tensor-power BLP") {
    std::mt19937_64 rng(99);
    int done = 0;
    while (done < 5) {
        auto x0 = test::random_digraph(rng, 3, 0.4);
        auto a0 = test::random_digraph(rng, 3, 0.5);
        const int k = 2;
        auto xe = enhance(x0, k);
        auto ae = enhance(a0, k);
        auto acc = sa_accepts(xe, ae, k);
        auto blp = feasible(build_blp(tensor_power(xe, k), tensor_power(ae, k)));
        CHECK(acc.accepted == (blp.status == LPStatus::Feasible));
        if (acc.accepted) {
            auto xi = solution_to_ximap(*acc.solution, xe, ae, k);
            CHECK(verify_free_hom(xi).ok);
            ximap_to_solution(xi);  // throws if SA1-SA4 break
        }
        ++done;
    }
}

TEST_CASE("pushforward along a homomorphism keeps verification") {
    auto x = enhance(clique(4), 2);
    auto a = enhance(clique(2), 2);
    auto acc = sa_accepts(x, a, 2);
    REQUIRE(acc.accepted);
    auto xi = solution_to_ximap(*acc.solution, x, a, 2);
    // Push K2 into K3 by inclusion.
    auto b = enhance(clique(3), 2);
    auto pushed = ximap_pushforward(xi, {1, 2}, b);
    CHECK(verify_free_hom(pushed).ok);
}
