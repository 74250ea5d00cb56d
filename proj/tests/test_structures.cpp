#include <algorithm>
#include <random>

#include "doctest.h"
#include "salp/io.hpp"
#include "salp/structures.hpp"
#include "support.hpp"

using namespace salp;

TEST_CASE("clique construction") {
    auto k3 = clique(3);
    CHECK(k3.domain_size() == 3);
    CHECK(k3.relation(0).tuples.size() == 6);
    CHECK(k3.contains(0, {1, 2}));
    CHECK(k3.contains(0, {3, 1}));
    CHECK(!k3.contains(0, {2, 2}));

    auto k1 = clique(1);
    CHECK(k1.domain_size() == 1);
    CHECK(k1.relation(0).tuples.empty());

    CHECK(clique(4).relation(0).tuples.size() == 12);
    CHECK_THROWS(clique(0));
}

TEST_CASE("parse: K3 from text") {
    auto s = parse_structure(
        "structure K3\n"
        "domain 3\n"
        "relation E 2\n"
        "  t 1 2\n  t 2 1\n  t 2 3\n  t 3 2\n  t 3 1\n  t 1 3\n");
    CHECK(s.domain_size() == 3);
    auto got = s.relation(0).tuples;
    auto want = clique(3).relation(0).tuples;
    std::sort(got.begin(), got.end());
    std::sort(want.begin(), want.end());
    CHECK(got == want);
}

TEST_CASE("parse: entry out of range") {
    CHECK_THROWS_AS(parse_structure("domain 3\nrelation E 2\n t 1 4\n"), ParseError);
}

TEST_CASE("parse: directed 3-cycle") {
    auto s = parse_structure("domain 3\nrelation E 2\n t 1 2\n t 2 3\n t 3 1\n");
    CHECK(s.relation(0).tuples.size() == 3);
    CHECK(s.contains(0, {3, 1}));
}

TEST_CASE("mixed-radix tuple codec") {
    CHECK(encode_tuple({1, 1, 1}, 3) == 1);
    CHECK(encode_tuple({3, 3, 3}, 3) == 27);
    CHECK(encode_tuple({1, 2}, 3) == 2);   // most-significant-first
    CHECK(encode_tuple({2, 1}, 3) == 4);
    for (std::int64_t c = 1; c <= 27; ++c)
        CHECK(encode_tuple(decode_tuple(c, 3, 3), 3) == c);
}

TEST_CASE("enhance adds the full k-ary relation") {
    auto e = enhance(clique(3), 3);
    int idx = e.signature().index_of("__R3");
    REQUIRE(idx >= 0);
    CHECK(e.tuple_count(idx) == 27);
    CHECK(is_enhanced(e, 3));
    CHECK_THROWS(enhance(e, 3));  // reserved name collision

    auto e2 = enhance(clique(2), 2);
    int i2 = e2.signature().index_of("__R2");
    auto tups = e2.tuples_of(i2);
    REQUIRE(tups.size() == 4);
    CHECK(tups[0] == Tup{1, 1});
    CHECK(tups[3] == Tup{2, 2});
}

TEST_CASE("enhancement is invisible to homomorphism existence") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        auto x = test::random_digraph(rng, 3, 0.4);
        auto a = test::random_digraph(rng, 3, 0.6);
        bool plain = find_homomorphism(x, a).status == SearchStatus::Found;
        bool enhanced =
            find_homomorphism(enhance(x, 2), enhance(a, 2)).status == SearchStatus::Found;
        CHECK(plain == enhanced);
    }
}

TEST_CASE("power: exponent one is the identity") {
    auto k3 = clique(3);
    auto p = power(k3, 1);
    CHECK(p.domain_size() == 3);
    CHECK(p.relation(0).tuples.size() == 6);
    for (const auto& t : p.relation(0).tuples) CHECK(k3.contains(0, t));
}

TEST_CASE("power: K2 squared edge relation") {
    auto k2 = clique(2);
    auto p = power(k2, 2);
    CHECK(p.domain_size() == 4);
    // Oracle: enumerate all 2x2 row matrices over the edge set directly.
    std::vector<Tup> expected;
    for (const auto& r1 : k2.relation(0).tuples)
        for (const auto& r2 : k2.relation(0).tuples)
            expected.push_back({static_cast<int>(encode_tuple({r1[0], r2[0]}, 2)),
                                static_cast<int>(encode_tuple({r1[1], r2[1]}, 2))});
    std::sort(expected.begin(), expected.end());
    auto got = p.relation(0).tuples;
    std::sort(got.begin(), got.end());
    CHECK(got == expected);
    CHECK(got.size() == 4);
}

TEST_CASE("power of a k-enhanced structure is k-enhanced") {
    auto e = enhance(clique(2), 2);
    CHECK(is_enhanced(power(e, 2), 2));
    CHECK(is_enhanced(power(e, 3), 2));
}

TEST_CASE("line digraph of K3") {
    auto d = line_digraph(clique(3));
    CHECK(d.domain_size() == 6);
    // Oracle: count consecutive arc pairs directly.
    auto arcs = clique(3).relation(0).tuples;
    int consecutive = 0;
    for (const auto& a : arcs)
        for (const auto& b : arcs)
            if (a[1] == b[0]) ++consecutive;
    CHECK(static_cast<int>(d.relation(0).tuples.size()) == consecutive);
    CHECK(consecutive == 12);
}

TEST_CASE("line digraph determinism and edge cases") {
    auto d1 = line_digraph(clique(4));
    auto d2 = line_digraph(clique(4));
    CHECK(d1 == d2);

    auto one_arc = parse_structure("domain 2\nrelation E 2\n t 1 2\n");
    auto d = line_digraph(one_arc);
    CHECK(d.domain_size() == 1);
    CHECK(d.relation(0).tuples.empty());

    auto no_binary = parse_structure("domain 2\nrelation R 3\n t 1 1 2\n");
    CHECK_THROWS(line_digraph(no_binary));
}

TEST_CASE("find_homomorphism basics") {
    auto r33 = find_homomorphism(clique(3), clique(3));
    REQUIRE(r33.status == SearchStatus::Found);
    CHECK(r33.map == std::vector<int>{1, 2, 3});  // lexicographic-first witness

    CHECK(find_homomorphism(clique(4), clique(3)).status == SearchStatus::None);

    auto starved = find_homomorphism(clique(5), clique(4), 3);
    CHECK(starved.status == SearchStatus::BudgetExhausted);
}

TEST_CASE("count_homomorphisms oracle values") {
    CHECK(count_homomorphisms_bruteforce(clique(3), clique(3)) == 6);
    CHECK(count_homomorphisms_bruteforce(clique(4), clique(3)) == 0);
    Structure free1("P", Signature{{{"E", 2}}}, 1);
    CHECK(count_homomorphisms_bruteforce(free1, clique(3)) == 3);
}

TEST_CASE("search agrees with brute-force count") {
    std::mt19937_64 rng(test::kDefaultSeed);
    for (int trial = 0; trial < 40; ++trial) {
        auto x = test::random_digraph(rng, 3, 0.5);
        auto a = test::random_digraph(rng, 3, 0.5);
        bool found = find_homomorphism(x, a).status == SearchStatus::Found;
        CHECK(found == (count_homomorphisms_bruteforce(x, a) > 0));
    }
}

TEST_CASE("is_homomorphism") {
    CHECK(is_homomorphism({1, 2, 3}, clique(3), clique(3)));
    CHECK(!is_homomorphism({1, 1, 1}, clique(3), clique(3)));
    Structure free2("F", Signature{{{"E", 2}}}, 2);
    CHECK(is_homomorphism({2, 2}, free2, clique(2)));
}

TEST_CASE("automorphisms") {
    CHECK(automorphisms(clique(3)).size() == 6);
    CHECK(automorphisms(directed_cycle(3)).size() == 3);
    auto auts = automorphisms(clique(4));
    CHECK(std::find(auts.begin(), auts.end(), std::vector<int>{1, 2, 3, 4}) != auts.end());
}

TEST_CASE("automorphism group closure") {
    auto auts = automorphisms(directed_cycle(5));
    for (const auto& g : auts)
        for (const auto& h : auts) {
            auto gh = compose(g, h);
            CHECK(std::find(auts.begin(), auts.end(), gh) != auts.end());
        }
    for (const auto& g : auts) {
        auto inv = inverse_permutation(g);
        REQUIRE(inv.has_value());
        CHECK(std::find(auts.begin(), auts.end(), *inv) != auts.end());
    }
}

TEST_CASE("composition of homomorphisms is a homomorphism") {
    std::mt19937_64 rng(13);
    int checked = 0;
    while (checked < 10) {
        auto x = test::random_digraph(rng, 3, 0.3);
        auto f = find_homomorphism(x, clique(3));
        if (f.status != SearchStatus::Found) continue;
        auto g = find_homomorphism(clique(3), clique(4));
        REQUIRE(g.status == SearchStatus::Found);
        CHECK(is_homomorphism(compose(g.map, f.map), x, clique(4)));
        ++checked;
    }
}

TEST_CASE("signature mismatch is an error") {
    Structure other("O", Signature{{{"R", 2}}}, 2);
    CHECK_THROWS(find_homomorphism(other, clique(2)));
}
