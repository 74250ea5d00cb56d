#include "doctest.h"
#include "salp/io.hpp"

using namespace salp;

TEST_CASE("structure round trip") {
    auto k4 = clique(4);
    CHECK(parse_structure(serialize_structure(k4)) == k4);

    auto e = enhance(directed_cycle(3), 2);
    CHECK(parse_structure(serialize_structure(e)) == e);
}

TEST_CASE("full relation serialization") {
    Structure s("big", Signature{{{"E", 2}}}, 50);
    s.add_tuple(0, {1, 2});
    auto e = enhance(s, 3);  // 125000 > the materialization threshold
    int idx = e.signature().index_of("__R3");
    REQUIRE(idx >= 0);
    CHECK(e.relation(idx).full);
    auto text = serialize_structure(e);
    CHECK(text.find("relation __R3 3 full") != std::string::npos);
    auto back = parse_structure(text);
    CHECK(back == e);
}

TEST_CASE("parse errors carry line numbers") {
    try {
        parse_structure("domain 3\nrelation E 2\n t 1\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
    }
    CHECK_THROWS_AS(parse_structure("domain 0\n"), ParseError);
    CHECK_THROWS_AS(parse_structure("relation E 2\n t 1 1\n"), ParseError);
    CHECK_THROWS_AS(parse_structure("domain 2\nbogus\n"), ParseError);
}

TEST_CASE("comments and blank lines are ignored") {
    auto s = parse_structure(
        "# a clique\nstructure K2\n\ndomain 2\nrelation E 2 # both directions\n"
        " t 1 2\n t 2 1\n");
    CHECK(s == clique(2));
}

TEST_CASE("rational parsing") {
    CHECK(parse_rat("3/6") == rat(1, 2));
    CHECK(parse_rat("-2/4") == rat(-1, 2));
    CHECK(parse_rat("7") == 7);
    CHECK_THROWS(parse_rat("1/0"));
    CHECK_THROWS(parse_rat("x"));
    CHECK(rat_str(rat(-1, 2)) == "-1/2");
    CHECK(rat_str(Rat(3)) == "3/1");
}

TEST_CASE("tensor dump format and order") {
    CubicalTensor t(3, 2);
    t.set(Tup{2, 1}, rat(1, 3));
    t.set(Tup{1, 2}, rat(2, 3));
    auto text = dump_tensor(t);
    CHECK(text == "1 2 2/3\n2 1 1/3\n");  // encoded-index ascending
    auto back = parse_tensor_block(text, 3, 2);
    CHECK(back == t);
}

TEST_CASE("content hash is sensitive to relation data") {
    auto h1 = content_hash(clique(3));
    auto h2 = content_hash(clique(4));
    CHECK(h1 != h2);
    CHECK(hash_hex(h1).size() == 16);
    CHECK(content_hash(clique(3)) == h1);
}
