#include <doctest.h>

#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "signet/graph.hpp"

using namespace signet;

namespace {

SignedGraph parse(const std::string& text, bool directed = false) {
  std::istringstream in(text);
  return parse_edgelist(in, directed);
}

std::string parse_error(const std::string& text, bool directed = false) {
  try {
    parse(text, directed);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("edge list parsing") {
  const auto g = parse("# header\na b 1\nb c -1  # trailing\n\nc a +1\n");
  CHECK(g.num_nodes() == 3);
  CHECK(g.num_edges() == 3);
  CHECK(g.num_arcs() == 6);
  CHECK(g.label(0) == "a");
  CHECK(g.sign(*g.find_label("b"), *g.find_label("c")) == -1);
  CHECK(g.sign(*g.find_label("c"), *g.find_label("b")) == -1);

  CHECK(parse_error("a b\n").find("malformed line 1") != std::string::npos);
  CHECK(parse_error("a b 1\na b 2\n").find("malformed line 2") != std::string::npos);
  CHECK(parse_error("a b 1 x\n").find("malformed line 1") != std::string::npos);
  CHECK(parse_error("a a 1\n").find("self-loop at line 1") != std::string::npos);
  CHECK(parse_error("a b 1\nb a -1\n").find("conflicting duplicate sign") != std::string::npos);
  CHECK(parse_error("a b 1\nb a -1\n").find("first seen at line 1") != std::string::npos);
  CHECK(parse_error("# nothing\n").find("no edges") != std::string::npos);

  SUBCASE("equal duplicates collapse") {
    const auto d = parse("a b 1\nb a 1\na b 1\n");
    CHECK(d.num_edges() == 1);
  }
  SUBCASE("directed reciprocal arcs are distinct") {
    const auto d = parse("a b 1\nb a -1\n", true);
    CHECK(d.num_edges() == 2);
    CHECK(d.sign(0, 1) == 1);
    CHECK(d.sign(1, 0) == -1);
    CHECK(d.in_neighbors(0).size() == 1);
  }
}

TEST_CASE("graph construction errors") {
  CHECK_THROWS_AS(SignedGraph(0, {}, false), Error);
  CHECK_THROWS_AS(SignedGraph(2, {{0, 2, 1}}, false), Error);
  CHECK_THROWS_AS(SignedGraph(2, {{1, 1, 1}}, false), Error);
  CHECK_THROWS_AS(SignedGraph(2, {{0, 1, 0}}, false), Error);
  CHECK_THROWS_AS(SignedGraph(2, {{0, 1, 1}, {1, 0, -1}}, false), Error);
  CHECK_THROWS_AS(SignedGraph(2, {{0, 1, 1}}, false, {"x", "x"}), Error);
}

TEST_CASE("write then parse round-trips") {
  std::mt19937_64 rng(3);
  for (bool directed : {false, true}) {
    const auto g = oracle::random_graph(rng, 12, 0.4, directed);
    std::stringstream ss;
    write_edgelist(g, ss);
    const auto h = parse_edgelist(ss, directed, g.labels());
    REQUIRE(h.num_edges() == g.num_edges());
    for (std::size_t e = 0; e < g.num_edges(); ++e) CHECK(h.edges()[e] == g.edges()[e]);
  }
}

TEST_CASE("symmetrize sums reciprocal signs") {
  const SignedGraph d(4, {{0, 1, 1}, {1, 0, 1}, {1, 2, 1}, {2, 1, -1}, {2, 3, -1}}, true);
  const auto s = symmetrize(d);
  CHECK_FALSE(s.directed());
  CHECK(s.num_edges() == 2);
  CHECK(s.sign(0, 1) == 1);
  CHECK(s.sign(1, 2) == 0);
  CHECK(s.sign(3, 2) == -1);
}

TEST_CASE("embeddedness matches a set intersection") {
  std::mt19937_64 rng(11);
  for (bool directed : {false, true}) {
    const auto g = oracle::random_graph(rng, 20, 0.3, directed);
    for (NodeId i = 0; i < 20; ++i)
      for (NodeId j = 0; j < 20; ++j) {
        if (i == j) continue;
        std::size_t brute = 0;
        for (NodeId k = 0; k < 20; ++k) {
          const bool ik = g.sign(i, k) != 0 || g.sign(k, i) != 0;
          const bool jk = g.sign(j, k) != 0 || g.sign(k, j) != 0;
          brute += ik && jk;
        }
        CHECK(embeddedness(g, {i, j}) == brute);
      }
  }
  CHECK_THROWS(embeddedness(SignedGraph(2, {{0, 1, 1}}, false), {0, 5}));
}

TEST_CASE("edge removal and sign replacement") {
  const SignedGraph g(4, {{0, 1, 1}, {1, 2, -1}, {2, 3, 1}}, false);
  const std::vector<std::size_t> drop{1};
  const auto h = remove_edges(g, drop);
  CHECK(h.num_edges() == 2);
  CHECK(h.sign(1, 2) == 0);
  CHECK(h.sign(2, 1) == 0);
  const std::vector<Sign> signs{-1, -1, -1};
  const auto f = with_signs(g, signs);
  CHECK(f.sign(0, 1) == -1);
  CHECK(f.sign(3, 2) == -1);
  const auto split = split_pos_neg(g);
  CHECK(split.pos.nnz() == 4);
  CHECK(split.neg.nnz() == 2);
}
