#include <doctest.h>

#include <cmath>
#include <set>
#include <utility>

#include "helpers.hpp"
#include "wsn/errors.hpp"

using namespace wsn;

TEST_SUITE("topology") {

TEST_CASE("deployment stays inside the region and is reproducible") {
  const auto sq = deploy_nodes(Region::square(100.0), 50, 7);
  CHECK(sq.size() == 50);
  for (std::size_t i = 0; i < sq.size(); ++i) {
    CHECK(sq[i].id == static_cast<NodeId>(i));
    CHECK(sq[i].position[0] >= 0.0);
    CHECK(sq[i].position[0] <= 100.0);
    CHECK(sq[i].position[1] >= 0.0);
    CHECK(sq[i].position[1] <= 100.0);
    CHECK(sq[i].position[2] == 0.0);
  }
  const auto cube = deploy_nodes(Region::cube(10.0), 100, 7);
  CHECK(cube.size() == 100);
  bool any_z = false;
  for (const auto& n : cube) {
    CHECK(Region::cube(10.0).contains(n.position));
    any_z = any_z || n.position[2] > 0.0;
  }
  CHECK(any_z);
  const auto again = deploy_nodes(Region::square(100.0), 50, 7);
  for (std::size_t i = 0; i < sq.size(); ++i) CHECK(sq[i].position == again[i].position);
  const auto other = deploy_nodes(Region::square(100.0), 50, 8);
  CHECK(other[0].position != sq[0].position);
}

TEST_CASE("edge threshold is inclusive") {
  CHECK(testutil::graph_of({{0, 0, 0}, {5, 0, 0}}, 9.0, 20.0).edges().size() == 1);
  CHECK(testutil::graph_of({{0, 0, 0}, {9.01, 0, 0}}, 9.0, 20.0).edges().size() == 0);
  CHECK(testutil::graph_of({{0, 0, 0}, {9, 0, 0}}, 9.0, 20.0).edges().size() == 1);
}

TEST_CASE("unit square keeps sides, drops diagonals") {
  const auto g = testutil::graph_of({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}, 1.0);
  CHECK(g.edges().size() == 4);
  for (const auto& e : g.edges()) CHECK(e.distance == doctest::Approx(1.0));
}

TEST_CASE("edge set matches a pairwise scan") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    Rng rng(seed);
    const int n = 2 + static_cast<int>(uniform_index(rng, 49));
    const double r = 5.0 + 30.0 * uniform01(rng);
    const auto nodes = deploy_nodes(Region::square(100.0), n, seed);
    const auto g = build_comm_graph(nodes, r, 0);
    std::set<std::pair<NodeId, NodeId>> expect;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        if (euclidean(nodes[i].position, nodes[j].position) <= r) expect.insert({i, j});
      }
    }
    std::set<std::pair<NodeId, NodeId>> got;
    for (const auto& e : g.edges()) {
      CHECK(e.a < e.b);
      CHECK(e.distance <= r);
      got.insert({e.a, e.b});
    }
    CHECK(got == expect);
    // adjacency mirrors edges with identical stored distances
    for (int i = 0; i < n; ++i) {
      for (const auto& nb : g.neighbors(i)) {
        const auto back = g.neighbors(nb.id);
        bool found = false;
        for (const auto& m : back) {
          if (m.id == i) {
            found = true;
            CHECK(m.distance == nb.distance);
          }
        }
        CHECK(found);
      }
    }
  }
}

TEST_CASE("unreachable nodes are reported") {
  const auto g = testutil::graph_of({{0, 0, 0}, {1, 0, 0}, {8, 8, 0}}, 1.5);
  CHECK(g.unreachable_from_sink() == std::vector<NodeId>{2});
}

TEST_CASE("nearest node and hop distances") {
  const auto g = testutil::line_graph(5);
  CHECK(nearest_node(g.nodes(), {2.4, 0, 0}) == 2);
  CHECK(nearest_node(g.nodes(), {2.5, 0, 0}) == 2);  // tie goes to the lower id
  NodeMask mask{1, 1, 0, 1, 1};
  CHECK(nearest_node(g.nodes(), {2.0, 0, 0}, mask) == 1);
  CHECK(hop_distances(g, 0) == std::vector<int>{0, 1, 2, 3, 4});
  CHECK(hop_distances(g, 0, mask) == std::vector<int>{0, 1, -1, -1, -1});
}

TEST_CASE("bad inputs are rejected") {
  CHECK_THROWS_AS(deploy_nodes(Region::square(-1.0), 5, 1), ConfigError);
  CHECK_THROWS_AS(deploy_nodes(Region{4, {1, 1, 1}}, 5, 1), ConfigError);
  CHECK_THROWS_AS(build_comm_graph(deploy_nodes(Region::square(10), 3, 1), 0.0, 0), ConfigError);
  CHECK_THROWS_AS(build_comm_graph(deploy_nodes(Region::square(10), 3, 1), 1.0, 5), ConfigError);
  const std::vector<Point> outside{{11, 0, 0}};
  CHECK_THROWS_AS(place_nodes(Region::square(10), outside), ConfigError);
}

}
