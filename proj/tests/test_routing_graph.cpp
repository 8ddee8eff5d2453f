#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "helpers.hpp"
#include "oracles.hpp"
#include "wsn/errors.hpp"

using namespace wsn;

using namespace oracle;

TEST_SUITE("routing_graph") {

TEST_CASE("mera weight is the inverse destination charge") {
  const auto g = testutil::line_graph(3);
  EnergyLedger l(3);
  l.set_soc(1, 50.0);
  l.set_soc(2, 0.0);
  const auto w = mera_weights(g, l);
  // arcs 0->1 and 2->1 go into the half-charged node
  for (std::size_t i = 0; i < 3; ++i) {
    const auto nb = g.neighbors(static_cast<NodeId>(i));
    for (std::size_t k = 0; k < nb.size(); ++k) {
      if (nb[k].id == 0) CHECK(w[i][k] == doctest::Approx(1.0));
      if (nb[k].id == 1) CHECK(w[i][k] == doctest::Approx(2.0));
      if (nb[k].id == 2) CHECK(std::isinf(w[i][k]));
    }
  }
}

TEST_CASE("mst on small fixtures") {
  const auto line = testutil::line_graph(3);
  auto mst = mst_weights(line);
  CHECK(mst.tree.size() == 2);
  CHECK(mst.total_weight == doctest::Approx(2.0));

  // square with one diagonal: the diagonal is never a tree edge
  const auto sq = testutil::graph_of({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}, 1.0);
  CHECK(sq.edges().size() == 4);
  // skewed square: four sides plus the single diagonal 1-3 (1.414 < 1.45 < 1.56)
  const auto diag = testutil::graph_of({{0, 0, 0}, {1, 0, 0}, {1.2, 1, 0}, {0, 1, 0}}, 1.45);
  REQUIRE(diag.edges().size() == 5);
  mst = mst_weights(diag, 3.0);
  CHECK(mst.tree.size() == 3);
  for (const auto& e : mst.tree) CHECK_FALSE((e.a == 1 && e.b == 3));
  CHECK(mst.total_weight == doctest::Approx(brute_mst_weight(diag)));
  // off-tree arcs carry the penalty
  for (std::size_t i = 0; i < diag.size(); ++i) {
    const auto nb = diag.neighbors(static_cast<NodeId>(i));
    for (std::size_t k = 0; k < nb.size(); ++k) {
      const double w = mst.weights[i][k];
      CHECK((w == doctest::Approx(nb[k].distance) || w == doctest::Approx(3.0 * nb[k].distance)));
    }
  }
}

TEST_CASE("mst weight equals exhaustive spanning-tree minimum") {
  Rng rng(2024);
  for (int t = 0; t < 100; ++t) {
    const int n = 3 + static_cast<int>(uniform_index(rng, 5));  // 3..7
    const auto g = connected_instance(n, rng, static_cast<std::uint64_t>(t) + 1);
    const auto mst = mst_weights(g);
    CHECK(mst.tree.size() == static_cast<std::size_t>(n - 1));
    CHECK(mst.total_weight == doctest::Approx(brute_mst_weight(g)).epsilon(1e-12));
  }
}

TEST_CASE("fusion is the linear blend") {
  const auto g = testutil::line_graph(2);
  const ArcMap mera{{2.0}, {2.0}};
  const ArcMap mst{{4.0}, {4.0}};
  CHECK(fuse(g, mera, mst, 0.5).arcs(0)[0].w_final == doctest::Approx(3.0));
  CHECK(fuse(g, mera, mst, 1.0).arcs(0)[0].w_final == doctest::Approx(2.0));
  CHECK(fuse(g, mera, mst, 0.0).arcs(0)[0].w_final == doctest::Approx(4.0));
  CHECK_THROWS_AS(fuse(g, mera, mst, 1.5), ConfigError);
  CHECK_THROWS_AS(fuse(g, mera, mst, -0.1), ConfigError);
  const ArcMap inf{{kInfiniteWeight}, {1.0}};
  CHECK(std::isinf(fuse(g, inf, mst, 0.5).arcs(0)[0].w_final));

  // swapping arguments at 1 - lambda gives the same weight
  Rng rng(5);
  for (int t = 0; t < 30; ++t) {
    const double a = 0.1 + 5 * uniform01(rng), b = 0.1 + 5 * uniform01(rng), lam = uniform01(rng);
    const double w1 = fuse(g, ArcMap{{a}, {a}}, ArcMap{{b}, {b}}, lam).arcs(0)[0].w_final;
    const double w2 = fuse(g, ArcMap{{b}, {b}}, ArcMap{{a}, {a}}, 1.0 - lam).arcs(0)[0].w_final;
    CHECK(w1 == doctest::Approx(w2).epsilon(1e-12));
    CHECK(w1 == doctest::Approx(lam * a + (1 - lam) * b).epsilon(1e-12));
  }
}

TEST_CASE("pruning") {
  const auto g = testutil::line_graph(3);
  EnergyLedger l(3);
  auto fg = testutil::fused_of(g, l);
  const auto before = fg.arc_count();
  auto p = prune(fg, 1e9, l);
  CHECK(p.arc_count() == before);
  CHECK(p.pruned_count() == 0);
  p = prune(fg, 1e-9, l);
  CHECK(p.arc_count() == 0);
  l.set_soc(2, 0.0);
  fg = testutil::fused_of(g, l);
  p = prune(fg, 1e9, l);
  CHECK_FALSE(p.has_arc(1, 2));
  CHECK_FALSE(p.has_arc(2, 1));
  CHECK(p.has_arc(0, 1));
  CHECK(default_cost_cutoff(FusedGraph{}, 5.0) == 0.0);
}

TEST_CASE("hop bound from per-hop attenuation") {
  CHECK(max_hops(5.0, 0.70) == 6);
  CHECK(max_hops(30.0, 0.70) == 1);
  CHECK(max_hops(5.0, 1e-9, 10) == 10);
  CHECK(max_hops(5.0, 1e-9, 25) == 25);
  CHECK_THROWS_AS(max_hops(50.0, 0.70), ConfigError);
  CHECK_THROWS_AS(max_hops(0.0, 0.70), ConfigError);
}

TEST_CASE("path enumeration fixtures") {
  EnergyLedger l3(3);
  const auto line = testutil::fused_of(testutil::line_graph(3), l3);
  auto paths = enumerate_paths(line, 0, 1, 1, 32);
  REQUIRE(paths.size() == 1);
  CHECK(paths[0].nodes == std::vector<NodeId>{0, 1});
  CHECK(enumerate_paths(line, 0, 2, 1, 32).empty());

  EnergyLedger l4(4);
  const auto sq = testutil::fused_of(testutil::graph_of({{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {0, 1, 0}}, 1.0), l4);
  CHECK(enumerate_paths(sq, 0, 2, 2, 32).size() == 2);
  CHECK(enumerate_paths(sq, 0, 2, 2, 1).size() == 1);
}

TEST_CASE("path variance") {
  EnergyLedger l(3);
  const std::vector<NodeId> p{0, 1, 2};
  l.set_soc(0, 80);
  l.set_soc(1, 80);
  l.set_soc(2, 80);
  CHECK(path_soc_variance(p, l) == doctest::Approx(0.0));
  l.set_soc(0, 100);
  l.set_soc(1, 60);
  CHECK(path_soc_variance(std::vector<NodeId>{0, 1}, l) == doctest::Approx(800.0).epsilon(1e-12));
  l.set_soc(0, 90);
  l.set_soc(1, 70);
  l.set_soc(2, 50);
  CHECK(path_soc_variance(p, l) == doctest::Approx(400.0).epsilon(1e-12));
  l.set_soc(0, 71);
  l.set_soc(1, 12.5);
  l.set_soc(2, 33);
  CHECK(path_soc_variance(p, l) == doctest::Approx(sample_var(p, l)).epsilon(1e-12));
}

TEST_CASE("min-variance selection rules") {
  EnergyLedger l(5);
  CHECK_FALSE(select_min_variance_path({}, l).has_value());
  std::vector<CandidatePath> one{{{0, 1}, 1.0, 0.0}};
  CHECK(select_min_variance_path(one, l)->nodes == std::vector<NodeId>{0, 1});
  l.set_soc(2, 60);
  std::vector<CandidatePath> two{{{0, 2}, 1.0, 0.0}, {{0, 1}, 2.0, 0.0}};
  CHECK(select_min_variance_path(two, l)->nodes == std::vector<NodeId>{0, 1});
  std::vector<CandidatePath> hops{{{0, 1, 3, 4}, 1.0, 0.0}, {{0, 1, 4}, 2.0, 0.0}};
  CHECK(select_min_variance_path(hops, l)->nodes == std::vector<NodeId>{0, 1, 4});
}

TEST_CASE("enumeration and selection match exhaustive search") {
  Rng rng(77);
  int checked = 0;
  for (int t = 0; t < 100; ++t) {
    const int n = 4 + static_cast<int>(uniform_index(rng, 7));  // 4..10
    const auto g = connected_instance(n, rng, static_cast<std::uint64_t>(t) + 500);
    EnergyLedger l(static_cast<std::size_t>(n));
    testutil::random_soc(l, rng, 20.0, 100.0);
    const auto fg = testutil::fused_of(g, l, uniform01(rng));
    const NodeId src = static_cast<NodeId>(uniform_index(rng, static_cast<std::size_t>(n)));
    NodeId dst = src;
    while (dst == src) dst = static_cast<NodeId>(uniform_index(rng, static_cast<std::size_t>(n)));
    const int h = 1 + static_cast<int>(uniform_index(rng, 6));

    std::vector<std::vector<NodeId>> brute;
    std::vector<NodeId> stack{src};
    all_paths(fg, src, dst, h, stack, brute);
    const auto got = enumerate_paths(fg, src, dst, h, 1u << 20);
    REQUIRE(got.size() == brute.size());
    std::vector<std::vector<NodeId>> got_nodes;
    for (const auto& p : got) {
      CHECK(p.hop_count() <= h);
      got_nodes.push_back(p.nodes);
    }
    std::sort(got_nodes.begin(), got_nodes.end());
    std::sort(brute.begin(), brute.end());
    CHECK(got_nodes == brute);

    // oracle argmin: variance, then hops, then node list
    const std::vector<NodeId>* best = nullptr;
    double best_var = 0;
    for (const auto& p : brute) {
      const double v = sample_var(p, l);
      if (!best || v < best_var - 1e-12 ||
          (std::abs(v - best_var) <= 1e-12 && (p.size() < best->size() || (p.size() == best->size() && p < *best)))) {
        best = &p;
        best_var = v;
      }
    }
    const auto sel = select_min_variance_path(got, l);
    if (!best) {
      CHECK_FALSE(sel.has_value());
    } else {
      REQUIRE(sel.has_value());
      CHECK(sel->nodes == *best);
      ++checked;
    }

    // truncation keeps the k lowest total weights
    if (got.size() > 3) {
      const auto top = enumerate_paths(fg, src, dst, h, 3);
      REQUIRE(top.size() == 3);
      for (std::size_t i = 0; i < 3; ++i) CHECK(top[i].nodes == got[i].nodes);
      for (std::size_t i = 1; i < got.size(); ++i) CHECK(got[i - 1].total_weight <= got[i].total_weight);
    }
  }
  CHECK(checked > 80);
}

TEST_CASE("betweenness matches shortest-path counting") {
  Rng rng(99);
  for (int t = 0; t < 40; ++t) {
    const int n = 3 + static_cast<int>(uniform_index(rng, 5));
    const auto g = connected_instance(n, rng, static_cast<std::uint64_t>(t) + 900);
    EnergyLedger l(static_cast<std::size_t>(n));
    testutil::random_soc(l, rng, 20.0, 100.0);
    const auto fg = testutil::fused_of(g, l, 0.5);
    std::vector<double> expect(static_cast<std::size_t>(n), 0.0);
    for (NodeId s = 0; s < n; ++s) {
      for (NodeId d = 0; d < n; ++d) {
        if (s == d) continue;
        std::vector<std::vector<NodeId>> paths;
        std::vector<NodeId> stack{s};
        all_paths(fg, s, d, n, stack, paths);
        double best = std::numeric_limits<double>::infinity();
        std::vector<double> w;
        for (const auto& p : paths) {
          double sum = 0;
          for (std::size_t k = 0; k + 1 < p.size(); ++k) sum += fg.find(p[k], p[k + 1])->w_final;
          w.push_back(sum);
          best = std::min(best, sum);
        }
        std::vector<const std::vector<NodeId>*> shortest;
        for (std::size_t i = 0; i < paths.size(); ++i) {
          if (w[i] <= best * (1 + 1e-12)) shortest.push_back(&paths[i]);
        }
        for (const auto* p : shortest) {
          for (std::size_t k = 1; k + 1 < p->size(); ++k) {
            expect[static_cast<std::size_t>((*p)[k])] += 1.0 / static_cast<double>(shortest.size());
          }
        }
      }
    }
    const auto got = betweenness_centrality(fg);
    for (int i = 0; i < n; ++i) CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-9));
  }
  EnergyLedger l3(3);
  const auto line = betweenness_centrality(testutil::fused_of(testutil::line_graph(3), l3));
  CHECK(line[1] == doctest::Approx(2.0));
  CHECK(line[0] == 0.0);
}

TEST_CASE("hop counts toward a destination") {
  EnergyLedger l(4);
  const auto fg = testutil::fused_of(testutil::line_graph(4), l);
  CHECK(hops_to(fg, 3) == std::vector<int>{3, 2, 1, 0});
  const auto pruned = prune(fg, 1e-9, l);
  CHECK(hops_to(pruned, 3) == std::vector<int>{-1, -1, -1, 0});
}

}
