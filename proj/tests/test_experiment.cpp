#include <doctest.h>

#include <atomic>
#include <stdexcept>

#include "wsn/config.hpp"
#include "wsn/errors.hpp"
#include "wsn/experiment.hpp"

using namespace wsn;

namespace {

SimConfig short_run(int episodes = 20) {
  SimConfig c = preset_config("table1");
  c.episodes = episodes;
  return c;
}

}  // namespace

TEST_SUITE("experiment") {

TEST_CASE("two protocols by five seeds") {
  CompareOptions o;
  o.protocols = {Protocol::Marl, Protocol::Spmh};
  o.seeds = {1, 2, 3, 4, 5};
  o.summary_episodes = {0, 10, 19};
  const auto c = compare({{"t1", short_run()}}, o);
  CHECK(c.runs.size() == 10);
  CHECK(c.rows.size() == 12);
  CHECK(c.rows[5].is_mean);
  CHECK(c.rows[5].protocol == Protocol::Marl);
  CHECK(c.rows[11].is_mean);
  CHECK(c.rows[11].protocol == Protocol::Spmh);
  double sum = 0;
  for (int i = 0; i < 5; ++i) sum += c.rows[static_cast<std::size_t>(i)].avg_soc[2];
  CHECK(c.rows[5].avg_soc[2] == doctest::Approx(sum / 5));
  const auto csv = comparison_summary_csv(c);
  CHECK(csv.rfind("label,protocol,seed,avg_soc_ep0,avg_soc_ep10,avg_soc_ep19,max_variance,eliminated,active\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 13);
  const auto episodes = comparison_episodes_csv(c);
  CHECK(std::count(episodes.begin(), episodes.end(), '\n') == 1 + 10 * 20);
}

TEST_CASE("single cell") {
  CompareOptions o;
  const auto c = compare({{"only", short_run(5)}}, o);
  CHECK(c.rows.size() == 1);
  CHECK_FALSE(c.rows[0].is_mean);
}

TEST_CASE("seed order and thread count do not matter") {
  CompareOptions a, b;
  a.seeds = {1, 2};
  b.seeds = {2, 1, 2};
  a.threads = 1;
  b.threads = 4;
  const auto ca = compare({{"x", short_run(10)}}, a);
  const auto cb = compare({{"x", short_run(10)}}, b);
  CHECK(comparison_summary_csv(ca) == comparison_summary_csv(cb));
  CHECK(comparison_episodes_csv(ca) == comparison_episodes_csv(cb));
}

TEST_CASE("mismatched horizons are rejected") {
  CompareOptions o;
  CHECK_THROWS_AS(compare({{"a", short_run(10)}, {"b", short_run(12)}}, o), ConfigError);
  CHECK_THROWS_AS(compare({}, o), ConfigError);
  o.seeds = {};
  CHECK_THROWS_AS(compare({{"a", short_run(10)}}, o), ConfigError);
}

TEST_CASE("sweep grid") {
  SweepGrid g;
  g.lambda = {0.2, 0.8};
  g.epsilon = {0.1, 0.3, 0.5};
  const auto rows = sweep(short_run(5), g, {1, 2}, 2);
  CHECK(rows.size() == 6);
  CHECK(rows[0].lambda == 0.2);
  CHECK(rows[0].epsilon == 0.1);
  CHECK(rows[0].alpha == short_run().rl.alpha);
  CHECK(rows[5].lambda == 0.8);
  CHECK(rows[5].epsilon == 0.5);
  for (const auto& r : rows) CHECK(r.seeds == 2);
  const auto csv = sweep_csv(rows);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 7);
  g.lambda = {1.5};
  CHECK_THROWS_AS(sweep(short_run(5), g, {1}), ConfigError);
}

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(100, 4, [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                    if (i == 5) throw std::runtime_error("boom");
                  }),
                  std::runtime_error);
  parallel_for(0, 4, [](std::size_t) { FAIL("called"); });
}

}
