#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wsn/engine.hpp"

namespace wsn {

struct LabeledConfig {
  std::string label;
  SimConfig config;
};

/// One summary line per run; mean rows (is_mean) leave seed at 0.
struct SummaryRow {
  std::string label;
  Protocol protocol = Protocol::Marl;
  std::uint64_t seed = 0;
  bool is_mean = false;
  std::vector<double> avg_soc;  // one entry per summary episode
  double max_variance = 0.0;
  double eliminated = 0.0;
  double active = 0.0;
};

struct ComparisonRun {
  std::string label;
  Protocol protocol = Protocol::Marl;
  std::uint64_t seed = 0;
  RunReport report;
};

struct Comparison {
  std::vector<int> summary_episodes;
  std::vector<ComparisonRun> runs;  // sorted by (config order, protocol order, seed)
  std::vector<SummaryRow> rows;     // per-seed rows, then a mean row per (label, protocol) with 2+ seeds
};

struct CompareOptions {
  std::vector<Protocol> protocols;  // empty: each config's own protocol
  std::vector<std::uint64_t> seeds{1};
  std::vector<int> summary_episodes{0, 25, 50, 75, 99};
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Sorted, duplicate-free copy.
std::vector<std::uint64_t> normalize_seeds(std::vector<std::uint64_t> seeds);

/// Runs every (config, protocol, seed) cell. Every config must share one
/// episode horizon. A single cell gives a one-row summary.
Comparison compare(const std::vector<LabeledConfig>& configs, const CompareOptions& options);

/// label,protocol,seed plus the per-episode metric columns, one row per episode.
std::string comparison_episodes_csv(const Comparison& c);
std::string comparison_summary_csv(const Comparison& c);
/// Fixed-width text table of the summary rows.
std::string comparison_summary_table(const Comparison& c);

struct SweepGrid {
  std::vector<double> lambda;
  std::vector<double> epsilon;
  std::vector<double> alpha;
};

struct SweepRow {
  double lambda = 0.0;
  double epsilon = 0.0;
  double alpha = 0.0;
  std::size_t seeds = 0;
  double final_mean_soc = 0.0;
  double max_variance = 0.0;
  double eliminated = 0.0;
  double late_reward = 0.0;  // mean total reward over the last 20 episodes
  double mean_delay_ms = 0.0;
};

/// Seed-averaged outcome of every grid point. Empty axes keep the base value.
std::vector<SweepRow> sweep(const SimConfig& base, const SweepGrid& grid,
                            const std::vector<std::uint64_t>& seeds, unsigned threads = 0);

std::string sweep_csv(const std::vector<SweepRow>& rows);

/// Runs fn(i) for i in [0, n) on up to `threads` workers; the first exception is rethrown.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

}  // namespace wsn
