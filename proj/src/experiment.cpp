#include "wsn/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "wsn/errors.hpp"
#include "wsn/report.hpp"

namespace wsn {

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
        next = n;
        return;
      }
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

std::vector<std::uint64_t> normalize_seeds(std::vector<std::uint64_t> seeds) {
  std::sort(seeds.begin(), seeds.end());
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  return seeds;
}

namespace {

SummaryRow summarize(const ComparisonRun& run, const std::vector<int>& episodes) {
  SummaryRow row;
  row.label = run.label;
  row.protocol = run.protocol;
  row.seed = run.seed;
  const auto& ms = run.report.metrics;
  for (int e : episodes) {
    double v = 0.0;
    auto it = std::find_if(ms.begin(), ms.end(), [e](const EpisodeMetrics& m) { return m.episode == e; });
    if (it != ms.end()) {
      v = it->mean_soc;
    } else if (!ms.empty()) {
      v = ms.back().mean_soc;  // run ended early
    }
    row.avg_soc.push_back(v);
  }
  for (const auto& m : ms) row.max_variance = std::max(row.max_variance, m.var_soc);
  std::size_t alive = 0;
  for (auto a : run.report.final_alive) alive += a ? 1 : 0;
  row.active = static_cast<double>(alive);
  row.eliminated = static_cast<double>(run.report.final_alive.size() - alive);
  return row;
}

}  // namespace

Comparison compare(const std::vector<LabeledConfig>& configs, const CompareOptions& options) {
  if (configs.empty()) throw ConfigError("compare: no configs given");
  const auto seeds = normalize_seeds(options.seeds);
  if (seeds.empty()) throw ConfigError("compare: no seeds given");
  const int horizon = configs.front().config.episodes;
  for (const auto& c : configs) {
    if (c.config.episodes != horizon) {
      throw ConfigError("compare: episode horizons differ ('" + configs.front().label + "' has " +
                        std::to_string(horizon) + ", '" + c.label + "' has " +
                        std::to_string(c.config.episodes) + ")");
    }
    c.config.validate();
  }

  Comparison out;
  out.summary_episodes = options.summary_episodes;
  for (const auto& c : configs) {
    const std::vector<Protocol> protos =
        options.protocols.empty() ? std::vector<Protocol>{c.config.protocol} : options.protocols;
    for (Protocol p : protos) {
      for (auto s : seeds) out.runs.push_back({c.label, p, s, {}});
    }
  }
  std::vector<SimConfig> cells;
  for (const auto& c : configs) {
    const std::vector<Protocol> protos =
        options.protocols.empty() ? std::vector<Protocol>{c.config.protocol} : options.protocols;
    for (Protocol p : protos) {
      for (auto s : seeds) {
        SimConfig cfg = c.config;
        cfg.protocol = p;
        cfg.seed = s;
        cells.push_back(std::move(cfg));
      }
    }
  }
  parallel_for(cells.size(), options.threads,
               [&](std::size_t i) { out.runs[i].report = run_simulation(cells[i]); });

  // Fold in cell order: per-seed rows, then the mean of each group.
  std::size_t i = 0;
  while (i < out.runs.size()) {
    std::size_t j = i;
    SummaryRow mean;
    mean.label = out.runs[i].label;
    mean.protocol = out.runs[i].protocol;
    mean.is_mean = true;
    mean.avg_soc.assign(out.summary_episodes.size(), 0.0);
    while (j < out.runs.size() && out.runs[j].label == mean.label &&
           out.runs[j].protocol == mean.protocol) {
      SummaryRow row = summarize(out.runs[j], out.summary_episodes);
      for (std::size_t k = 0; k < row.avg_soc.size(); ++k) mean.avg_soc[k] += row.avg_soc[k];
      mean.max_variance += row.max_variance;
      mean.eliminated += row.eliminated;
      mean.active += row.active;
      out.rows.push_back(std::move(row));
      ++j;
    }
    const double n = static_cast<double>(j - i);
    for (auto& v : mean.avg_soc) v /= n;
    mean.max_variance /= n;
    mean.eliminated /= n;
    mean.active /= n;
    if (j - i > 1) out.rows.push_back(std::move(mean));
    i = j;
  }
  return out;
}

std::string comparison_episodes_csv(const Comparison& c) {
  std::string out = "label,protocol,seed";
  for (const auto& col : metrics_csv_columns()) out += ',' + col;
  out += '\n';
  for (const auto& run : c.runs) {
    const std::string csv = metrics_csv(run.report);
    const std::string prefix = run.label + ',' + to_string(run.protocol) + ',' + std::to_string(run.seed) + ',';
    std::size_t pos = csv.find('\n') + 1;  // skip header
    while (pos < csv.size()) {
      const std::size_t end = csv.find('\n', pos);
      out += prefix;
      out.append(csv, pos, end - pos + 1);
      pos = end + 1;
    }
  }
  return out;
}

std::string comparison_summary_csv(const Comparison& c) {
  std::string out = "label,protocol,seed";
  for (int e : c.summary_episodes) out += ",avg_soc_ep" + std::to_string(e);
  out += ",max_variance,eliminated,active\n";
  for (const auto& r : c.rows) {
    out += r.label + ',' + to_string(r.protocol) + ',' + (r.is_mean ? "mean" : std::to_string(r.seed));
    for (double v : r.avg_soc) out += ',' + format_number(v);
    out += ',' + format_number(r.max_variance) + ',' + format_number(r.eliminated) + ',' +
           format_number(r.active) + '\n';
  }
  return out;
}

std::string comparison_summary_table(const Comparison& c) {
  std::string out;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%-14s %-11s %-6s", "config", "protocol", "seed");
  out += buf;
  for (int e : c.summary_episodes) {
    std::snprintf(buf, sizeof buf, " %8s", ("ep" + std::to_string(e)).c_str());
    out += buf;
  }
  out += "   max_var  elim  active\n";
  for (const auto& r : c.rows) {
    std::snprintf(buf, sizeof buf, "%-14s %-11s %-6s", r.label.c_str(), to_string(r.protocol),
                  r.is_mean ? "mean" : std::to_string(r.seed).c_str());
    out += buf;
    for (double v : r.avg_soc) {
      std::snprintf(buf, sizeof buf, " %8.2f", v);
      out += buf;
    }
    std::snprintf(buf, sizeof buf, " %9.2f %5.1f %7.1f\n", r.max_variance, r.eliminated, r.active);
    out += buf;
  }
  return out;
}

std::vector<SweepRow> sweep(const SimConfig& base, const SweepGrid& grid,
                            const std::vector<std::uint64_t>& seeds_in, unsigned threads) {
  const auto seeds = normalize_seeds(seeds_in);
  if (seeds.empty()) throw ConfigError("sweep: no seeds given");
  const auto axis = [](const std::vector<double>& v, double def) {
    return v.empty() ? std::vector<double>{def} : v;
  };
  const auto lambdas = axis(grid.lambda, base.routing.lambda);
  const auto epsilons = axis(grid.epsilon, base.rl.epsilon);
  const auto alphas = axis(grid.alpha, base.rl.alpha);

  std::vector<SweepRow> rows;
  std::vector<SimConfig> cells;
  for (double l : lambdas) {
    for (double e : epsilons) {
      for (double a : alphas) {
        SweepRow row;
        row.lambda = l;
        row.epsilon = e;
        row.alpha = a;
        row.seeds = seeds.size();
        rows.push_back(row);
        for (auto s : seeds) {
          SimConfig cfg = base;
          cfg.routing.lambda = l;
          cfg.rl.epsilon = e;
          cfg.rl.alpha = a;
          cfg.seed = s;
          cfg.validate();
          cells.push_back(std::move(cfg));
        }
      }
    }
  }
  std::vector<RunReport> reports(cells.size());
  parallel_for(cells.size(), threads, [&](std::size_t i) { reports[i] = run_simulation(cells[i]); });

  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto& row = rows[r];
    for (std::size_t k = 0; k < seeds.size(); ++k) {
      const RunReport& rep = reports[r * seeds.size() + k];
      if (rep.metrics.empty()) continue;
      row.final_mean_soc += rep.metrics.back().mean_soc;
      double mv = 0.0;
      for (const auto& m : rep.metrics) mv = std::max(mv, m.var_soc);
      row.max_variance += mv;
      std::size_t alive = 0;
      for (auto a : rep.final_alive) alive += a ? 1 : 0;
      row.eliminated += static_cast<double>(rep.final_alive.size() - alive);
      const std::size_t from = rep.metrics.size() > 20 ? rep.metrics.size() - 20 : 0;
      double rsum = 0.0;
      double dsum = 0.0;
      for (std::size_t i = from; i < rep.metrics.size(); ++i) rsum += rep.metrics[i].total_reward;
      for (const auto& m : rep.metrics) dsum += m.mean_delay_ms;
      row.late_reward += rsum / static_cast<double>(rep.metrics.size() - from);
      row.mean_delay_ms += dsum / static_cast<double>(rep.metrics.size());
    }
    const double n = static_cast<double>(seeds.size());
    row.final_mean_soc /= n;
    row.max_variance /= n;
    row.eliminated /= n;
    row.late_reward /= n;
    row.mean_delay_ms /= n;
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
  std::string out = "lambda,epsilon,alpha,seeds,final_mean_soc,max_variance,eliminated,late_reward,mean_delay_ms\n";
  for (const auto& r : rows) {
    out += format_number(r.lambda) + ',' + format_number(r.epsilon) + ',' + format_number(r.alpha) + ',' +
           std::to_string(r.seeds) + ',' + format_number(r.final_mean_soc) + ',' +
           format_number(r.max_variance) + ',' + format_number(r.eliminated) + ',' +
           format_number(r.late_reward) + ',' + format_number(r.mean_delay_ms) + '\n';
  }
  return out;
}

}  // namespace wsn
