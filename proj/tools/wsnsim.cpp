#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wsn/config.hpp"
#include "wsn/errors.hpp"
#include "wsn/experiment.hpp"
#include "wsn/report.hpp"

namespace {

using wsn::Json;

struct CommonFlags {
  std::string config_path;
  std::string preset;
  std::string protocol;
  std::string mode;
  std::optional<std::uint64_t> seed;
  std::optional<int> episodes;
  std::optional<int> nodes;
  std::optional<double> radius;
  std::optional<int> sources;
  std::optional<double> lambda;
  std::optional<double> epsilon;
  std::optional<double> alpha;
  std::vector<std::string> sets;
  std::string out_dir;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_seed = true) {
  cmd->add_option("-c,--config", f.config_path, "JSON config file");
  cmd->add_option("-p,--preset", f.preset, "built-in preset (table1, table2, delay_study)");
  cmd->add_option("--protocol", f.protocol, "marl, spmh, single_hop, leach");
  cmd->add_option("--mode", f.mode, "local or cloud");
  if (with_seed) cmd->add_option("--seed", f.seed, "RNG seed");
  cmd->add_option("--episodes", f.episodes, "episode horizon");
  cmd->add_option("--nodes", f.nodes, "node count");
  cmd->add_option("--radius", f.radius, "coverage radius");
  cmd->add_option("--sources", f.sources, "sensing sources per episode");
  cmd->add_option("--lambda", f.lambda, "MERA/MST blend");
  cmd->add_option("--epsilon", f.epsilon, "initial exploration rate");
  cmd->add_option("--alpha", f.alpha, "learning rate");
  cmd->add_option("--set", f.sets, "override any key: dotted.key=json_value")->take_all();
  cmd->add_option("-o,--out", f.out_dir, "output directory (default $WSNSIM_OUT_DIR or .)");
}

// --set costs.hop=1.5 -> {"costs":{"hop":1.5}}
Json parse_set(const std::string& s) {
  const auto eq = s.find('=');
  if (eq == std::string::npos || eq == 0) throw wsn::ConfigError("--set: expected key=value, got '" + s + "'");
  const std::string key = s.substr(0, eq);
  const std::string raw = s.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;
  }
  Json root = Json::object();
  Json* cur = &root;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw wsn::ConfigError("--set: empty key segment in '" + key + "'");
    if (dot == std::string::npos) {
      (*cur)[part] = value;
      break;
    }
    cur = &(*cur)[part];
    start = dot + 1;
  }
  return root;
}

Json overrides_of(const CommonFlags& f) {
  Json o = Json::object();
  for (const auto& s : f.sets) o = wsn::merge_json(o, parse_set(s));
  if (!f.preset.empty() && f.config_path.empty()) o["preset"] = f.preset;
  if (!f.protocol.empty()) o["protocol"] = f.protocol;
  if (!f.mode.empty()) o["mode"] = f.mode;
  if (f.seed) o["seed"] = *f.seed;
  if (f.episodes) o["episodes"] = *f.episodes;
  if (f.nodes) o["node_count"] = *f.nodes;
  if (f.radius) o["coverage_radius"] = *f.radius;
  if (f.sources) o["sources_per_episode"] = *f.sources;
  if (f.lambda) o["routing"]["lambda"] = *f.lambda;
  if (f.epsilon) o["rl"]["epsilon"] = *f.epsilon;
  if (f.alpha) o["rl"]["alpha"] = *f.alpha;
  return o;
}

wsn::SimConfig build_config(const std::string& path, const std::string& preset, const Json& overrides) {
  if (!path.empty()) {
    Json o = overrides;
    if (!preset.empty()) o["preset"] = preset;
    return wsn::load_config(path, o);
  }
  Json o = overrides;
  if (!preset.empty()) o["preset"] = preset;
  return wsn::parse_config("{}", o);
}

std::string out_dir_of(const CommonFlags& f) {
  if (!f.out_dir.empty()) return f.out_dir;
  if (const char* env = std::getenv("WSNSIM_OUT_DIR"); env && *env) return env;
  return ".";
}

std::string join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

// "1,2,5" or "1-10" or a mix.
std::vector<std::uint64_t> parse_seeds(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const std::string tok = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!tok.empty()) {
      try {
        const auto dash = tok.find('-');
        if (dash != std::string::npos && dash > 0) {
          const auto a = std::stoull(tok.substr(0, dash));
          const auto b = std::stoull(tok.substr(dash + 1));
          if (b < a) throw wsn::ConfigError("seeds: empty range '" + tok + "'");
          for (auto v = a; v <= b; ++v) out.push_back(v);
        } else {
          out.push_back(std::stoull(tok));
        }
      } catch (const std::logic_error&) {
        throw wsn::ConfigError("seeds: cannot parse '" + tok + "'");
      }
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty()) throw wsn::ConfigError("seeds: none given");
  return out;
}

std::vector<std::string> parse_list_str(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    std::string tok = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!tok.empty()) out.push_back(std::move(tok));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const std::string tok = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!tok.empty()) {
      try {
        out.push_back(std::stod(tok));
      } catch (const std::logic_error&) {
        throw wsn::ConfigError(std::string(what) + ": cannot parse '" + tok + "'");
      }
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

int cmd_run(const CommonFlags& f, bool dump_graph, bool quiet) {
  const auto cfg = build_config(f.config_path, f.preset, overrides_of(f));
  const std::string dir = out_dir_of(f);
  wsn::Simulator sim(cfg);
  std::optional<wsn::FusedGraph> last_graph;
  if (dump_graph) {
    sim.set_observer([&](const wsn::EpisodeTrace& t) {
      if (t.graph) last_graph = *t.graph;
    });
  }
  while (sim.running()) sim.step();
  const auto report = sim.report();
  wsn::export_series(report, wsn::ExportFormat::Json, join(dir, "report.json"));
  wsn::export_series(report, wsn::ExportFormat::Csv, join(dir, "metrics.csv"));
  wsn::write_text_file(join(dir, "checkpoints.csv"), wsn::checkpoint_csv(report));
  wsn::write_text_file(join(dir, "nodes.csv"), wsn::node_snapshot_csv(sim.ledger()));
  if (dump_graph && last_graph) wsn::write_text_file(join(dir, "fused_graph.csv"), wsn::fused_graph_csv(*last_graph));
  for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
  if (!quiet) {
    const auto& m = report.metrics;
    std::printf("%s %s seed %llu: %zu episodes, status %s\n", wsn::to_string(cfg.protocol),
                wsn::to_string(cfg.mode), static_cast<unsigned long long>(cfg.seed), m.size(),
                wsn::to_string(report.status));
    if (!m.empty()) {
      std::printf("final mean SoC %.2f, variance %.2f, alive %d/%d, mean delay %.2f ms\n", m.back().mean_soc,
                  m.back().var_soc, m.back().alive, cfg.node_count, m.back().mean_delay_ms);
    }
    std::printf("wrote %s\n", dir.c_str());
  }
  return 0;
}

struct CompareFlags {
  std::vector<std::string> configs;
  std::vector<std::string> presets;
  std::string protocols;
  std::string seeds = "1";
  unsigned threads = 0;
};

int cmd_compare(const CommonFlags& f, const CompareFlags& cf) {
  const Json o = overrides_of(f);
  std::vector<wsn::LabeledConfig> cfgs;
  for (const auto& path : cf.configs) {
    cfgs.push_back({std::filesystem::path(path).stem().string(), wsn::load_config(path, o)});
  }
  for (const auto& p : cf.presets) {
    Json op = o;
    op["preset"] = p;
    cfgs.push_back({p, wsn::parse_config("{}", op)});
  }
  if (cfgs.empty()) throw wsn::ConfigError("compare: give --config or --preset");
  wsn::CompareOptions opt;
  for (const auto& p : parse_list_str(cf.protocols)) opt.protocols.push_back(wsn::protocol_from_string(p));
  opt.seeds = parse_seeds(cf.seeds);
  opt.threads = cf.threads;
  const auto cmp = wsn::compare(cfgs, opt);
  const std::string dir = out_dir_of(f);
  wsn::write_text_file(join(dir, "compare_episodes.csv"), wsn::comparison_episodes_csv(cmp));
  wsn::write_text_file(join(dir, "compare_summary.csv"), wsn::comparison_summary_csv(cmp));
  std::fputs(wsn::comparison_summary_table(cmp).c_str(), stdout);
  return 0;
}

struct SweepFlags {
  std::string lambda;
  std::string epsilon;
  std::string alpha;
  std::string seeds = "1";
  unsigned threads = 0;
};

int cmd_sweep(const CommonFlags& f, const SweepFlags& sf) {
  const auto base = build_config(f.config_path, f.preset, overrides_of(f));
  wsn::SweepGrid grid{parse_list(sf.lambda, "lambda"), parse_list(sf.epsilon, "epsilon"),
                      parse_list(sf.alpha, "alpha")};
  const auto rows = wsn::sweep(base, grid, parse_seeds(sf.seeds), sf.threads);
  const std::string csv = wsn::sweep_csv(rows);
  wsn::write_text_file(join(out_dir_of(f), "sweep.csv"), csv);
  std::fputs(csv.c_str(), stdout);
  return 0;
}

struct ExportFlags {
  std::string report;
  std::string format = "csv";
  std::string output;
  std::string checkpoints;
};

int cmd_export(const CommonFlags& f, const ExportFlags& ef) {
  const auto report = wsn::load_report(ef.report);
  const auto format = wsn::export_format_from_string(ef.format);
  const std::string dir = out_dir_of(f);
  const std::string path = !ef.output.empty() ? ef.output
                           : join(dir, format == wsn::ExportFormat::Csv ? "metrics.csv" : "report.json");
  wsn::export_series(report, format, path);
  if (!ef.checkpoints.empty()) {
    std::vector<int> eps;
    for (double v : parse_list(ef.checkpoints, "checkpoints")) eps.push_back(static_cast<int>(v));
    wsn::write_text_file(join(dir, "checkpoints.csv"), wsn::checkpoint_csv(report, eps));
  }
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Energy-aware WSN routing simulator"};
  app.require_subcommand(1);

  CommonFlags run_f;
  bool dump_graph = false;
  bool quiet = false;
  auto* run = app.add_subcommand("run", "simulate one configuration");
  add_common(run, run_f);
  run->add_flag("--dump-graph", dump_graph, "also write the last fused graph");
  run->add_flag("-q,--quiet", quiet, "no summary on stdout");

  CommonFlags cmp_f;
  CompareFlags cmp_cf;
  auto* cmp = app.add_subcommand("compare", "run configs x protocols x seeds");
  add_common(cmp, cmp_f, false);
  cmp->remove_option(cmp->get_option("--config"));
  cmp->remove_option(cmp->get_option("--preset"));
  cmp->add_option("-c,--config", cmp_cf.configs, "config file (repeatable)");
  cmp->add_option("-p,--preset", cmp_cf.presets, "preset (repeatable)");
  cmp->add_option("--protocols", cmp_cf.protocols, "comma list, e.g. marl,spmh");
  cmp->add_option("--seeds", cmp_cf.seeds, "e.g. 1-10 or 1,3,5");
  cmp->add_option("-j,--threads", cmp_cf.threads, "worker threads (0 = all cores)");

  CommonFlags sw_f;
  SweepFlags sw_sf;
  auto* sw = app.add_subcommand("sweep", "grid over lambda, epsilon and alpha");
  add_common(sw, sw_f, false);
  sw->remove_option(sw->get_option("--lambda"));
  sw->remove_option(sw->get_option("--epsilon"));
  sw->remove_option(sw->get_option("--alpha"));
  sw->add_option("--lambda", sw_sf.lambda, "comma list");
  sw->add_option("--epsilon", sw_sf.epsilon, "comma list");
  sw->add_option("--alpha", sw_sf.alpha, "comma list");
  sw->add_option("--seeds", sw_sf.seeds, "e.g. 1-5");
  sw->add_option("-j,--threads", sw_sf.threads, "worker threads (0 = all cores)");

  CommonFlags ex_f;
  ExportFlags ex_ef;
  auto* ex = app.add_subcommand("export", "re-export a saved report");
  ex->add_option("-r,--report", ex_ef.report, "report.json from a run")->required();
  ex->add_option("-f,--format", ex_ef.format, "csv or json");
  ex->add_option("--output", ex_ef.output, "output file");
  ex->add_option("--checkpoints", ex_ef.checkpoints, "also write per-node SoC at these episodes");
  ex->add_option("-o,--out", ex_f.out_dir, "output directory (default $WSNSIM_OUT_DIR or .)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*run) return cmd_run(run_f, dump_graph, quiet);
    if (*cmp) return cmd_compare(cmp_f, cmp_cf);
    if (*sw) return cmd_sweep(sw_f, sw_sf);
    if (*ex) return cmd_export(ex_f, ex_ef);
  } catch (const wsn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
