#include "wsn/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wsn/config.hpp"
#include "wsn/errors.hpp"

namespace wsn {

ExportFormat export_format_from_string(const std::string& s) {
  if (s == "csv") return ExportFormat::Csv;
  if (s == "json") return ExportFormat::Json;
  throw ConfigError("format: expected csv or json, got '" + s + "'");
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

Json metrics_to_json(const EpisodeMetrics& m) {
  return Json{{"episode", m.episode},
              {"mean_soc", m.mean_soc},
              {"var_soc", m.var_soc},
              {"min_soc", m.min_soc},
              {"max_soc", m.max_soc},
              {"alive", m.alive},
              {"total_reward", m.total_reward},
              {"mean_delay_ms", m.mean_delay_ms},
              {"min_delay_ms", m.min_delay_ms},
              {"max_delay_ms", m.max_delay_ms},
              {"dropped_packets", m.dropped_packets},
              {"delivered_packets", m.delivered_packets},
              {"unstable_packets", m.unstable_packets},
              {"no_route_events", m.no_route_events},
              {"pruned_edges", m.pruned_edges},
              {"transmitter", m.transmitter}};
}

namespace {

template <typename T>
T get_field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) {
    throw ConfigError(where + key + ": missing");
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(where + key + ": wrong type");
  }
}

}  // namespace

EpisodeMetrics metrics_from_json(const Json& j) {
  const std::string w = "metrics.";
  EpisodeMetrics m;
  m.episode = get_field<int>(j, "episode", w);
  m.mean_soc = get_field<double>(j, "mean_soc", w);
  m.var_soc = get_field<double>(j, "var_soc", w);
  m.min_soc = get_field<double>(j, "min_soc", w);
  m.max_soc = get_field<double>(j, "max_soc", w);
  m.alive = get_field<int>(j, "alive", w);
  m.total_reward = get_field<double>(j, "total_reward", w);
  m.mean_delay_ms = get_field<double>(j, "mean_delay_ms", w);
  m.min_delay_ms = get_field<double>(j, "min_delay_ms", w);
  m.max_delay_ms = get_field<double>(j, "max_delay_ms", w);
  m.dropped_packets = get_field<int>(j, "dropped_packets", w);
  m.delivered_packets = get_field<int>(j, "delivered_packets", w);
  m.unstable_packets = get_field<int>(j, "unstable_packets", w);
  m.no_route_events = get_field<int>(j, "no_route_events", w);
  m.pruned_edges = get_field<int>(j, "pruned_edges", w);
  m.transmitter = get_field<NodeId>(j, "transmitter", w);
  return m;
}

Json report_to_json(const RunReport& r) {
  Json j;
  j["config"] = config_to_json(r.config);
  j["seed"] = r.seed;
  j["status"] = to_string(r.status);
  Json ms = Json::array();
  for (const auto& m : r.metrics) ms.push_back(metrics_to_json(m));
  j["metrics"] = std::move(ms);
  j["final_soc"] = r.final_soc;
  j["final_alive"] = r.final_alive;
  Json cps = Json::array();
  for (const auto& cp : r.checkpoints) cps.push_back(Json{{"episode", cp.episode}, {"soc", cp.soc}});
  j["checkpoints"] = std::move(cps);
  j["pruned_edges"] = r.pruned_edges;
  j["no_route_events"] = r.no_route_events;
  j["warnings"] = r.warnings;
  return j;
}

RunReport report_from_json(const Json& j) {
  const std::string w = "report.";
  RunReport r;
  if (!j.is_object() || !j.contains("config")) throw ConfigError("report.config: missing");
  r.config = config_from_json(j.at("config"));
  r.seed = get_field<std::uint64_t>(j, "seed", w);
  r.status = run_status_from_string(get_field<std::string>(j, "status", w));
  if (!j.contains("metrics") || !j.at("metrics").is_array()) {
    throw ConfigError("report.metrics: expected an array");
  }
  for (const auto& m : j.at("metrics")) r.metrics.push_back(metrics_from_json(m));
  r.final_soc = get_field<std::vector<double>>(j, "final_soc", w);
  r.final_alive = get_field<std::vector<std::uint8_t>>(j, "final_alive", w);
  if (!j.contains("checkpoints") || !j.at("checkpoints").is_array()) {
    throw ConfigError("report.checkpoints: expected an array");
  }
  for (const auto& cp : j.at("checkpoints")) {
    r.checkpoints.push_back({get_field<int>(cp, "episode", "report.checkpoints."),
                             get_field<std::vector<double>>(cp, "soc", "report.checkpoints.")});
  }
  r.pruned_edges = get_field<std::int64_t>(j, "pruned_edges", w);
  r.no_route_events = get_field<std::int64_t>(j, "no_route_events", w);
  r.warnings = get_field<std::vector<std::string>>(j, "warnings", w);
  return r;
}

const std::vector<std::string>& metrics_csv_columns() {
  static const std::vector<std::string> cols{"episode",  "mean_soc",     "var_soc",
                                             "min_soc",  "max_soc",      "alive",
                                             "total_reward", "mean_delay_ms", "dropped_packets"};
  return cols;
}

std::string metrics_csv(const RunReport& report) {
  std::string out;
  const auto& cols = metrics_csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    if (i) out += ',';
    out += cols[i];
  }
  out += '\n';
  for (const auto& m : report.metrics) {
    out += std::to_string(m.episode) + ',' + format_number(m.mean_soc) + ',' +
           format_number(m.var_soc) + ',' + format_number(m.min_soc) + ',' +
           format_number(m.max_soc) + ',' + std::to_string(m.alive) + ',' +
           format_number(m.total_reward) + ',' + format_number(m.mean_delay_ms) + ',' +
           std::to_string(m.dropped_packets) + '\n';
  }
  return out;
}

std::string checkpoint_csv(const RunReport& report, const std::vector<int>& episodes) {
  std::string out = "episode,node_id,soc,alive\n";
  for (const auto& cp : report.checkpoints) {
    if (!episodes.empty() && std::find(episodes.begin(), episodes.end(), cp.episode) == episodes.end()) {
      continue;
    }
    for (std::size_t i = 0; i < cp.soc.size(); ++i) {
      out += std::to_string(cp.episode) + ',' + std::to_string(i) + ',' + format_number(cp.soc[i]) +
             ',' + (cp.soc[i] > 0.0 ? "1" : "0") + '\n';
    }
  }
  return out;
}

std::string node_snapshot_csv(const EnergyLedger& ledger) {
  std::string out = "node_id,soc,alive\n";
  for (std::size_t i = 0; i < ledger.size(); ++i) {
    const auto id = static_cast<NodeId>(i);
    out += std::to_string(i) + ',' + format_number(ledger.soc(id)) + ',' +
           (ledger.alive(id) ? "1" : "0") + '\n';
  }
  return out;
}

std::string fused_graph_csv(const FusedGraph& fg) {
  std::string out = "from,to,distance,w_mera,w_mst,w_final\n";
  for (std::size_t i = 0; i < fg.size(); ++i) {
    for (const auto& a : fg.arcs(static_cast<NodeId>(i))) {
      out += std::to_string(i) + ',' + std::to_string(a.to) + ',' + format_number(a.distance) + ',' +
             format_number(a.w_mera) + ',' + format_number(a.w_mst) + ',' +
             format_number(a.w_final) + '\n';
    }
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  std::error_code ec;
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path(), ec);
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
  f.flush();
  if (!f) throw IoError("write to '" + path + "' failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void export_series(const RunReport& report, ExportFormat format, const std::string& path) {
  if (format == ExportFormat::Csv) {
    write_text_file(path, metrics_csv(report));
  } else {
    write_text_file(path, report_to_json(report).dump(2) + '\n');
  }
}

RunReport load_report(const std::string& path) {
  const std::string text = read_text_file(path);
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path + ": invalid JSON: " + e.what());
  }
  return report_from_json(j);
}

}  // namespace wsn
