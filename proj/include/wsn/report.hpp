#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "wsn/engine.hpp"

namespace wsn {

using Json = nlohmann::json;

enum class ExportFormat { Csv, Json };

ExportFormat export_format_from_string(const std::string& s);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

Json metrics_to_json(const EpisodeMetrics& m);
EpisodeMetrics metrics_from_json(const Json& j);

Json report_to_json(const RunReport& report);
RunReport report_from_json(const Json& j);

/// Column names of the per-episode CSV, in order.
const std::vector<std::string>& metrics_csv_columns();

/// Header plus one row per completed episode.
std::string metrics_csv(const RunReport& report);

/// Per-node SoC at the recorded checkpoints: episode,node_id,soc,alive.
/// An empty `episodes` keeps every recorded checkpoint.
std::string checkpoint_csv(const RunReport& report, const std::vector<int>& episodes = {});

/// node_id,soc,alive for the current ledger state.
std::string node_snapshot_csv(const EnergyLedger& ledger);

/// from,to,distance,w_mera,w_mst,w_final per arc.
std::string fused_graph_csv(const FusedGraph& fg);

/// Writes `text` to `path`, creating parent directories. Throws IoError.
void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

void export_series(const RunReport& report, ExportFormat format, const std::string& path);

RunReport load_report(const std::string& path);

}  // namespace wsn
