#include "wsn/config.hpp"

#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "wsn/errors.hpp"

namespace wsn {

namespace {

using Field = std::function<void(const Json&, const std::string&)>;
using FieldTable = std::map<std::string, Field>;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void apply_fields(const Json& j, const std::string& path, const FieldTable& fields) {
  if (!j.is_object()) {
    throw ConfigError((path.empty() ? std::string("config") : path) + ": expected an object");
  }
  for (const auto& [key, value] : j.items()) {
    const auto it = fields.find(key);
    if (it == fields.end()) throw ConfigError(join(path, key) + ": unknown key");
    it->second(value, join(path, key));
  }
}

double as_number(const Json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  return v.get<double>();
}

int as_int(const Json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ConfigError(path + ": expected an integer");
  const auto x = v.get<std::int64_t>();
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
    throw ConfigError(path + ": integer out of range");
  }
  return static_cast<int>(x);
}

bool as_bool(const Json& v, const std::string& path) {
  if (!v.is_boolean()) throw ConfigError(path + ": expected true or false");
  return v.get<bool>();
}

std::string as_string(const Json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path + ": expected a string");
  return v.get<std::string>();
}

Point as_point(const Json& v, const std::string& path) {
  if (!v.is_array() || v.size() < 2 || v.size() > 3) {
    throw ConfigError(path + ": expected [x, y] or [x, y, z]");
  }
  Point p{0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < v.size(); ++i) p[i] = as_number(v[i], path + "[" + std::to_string(i) + "]");
  return p;
}

template <typename T>
Field number_field(T& target) {
  return [&target](const Json& v, const std::string& p) {
    if constexpr (std::is_same_v<T, int>) {
      target = as_int(v, p);
    } else {
      target = as_number(v, p);
    }
  };
}

Field bool_field(bool& target) {
  return [&target](const Json& v, const std::string& p) { target = as_bool(v, p); };
}

void apply_config(SimConfig& c, const Json& j) {
  FieldTable costs{
      {"hop", number_field(c.costs.hop)},
      {"sink", number_field(c.costs.sink)},
      {"sense", number_field(c.costs.sense)},
      {"idle", number_field(c.costs.idle)},
      {"sleep", number_field(c.costs.sleep)},
      {"report", number_field(c.costs.report)},
      {"local_compute", number_field(c.costs.local_compute)},
  };
  FieldTable rl{
      {"alpha", number_field(c.rl.alpha)},
      {"gamma", number_field(c.rl.gamma)},
      {"epsilon", number_field(c.rl.epsilon)},
      {"epsilon_decay", number_field(c.rl.epsilon_decay)},
      {"epsilon_floor", number_field(c.rl.epsilon_floor)},
  };
  FieldTable rewards{
      {"deliver_to_sink", number_field(c.rewards.deliver_to_sink)},
      {"forward", number_field(c.rewards.forward)},
      {"sense_and_send", number_field(c.rewards.sense_and_send)},
      {"sleep", number_field(c.rewards.sleep)},
      {"drop", number_field(c.rewards.drop)},
      {"avoid_centrality", number_field(c.rewards.avoid_centrality)},
      {"overuse_penalty", number_field(c.rewards.overuse_penalty)},
      {"no_failure", number_field(c.rewards.no_failure)},
      {"variance_decrease", number_field(c.rewards.variance_decrease)},
      {"high_average", number_field(c.rewards.high_average)},
      {"high_average_threshold", number_field(c.rewards.high_average_threshold)},
  };
  FieldTable routing{
      {"lambda", number_field(c.routing.lambda)},
      {"off_tree_penalty", number_field(c.routing.off_tree_penalty)},
      {"cutoff_factor", number_field(c.routing.cutoff_factor)},
      {"attenuation_pct", number_field(c.routing.attenuation_pct)},
      {"integrity_floor", number_field(c.routing.integrity_floor)},
      {"hop_cap", number_field(c.routing.hop_cap)},
      {"k_max", number_field(c.routing.k_max)},
      {"detour_slack", number_field(c.routing.detour_slack)},
  };
  FieldTable delay{
      {"packet_bits", number_field(c.delay.packet_bits)},
      {"link_rate_bps", number_field(c.delay.link_rate_bps)},
      {"processing_s", number_field(c.delay.processing_s)},
      {"service_rate", number_field(c.delay.service_rate)},
      {"local_decision_s", number_field(c.delay.local_decision_s)},
      {"state_bits", number_field(c.delay.state_bits)},
      {"action_bits", number_field(c.delay.action_bits)},
      {"uplink_bps", number_field(c.delay.uplink_bps)},
      {"cloud_compute_s", number_field(c.delay.cloud_compute_s)},
      {"episode_duration_s", number_field(c.delay.episode_duration_s)},
      {"cluster_setup_s", number_field(c.delay.cluster_setup_s)},
      {"queue_sum_mode", bool_field(c.delay.queue_sum_mode)},
  };
  FieldTable leach{
      {"p", number_field(c.leach.p)},
      {"round_length", number_field(c.leach.round_length)},
  };
  FieldTable region{
      {"dimensions", number_field(c.region.dimensions)},
      {"extents", [&](const Json& v, const std::string& p) { c.region.extents = as_point(v, p); }},
  };

  auto section = [](const FieldTable& t) {
    return [&t](const Json& v, const std::string& p) { apply_fields(v, p, t); };
  };

  FieldTable top{
      {"preset", [&](const Json& v, const std::string& p) { c.preset = as_string(v, p); }},
      {"region", section(region)},
      {"node_count", number_field(c.node_count)},
      {"coverage_radius", number_field(c.coverage_radius)},
      {"sink_position",
       [&](const Json& v, const std::string& p) {
         if (v.is_null()) {
           c.sink_position.reset();
         } else {
           c.sink_position = as_point(v, p);
         }
       }},
      {"positions",
       [&](const Json& v, const std::string& p) {
         if (!v.is_array()) throw ConfigError(p + ": expected an array of points");
         c.positions.clear();
         for (std::size_t i = 0; i < v.size(); ++i) {
           c.positions.push_back(as_point(v[i], p + "[" + std::to_string(i) + "]"));
         }
       }},
      {"costs", section(costs)},
      {"rl", section(rl)},
      {"rewards", section(rewards)},
      {"routing", section(routing)},
      {"delay", section(delay)},
      {"leach", section(leach)},
      {"episodes", number_field(c.episodes)},
      {"sources_per_episode", number_field(c.sources_per_episode)},
      {"protocol",
       [&](const Json& v, const std::string& p) {
         try {
           c.protocol = protocol_from_string(as_string(v, p));
         } catch (const ConfigError& e) {
           throw ConfigError(p + ": " + e.what());
         }
       }},
      {"mode",
       [&](const Json& v, const std::string& p) {
         try {
           c.mode = mode_from_string(as_string(v, p));
         } catch (const ConfigError& e) {
           throw ConfigError(p + ": " + e.what());
         }
       }},
      {"seed",
       [&](const Json& v, const std::string& p) {
         if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
           throw ConfigError(p + ": expected a non-negative integer");
         }
         c.seed = v.get<std::uint64_t>();
       }},
      {"buffer_capacity", number_field(c.buffer_capacity)},
      {"usage_decay_period", number_field(c.usage_decay_period)},
      {"overuse_threshold", number_field(c.overuse_threshold)},
      {"overuse_percentile", number_field(c.overuse_percentile)},
      {"centrality_percentile", number_field(c.centrality_percentile)},
      {"request_top_fraction", number_field(c.request_top_fraction)},
      {"global_reward_scope",
       [&](const Json& v, const std::string& p) {
         try {
           c.global_reward_scope = global_scope_from_string(as_string(v, p));
         } catch (const ConfigError& e) {
           throw ConfigError(p + ": " + e.what());
         }
       }},
      {"strict_range", bool_field(c.strict_range)},
      {"single_hop_to_sink", bool_field(c.single_hop_to_sink)},
      {"checkpoints",
       [&](const Json& v, const std::string& p) {
         if (!v.is_array()) throw ConfigError(p + ": expected an array of episode indices");
         c.checkpoints.clear();
         for (std::size_t i = 0; i < v.size(); ++i) {
           c.checkpoints.push_back(as_int(v[i], p + "[" + std::to_string(i) + "]"));
         }
       }},
  };
  apply_fields(j, "", top);
}

Json point_json(const Point& p) { return Json::array({p[0], p[1], p[2]}); }

}  // namespace

SimConfig preset_config(const std::string& name) {
  SimConfig c;
  c.preset = name;
  if (name == "table1") {
    c.region = Region::square(100.0);
    c.node_count = 50;
    c.coverage_radius = 9.0;
    c.sources_per_episode = 5;
    c.episodes = 100;
    return c;
  }
  if (name == "table2" || name == "delay_study") {
    c.region = Region::cube(10.0);
    c.node_count = 100;
    // r = 3 leaves transmitters beyond the 6-hop integrity bound for much of the
    // cube; 4.5 keeps the graph within reach of any elected transmitter.
    c.coverage_radius = 4.5;
    c.sources_per_episode = 10;
    c.episodes = 100;
    if (name == "delay_study") {
      // Per hop: L/R = 2000/250000 = 8 ms plus t_p = 2 ms, so three to four hop
      // MARL routes cost 30-40 ms before queueing. Relays carry 1-4 packets per
      // 1 s episode; at mu = 10/s that adds 10-70 ms per loaded hop, which puts
      // MARL packets at 40-70 ms while fixed shortest-path relays saturate.
      c.delay.packet_bits = 2000.0;
      c.delay.link_rate_bps = 250000.0;
      c.delay.processing_s = 0.002;
      c.delay.service_rate = 10.0;
      c.delay.local_decision_s = 0.002;
      c.delay.cluster_setup_s = 0.060;
    }
    return c;
  }
  throw ConfigError("preset: unknown preset '" + name + "' (table1, table2, delay_study)");
}

std::vector<std::string> preset_names() { return {"table1", "table2", "delay_study"}; }

Json config_to_json(const SimConfig& c) {
  Json j;
  j["preset"] = c.preset;
  j["region"] = {{"dimensions", c.region.dimensions}, {"extents", point_json(c.region.extents)}};
  j["node_count"] = c.node_count;
  j["coverage_radius"] = c.coverage_radius;
  j["sink_position"] = c.sink_position ? point_json(*c.sink_position) : Json(nullptr);
  j["positions"] = Json::array();
  for (const auto& p : c.positions) j["positions"].push_back(point_json(p));
  j["costs"] = {{"hop", c.costs.hop},
                {"sink", c.costs.sink},
                {"sense", c.costs.sense},
                {"idle", c.costs.idle},
                {"sleep", c.costs.sleep},
                {"report", c.costs.report},
                {"local_compute", c.costs.local_compute}};
  j["rl"] = {{"alpha", c.rl.alpha},
             {"gamma", c.rl.gamma},
             {"epsilon", c.rl.epsilon},
             {"epsilon_decay", c.rl.epsilon_decay},
             {"epsilon_floor", c.rl.epsilon_floor}};
  const auto& r = c.rewards;
  j["rewards"] = {{"deliver_to_sink", r.deliver_to_sink},
                  {"forward", r.forward},
                  {"sense_and_send", r.sense_and_send},
                  {"sleep", r.sleep},
                  {"drop", r.drop},
                  {"avoid_centrality", r.avoid_centrality},
                  {"overuse_penalty", r.overuse_penalty},
                  {"no_failure", r.no_failure},
                  {"variance_decrease", r.variance_decrease},
                  {"high_average", r.high_average},
                  {"high_average_threshold", r.high_average_threshold}};
  j["routing"] = {{"lambda", c.routing.lambda},
                  {"off_tree_penalty", c.routing.off_tree_penalty},
                  {"cutoff_factor", c.routing.cutoff_factor},
                  {"attenuation_pct", c.routing.attenuation_pct},
                  {"integrity_floor", c.routing.integrity_floor},
                  {"hop_cap", c.routing.hop_cap},
                  {"k_max", c.routing.k_max},
                  {"detour_slack", c.routing.detour_slack}};
  const auto& d = c.delay;
  j["delay"] = {{"packet_bits", d.packet_bits},
                {"link_rate_bps", d.link_rate_bps},
                {"processing_s", d.processing_s},
                {"service_rate", d.service_rate},
                {"local_decision_s", d.local_decision_s},
                {"state_bits", d.state_bits},
                {"action_bits", d.action_bits},
                {"uplink_bps", d.uplink_bps},
                {"cloud_compute_s", d.cloud_compute_s},
                {"episode_duration_s", d.episode_duration_s},
                {"cluster_setup_s", d.cluster_setup_s},
                {"queue_sum_mode", d.queue_sum_mode}};
  j["leach"] = {{"p", c.leach.p}, {"round_length", c.leach.round_length}};
  j["episodes"] = c.episodes;
  j["sources_per_episode"] = c.sources_per_episode;
  j["protocol"] = to_string(c.protocol);
  j["mode"] = to_string(c.mode);
  j["seed"] = c.seed;
  j["buffer_capacity"] = c.buffer_capacity;
  j["usage_decay_period"] = c.usage_decay_period;
  j["overuse_threshold"] = c.overuse_threshold;
  j["overuse_percentile"] = c.overuse_percentile;
  j["centrality_percentile"] = c.centrality_percentile;
  j["request_top_fraction"] = c.request_top_fraction;
  j["global_reward_scope"] = to_string(c.global_reward_scope);
  j["strict_range"] = c.strict_range;
  j["single_hop_to_sink"] = c.single_hop_to_sink;
  j["checkpoints"] = c.checkpoints;
  return j;
}

Json merge_json(Json base, const Json& overlay) {
  if (!base.is_object() || !overlay.is_object()) return overlay;
  for (const auto& [key, value] : overlay.items()) {
    if (value.is_object() && base.contains(key) && base[key].is_object()) {
      base[key] = merge_json(base[key], value);
    } else {
      base[key] = value;
    }
  }
  return base;
}

SimConfig config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config: expected a JSON object");
  SimConfig c;
  if (j.contains("preset")) {
    const auto& p = j["preset"];
    if (!p.is_string()) throw ConfigError("preset: expected a string");
    if (!p.get<std::string>().empty()) c = preset_config(p.get<std::string>());
  }
  apply_config(c, j);
  c.validate();
  return c;
}

SimConfig parse_config(const std::string& text, const Json& overrides) {
  Json doc = Json::object();
  bool blank = text.find_first_not_of(" \t\r\n") == std::string::npos;
  if (!blank) {
    try {
      doc = Json::parse(text);
    } catch (const Json::parse_error& e) {
      throw ConfigError(std::string("config: malformed JSON: ") + e.what());
    }
  }
  if (!doc.is_object()) throw ConfigError("config: expected a JSON object at top level");
  doc = merge_json(doc, overrides);
  if (!doc.contains("preset")) {
    std::vector<std::string> missing;
    for (const char* key : {"region", "node_count", "coverage_radius", "episodes"}) {
      if (!doc.contains(key)) missing.push_back(key);
    }
    if (!missing.empty()) {
      std::string list;
      for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
      throw ConfigError("config: missing required keys: " + list + " (or name a preset)");
    }
  }
  return config_from_json(doc);
}

SimConfig load_config(const std::string& path, const Json& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), overrides);
}

}  // namespace wsn
