#include "wsn/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "wsn/errors.hpp"

namespace wsn {

const char* to_string(Protocol p) {
  switch (p) {
    case Protocol::Marl: return "marl";
    case Protocol::Spmh: return "spmh";
    case Protocol::SingleHop: return "single_hop";
    case Protocol::Leach: return "leach";
  }
  return "?";
}

Protocol protocol_from_string(const std::string& s) {
  if (s == "marl") return Protocol::Marl;
  if (s == "spmh") return Protocol::Spmh;
  if (s == "single_hop") return Protocol::SingleHop;
  if (s == "leach") return Protocol::Leach;
  throw ConfigError("protocol: unknown value '" + s + "' (marl, spmh, single_hop, leach)");
}

Mode mode_from_string(const std::string& s) {
  if (s == "local") return Mode::Local;
  if (s == "cloud") return Mode::Cloud;
  throw ConfigError("mode: unknown value '" + s + "' (local, cloud)");
}

const char* to_string(GlobalRewardScope s) {
  switch (s) {
    case GlobalRewardScope::All: return "all";
    case GlobalRewardScope::Participants: return "participants";
    case GlobalRewardScope::Transmitter: return "transmitter";
  }
  return "?";
}

GlobalRewardScope global_scope_from_string(const std::string& s) {
  if (s == "all") return GlobalRewardScope::All;
  if (s == "participants") return GlobalRewardScope::Participants;
  if (s == "transmitter") return GlobalRewardScope::Transmitter;
  throw ConfigError("global_reward_scope: unknown value '" + s +
                    "' (all, participants, transmitter)");
}

const char* to_string(RunStatus s) {
  return s == RunStatus::Completed ? "completed" : "network_dead";
}

RunStatus run_status_from_string(const std::string& s) {
  if (s == "completed") return RunStatus::Completed;
  if (s == "network_dead") return RunStatus::NetworkDead;
  throw ConfigError("status: unknown value '" + s + "'");
}

void RoutingParams::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw ConfigError("routing.lambda: must lie in [0,1]");
  if (!(off_tree_penalty >= 1.0)) throw ConfigError("routing.off_tree_penalty: must be >= 1");
  if (!(cutoff_factor > 0.0)) throw ConfigError("routing.cutoff_factor: must be > 0");
  if (hop_cap < 1) throw ConfigError("routing.hop_cap: must be >= 1");
  if (k_max < 1) throw ConfigError("routing.k_max: must be >= 1");
  if (detour_slack < -1) throw ConfigError("routing.detour_slack: must be >= -1");
  (void)max_hops(attenuation_pct, integrity_floor, hop_cap);
}

void LeachParams::validate() const {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("leach.p: must lie in (0,1)");
  if (round_length < 1) throw ConfigError("leach.round_length: must be >= 1");
}

void SimConfig::validate() const {
  region.validate();
  if (!positions.empty()) {
    if (static_cast<int>(positions.size()) != node_count) {
      throw ConfigError("positions: " + std::to_string(positions.size()) +
                        " entries but node_count is " + std::to_string(node_count));
    }
  }
  if (node_count < 2) throw ConfigError("node_count: need at least 2 nodes");
  if (!(coverage_radius > 0.0) || !std::isfinite(coverage_radius)) {
    throw ConfigError("coverage_radius: must be a positive finite number");
  }
  if (episodes < 1) throw ConfigError("episodes: must be >= 1");
  if (sources_per_episode < 0) throw ConfigError("sources_per_episode: must be >= 0");
  if (buffer_capacity < 1) throw ConfigError("buffer_capacity: must be >= 1");
  if (usage_decay_period < 1) throw ConfigError("usage_decay_period: must be >= 1");
  if (overuse_threshold < 1) throw ConfigError("overuse_threshold: must be >= 1");
  if (!(overuse_percentile >= 0.0 && overuse_percentile <= 1.0)) {
    throw ConfigError("overuse_percentile: must lie in [0,1]");
  }
  if (!(centrality_percentile > 0.0 && centrality_percentile <= 1.0)) {
    throw ConfigError("centrality_percentile: must lie in (0,1]");
  }
  if (!(request_top_fraction > 0.0 && request_top_fraction <= 1.0)) {
    throw ConfigError("request_top_fraction: must lie in (0,1]");
  }
  for (int c : checkpoints) {
    if (c < 0) throw ConfigError("checkpoints: episode indices must be >= 0");
  }
  costs.validate();
  rl.validate();
  rewards.validate();
  routing.validate();
  delay.validate();
  leach.validate();
}

NodeId elect_transmitter(const EnergyLedger& ledger, std::span<const NodeId> requests,
                         double top_fraction) {
  if (ledger.alive_count() == 0) return kNoNode;
  const double threshold = alive_soc_percentile(ledger, 1.0 - top_fraction);
  auto better = [&](NodeId a, NodeId b) {
    if (b == kNoNode) return true;
    if (ledger.soc_units(a) != ledger.soc_units(b)) return ledger.soc_units(a) > ledger.soc_units(b);
    return a < b;
  };
  NodeId best = kNoNode;
  for (NodeId r : requests) {
    if (r < 0 || static_cast<std::size_t>(r) >= ledger.size()) continue;
    if (!ledger.alive(r) || ledger.soc(r) < threshold) continue;
    if (better(r, best)) best = r;
  }
  if (best != kNoNode) return best;
  for (std::size_t i = 0; i < ledger.size(); ++i) {
    const auto id = static_cast<NodeId>(i);
    if (ledger.alive(id) && better(id, best)) best = id;
  }
  return best;
}

CloudOverhead cloud_step_overhead(EnergyLedger& ledger, const SimConfig& config) {
  CloudOverhead out;
  if (config.mode == Mode::Local) {
    out.decision_delay_s = config.delay.local_decision_s;
    return out;
  }
  for (std::size_t i = 0; i < ledger.size(); ++i) {
    const auto id = static_cast<NodeId>(i);
    if (!ledger.alive(id)) continue;
    out.units += ledger.apply_cost(id, config.costs.report, CostKind::Report);
    ++out.report_count;
  }
  out.decision_delay_s = cloud_decision_delay(config.delay);
  return out;
}

namespace {

enum class Actor : std::uint8_t { Source, Relay, Idle, Transmitter };

struct Transition {
  NodeId agent;
  StateVector s;
  RoutingAction a;
  Actor actor;
  int packet = -1;
  bool overused_target = false;
};

struct Packet {
  NodeId source = kNoNode;
  std::vector<NodeId> route;
  bool delivered = false;
  bool no_route = false;
  double extra_delay_s = 0.0;
};

double nearest_rank(std::vector<double> values, double q) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const auto n = values.size();
  auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, n);
  return values[rank - 1];
}

}  // namespace

struct Simulator::Impl {
  SimConfig cfg;
  CommGraph graph;
  EnergyLedger ledger;
  std::vector<Role> roles;
  NodeId tx = kNoNode;
  std::vector<QStore> q;
  double eps = 0.0;
  int h_max = 1;
  Rng rng_sources;
  Rng rng_explore;
  Rng rng_cluster;
  int episode = 0;
  RunStatus status = RunStatus::Completed;
  std::vector<NodeId> requests;
  std::vector<int> prev_sent;
  LeachState leach_state;
  std::optional<LeachRound> leach_assignment;
  int leach_rounds = 0;
  std::vector<EpisodeMetrics> metrics;
  std::vector<SocSnapshot> checkpoints;
  std::int64_t pruned_total = 0;
  std::int64_t no_route_total = 0;
  std::vector<std::string> warnings;
  EpisodeObserver observer;

  static CommGraph make_graph(const SimConfig& c) {
    c.validate();
    auto nodes = c.positions.empty()
                     ? deploy_nodes(c.region, c.node_count, derive_seed(c.seed, kDeploymentStream))
                     : place_nodes(c.region, c.positions);
    const NodeId gateway = nearest_node(nodes, c.sink());
    return build_comm_graph(std::move(nodes), c.coverage_radius, gateway);
  }

  explicit Impl(SimConfig c)
      : cfg(std::move(c)),
        graph(make_graph(cfg)),
        ledger(graph.size()),
        roles(graph.size(), Role::Sensor),
        eps(cfg.rl.epsilon),
        h_max(max_hops(cfg.routing.attenuation_pct, cfg.routing.integrity_floor,
                       cfg.routing.hop_cap)),
        rng_sources(derive_seed(cfg.seed, kSourceStream)),
        rng_explore(derive_seed(cfg.seed, kExplorationStream)),
        rng_cluster(derive_seed(cfg.seed, kClusterStream)),
        prev_sent(graph.size(), 0),
        leach_state(graph.size()) {
    if (cfg.mode == Mode::Cloud) {
      q.emplace_back(kGlobalOwner);
    } else {
      for (std::size_t i = 0; i < graph.size(); ++i) q.emplace_back(static_cast<NodeId>(i));
    }
    const auto cut_off = graph.unreachable_from_sink();
    if (!cut_off.empty()) {
      warnings.push_back(std::to_string(cut_off.size()) +
                         " node(s) have no multi-hop path to the sink gateway");
    }
  }

  QStore& q_for(NodeId node) {
    return cfg.mode == Mode::Cloud ? q.front() : q.at(static_cast<std::size_t>(node));
  }

  bool running() const { return status == RunStatus::Completed && episode < cfg.episodes; }

  void charge(NodeId id, double cost, CostKind kind) {
    if (ledger.alive(id)) ledger.apply_cost(id, cost, kind);
  }

  std::vector<NodeId> pick_sources() {
    std::vector<NodeId> alive;
    for (std::size_t i = 0; i < ledger.size(); ++i) {
      if (ledger.alive(static_cast<NodeId>(i))) alive.push_back(static_cast<NodeId>(i));
    }
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(cfg.sources_per_episode),
                                         alive.size());
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = i + uniform_index(rng_sources, alive.size() - i);
      std::swap(alive[i], alive[j]);
    }
    alive.resize(k);
    return alive;
  }

  // Arrival rate of each node from its sends in the previous episode.
  std::vector<double> arrival_rates(const std::vector<int>& sent) const {
    std::vector<double> rates(sent.size());
    for (std::size_t i = 0; i < rates.size(); ++i) {
      rates[i] = static_cast<double>(sent[i]) / cfg.delay.episode_duration_s;
    }
    return rates;
  }

  NodeId nearest_alive_to_sink() const {
    const auto mask = ledger.alive_mask();
    if (ledger.alive_count() == 0) return kNoNode;
    return nearest_node(graph.nodes(), cfg.sink(), mask);
  }

  // Episode bodies fill `packets`, `sent` and the trace; the common tail does the rest.
  struct Work {
    std::vector<Packet> packets;
    std::vector<int> sent;
    double total_reward = 0.0;
    int pruned = 0;
    Mode delay_mode = Mode::Local;
    std::optional<FusedGraph> fg;
    std::vector<double> step_rewards;
    std::size_t tx_count = 0;
  };

  void run_marl(Work& w);
  void run_spmh_or_single(Work& w);
  void run_leach(Work& w);
  EpisodeMetrics step();
  RunReport report() const;
};

void Simulator::Impl::run_marl(Work& w) {
  const auto& rw = cfg.rewards;
  const SocStats before = soc_stats(ledger);
  const NodeMask alive_before = ledger.alive_mask();

  (void)cloud_step_overhead(ledger, cfg);

  const NodeMask alive = ledger.alive_mask();
  const ArcMap mera = mera_weights(graph, ledger);
  const MstResult mst = mst_weights(graph, cfg.routing.off_tree_penalty, alive);
  const FusedGraph fused = fuse(graph, mera, mst.weights, cfg.routing.lambda);
  const double cutoff = default_cost_cutoff(fused, cfg.routing.cutoff_factor);
  w.fg = prune(fused, cutoff > 0.0 ? cutoff : 1.0, ledger);
  const FusedGraph& fg = *w.fg;
  w.pruned = static_cast<int>(fg.pruned_count());

  const std::vector<double> centrality = betweenness_centrality(fg);
  std::vector<double> alive_centrality;
  for (std::size_t i = 0; i < centrality.size(); ++i) {
    if (ledger.alive(static_cast<NodeId>(i))) alive_centrality.push_back(centrality[i]);
  }
  const double centrality_cut = nearest_rank(alive_centrality, cfg.centrality_percentile);
  std::vector<double> alive_usage;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (ledger.alive(static_cast<NodeId>(i))) {
      alive_usage.push_back(ledger.usage(static_cast<NodeId>(i)));
    }
  }
  const double usage_cut = std::max(static_cast<double>(cfg.overuse_threshold),
                                    nearest_rank(alive_usage, cfg.overuse_percentile));

  std::fill(roles.begin(), roles.end(), Role::Sensor);
  tx = elect_transmitter(ledger, requests, cfg.request_top_fraction);
  requests.clear();
  if (tx == kNoNode) return;
  roles[static_cast<std::size_t>(tx)] = Role::Transmitter;
  w.tx_count = static_cast<std::size_t>(std::count(roles.begin(), roles.end(), Role::Transmitter));

  const std::vector<int> hops_tx = hops_to(fg, tx);
  std::vector<int> buffer(graph.size(), 0);
  std::vector<std::uint8_t> acted(graph.size(), 0);
  std::vector<std::uint8_t> asleep(graph.size(), 0);
  std::vector<Transition> transitions;
  const auto k_max = static_cast<std::size_t>(cfg.routing.k_max);

  auto ctx = [&]() {
    return ObservationContext{graph,    ledger, roles,         hops_tx, buffer, tx,
                              cfg.sink(), graph.size() > 0 ? cfg.region.diagonal() : 1.0,
                              cfg.buffer_capacity};
  };
  auto decide = [&](NodeId node, const StateVector& s, std::span<const RoutingAction> actions,
                    std::optional<RoutingAction> preferred) {
    const auto a = select_action(q_for(node), s, actions, eps, rng_explore, preferred);
    if (cfg.mode == Mode::Local) charge(node, cfg.costs.local_compute, CostKind::LocalCompute);
    return a;
  };
  auto plan_from = [&](NodeId from, int budget) -> std::vector<NodeId> {
    if (from == tx || budget <= 0) return {};
    const auto paths = enumerate_paths(fg, from, tx, budget, k_max);
    const auto best = select_min_variance_path(paths, ledger);
    return best ? best->nodes : std::vector<NodeId>{};
  };

  const auto sources = pick_sources();
  for (NodeId src : sources) {
    charge(src, cfg.costs.sense, CostKind::Sense);
    ++buffer[static_cast<std::size_t>(src)];
  }

  for (NodeId src : sources) {
    const int pid = static_cast<int>(w.packets.size());
    w.packets.push_back(Packet{src, {src}});
    acted[static_cast<std::size_t>(src)] = 1;
    if (src == tx) {
      w.packets.back().delivered = true;
      continue;
    }
    if (!ledger.alive(src)) continue;  // spent its last charge sensing

    int remaining = h_max;
    const int shortest = hops_tx[static_cast<std::size_t>(src)];
    if (cfg.routing.detour_slack >= 0 && shortest >= 0) {
      remaining = std::min(h_max, shortest + cfg.routing.detour_slack);
    }
    std::vector<NodeId> plan = plan_from(src, remaining);
    if (plan.empty()) {
      // No admissible route this episode: the source can only drop.
      w.packets.back().no_route = true;
      const auto s = observe_state(src, ctx());
      transitions.push_back({src, s, RoutingAction::drop(), Actor::Source, pid});
      if (cfg.mode == Mode::Local) charge(src, cfg.costs.local_compute, CostKind::LocalCompute);
      continue;
    }
    std::size_t plan_pos = 0;
    std::vector<std::uint8_t> visited(graph.size(), 0);
    visited[static_cast<std::size_t>(src)] = 1;
    NodeId cur = src;
    while (true) {
      auto& pk = w.packets[static_cast<std::size_t>(pid)];
      if (cur == tx) {
        pk.delivered = true;
        break;
      }
      const auto s = observe_state(cur, ctx());
      std::vector<RoutingAction> actions;
      for (const auto& arc : fg.arcs(cur)) {
        const auto j = static_cast<std::size_t>(arc.to);
        if (!ledger.alive(arc.to) || visited[j]) continue;
        if (hops_tx[j] < 0 || hops_tx[j] > remaining - 1) continue;
        actions.push_back(RoutingAction::transmit_to(arc.to));
      }
      actions.push_back(RoutingAction::sleep());
      actions.push_back(RoutingAction::drop());

      std::optional<RoutingAction> preferred;
      if (plan_pos + 1 < plan.size() && plan[plan_pos] == cur) {
        preferred = RoutingAction::transmit_to(plan[plan_pos + 1]);
      }
      const auto a = decide(cur, s, actions, preferred);
      const Actor actor = cur == src ? Actor::Source : Actor::Relay;
      if (a.kind != RoutingAction::Kind::TransmitTo) {
        transitions.push_back({cur, s, a, actor, pid});
        if (a.kind == RoutingAction::Kind::Sleep) asleep[static_cast<std::size_t>(cur)] = 1;
        break;
      }
      const NodeId next = a.target;
      if (!fg.has_arc(cur, next)) throw SimulationError("routed hop outside the fused graph");
      const bool overused = next != tx && ledger.usage(next) >= usage_cut;
      transitions.push_back({cur, s, a, actor, pid, overused});
      charge(cur, cfg.costs.hop, CostKind::Hop);
      ledger.record_usage(cur);
      ++w.sent[static_cast<std::size_t>(cur)];
      pk.route.push_back(next);
      visited[static_cast<std::size_t>(next)] = 1;
      --remaining;
      if (plan_pos + 1 < plan.size() && plan[plan_pos + 1] == next) {
        ++plan_pos;
      } else {
        plan = plan_from(next, remaining);
        plan_pos = 0;
      }
      cur = next;
      if (cur != tx) {
        roles[static_cast<std::size_t>(cur)] = Role::Forwarder;
        acted[static_cast<std::size_t>(cur)] = 1;
      }
      ++buffer[static_cast<std::size_t>(cur)];
    }
  }

  int delivered = 0;
  for (const auto& p : w.packets) delivered += p.delivered ? 1 : 0;

  // The transmitter aggregates and forwards everything it received.
  const auto tx_index = static_cast<std::size_t>(tx);
  acted[tx_index] = 1;
  if (ledger.alive(tx)) {
    const auto s = observe_state(tx, ctx());
    transitions.push_back({tx, s, RoutingAction::request_transmitter(), Actor::Transmitter});
    if (delivered > 0) {
      charge(tx, cfg.costs.sink, CostKind::Sink);
      ++w.sent[tx_index];
    }
  }

  // Agents without a packet choose between sleeping and bidding for the role.
  const double request_cut = alive_soc_percentile(ledger, 1.0 - cfg.request_top_fraction);
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const auto id = static_cast<NodeId>(i);
    if (acted[i] || !ledger.alive(id)) continue;
    const auto s = observe_state(id, ctx());
    std::vector<RoutingAction> actions{RoutingAction::sleep()};
    if (ledger.soc(id) >= request_cut) actions.push_back(RoutingAction::request_transmitter());
    const auto a = decide(id, s, actions, std::nullopt);
    transitions.push_back({id, s, a, Actor::Idle});
    if (a.kind == RoutingAction::Kind::Sleep) {
      asleep[i] = 1;
    } else {
      requests.push_back(id);
    }
  }
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const auto id = static_cast<NodeId>(i);
    if (!alive_before[i]) continue;
    if (asleep[i]) {
      charge(id, cfg.costs.sleep, CostKind::Sleep);
    } else {
      charge(id, cfg.costs.idle, CostKind::Idle);
    }
  }

  // Rewards.
  const SocStats after = soc_stats(ledger);
  bool failure = false;
  for (std::size_t i = 0; i < graph.size(); ++i) {
    if (alive_before[i] && !ledger.alive(static_cast<NodeId>(i))) failure = true;
  }
  std::vector<RewardEvent> globals;
  if (!failure) globals.push_back(RewardEvent::NoNodeFailure);
  if (after.variance < before.variance) globals.push_back(RewardEvent::VarianceDecreased);
  if (after.mean > rw.high_average_threshold) globals.push_back(RewardEvent::HighAverageEnergy);

  std::vector<std::uint8_t> avoided(w.packets.size(), 0);
  for (std::size_t p = 0; p < w.packets.size(); ++p) {
    const auto& route = w.packets[p].route;
    if (!w.packets[p].delivered) continue;
    double peak = 0.0;
    for (std::size_t k = 1; k + 1 < route.size(); ++k) {
      peak = std::max(peak, centrality[static_cast<std::size_t>(route[k])]);
    }
    avoided[p] = peak < centrality_cut ? 1 : 0;
  }

  std::vector<RoutingAction> next_actions;
  const auto end_ctx = ctx();
  for (const auto& t : transitions) {
    std::vector<RewardEvent> events;
    switch (t.a.kind) {
      case RoutingAction::Kind::TransmitTo: {
        const auto p = static_cast<std::size_t>(t.packet);
        if (w.packets[p].delivered) {
          events.push_back(t.actor == Actor::Source ? RewardEvent::SensedAndSent
                                                    : RewardEvent::Forwarded);
          if (avoided[p]) events.push_back(RewardEvent::AvoidedHighCentrality);
        }
        if (t.overused_target) events.push_back(RewardEvent::OverusedNode);
        break;
      }
      case RoutingAction::Kind::Sleep: events.push_back(RewardEvent::Slept); break;
      case RoutingAction::Kind::Drop: events.push_back(RewardEvent::Dropped); break;
      case RoutingAction::Kind::RequestTransmitter:
        if (t.actor == Actor::Transmitter && delivered > 0) {
          events.push_back(RewardEvent::DeliveredToSink);
        }
        break;
    }
    const bool gets_globals =
        cfg.global_reward_scope == GlobalRewardScope::All ||
        (cfg.global_reward_scope == GlobalRewardScope::Participants && t.actor != Actor::Idle) ||
        t.actor == Actor::Transmitter;
    if (gets_globals) events.insert(events.end(), globals.begin(), globals.end());
    const double r = compute_reward(events, rw);
    w.step_rewards.push_back(r);
    w.total_reward += r;

    QStore& store = q_for(t.agent);
    if (ledger.alive(t.agent)) {
      const auto s_next = observe_state(t.agent, end_ctx);
      next_actions = feasible_actions(t.agent, fg, ledger);
      q_update(store, t.s, t.a, r, s_next, next_actions, cfg.rl);
    } else {
      q_update(store, t.s, t.a, r, t.s, {}, cfg.rl);
    }
  }

  const double bound = rw.max_abs_step_reward() / (1.0 - cfg.rl.gamma) * (1.0 + 1e-9);
  for (const auto& store : q) {
    if (store.max_abs() > bound) throw SimulationError("Q-value left its theoretical bound");
  }
  eps = cfg.rl.decayed(eps);
  w.delay_mode = cfg.mode;
  (void)before;
}

void Simulator::Impl::run_spmh_or_single(Work& w) {
  std::fill(roles.begin(), roles.end(), Role::Sensor);
  tx = nearest_alive_to_sink();
  if (tx == kNoNode) return;
  roles[static_cast<std::size_t>(tx)] = Role::Transmitter;
  w.tx_count = 1;

  const auto sources = pick_sources();
  for (NodeId src : sources) charge(src, cfg.costs.sense, CostKind::Sense);

  const bool direct_to_sink = cfg.protocol == Protocol::SingleHop && cfg.single_hop_to_sink;
  int delivered = 0;
  for (NodeId src : sources) {
    w.packets.push_back(Packet{src, {src}});
    auto& pk = w.packets.back();
    if (!ledger.alive(src)) continue;
    if (cfg.protocol == Protocol::Spmh) {
      if (src == tx) {
        pk.delivered = true;
        ++delivered;
        continue;
      }
      const auto path = spmh_route(graph, ledger, src, tx);
      if (!path || static_cast<int>(path->size()) - 1 > h_max) {
        pk.no_route = true;
        continue;
      }
      for (std::size_t k = 0; k + 1 < path->size(); ++k) {
        const NodeId sender = (*path)[k];
        charge(sender, cfg.costs.hop, CostKind::Hop);
        ledger.record_usage(sender);
        ++w.sent[static_cast<std::size_t>(sender)];
      }
      pk.route = *path;
      pk.delivered = true;
      ++delivered;
    } else if (direct_to_sink) {
      const double d = euclidean(graph.node(src).position, cfg.sink());
      if (d > graph.radius() && cfg.strict_range) {
        pk.no_route = true;
        continue;
      }
      const double mult = std::max(1.0, d / graph.radius());
      charge(src, cfg.costs.sink * mult, d > graph.radius() ? CostKind::LongRange : CostKind::Sink);
      ++w.sent[static_cast<std::size_t>(src)];
      pk.delivered = true;
    } else {
      if (src == tx) {
        pk.delivered = true;
        ++delivered;
        continue;
      }
      const auto route =
          single_hop_route(graph, src, tx, SingleHopOptions{cfg.strict_range, cfg.costs.sink});
      if (!route.feasible) {
        pk.no_route = true;
        continue;
      }
      if (route.long_range) {
        charge(src, route.long_range_cost, CostKind::LongRange);
      } else {
        charge(src, cfg.costs.hop, CostKind::Hop);
      }
      ++w.sent[static_cast<std::size_t>(src)];
      pk.route = route.path;
      pk.delivered = true;
      ++delivered;
    }
  }
  if (delivered > 0 && !direct_to_sink) {
    charge(tx, cfg.costs.sink, CostKind::Sink);
    ++w.sent[static_cast<std::size_t>(tx)];
  }
  for (std::size_t i = 0; i < graph.size(); ++i) charge(static_cast<NodeId>(i), cfg.costs.idle, CostKind::Idle);
  w.delay_mode = Mode::Local;
}

void Simulator::Impl::run_leach(Work& w) {
  bool recluster = !leach_assignment || episode % cfg.leach.round_length == 0;
  if (leach_assignment) {
    for (NodeId h : leach_assignment->heads) {
      if (!ledger.alive(h)) recluster = true;
    }
  }
  if (recluster) {
    leach_assignment = leach_round(graph, ledger, leach_state, leach_rounds++, cfg.leach.p,
                                   rng_cluster);
  }
  const auto& assign = *leach_assignment;
  std::fill(roles.begin(), roles.end(), Role::Sensor);
  for (NodeId h : assign.heads) roles[static_cast<std::size_t>(h)] = Role::Forwarder;
  tx = kNoNode;

  const auto sources = pick_sources();
  for (NodeId src : sources) charge(src, cfg.costs.sense, CostKind::Sense);

  std::vector<int> head_load(graph.size(), 0);
  for (NodeId src : sources) {
    w.packets.push_back(Packet{src, {src}});
    auto& pk = w.packets.back();
    if (!ledger.alive(src)) continue;
    const NodeId head = assign.head_of[static_cast<std::size_t>(src)];
    if (head == kNoNode || !ledger.alive(head)) {
      pk.no_route = true;
      continue;
    }
    if (head != src) {
      const auto route =
          single_hop_route(graph, src, head, SingleHopOptions{cfg.strict_range, cfg.costs.sink});
      if (!route.feasible) {
        pk.no_route = true;
        continue;
      }
      if (route.long_range) {
        charge(src, route.long_range_cost, CostKind::LongRange);
      } else {
        charge(src, cfg.costs.hop, CostKind::Hop);
      }
      ++w.sent[static_cast<std::size_t>(src)];
      pk.route.push_back(head);
    }
    ++head_load[static_cast<std::size_t>(head)];
    pk.delivered = true;
    if (recluster) pk.extra_delay_s = cfg.delay.cluster_setup_s;
  }
  for (NodeId h : assign.heads) {
    const auto hi = static_cast<std::size_t>(h);
    if (head_load[hi] == 0) continue;
    charge(h, cfg.costs.sink, CostKind::Sink);
    w.sent[hi] += head_load[hi];
  }
  // The head's uplink to the sink is the packet's last hop.
  for (auto& pk : w.packets) {
    if (pk.delivered) pk.route.push_back(kNoNode);
  }
  for (std::size_t i = 0; i < graph.size(); ++i) charge(static_cast<NodeId>(i), cfg.costs.idle, CostKind::Idle);
  w.delay_mode = Mode::Local;
}

EpisodeMetrics Simulator::Impl::step() {
  if (!running()) throw SimulationError("step: simulation already finished");
  ledger.reset_charges();
  const std::int64_t units_before = ledger.total_units();

  Work w;
  w.sent.assign(graph.size(), 0);
  if (ledger.alive_count() > 0) {
    switch (cfg.protocol) {
      case Protocol::Marl: run_marl(w); break;
      case Protocol::Spmh:
      case Protocol::SingleHop: run_spmh_or_single(w); break;
      case Protocol::Leach: run_leach(w); break;
    }
  }

  EpisodeMetrics m;
  m.episode = episode;
  const SocStats st = soc_stats(ledger);
  m.mean_soc = st.mean;
  m.var_soc = st.variance;
  m.min_soc = st.min;
  m.max_soc = st.max;
  m.alive = static_cast<int>(st.alive_count);
  m.total_reward = w.total_reward;
  m.pruned_edges = w.pruned;
  m.transmitter = tx;

  const auto rates = arrival_rates(prev_sent);
  double delay_sum = 0.0;
  int delay_count = 0;
  for (const auto& pk : w.packets) {
    if (pk.no_route) ++m.no_route_events;
    if (!pk.delivered) {
      ++m.dropped_packets;
      continue;
    }
    ++m.delivered_packets;
    std::vector<double> hop_rates;
    for (std::size_t k = 0; k + 1 < pk.route.size(); ++k) {
      hop_rates.push_back(rates[static_cast<std::size_t>(pk.route[k])]);
    }
    const auto res = end_to_end_delay(hop_rates, cfg.delay, w.delay_mode);
    if (res.unstable) {
      ++m.unstable_packets;
      continue;
    }
    const double ms = (res.seconds + pk.extra_delay_s) * 1000.0;
    if (delay_count == 0) {
      m.min_delay_ms = ms;
      m.max_delay_ms = ms;
    } else {
      m.min_delay_ms = std::min(m.min_delay_ms, ms);
      m.max_delay_ms = std::max(m.max_delay_ms, ms);
    }
    delay_sum += ms;
    ++delay_count;
  }
  m.mean_delay_ms = delay_count > 0 ? delay_sum / delay_count : 0.0;

  pruned_total += w.pruned;
  prev_sent = w.sent;
  no_route_total += m.no_route_events;
  if ((episode + 1) % cfg.usage_decay_period == 0) ledger.decay_usage();
  if (std::find(cfg.checkpoints.begin(), cfg.checkpoints.end(), episode) != cfg.checkpoints.end()) {
    checkpoints.push_back({episode, ledger.soc_vector()});
  }
  metrics.push_back(m);

  if (observer) {
    EpisodeTrace trace;
    trace.episode = episode;
    trace.units_before = units_before;
    trace.units_after = ledger.total_units();
    trace.charged = ledger.charged_units();
    trace.transmitter_count = w.tx_count;
    trace.transmitter = tx;
    trace.hop_bound = h_max;
    for (const auto& pk : w.packets) trace.routes.push_back(pk.route);
    trace.graph = w.fg ? &*w.fg : nullptr;
    for (const auto& store : q) trace.q_max_abs = std::max(trace.q_max_abs, store.max_abs());
    trace.step_rewards = std::move(w.step_rewards);
    trace.metrics = &metrics.back();
    observer(trace);
  }

  ++episode;
  if (ledger.alive_count() == 0) status = RunStatus::NetworkDead;
  return m;
}

RunReport Simulator::Impl::report() const {
  RunReport r;
  r.config = cfg;
  r.seed = cfg.seed;
  r.status = status;
  r.metrics = metrics;
  r.final_soc = ledger.soc_vector();
  r.final_alive = ledger.alive_mask();
  r.checkpoints = checkpoints;
  r.pruned_edges = pruned_total;
  r.no_route_events = no_route_total;
  r.warnings = warnings;
  return r;
}

Simulator::Simulator(SimConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}
Simulator::~Simulator() = default;
Simulator::Simulator(Simulator&&) noexcept = default;
Simulator& Simulator::operator=(Simulator&&) noexcept = default;

void Simulator::set_observer(EpisodeObserver observer) { impl_->observer = std::move(observer); }
bool Simulator::running() const { return impl_->running(); }
int Simulator::episode() const { return impl_->episode; }
EpisodeMetrics Simulator::step() { return impl_->step(); }
RunReport Simulator::report() const { return impl_->report(); }
const SimConfig& Simulator::config() const { return impl_->cfg; }
const CommGraph& Simulator::graph() const { return impl_->graph; }
const EnergyLedger& Simulator::ledger() const { return impl_->ledger; }
EnergyLedger& Simulator::mutable_ledger() { return impl_->ledger; }
std::span<const Role> Simulator::roles() const { return impl_->roles; }
NodeId Simulator::transmitter() const { return impl_->tx; }
const QStore& Simulator::q_store(NodeId node) const {
  return impl_->cfg.mode == Mode::Cloud ? impl_->q.front()
                                        : impl_->q.at(static_cast<std::size_t>(node));
}
double Simulator::epsilon() const { return impl_->eps; }

RunReport run_simulation(const SimConfig& config, const EpisodeObserver& observer) {
  Simulator sim(config);
  sim.set_observer(observer);
  while (sim.running()) sim.step();
  return sim.report();
}

}  // namespace wsn
