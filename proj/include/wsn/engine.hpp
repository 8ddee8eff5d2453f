#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wsn/baselines.hpp"
#include "wsn/delay.hpp"
#include "wsn/energy.hpp"
#include "wsn/rl.hpp"
#include "wsn/rng.hpp"
#include "wsn/routing_graph.hpp"
#include "wsn/topology.hpp"

namespace wsn {

enum class Protocol { Marl, Spmh, SingleHop, Leach };

const char* to_string(Protocol p);
Protocol protocol_from_string(const std::string& s);
Mode mode_from_string(const std::string& s);

/// Which decisions receive the network-wide reward terms.
enum class GlobalRewardScope { All, Participants, Transmitter };

const char* to_string(GlobalRewardScope s);
GlobalRewardScope global_scope_from_string(const std::string& s);

struct RoutingParams {
  double lambda = 0.5;
  double off_tree_penalty = 3.0;
  double cutoff_factor = 5.0;
  double attenuation_pct = 5.0;
  double integrity_floor = 0.70;
  int hop_cap = 10;
  int k_max = 32;
  int detour_slack = 1;  // extra hops over the minimum a packet may take; -1 = hop bound only

  void validate() const;
  friend bool operator==(const RoutingParams&, const RoutingParams&) = default;
};

struct LeachParams {
  double p = 0.1;
  int round_length = 5;  // episodes between re-clustering

  void validate() const;
  friend bool operator==(const LeachParams&, const LeachParams&) = default;
};

struct SimConfig {
  std::string preset;  // informational only
  Region region = Region::square(100.0);
  int node_count = 50;
  double coverage_radius = 9.0;
  std::optional<Point> sink_position;  // region centre when unset
  std::vector<Point> positions;        // explicit layout; random deployment when empty
  CostSchedule costs;
  RlParams rl;
  RewardSchedule rewards;
  RoutingParams routing;
  DelayParams delay;
  LeachParams leach;
  int episodes = 100;
  int sources_per_episode = 5;
  Protocol protocol = Protocol::Marl;
  Mode mode = Mode::Local;
  std::uint64_t seed = 1;

  int buffer_capacity = 10;
  int usage_decay_period = 10;
  int overuse_threshold = 4;           // usage count at which a relay counts as overused
  double overuse_percentile = 0.8;     // ... provided it is also in the busiest (1 - p) share
  double centrality_percentile = 0.8;  // threshold for the avoid-centrality bonus
  double request_top_fraction = 0.3;
  GlobalRewardScope global_reward_scope = GlobalRewardScope::Transmitter;
  bool strict_range = false;           // single-hop baseline: drop out-of-range sends
  bool single_hop_to_sink = false;     // single-hop baseline: target the sink gateway
  std::vector<int> checkpoints{0, 25, 50, 75, 99};

  void validate() const;
  Point sink() const { return sink_position.value_or(region.center()); }

  friend bool operator==(const SimConfig&, const SimConfig&) = default;
};

struct EpisodeMetrics {
  int episode = 0;
  double mean_soc = 0.0;
  double var_soc = 0.0;
  double min_soc = 0.0;
  double max_soc = 0.0;
  int alive = 0;
  double total_reward = 0.0;
  double mean_delay_ms = 0.0;  // over delivered packets with stable queues; 0 when none
  double min_delay_ms = 0.0;
  double max_delay_ms = 0.0;
  int dropped_packets = 0;
  int delivered_packets = 0;
  int unstable_packets = 0;
  int no_route_events = 0;
  int pruned_edges = 0;
  NodeId transmitter = kNoNode;

  friend bool operator==(const EpisodeMetrics&, const EpisodeMetrics&) = default;
};

enum class RunStatus { Completed, NetworkDead };

const char* to_string(RunStatus s);
RunStatus run_status_from_string(const std::string& s);

struct SocSnapshot {
  int episode = 0;
  std::vector<double> soc;

  friend bool operator==(const SocSnapshot&, const SocSnapshot&) = default;
};

struct RunReport {
  SimConfig config;
  std::uint64_t seed = 0;
  RunStatus status = RunStatus::Completed;
  std::vector<EpisodeMetrics> metrics;
  std::vector<double> final_soc;
  std::vector<std::uint8_t> final_alive;
  std::vector<SocSnapshot> checkpoints;
  std::int64_t pruned_edges = 0;
  std::int64_t no_route_events = 0;
  std::vector<std::string> warnings;

  friend bool operator==(const RunReport&, const RunReport&) = default;
};

/// Audit view of one finished episode, handed to observers.
struct EpisodeTrace {
  int episode = 0;
  std::int64_t units_before = 0;
  std::int64_t units_after = 0;
  std::array<std::int64_t, kCostKinds> charged{};
  std::size_t transmitter_count = 0;  // Transmitter roles right after the election
  NodeId transmitter = kNoNode;
  int hop_bound = 0;
  std::vector<std::vector<NodeId>> routes;  // every attempted packet route
  const FusedGraph* graph = nullptr;        // pruned graph of the episode (MARL only)
  double q_max_abs = 0.0;
  std::vector<double> step_rewards;
  const EpisodeMetrics* metrics = nullptr;
};

using EpisodeObserver = std::function<void(const EpisodeTrace&)>;

/// Highest-SoC valid requester (SoC at or above the (1 - top_fraction) alive
/// percentile), else the highest-SoC alive node; ties go to the lowest id.
/// Returns kNoNode when no node is alive.
NodeId elect_transmitter(const EnergyLedger& ledger, std::span<const NodeId> requests,
                         double top_fraction = 0.3);

struct CloudOverhead {
  std::size_t report_count = 0;
  std::int64_t units = 0;
  double decision_delay_s = 0.0;  // T_D in the cloud, T_Q locally
};

/// Cloud mode charges report_cost to every alive node and returns T_D.
/// Local mode charges nothing here (compute is billed per decision) and returns T_Q.
CloudOverhead cloud_step_overhead(EnergyLedger& ledger, const SimConfig& config);

class Simulator {
 public:
  explicit Simulator(SimConfig config);
  ~Simulator();
  Simulator(Simulator&&) noexcept;
  Simulator& operator=(Simulator&&) noexcept;

  void set_observer(EpisodeObserver observer);

  /// False once the horizon is reached or the network is dead.
  bool running() const;
  int episode() const;
  EpisodeMetrics step();
  RunReport report() const;

  const SimConfig& config() const;
  const CommGraph& graph() const;
  const EnergyLedger& ledger() const;
  EnergyLedger& mutable_ledger();
  std::span<const Role> roles() const;
  NodeId transmitter() const;
  const QStore& q_store(NodeId node) const;
  double epsilon() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

RunReport run_simulation(const SimConfig& config, const EpisodeObserver& observer = {});

}  // namespace wsn
