#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "wsn/energy.hpp"
#include "wsn/rng.hpp"
#include "wsn/routing_graph.hpp"
#include "wsn/topology.hpp"

namespace wsn {

// Bin cardinalities of the discretised observation.
inline constexpr int kDistanceBins = 5;
inline constexpr int kQueueBins = 3;
inline constexpr int kHopBins = 4;
inline constexpr int kHotspotBins = 3;
inline constexpr int kRoles = 3;

using StateKey = std::uint32_t;

/// Discretised per-node observation.
struct StateVector {
  SocLevel soc = SocLevel::VeryHigh;
  std::uint8_t dist_sink = 0;  // [0, kDistanceBins)
  std::uint8_t dist_tx = 0;    // [0, kDistanceBins)
  std::uint8_t queue = 0;      // [0, kQueueBins)
  std::uint8_t hops_est = 0;   // [0, kHopBins): 1, 2, 3, >=4 hops
  std::uint8_t hotspot = 0;    // [0, kHotspotBins): 0, 1-3, >=4 uses
  SocLevel neigh_energy = SocLevel::VeryHigh;
  Role role = Role::Sensor;

  /// Mixed-radix packing; a bijection onto [0, state_space_size()).
  StateKey key() const;
  static StateVector from_key(StateKey key);
  static constexpr StateKey state_space_size() {
    return kSocLevels * kDistanceBins * kDistanceBins * kQueueBins * kHopBins * kHotspotBins *
           kSocLevels * kRoles;
  }

  friend bool operator==(const StateVector&, const StateVector&) = default;
};

std::uint8_t distance_bin(double normalized);
std::uint8_t queue_bin(double fill_fraction);
std::uint8_t hop_bin(int hops);  // hops < 0 means unreachable
std::uint8_t hotspot_bin(int uses);

struct RoutingAction {
  enum class Kind : std::uint8_t { TransmitTo, Sleep, Drop, RequestTransmitter };

  Kind kind = Kind::Sleep;
  NodeId target = kNoNode;  // only for TransmitTo

  static RoutingAction transmit_to(NodeId j) { return {Kind::TransmitTo, j}; }
  static RoutingAction sleep() { return {Kind::Sleep, kNoNode}; }
  static RoutingAction drop() { return {Kind::Drop, kNoNode}; }
  static RoutingAction request_transmitter() { return {Kind::RequestTransmitter, kNoNode}; }

  /// Non-negative codes are TransmitTo targets; -1/-2/-3 are Sleep/Drop/Request.
  std::int32_t code() const;
  static RoutingAction from_code(std::int32_t code);

  /// Deterministic order: TransmitTo by target id, then Sleep, Drop, RequestTransmitter.
  friend auto operator<=>(const RoutingAction& a, const RoutingAction& b) {
    if (a.kind != b.kind) return a.kind <=> b.kind;
    return a.target <=> b.target;
  }
  friend bool operator==(const RoutingAction&, const RoutingAction&) = default;
};

std::string to_string(const RoutingAction& action);

inline constexpr NodeId kGlobalOwner = -1;

/// Tabular action values; absent entries read as zero.
class QStore {
 public:
  explicit QStore(NodeId owner = kGlobalOwner) : owner_(owner) {}

  NodeId owner() const { return owner_; }
  double value(StateKey s, const RoutingAction& a) const;
  void set(StateKey s, const RoutingAction& a, double v);
  std::size_t size() const { return table_.size(); }
  /// Largest |Q| stored (0 when empty).
  double max_abs() const;
  /// max over `actions` of Q(s, a); 0 for an empty action set.
  double max_value(StateKey s, std::span<const RoutingAction> actions) const;

  /// "state_key action_code value" lines sorted by (state, action).
  void save(std::ostream& out) const;
  static QStore load(std::istream& in, NodeId owner = kGlobalOwner);

  friend bool operator==(const QStore& a, const QStore& b) {
    return a.owner_ == b.owner_ && a.table_ == b.table_;
  }

 private:
  static std::uint64_t pack(StateKey s, const RoutingAction& a);

  NodeId owner_;
  std::unordered_map<std::uint64_t, double> table_;
};

struct RlParams {
  double alpha = 0.1;
  double gamma = 0.9;
  double epsilon = 0.3;
  double epsilon_decay = 0.98;
  double epsilon_floor = 0.05;

  void validate() const;
  double decayed(double eps) const;

  friend bool operator==(const RlParams&, const RlParams&) = default;
};

/// Snapshot an agent observes. All spans are indexed by node id.
struct ObservationContext {
  const CommGraph& graph;
  const EnergyLedger& ledger;
  std::span<const Role> roles;
  std::span<const int> hops_to_sink;  // from hop_distances / hops_to, -1 = unreachable
  std::span<const int> buffer;        // packets held this episode
  NodeId transmitter = kNoNode;
  Point sink_position{};
  double diagonal = 1.0;
  int buffer_capacity = 10;
};

StateVector observe_state(NodeId node, const ObservationContext& ctx);

/// TransmitTo per alive fused-graph neighbour (ascending id), then Sleep, Drop,
/// and RequestTransmitter when the node's SoC reaches the 70th percentile of
/// alive SoC.
std::vector<RoutingAction> feasible_actions(NodeId node, const FusedGraph& fg,
                                            const EnergyLedger& ledger);

/// Epsilon-greedy. One uniform draw decides explore vs exploit; exploring
/// draws a uniform action index. Greedy ties go to `preferred` when it is among
/// the maximisers, otherwise to the first maximiser in `actions` order.
RoutingAction select_action(const QStore& q, const StateVector& s,
                            std::span<const RoutingAction> actions, double epsilon, Rng& rng,
                            std::optional<RoutingAction> preferred = std::nullopt);

enum class RewardEvent : std::uint8_t {
  DeliveredToSink,
  Forwarded,
  SensedAndSent,
  Slept,
  Dropped,
  AvoidedHighCentrality,
  OverusedNode,
  NoNodeFailure,
  VarianceDecreased,
  HighAverageEnergy,
};

/// Reward table applied per event.
struct RewardSchedule {
  double deliver_to_sink = 10.0;
  double forward = 5.0;
  double sense_and_send = 3.0;
  double sleep = 1.0;
  double drop = 0.0;
  double avoid_centrality = 2.0;
  double overuse_penalty = 4.0;  // magnitude; applied with a negative sign
  double no_failure = 3.0;
  double variance_decrease = 2.0;
  double high_average = 2.0;
  double high_average_threshold = 40.0;  // percent SoC

  void validate() const;
  double value(RewardEvent e) const;
  /// Upper bound on |reward| of one step, for Q-value sanity bounds.
  double max_abs_step_reward() const;

  friend bool operator==(const RewardSchedule&, const RewardSchedule&) = default;
};

double compute_reward(std::span<const RewardEvent> events, const RewardSchedule& schedule = {});

/// Q(s,a) <- Q(s,a) + alpha [r + gamma max_a' Q(s',a') - Q(s,a)].
/// An empty `actions_next` marks a terminal successor (max term 0).
void q_update(QStore& q, const StateVector& s, const RoutingAction& a, double reward,
              const StateVector& s_next, std::span<const RoutingAction> actions_next,
              const RlParams& params);

}  // namespace wsn
