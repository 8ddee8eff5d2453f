#include "wsn/rl.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "wsn/errors.hpp"

namespace wsn {

std::uint8_t distance_bin(double normalized) {
  const double x = std::clamp(normalized, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::min(kDistanceBins - 1, static_cast<int>(x * kDistanceBins)));
}

std::uint8_t queue_bin(double fill_fraction) {
  if (fill_fraction <= 0.0) return 0;
  return fill_fraction <= 0.5 ? 1 : 2;
}

std::uint8_t hop_bin(int hops) {
  if (hops < 0) return kHopBins - 1;
  return static_cast<std::uint8_t>(std::clamp(hops, 1, kHopBins) - 1);
}

std::uint8_t hotspot_bin(int uses) {
  if (uses <= 0) return 0;
  return uses <= 3 ? 1 : 2;
}

StateKey StateVector::key() const {
  StateKey k = static_cast<StateKey>(soc);
  k = k * kDistanceBins + dist_sink;
  k = k * kDistanceBins + dist_tx;
  k = k * kQueueBins + queue;
  k = k * kHopBins + hops_est;
  k = k * kHotspotBins + hotspot;
  k = k * kSocLevels + static_cast<StateKey>(neigh_energy);
  k = k * kRoles + static_cast<StateKey>(role);
  return k;
}

StateVector StateVector::from_key(StateKey key) {
  if (key >= state_space_size()) throw std::out_of_range("StateVector::from_key");
  StateVector s;
  s.role = static_cast<Role>(key % kRoles);
  key /= kRoles;
  s.neigh_energy = static_cast<SocLevel>(key % kSocLevels);
  key /= kSocLevels;
  s.hotspot = static_cast<std::uint8_t>(key % kHotspotBins);
  key /= kHotspotBins;
  s.hops_est = static_cast<std::uint8_t>(key % kHopBins);
  key /= kHopBins;
  s.queue = static_cast<std::uint8_t>(key % kQueueBins);
  key /= kQueueBins;
  s.dist_tx = static_cast<std::uint8_t>(key % kDistanceBins);
  key /= kDistanceBins;
  s.dist_sink = static_cast<std::uint8_t>(key % kDistanceBins);
  key /= kDistanceBins;
  s.soc = static_cast<SocLevel>(key);
  return s;
}

std::int32_t RoutingAction::code() const {
  switch (kind) {
    case Kind::TransmitTo: return target;
    case Kind::Sleep: return -1;
    case Kind::Drop: return -2;
    case Kind::RequestTransmitter: return -3;
  }
  return -4;
}

RoutingAction RoutingAction::from_code(std::int32_t code) {
  if (code >= 0) return transmit_to(code);
  switch (code) {
    case -1: return sleep();
    case -2: return drop();
    case -3: return request_transmitter();
    default: throw std::invalid_argument("RoutingAction: bad code " + std::to_string(code));
  }
}

std::string to_string(const RoutingAction& action) {
  switch (action.kind) {
    case RoutingAction::Kind::TransmitTo: return "transmit_to(" + std::to_string(action.target) + ")";
    case RoutingAction::Kind::Sleep: return "sleep";
    case RoutingAction::Kind::Drop: return "drop";
    case RoutingAction::Kind::RequestTransmitter: return "request_transmitter";
  }
  return "?";
}

std::uint64_t QStore::pack(StateKey s, const RoutingAction& a) {
  return (static_cast<std::uint64_t>(s) << 32) | static_cast<std::uint32_t>(a.code());
}

double QStore::value(StateKey s, const RoutingAction& a) const {
  const auto it = table_.find(pack(s, a));
  return it == table_.end() ? 0.0 : it->second;
}

void QStore::set(StateKey s, const RoutingAction& a, double v) {
  if (!std::isfinite(v)) throw SimulationError("QStore: non-finite value for " + to_string(a));
  table_[pack(s, a)] = v;
}

double QStore::max_abs() const {
  double m = 0.0;
  for (const auto& [k, v] : table_) m = std::max(m, std::abs(v));
  return m;
}

double QStore::max_value(StateKey s, std::span<const RoutingAction> actions) const {
  if (actions.empty()) return 0.0;
  double best = value(s, actions.front());
  for (const auto& a : actions.subspan(1)) best = std::max(best, value(s, a));
  return best;
}

void QStore::save(std::ostream& out) const {
  std::vector<std::pair<std::uint64_t, double>> rows(table_.begin(), table_.end());
  std::sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) {
    const auto sx = x.first >> 32, sy = y.first >> 32;
    if (sx != sy) return sx < sy;
    return static_cast<std::int32_t>(x.first & 0xFFFFFFFFu) < static_cast<std::int32_t>(y.first & 0xFFFFFFFFu);
  });
  std::ostringstream line;
  line.precision(17);
  for (const auto& [k, v] : rows) {
    line.str("");
    line << (k >> 32) << ' ' << static_cast<std::int32_t>(k & 0xFFFFFFFFu) << ' ' << v << '\n';
    out << line.str();
  }
}

QStore QStore::load(std::istream& in, NodeId owner) {
  QStore q(owner);
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty()) continue;
    std::istringstream fields(text);
    StateKey s = 0;
    std::int32_t code = 0;
    double v = 0.0;
    if (!(fields >> s >> code >> v) || s >= StateVector::state_space_size()) {
      throw IoError("QStore: malformed line " + std::to_string(line_no));
    }
    q.set(s, RoutingAction::from_code(code), v);
  }
  return q;
}

void RlParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("rl.alpha: must lie in (0,1]");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw ConfigError("rl.gamma: must lie in [0,1)");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("rl.epsilon: must lie in [0,1]");
  if (!(epsilon_decay > 0.0 && epsilon_decay <= 1.0)) {
    throw ConfigError("rl.epsilon_decay: must lie in (0,1]");
  }
  if (!(epsilon_floor >= 0.0 && epsilon_floor <= 1.0)) {
    throw ConfigError("rl.epsilon_floor: must lie in [0,1]");
  }
}

double RlParams::decayed(double eps) const {
  return std::max(epsilon_floor, eps * epsilon_decay);
}

StateVector observe_state(NodeId node, const ObservationContext& ctx) {
  const auto& ledger = ctx.ledger;
  if (!ledger.alive(node)) throw SimulationError("observe_state: node is dead");
  const auto i = static_cast<std::size_t>(node);
  const auto& pos = ctx.graph.node(node).position;

  StateVector s;
  s.soc = discretize_soc(ledger.soc(node));
  s.dist_sink = distance_bin(euclidean(pos, ctx.sink_position) / ctx.diagonal);
  s.dist_tx = ctx.transmitter == kNoNode
                  ? static_cast<std::uint8_t>(kDistanceBins - 1)
                  : distance_bin(ctx.graph.distance(node, ctx.transmitter) / ctx.diagonal);
  const double fill = ctx.buffer_capacity > 0
                          ? static_cast<double>(ctx.buffer[i]) / ctx.buffer_capacity
                          : 0.0;
  s.queue = queue_bin(fill);
  s.hops_est = hop_bin(ctx.hops_to_sink[i]);
  s.hotspot = hotspot_bin(ledger.usage(node));

  double sum = 0.0;
  int count = 0;
  for (const auto& nb : ctx.graph.neighbors(node)) {
    if (!ledger.alive(nb.id)) continue;
    sum += ledger.soc(nb.id);
    ++count;
  }
  s.neigh_energy = count == 0 ? SocLevel::VeryLow : discretize_soc(sum / count);
  s.role = ctx.roles[i];
  return s;
}

std::vector<RoutingAction> feasible_actions(NodeId node, const FusedGraph& fg,
                                            const EnergyLedger& ledger) {
  std::vector<RoutingAction> actions;
  for (const auto& arc : fg.arcs(node)) {
    if (ledger.alive(arc.to)) actions.push_back(RoutingAction::transmit_to(arc.to));
  }
  actions.push_back(RoutingAction::sleep());
  actions.push_back(RoutingAction::drop());
  if (ledger.alive(node) && ledger.soc(node) >= alive_soc_percentile(ledger, 0.7)) {
    actions.push_back(RoutingAction::request_transmitter());
  }
  return actions;
}

RoutingAction select_action(const QStore& q, const StateVector& s,
                            std::span<const RoutingAction> actions, double epsilon, Rng& rng,
                            std::optional<RoutingAction> preferred) {
  if (actions.empty()) throw std::invalid_argument("select_action: empty action set");
  const double u = uniform01(rng);
  if (u < epsilon) return actions[uniform_index(rng, actions.size())];

  const StateKey key = s.key();
  double best = q.value(key, actions.front());
  for (const auto& a : actions.subspan(1)) best = std::max(best, q.value(key, a));
  if (preferred) {
    const bool offered = std::find(actions.begin(), actions.end(), *preferred) != actions.end();
    if (offered && q.value(key, *preferred) == best) return *preferred;
  }
  for (const auto& a : actions) {
    if (q.value(key, a) == best) return a;
  }
  return actions.front();
}

void RewardSchedule::validate() const {
  const double values[] = {deliver_to_sink, forward, sense_and_send, sleep, drop, avoid_centrality,
                           overuse_penalty, no_failure, variance_decrease, high_average};
  for (double v : values) {
    if (!std::isfinite(v)) throw ConfigError("rewards: values must be finite");
  }
  if (overuse_penalty < 0.0) throw ConfigError("rewards.overuse_penalty: magnitude must be >= 0");
  if (!(high_average_threshold >= 0.0 && high_average_threshold <= 100.0)) {
    throw ConfigError("rewards.high_average_threshold: must lie in [0,100]");
  }
}

double RewardSchedule::value(RewardEvent e) const {
  switch (e) {
    case RewardEvent::DeliveredToSink: return deliver_to_sink;
    case RewardEvent::Forwarded: return forward;
    case RewardEvent::SensedAndSent: return sense_and_send;
    case RewardEvent::Slept: return sleep;
    case RewardEvent::Dropped: return drop;
    case RewardEvent::AvoidedHighCentrality: return avoid_centrality;
    case RewardEvent::OverusedNode: return -overuse_penalty;
    case RewardEvent::NoNodeFailure: return no_failure;
    case RewardEvent::VarianceDecreased: return variance_decrease;
    case RewardEvent::HighAverageEnergy: return high_average;
  }
  return 0.0;
}

double RewardSchedule::max_abs_step_reward() const {
  const double role = std::max({deliver_to_sink, forward, sense_and_send, sleep, drop});
  const double upper = role + avoid_centrality + no_failure + variance_decrease + high_average;
  const double lower = std::min({deliver_to_sink, forward, sense_and_send, sleep, drop, 0.0}) -
                       overuse_penalty;
  return std::max(std::abs(upper), std::abs(lower));
}

double compute_reward(std::span<const RewardEvent> events, const RewardSchedule& schedule) {
  std::vector<RewardEvent> sorted(events.begin(), events.end());
  std::sort(sorted.begin(), sorted.end());
  double r = 0.0;
  for (auto e : sorted) r += schedule.value(e);
  return r;
}

void q_update(QStore& q, const StateVector& s, const RoutingAction& a, double reward,
              const StateVector& s_next, std::span<const RoutingAction> actions_next,
              const RlParams& params) {
  const StateKey key = s.key();
  const double current = q.value(key, a);
  const double next_best = q.max_value(s_next.key(), actions_next);
  q.set(key, a, current + params.alpha * (reward + params.gamma * next_best - current));
}

}  // namespace wsn
