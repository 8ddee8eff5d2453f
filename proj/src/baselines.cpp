#include "wsn/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wsn/errors.hpp"

namespace wsn {

std::optional<std::vector<NodeId>> spmh_route(const CommGraph& graph, const EnergyLedger& ledger,
                                              NodeId src, NodeId dst) {
  if (!ledger.alive(src) || !ledger.alive(dst)) return std::nullopt;
  if (src == dst) return std::vector<NodeId>{src};
  const auto alive = ledger.alive_mask();
  const auto to_dst = hop_distances(graph, dst, alive);
  int remaining = to_dst[static_cast<std::size_t>(src)];
  if (remaining < 0) return std::nullopt;

  // Walking greedily through the smallest-id neighbour one hop closer yields the
  // lexicographically smallest shortest path.
  std::vector<NodeId> path{src};
  NodeId cur = src;
  while (cur != dst) {
    NodeId next = kNoNode;
    for (const auto& nb : graph.neighbors(cur)) {
      if (to_dst[static_cast<std::size_t>(nb.id)] == remaining - 1) {
        next = nb.id;
        break;
      }
    }
    if (next == kNoNode) throw SimulationError("spmh_route: broken distance field");
    path.push_back(next);
    cur = next;
    --remaining;
  }
  return path;
}

SingleHopRoute single_hop_route(const CommGraph& graph, NodeId src, NodeId target,
                                const SingleHopOptions& options) {
  SingleHopRoute route;
  if (src == target) {
    route.feasible = true;
    route.path = {src};
    return route;
  }
  const double d = graph.distance(src, target);
  if (d <= graph.radius()) {
    route.feasible = true;
    route.path = {src, target};
    return route;
  }
  if (options.strict_range) return route;
  route.feasible = true;
  route.path = {src, target};
  route.long_range = true;
  route.cost_multiplier = d / graph.radius();
  route.long_range_cost = options.sink_cost * route.cost_multiplier;
  return route;
}

int leach_cycle_length(double p) {
  if (!(p > 0.0 && p < 1.0)) throw ConfigError("leach.p: must lie in (0,1)");
  return std::max(1, static_cast<int>(std::lround(1.0 / p)));
}

double leach_threshold(double p, int round, bool served_this_cycle) {
  if (served_this_cycle) return 0.0;
  const int cycle = leach_cycle_length(p);
  const double denom = 1.0 - p * static_cast<double>(round % cycle);
  return denom <= p ? 1.0 : std::min(1.0, p / denom);
}

LeachRound leach_round(const CommGraph& graph, const EnergyLedger& ledger, LeachState& state,
                       int round, double p, Rng& rng) {
  if (round < 0) throw std::invalid_argument("leach_round: negative round");
  const int cycle_len = leach_cycle_length(p);
  const int cycle = round / cycle_len;

  LeachRound out;
  out.head_of.assign(graph.size(), kNoNode);
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const auto id = static_cast<NodeId>(i);
    if (!ledger.alive(id)) continue;
    const double t = leach_threshold(p, round, state.served_in_cycle(id, cycle));
    if (uniform01(rng) < t) out.heads.push_back(id);
  }
  if (out.heads.empty()) {
    NodeId best = kNoNode;
    for (std::size_t i = 0; i < graph.size(); ++i) {
      const auto id = static_cast<NodeId>(i);
      if (!ledger.alive(id)) continue;
      if (best == kNoNode || ledger.soc_units(id) > ledger.soc_units(best)) best = id;
    }
    if (best == kNoNode) return out;
    out.heads.push_back(best);
    out.forced = true;
  }
  for (NodeId h : out.heads) state.mark_head(h, cycle);

  for (std::size_t i = 0; i < graph.size(); ++i) {
    const auto id = static_cast<NodeId>(i);
    if (!ledger.alive(id)) continue;
    NodeId best = kNoNode;
    double best_d = 0.0;
    for (NodeId h : out.heads) {
      const double d = h == id ? 0.0 : graph.distance(id, h);
      if (best == kNoNode || d < best_d) {
        best = h;
        best_d = d;
      }
    }
    out.head_of[i] = best;
  }
  return out;
}

}  // namespace wsn
