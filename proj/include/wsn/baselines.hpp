#pragma once

#include <optional>
#include <vector>

#include "wsn/energy.hpp"
#include "wsn/rng.hpp"
#include "wsn/topology.hpp"

namespace wsn {

/// Minimum-hop path over the alive subgraph, ignoring energy. Among equal-hop
/// paths the lexicographically smallest node list wins. nullopt when src and
/// dst are disconnected.
std::optional<std::vector<NodeId>> spmh_route(const CommGraph& graph, const EnergyLedger& ledger,
                                              NodeId src, NodeId dst);

struct SingleHopOptions {
  bool strict_range = false;
  double sink_cost = 8.0;  // base charge for an out-of-range attempt
};

struct SingleHopRoute {
  bool feasible = false;
  std::vector<NodeId> path;     // {src, target} when feasible
  bool long_range = false;      // target beyond coverage radius
  double cost_multiplier = 1.0; // distance / radius for long-range attempts
  double long_range_cost = 0.0; // sink_cost * cost_multiplier
};

/// Direct transmission from `src` to `target`. In range: a plain one-hop path.
/// Out of range: dropped under strict_range, otherwise charged
/// sink_cost * (distance / radius).
SingleHopRoute single_hop_route(const CommGraph& graph, NodeId src, NodeId target,
                                const SingleHopOptions& options);

/// Cluster-head bookkeeping across rounds of the clustering baseline.
class LeachState {
 public:
  explicit LeachState(std::size_t n) : last_head_cycle_(n, -1) {}
  bool served_in_cycle(NodeId id, int cycle) const {
    return last_head_cycle_.at(static_cast<std::size_t>(id)) == cycle;
  }
  void mark_head(NodeId id, int cycle) { last_head_cycle_.at(static_cast<std::size_t>(id)) = cycle; }

 private:
  std::vector<int> last_head_cycle_;
};

struct LeachRound {
  std::vector<NodeId> heads;        // ascending id
  std::vector<NodeId> head_of;      // per node: its cluster head (itself for heads), -1 if dead
  bool forced = false;              // no node passed the threshold; max-SoC node drafted
};

/// Election threshold p / (1 - p (round mod 1/p)) for a node that has not
/// served as head in the current cycle, 0 otherwise.
double leach_threshold(double p, int round, bool served_this_cycle);

/// One election round: every alive eligible node (ascending id) draws once
/// against the threshold; members join the nearest head.
LeachRound leach_round(const CommGraph& graph, const EnergyLedger& ledger, LeachState& state,
                       int round, double p, Rng& rng);

int leach_cycle_length(double p);

}  // namespace wsn
