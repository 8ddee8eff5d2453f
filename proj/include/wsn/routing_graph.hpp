#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "wsn/energy.hpp"
#include "wsn/topology.hpp"

namespace wsn {

inline constexpr double kInfiniteWeight = std::numeric_limits<double>::infinity();

/// Per-arc values aligned with CommGraph adjacency: `arcs[i][k]` belongs to the
/// directed arc i -> graph.neighbors(i)[k].
using ArcMap = std::vector<std::vector<double>>;

/// Minimum-energy weights: 1 / E_j with E_j the destination SoC scaled to (0,1].
/// Arcs into dead nodes carry kInfiniteWeight.
ArcMap mera_weights(const CommGraph& graph, const EnergyLedger& ledger);

struct MstResult {
  ArcMap weights;             // d on tree arcs, d * off_tree_penalty elsewhere
  std::vector<Edge> tree;     // spanning forest edges, Kruskal order
  double total_weight = 0.0;  // sum of tree edge distances
};

/// Kruskal spanning forest over euclidean distances. `mask` (optional) limits
/// the forest to included nodes; arcs touching excluded nodes keep the
/// off-tree weight.
MstResult mst_weights(const CommGraph& graph, double off_tree_penalty = 3.0,
                      std::span<const std::uint8_t> mask = {});

struct FusedArc {
  NodeId to;
  double distance;
  double w_mera;
  double w_mst;
  double w_final;
};

/// Communication graph re-weighted by the linear MERA/MST blend.
class FusedGraph {
 public:
  FusedGraph() = default;
  FusedGraph(std::vector<std::vector<FusedArc>> arcs, double lambda)
      : arcs_(std::move(arcs)), lambda_(lambda) {}

  std::size_t size() const { return arcs_.size(); }
  std::span<const FusedArc> arcs(NodeId from) const {
    return arcs_.at(static_cast<std::size_t>(from));
  }
  const FusedArc* find(NodeId from, NodeId to) const;
  bool has_arc(NodeId from, NodeId to) const { return find(from, to) != nullptr; }
  std::size_t arc_count() const;
  double lambda() const { return lambda_; }
  std::size_t pruned_count() const { return pruned_; }

  friend FusedGraph prune(const FusedGraph& fg, double cost_cutoff, const EnergyLedger& ledger);

 private:
  std::vector<std::vector<FusedArc>> arcs_;
  double lambda_ = 0.5;
  std::size_t pruned_ = 0;
};

/// w_final = lambda * w_mera + (1 - lambda) * w_mst on every arc.
/// Throws ConfigError when lambda is outside [0,1].
FusedGraph fuse(const CommGraph& graph, const ArcMap& w_mera, const ArcMap& w_mst, double lambda);

/// Drops arcs with infinite weight, weight above `cost_cutoff`, or a dead endpoint.
FusedGraph prune(const FusedGraph& fg, double cost_cutoff, const EnergyLedger& ledger);

/// `factor` times the median finite fused weight (0 when there are no finite arcs).
double default_cost_cutoff(const FusedGraph& fg, double factor = 5.0);

/// Largest H with (1 - attenuation_pct/100)^H >= integrity_floor, capped at `hop_cap`.
int max_hops(double attenuation_pct, double integrity_floor, int hop_cap = 10);

struct CandidatePath {
  std::vector<NodeId> nodes;
  double total_weight = 0.0;   // sum of fused weights along the path
  double soc_variance = 0.0;   // filled by select_min_variance_path

  int hop_count() const { return static_cast<int>(nodes.size()) - 1; }
};

/// Simple paths src -> dst with at most `h_max` hops over the fused graph.
/// When more than `k_max` exist, only the k_max with the lowest total fused
/// weight are returned. Ordered by (total weight, node list).
std::vector<CandidatePath> enumerate_paths(const FusedGraph& fg, NodeId src, NodeId dst, int h_max,
                                           std::size_t k_max);

/// Sample variance (n - 1 denominator) of the SoC of every node on the path.
double path_soc_variance(std::span<const NodeId> nodes, const EnergyLedger& ledger);

/// Argmin of path SoC variance; ties go to fewer hops, then the smaller node list.
/// Empty input yields std::nullopt (no route).
std::optional<CandidatePath> select_min_variance_path(std::span<const CandidatePath> paths,
                                                      const EnergyLedger& ledger);

/// Weighted betweenness centrality (Brandes) over the fused arcs, unnormalised.
std::vector<double> betweenness_centrality(const FusedGraph& fg);

/// Minimum hop counts from every node to `dst` following fused arcs (-1 if unreachable).
std::vector<int> hops_to(const FusedGraph& fg, NodeId dst);

}  // namespace wsn
