#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace wsn {

using NodeId = std::int32_t;
inline constexpr NodeId kNoNode = -1;

using Point = std::array<double, 3>;

/// Per-node inclusion flags (1 = included).
using NodeMask = std::vector<std::uint8_t>;

double euclidean(const Point& a, const Point& b);

/// Axis-aligned deployment area. Two-dimensional regions keep z = 0.
struct Region {
  int dimensions = 2;
  Point extents{100.0, 100.0, 0.0};

  static Region square(double side) { return {2, {side, side, 0.0}}; }
  static Region cube(double side) { return {3, {side, side, side}}; }

  void validate() const;
  bool contains(const Point& p) const;
  Point center() const;
  double diagonal() const;

  friend bool operator==(const Region&, const Region&) = default;
};

enum class Role : std::uint8_t { Sensor, Forwarder, Transmitter };

const char* to_string(Role role);

struct NodeRecord {
  NodeId id = kNoNode;
  Point position{};
  Role role = Role::Sensor;
  int buffer_len = 0;
};

/// Uniform random placement of `n` nodes; ids follow creation order.
std::vector<NodeRecord> deploy_nodes(const Region& region, int n, std::uint64_t seed);

/// Nodes at explicit coordinates (regression fixtures, config-supplied layouts).
std::vector<NodeRecord> place_nodes(const Region& region, std::span<const Point> positions);

struct Neighbor {
  NodeId id;
  double distance;
};

struct Edge {
  NodeId a;  // a < b
  NodeId b;
  double distance;
};

/// Unit-disk communication graph: an undirected edge joins every pair of nodes
/// whose euclidean distance is at most the coverage radius (boundary inclusive).
class CommGraph {
 public:
  CommGraph(std::vector<NodeRecord> nodes, double radius, NodeId sink);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<NodeRecord>& nodes() const { return nodes_; }
  const NodeRecord& node(NodeId id) const { return nodes_.at(static_cast<std::size_t>(id)); }
  std::span<const Neighbor> neighbors(NodeId id) const {
    return adjacency_.at(static_cast<std::size_t>(id));
  }
  const std::vector<Edge>& edges() const { return edges_; }
  NodeId sink() const { return sink_; }
  double radius() const { return radius_; }
  double distance(NodeId a, NodeId b) const;

  /// Ids of nodes with no path to the sink, ascending.
  std::vector<NodeId> unreachable_from_sink() const;

 private:
  std::vector<NodeRecord> nodes_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<Edge> edges_;
  double radius_;
  NodeId sink_;
};

CommGraph build_comm_graph(std::vector<NodeRecord> nodes, double radius, NodeId sink);

/// The node closest to `p`; ties go to the lowest id. `mask`, when non-empty,
/// restricts the search to nodes whose entry is true.
NodeId nearest_node(std::span<const NodeRecord> nodes, const Point& p,
                    std::span<const std::uint8_t> mask = {});

/// Unweighted hop distances from `root` over the graph restricted to `mask`
/// (all nodes when empty). Unreachable nodes get -1.
std::vector<int> hop_distances(const CommGraph& graph, NodeId root, std::span<const std::uint8_t> mask = {});

}  // namespace wsn
