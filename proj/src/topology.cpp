#include "wsn/topology.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "wsn/errors.hpp"
#include "wsn/rng.hpp"

namespace wsn {

double euclidean(const Point& a, const Point& b) {
  return std::hypot(a[0] - b[0], a[1] - b[1], a[2] - b[2]);
}

void Region::validate() const {
  if (dimensions != 2 && dimensions != 3) {
    throw ConfigError("region: dimensions must be 2 or 3, got " + std::to_string(dimensions));
  }
  for (int axis = 0; axis < dimensions; ++axis) {
    if (!(extents[axis] > 0.0) || !std::isfinite(extents[axis])) {
      throw ConfigError("region: extent on axis " + std::to_string(axis) + " must be > 0");
    }
  }
}

bool Region::contains(const Point& p) const {
  for (int axis = 0; axis < 3; ++axis) {
    const double hi = axis < dimensions ? extents[axis] : 0.0;
    if (p[axis] < 0.0 || p[axis] > hi) return false;
  }
  return true;
}

Point Region::center() const {
  Point c{};
  for (int axis = 0; axis < dimensions; ++axis) c[axis] = extents[axis] / 2.0;
  return c;
}

double Region::diagonal() const {
  return euclidean(Point{}, Point{extents[0], extents[1], dimensions == 3 ? extents[2] : 0.0});
}

const char* to_string(Role role) {
  switch (role) {
    case Role::Sensor: return "sensor";
    case Role::Forwarder: return "forwarder";
    case Role::Transmitter: return "transmitter";
  }
  return "?";
}

std::vector<NodeRecord> deploy_nodes(const Region& region, int n, std::uint64_t seed) {
  region.validate();
  if (n < 1) throw ConfigError("node_count: need at least 1 node, got " + std::to_string(n));
  Rng rng(seed);
  std::vector<NodeRecord> nodes(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& node = nodes[static_cast<std::size_t>(i)];
    node.id = i;
    for (int axis = 0; axis < region.dimensions; ++axis) {
      node.position[axis] = uniform01(rng) * region.extents[axis];
    }
  }
  return nodes;
}

std::vector<NodeRecord> place_nodes(const Region& region, std::span<const Point> positions) {
  region.validate();
  if (positions.empty()) throw ConfigError("positions: need at least 1 node");
  std::vector<NodeRecord> nodes(positions.size());
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (!region.contains(positions[i])) {
      throw ConfigError("positions[" + std::to_string(i) + "]: outside region bounds");
    }
    nodes[i].id = static_cast<NodeId>(i);
    nodes[i].position = positions[i];
  }
  return nodes;
}

CommGraph::CommGraph(std::vector<NodeRecord> nodes, double radius, NodeId sink)
    : nodes_(std::move(nodes)), adjacency_(nodes_.size()), radius_(radius), sink_(sink) {
  if (!(radius > 0.0)) throw ConfigError("coverage_radius: must be > 0");
  if (sink < 0 || static_cast<std::size_t>(sink) >= nodes_.size()) {
    throw ConfigError("sink: node id " + std::to_string(sink) + " out of range");
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id != static_cast<NodeId>(i)) {
      throw ConfigError("nodes: ids must be 0..n-1 in order");
    }
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes_.size(); ++j) {
      const double d = euclidean(nodes_[i].position, nodes_[j].position);
      if (d <= radius && d > 0.0) {
        const auto a = static_cast<NodeId>(i);
        const auto b = static_cast<NodeId>(j);
        edges_.push_back({a, b, d});
        adjacency_[i].push_back({b, d});
        adjacency_[j].push_back({a, d});
      }
    }
  }
  // Pairs were visited in ascending order so every adjacency list is already sorted by id.
}

double CommGraph::distance(NodeId a, NodeId b) const {
  return euclidean(node(a).position, node(b).position);
}

std::vector<NodeId> CommGraph::unreachable_from_sink() const {
  const auto hops = hop_distances(*this, sink_);
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < hops.size(); ++i) {
    if (hops[i] < 0) out.push_back(static_cast<NodeId>(i));
  }
  return out;
}

CommGraph build_comm_graph(std::vector<NodeRecord> nodes, double radius, NodeId sink) {
  return CommGraph(std::move(nodes), radius, sink);
}

NodeId nearest_node(std::span<const NodeRecord> nodes, const Point& p, std::span<const std::uint8_t> mask) {
  NodeId best = kNoNode;
  double best_d = 0.0;
  for (const auto& n : nodes) {
    if (!mask.empty() && !mask[static_cast<std::size_t>(n.id)]) continue;
    const double d = euclidean(n.position, p);
    if (best == kNoNode || d < best_d) {
      best = n.id;
      best_d = d;
    }
  }
  return best;
}

std::vector<int> hop_distances(const CommGraph& graph, NodeId root, std::span<const std::uint8_t> mask) {
  std::vector<int> dist(graph.size(), -1);
  if (root < 0) return dist;
  if (!mask.empty() && !mask[static_cast<std::size_t>(root)]) return dist;
  std::deque<NodeId> frontier{root};
  dist[static_cast<std::size_t>(root)] = 0;
  while (!frontier.empty()) {
    const NodeId v = frontier.front();
    frontier.pop_front();
    for (const auto& nb : graph.neighbors(v)) {
      const auto u = static_cast<std::size_t>(nb.id);
      if (dist[u] >= 0) continue;
      if (!mask.empty() && !mask[u]) continue;
      dist[u] = dist[static_cast<std::size_t>(v)] + 1;
      frontier.push_back(nb.id);
    }
  }
  return dist;
}

}  // namespace wsn
