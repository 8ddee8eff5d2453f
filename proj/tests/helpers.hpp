#pragma once

#include <vector>

#include "wsn/energy.hpp"
#include "wsn/rng.hpp"
#include "wsn/routing_graph.hpp"
#include "wsn/topology.hpp"

namespace testutil {

inline wsn::CommGraph line_graph(int n, double spacing = 1.0, double radius = 1.0) {
  std::vector<wsn::Point> pts;
  for (int i = 0; i < n; ++i) pts.push_back({i * spacing, 0.0, 0.0});
  return wsn::build_comm_graph(wsn::place_nodes(wsn::Region::square(n * spacing + 1.0), pts), radius, 0);
}

inline wsn::CommGraph graph_of(const std::vector<wsn::Point>& pts, double radius, double side = 10.0) {
  return wsn::build_comm_graph(wsn::place_nodes(wsn::Region::square(side), pts), radius, 0);
}

// Random 2-D instance in a side x side square.
inline wsn::CommGraph random_graph(int n, double side, double radius, std::uint64_t seed) {
  return wsn::build_comm_graph(wsn::deploy_nodes(wsn::Region::square(side), n, seed), radius, 0);
}

inline void random_soc(wsn::EnergyLedger& ledger, wsn::Rng& rng, double lo = 5.0, double hi = 100.0) {
  for (std::size_t i = 0; i < ledger.size(); ++i) {
    // whole percent steps keep ties common enough to exercise tie-breaks
    const double v = lo + static_cast<double>(wsn::uniform_index(rng, static_cast<std::size_t>(hi - lo) + 1));
    ledger.set_soc(static_cast<wsn::NodeId>(i), v);
  }
}

inline wsn::FusedGraph fused_of(const wsn::CommGraph& g, const wsn::EnergyLedger& ledger, double lambda = 0.5) {
  const auto mera = wsn::mera_weights(g, ledger);
  const auto mst = wsn::mst_weights(g, 3.0, ledger.alive_mask());
  return wsn::fuse(g, mera, mst.weights, lambda);
}

}  // namespace testutil
