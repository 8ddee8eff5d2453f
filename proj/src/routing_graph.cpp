#include "wsn/routing_graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <queue>
#include <stack>
#include <string>

#include "wsn/errors.hpp"

namespace wsn {
namespace {

bool nearly_equal(double a, double b) {
  return std::abs(a - b) <= 1e-12 * std::max({1.0, std::abs(a), std::abs(b)});
}

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<int> rank_;
};

ArcMap empty_arc_map(const CommGraph& graph, double fill) {
  ArcMap out(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    out[i].assign(graph.neighbors(static_cast<NodeId>(i)).size(), fill);
  }
  return out;
}

void check_shape(const CommGraph& graph, const ArcMap& map, const char* what) {
  bool ok = map.size() == graph.size();
  for (std::size_t i = 0; ok && i < map.size(); ++i) {
    ok = map[i].size() == graph.neighbors(static_cast<NodeId>(i)).size();
  }
  if (!ok) throw std::invalid_argument(std::string("fuse: ") + what + " does not match the graph");
}

}  // namespace

ArcMap mera_weights(const CommGraph& graph, const EnergyLedger& ledger) {
  ArcMap out = empty_arc_map(graph, kInfiniteWeight);
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const auto nbs = graph.neighbors(static_cast<NodeId>(i));
    for (std::size_t k = 0; k < nbs.size(); ++k) {
      const double energy = ledger.soc(nbs[k].id) / 100.0;
      out[i][k] = energy > 0.0 ? 1.0 / energy : kInfiniteWeight;
    }
  }
  return out;
}

MstResult mst_weights(const CommGraph& graph, double off_tree_penalty,
                      std::span<const std::uint8_t> mask) {
  if (!(off_tree_penalty >= 1.0)) throw ConfigError("routing.off_tree_penalty: must be >= 1");
  auto included = [&](NodeId id) { return mask.empty() || mask[static_cast<std::size_t>(id)] != 0; };

  std::vector<Edge> sorted = graph.edges();
  std::sort(sorted.begin(), sorted.end(), [](const Edge& x, const Edge& y) {
    if (x.distance != y.distance) return x.distance < y.distance;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });

  MstResult result;
  DisjointSets sets(graph.size());
  std::vector<std::vector<NodeId>> tree_nbrs(graph.size());
  for (const auto& e : sorted) {
    if (!included(e.a) || !included(e.b)) continue;
    if (sets.unite(static_cast<std::size_t>(e.a), static_cast<std::size_t>(e.b))) {
      result.tree.push_back(e);
      result.total_weight += e.distance;
      tree_nbrs[static_cast<std::size_t>(e.a)].push_back(e.b);
      tree_nbrs[static_cast<std::size_t>(e.b)].push_back(e.a);
    }
  }

  result.weights = empty_arc_map(graph, 0.0);
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const auto nbs = graph.neighbors(static_cast<NodeId>(i));
    const auto& tn = tree_nbrs[i];
    for (std::size_t k = 0; k < nbs.size(); ++k) {
      const bool on_tree = std::find(tn.begin(), tn.end(), nbs[k].id) != tn.end();
      result.weights[i][k] = on_tree ? nbs[k].distance : nbs[k].distance * off_tree_penalty;
    }
  }
  return result;
}

const FusedArc* FusedGraph::find(NodeId from, NodeId to) const {
  const auto list = arcs(from);
  const auto it = std::lower_bound(list.begin(), list.end(), to,
                                   [](const FusedArc& a, NodeId id) { return a.to < id; });
  return it != list.end() && it->to == to ? &*it : nullptr;
}

std::size_t FusedGraph::arc_count() const {
  std::size_t total = 0;
  for (const auto& list : arcs_) total += list.size();
  return total;
}

FusedGraph fuse(const CommGraph& graph, const ArcMap& w_mera, const ArcMap& w_mst, double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw ConfigError("routing.lambda: must lie in [0,1], got " + std::to_string(lambda));
  }
  check_shape(graph, w_mera, "MERA weight map");
  check_shape(graph, w_mst, "MST weight map");
  std::vector<std::vector<FusedArc>> arcs(graph.size());
  for (std::size_t i = 0; i < graph.size(); ++i) {
    const auto nbs = graph.neighbors(static_cast<NodeId>(i));
    arcs[i].reserve(nbs.size());
    for (std::size_t k = 0; k < nbs.size(); ++k) {
      const double a = w_mera[i][k];
      const double b = w_mst[i][k];
      const double w = (std::isinf(a) || std::isinf(b)) ? kInfiniteWeight
                                                         : lambda * a + (1.0 - lambda) * b;
      arcs[i].push_back({nbs[k].id, nbs[k].distance, a, b, w});
    }
  }
  return FusedGraph(std::move(arcs), lambda);
}

FusedGraph prune(const FusedGraph& fg, double cost_cutoff, const EnergyLedger& ledger) {
  if (!(cost_cutoff > 0.0)) throw ConfigError("prune: cost cutoff must be > 0");
  FusedGraph out;
  out.lambda_ = fg.lambda_;
  out.pruned_ = fg.pruned_;
  out.arcs_.resize(fg.arcs_.size());
  for (std::size_t i = 0; i < fg.arcs_.size(); ++i) {
    const bool from_alive = ledger.alive(static_cast<NodeId>(i));
    for (const auto& arc : fg.arcs_[i]) {
      const bool keep = from_alive && ledger.alive(arc.to) && std::isfinite(arc.w_final) &&
                        arc.w_final <= cost_cutoff;
      if (keep) {
        out.arcs_[i].push_back(arc);
      } else {
        ++out.pruned_;
      }
    }
  }
  return out;
}

double default_cost_cutoff(const FusedGraph& fg, double factor) {
  std::vector<double> finite;
  for (std::size_t i = 0; i < fg.size(); ++i) {
    for (const auto& arc : fg.arcs(static_cast<NodeId>(i))) {
      if (std::isfinite(arc.w_final)) finite.push_back(arc.w_final);
    }
  }
  if (finite.empty()) return 0.0;
  std::sort(finite.begin(), finite.end());
  const auto n = finite.size();
  const double median = n % 2 == 1 ? finite[n / 2] : 0.5 * (finite[n / 2 - 1] + finite[n / 2]);
  return factor * median;
}

int max_hops(double attenuation_pct, double integrity_floor, int hop_cap) {
  if (!(attenuation_pct > 0.0 && attenuation_pct < 100.0)) {
    throw ConfigError("routing.attenuation_pct: must lie in (0,100)");
  }
  if (!(integrity_floor > 0.0 && integrity_floor < 1.0)) {
    throw ConfigError("routing.integrity_floor: must lie in (0,1)");
  }
  if (hop_cap < 1) throw ConfigError("routing.hop_cap: must be >= 1");
  const double keep = 1.0 - attenuation_pct / 100.0;
  const double floor_tol = integrity_floor * (1.0 - 1e-12);
  int hops = 0;
  double integrity = 1.0;
  while (hops < hop_cap) {
    integrity *= keep;
    if (integrity < floor_tol) break;
    ++hops;
  }
  if (hops < 1) {
    throw ConfigError("routing: a single hop already violates the integrity floor");
  }
  return hops;
}

std::vector<CandidatePath> enumerate_paths(const FusedGraph& fg, NodeId src, NodeId dst, int h_max,
                                           std::size_t k_max) {
  const auto n = fg.size();
  if (src < 0 || dst < 0 || static_cast<std::size_t>(src) >= n || static_cast<std::size_t>(dst) >= n) {
    throw std::out_of_range("enumerate_paths: node id out of range");
  }
  if (src == dst) throw std::invalid_argument("enumerate_paths: src == dst");
  if (h_max < 1 || k_max == 0) return {};

  // lower[h][v]: cheapest fused weight from v to dst using at most h arcs.
  const auto H = static_cast<std::size_t>(h_max);
  std::vector<std::vector<double>> lower(H + 1, std::vector<double>(n, kInfiniteWeight));
  lower[0][static_cast<std::size_t>(dst)] = 0.0;
  for (std::size_t h = 1; h <= H; ++h) {
    lower[h] = lower[h - 1];
    for (std::size_t v = 0; v < n; ++v) {
      for (const auto& arc : fg.arcs(static_cast<NodeId>(v))) {
        const double via = arc.w_final + lower[h - 1][static_cast<std::size_t>(arc.to)];
        if (via < lower[h][v]) lower[h][v] = via;
      }
    }
  }
  if (!std::isfinite(lower[H][static_cast<std::size_t>(src)])) return {};

  struct Partial {
    double bound;
    double weight;
    std::vector<NodeId> nodes;
  };
  auto later = [](const Partial& x, const Partial& y) {
    if (x.bound != y.bound) return x.bound > y.bound;
    return x.nodes > y.nodes;
  };
  std::priority_queue<Partial, std::vector<Partial>, decltype(later)> open(later);
  open.push({lower[H][static_cast<std::size_t>(src)], 0.0, {src}});

  std::vector<CandidatePath> found;
  double kth = kInfiniteWeight;
  while (!open.empty()) {
    if (found.size() >= k_max) {
      const double slack = 1e-9 * std::max(1.0, std::abs(kth));
      if (open.top().bound > kth + slack) break;
    }
    Partial cur = open.top();
    open.pop();
    const NodeId v = cur.nodes.back();
    if (v == dst) {
      found.push_back({std::move(cur.nodes), cur.weight, 0.0});
      if (found.size() == k_max) kth = found.back().total_weight;
      continue;
    }
    const auto used = cur.nodes.size() - 1;
    const auto remaining = H - used - 1;
    for (const auto& arc : fg.arcs(v)) {
      const double rest = lower[remaining][static_cast<std::size_t>(arc.to)];
      if (!std::isfinite(rest) || !std::isfinite(arc.w_final)) continue;
      if (std::find(cur.nodes.begin(), cur.nodes.end(), arc.to) != cur.nodes.end()) continue;
      Partial next{0.0, cur.weight + arc.w_final, cur.nodes};
      next.bound = next.weight + rest;
      next.nodes.push_back(arc.to);
      open.push(std::move(next));
    }
  }

  std::sort(found.begin(), found.end(), [](const CandidatePath& x, const CandidatePath& y) {
    if (x.total_weight != y.total_weight) return x.total_weight < y.total_weight;
    return x.nodes < y.nodes;
  });
  if (found.size() > k_max) found.resize(k_max);
  return found;
}

double path_soc_variance(std::span<const NodeId> nodes, const EnergyLedger& ledger) {
  if (nodes.size() < 2) throw std::invalid_argument("path_soc_variance: path needs >= 2 nodes");
  double mean = 0.0;
  for (NodeId id : nodes) mean += ledger.soc(id);
  mean /= static_cast<double>(nodes.size());
  double acc = 0.0;
  for (NodeId id : nodes) {
    const double d = ledger.soc(id) - mean;
    acc += d * d;
  }
  return acc / static_cast<double>(nodes.size() - 1);
}

std::optional<CandidatePath> select_min_variance_path(std::span<const CandidatePath> paths,
                                                      const EnergyLedger& ledger) {
  std::optional<CandidatePath> best;
  for (const auto& p : paths) {
    CandidatePath scored = p;
    scored.soc_variance = path_soc_variance(p.nodes, ledger);
    if (!best) {
      best = std::move(scored);
      continue;
    }
    bool better;
    if (!nearly_equal(scored.soc_variance, best->soc_variance)) {
      better = scored.soc_variance < best->soc_variance;
    } else if (scored.hop_count() != best->hop_count()) {
      better = scored.hop_count() < best->hop_count();
    } else {
      better = scored.nodes < best->nodes;
    }
    if (better) best = std::move(scored);
  }
  return best;
}

std::vector<double> betweenness_centrality(const FusedGraph& fg) {
  const auto n = fg.size();
  std::vector<double> centrality(n, 0.0);
  std::vector<double> dist(n);
  std::vector<double> sigma(n);
  std::vector<double> delta(n);
  std::vector<std::vector<NodeId>> preds(n);
  using Item = std::pair<double, NodeId>;

  for (std::size_t s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), kInfiniteWeight);
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    for (auto& p : preds) p.clear();
    std::vector<NodeId> order;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[s] = 0.0;
    sigma[s] = 1.0;
    heap.push({0.0, static_cast<NodeId>(s)});
    std::vector<std::uint8_t> done(n, 0);
    while (!heap.empty()) {
      const auto [d, v] = heap.top();
      heap.pop();
      const auto vi = static_cast<std::size_t>(v);
      if (done[vi]) continue;
      done[vi] = 1;
      order.push_back(v);
      for (const auto& arc : fg.arcs(v)) {
        if (!std::isfinite(arc.w_final)) continue;
        const auto u = static_cast<std::size_t>(arc.to);
        const double nd = d + arc.w_final;
        if (done[u]) continue;
        if (std::isfinite(dist[u]) && nearly_equal(nd, dist[u])) {
          sigma[u] += sigma[vi];
          preds[u].push_back(v);
        } else if (nd < dist[u]) {
          dist[u] = nd;
          sigma[u] = sigma[vi];
          preds[u] = {v};
          heap.push({nd, arc.to});
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto w = static_cast<std::size_t>(*it);
      for (NodeId v : preds[w]) {
        const auto vi = static_cast<std::size_t>(v);
        delta[vi] += sigma[vi] / sigma[w] * (1.0 + delta[w]);
      }
      if (w != s) centrality[w] += delta[w];
    }
  }
  return centrality;
}

std::vector<int> hops_to(const FusedGraph& fg, NodeId dst) {
  const auto n = fg.size();
  std::vector<std::vector<NodeId>> reverse(n);
  for (std::size_t v = 0; v < n; ++v) {
    for (const auto& arc : fg.arcs(static_cast<NodeId>(v))) {
      reverse[static_cast<std::size_t>(arc.to)].push_back(static_cast<NodeId>(v));
    }
  }
  std::vector<int> dist(n, -1);
  if (dst < 0 || static_cast<std::size_t>(dst) >= n) return dist;
  std::deque<NodeId> frontier{dst};
  dist[static_cast<std::size_t>(dst)] = 0;
  while (!frontier.empty()) {
    const NodeId v = frontier.front();
    frontier.pop_front();
    for (NodeId u : reverse[static_cast<std::size_t>(v)]) {
      if (dist[static_cast<std::size_t>(u)] >= 0) continue;
      dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + 1;
      frontier.push_back(u);
    }
  }
  return dist;
}

}  // namespace wsn
