#include "epirep/topology.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <utility>

#include "epirep/error.hpp"

namespace epirep {

const char* to_string(Role r) {
  switch (r) {
    case Role::Free: return "free";
    case Role::Probationer: return "probationer";
    case Role::Member: return "member";
    case Role::ClusterHead: return "cluster_head";
    case Role::RelayExcluded: return "relay_excluded";
  }
  return "?";
}

Motion update_location(Vec2 loc, double speed, Vec2 dir, const Region& region) {
  if (std::abs(dir.norm() - 1.0) > 1e-9) {
    throw InvalidArgument("update_location: direction is not a unit vector");
  }
  if (speed < 0) throw InvalidArgument("update_location: speed must be >= 0");

  Vec2 p = loc + dir * speed;
  auto reflect = [](double& x, double& d, double hi) {
    // Speeds larger than the region fold back more than once.
    while (x < 0 || x > hi) {
      if (x > hi) x = 2 * hi - x;
      else x = -x;
      d = -d;
      if (hi == 0) {
        x = 0;
        break;
      }
    }
  };
  reflect(p.x, dir.x, region.width);
  reflect(p.y, dir.y, region.height);
  return {p, dir};
}

bool Graph::has_edge(NodeId u, NodeId v) const {
  if (u >= adj_.size() || v >= adj_.size()) return false;
  const auto& a = adj_[u];
  return std::binary_search(a.begin(), a.end(), v);
}

std::size_t Graph::edge_count() const {
  std::size_t total = 0;
  for (const auto& a : adj_) total += a.size();
  return total / 2;
}

std::vector<std::pair<NodeId, NodeId>> Graph::edges() const {
  std::vector<std::pair<NodeId, NodeId>> out;
  for (NodeId u = 0; u < adj_.size(); ++u) {
    for (NodeId v : adj_[u]) {
      if (u < v) out.emplace_back(u, v);
    }
  }
  return out;
}

Graph Graph::from_adjacency(std::vector<std::vector<NodeId>> adj) {
  Graph g;
  g.adj_ = std::move(adj);
  return g;
}

void Graph::add_edge(NodeId u, NodeId v) {
  if (u == v) return;
  auto insert = [](std::vector<NodeId>& a, NodeId x) {
    auto it = std::lower_bound(a.begin(), a.end(), x);
    if (it == a.end() || *it != x) a.insert(it, x);
  };
  insert(adj_[u], v);
  insert(adj_[v], u);
}

void Graph::remove_node_edges(NodeId u) {
  for (NodeId v : adj_[u]) {
    auto& a = adj_[v];
    a.erase(std::remove(a.begin(), a.end(), u), a.end());
  }
  adj_[u].clear();
}

Graph connectivity_graph(std::span<const NodeState> nodes, double radio_range) {
  if (!(radio_range > 0)) throw InvalidArgument("connectivity_graph: radio_range must be > 0");

  // Sweep along x: only nodes within radio_range in x can be neighbors.
  std::vector<NodeId> order;
  for (NodeId u = 0; u < nodes.size(); ++u) {
    if (nodes[u].alive()) order.push_back(u);
  }
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    if (nodes[a].loc.x != nodes[b].loc.x) return nodes[a].loc.x < nodes[b].loc.x;
    return a < b;
  });

  std::vector<std::vector<NodeId>> adj(nodes.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    const NodeId u = order[i];
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const NodeId v = order[j];
      if (nodes[v].loc.x - nodes[u].loc.x > radio_range) break;
      const Vec2 d = nodes[u].loc - nodes[v].loc;
      const double d2 = d.x * d.x + d.y * d.y;
      const double r2 = radio_range * radio_range;
      const bool near_edge = std::abs(d2 - r2) <= 1e-9 * r2;
      if (near_edge ? distance(nodes[u].loc, nodes[v].loc) <= radio_range : d2 <= r2) {
        adj[u].push_back(v);
        adj[v].push_back(u);
      }
    }
  }
  for (auto& a : adj) std::sort(a.begin(), a.end());
  return Graph::from_adjacency(std::move(adj));
}

ProbationResult probation_update(const NodeState& node, Tick now, Tick probation_ticks,
                                 std::size_t neighbor_count, std::size_t min_density) {
  if (neighbor_count + 1 < min_density) return {Role::RelayExcluded, std::nullopt};

  switch (node.role) {
    case Role::Free:
    case Role::RelayExcluded:
      if (probation_ticks <= 0) return {Role::Member, now};
      return {Role::Probationer, now};
    case Role::Probationer: {
      const Tick joined = node.joined_cluster_at.value_or(now);
      if (now - joined >= probation_ticks) return {Role::Member, joined};
      return {Role::Probationer, joined};
    }
    case Role::Member:
    case Role::ClusterHead:
      return {node.role, node.joined_cluster_at};
  }
  return {node.role, node.joined_cluster_at};
}

bool ClusterView::contains(NodeId v) const {
  return std::binary_search(members.begin(), members.end(), v);
}

std::vector<ClusterView> form_clusters(const Graph& graph, std::span<const NodeState> nodes,
                                       Tick now, unsigned zone_radius_hops) {
  if (zone_radius_hops < 1) throw InvalidArgument("form_clusters: zone radius must be >= 1");

  std::vector<NodeId> order;
  for (const auto& n : nodes) {
    if (post_probation(n.role) && n.alive()) order.push_back(n.id);
  }
  std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
    const auto ca = nodes[a].residual_capacity();
    const auto cb = nodes[b].residual_capacity();
    if (ca != cb) return ca > cb;
    return a < b;
  });

  std::vector<bool> eligible(nodes.size(), false);
  for (NodeId v : order) eligible[v] = true;
  std::vector<bool> assigned(nodes.size(), false);

  std::vector<ClusterView> out;
  for (NodeId head : order) {
    if (assigned[head]) continue;
    const auto hops = graph.hops_from(
        head, [&](NodeId v) { return eligible[v] && !assigned[v]; }, zone_radius_hops);

    ClusterView c;
    c.id = head;
    c.head = head;
    c.formed_at = now;
    for (NodeId v = 0; v < hops.size(); ++v) {
      if (hops[v] != SIZE_MAX) c.members.push_back(v);
    }
    for (NodeId v : c.members) assigned[v] = true;
    for (NodeId u : c.members) {
      for (NodeId v : graph.neighbors(u)) {
        if (u < v && c.contains(v)) ++c.edges;
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

GetTree build_get_tree(const ClusterView& cluster, const Graph& graph,
                       std::span<const double> energies) {
  if (cluster.members.empty()) throw InvalidArgument("build_get_tree: empty cluster");

  GetTree tree;
  tree.root = *std::min_element(cluster.members.begin(), cluster.members.end(),
                                [&](NodeId a, NodeId b) {
                                  if (energies[a] != energies[b]) return energies[a] < energies[b];
                                  return a < b;
                                });
  const double root_energy = energies[tree.root];
  const auto hops = graph.hops_from(tree.root, [](NodeId) { return true; }, 2);

  auto by_energy_desc = [&](NodeId a, NodeId b) {
    if (energies[a] != energies[b]) return energies[a] > energies[b];
    return a < b;
  };

  std::vector<NodeId> ring1;
  std::vector<NodeId> ring2;
  for (NodeId v : cluster.members) {
    if (v == tree.root || !(energies[v] > root_energy)) continue;
    if (hops[v] == 1) ring1.push_back(v);
    else if (hops[v] == 2) ring2.push_back(v);
  }
  std::sort(ring1.begin(), ring1.end(), by_energy_desc);
  std::sort(ring2.begin(), ring2.end(), by_energy_desc);

  for (NodeId v : ring1) tree.children.emplace_back(tree.root, v);
  if (!ring1.empty()) tree.depth = 1;
  for (NodeId v : ring2) {
    // Attach under the most energetic first-ring node that can hear it.
    for (NodeId p : ring1) {
      if (graph.has_edge(p, v)) {
        tree.children.emplace_back(p, v);
        tree.depth = 2;
        break;
      }
    }
  }
  return tree;
}

bool get_tree_valid(const GetTree& tree, const Graph& graph, std::span<const double> energies) {
  std::unordered_map<NodeId, unsigned> depth{{tree.root, 0}};
  const double root_energy = energies[tree.root];
  unsigned max_depth = 0;
  for (const auto& [parent, child] : tree.children) {
    auto it = depth.find(parent);
    if (it == depth.end()) return false;
    if (depth.contains(child)) return false;
    if (!graph.has_edge(parent, child)) return false;
    if (!(energies[child] > root_energy)) return false;
    const unsigned d = it->second + 1;
    if (d > 2) return false;
    depth[child] = d;
    max_depth = std::max(max_depth, d);
  }
  return max_depth == tree.depth;
}

double ReachabilityModel::cost(double d) const {
  const double x = d / decay;
  if (exponent == 1.0) return x;
  if (exponent == 2.0) return x * x;
  return std::pow(x, exponent);
}

double ReachabilityModel::hop(double d) const { return std::exp(-cost(d)); }

RelayRegion relay_region(const NodeState& u, const NodeState& w, const ReachabilityModel& model) {
  if (u.id == w.id) throw InvalidArgument("relay_region: transmitter and relay must differ");
  return RelayRegion(u.loc, w.loc, model);
}

}  // namespace epirep
