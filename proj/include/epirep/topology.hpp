#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "epirep/types.hpp"

namespace epirep {

enum class Role : std::uint8_t { Free, Probationer, Member, ClusterHead, RelayExcluded };

const char* to_string(Role r);

inline bool post_probation(Role r) { return r == Role::Member || r == Role::ClusterHead; }

struct Region {
  double width = 1000.0;
  double height = 1000.0;

  bool contains(Vec2 p) const { return p.x >= 0 && p.x <= width && p.y >= 0 && p.y <= height; }
  bool operator==(const Region&) const = default;
};

struct NodeState {
  NodeId id = 0;
  Vec2 loc;
  double speed = 0.0;  // meters per tick
  Vec2 dir{1.0, 0.0};  // unit heading
  double energy = 0.0;
  unsigned capacity = 0;    // chunk slots
  unsigned used_slots = 0;  // slots taken by live replicas
  std::optional<Tick> joined_cluster_at;
  Role role = Role::Free;

  unsigned residual_capacity() const { return capacity > used_slots ? capacity - used_slots : 0; }
  bool alive() const { return energy > 0.0; }

  bool operator==(const NodeState&) const = default;
};

struct Motion {
  Vec2 loc;
  Vec2 dir;
};

/// L(t) = L(t-1) + speed * dir, reflected at the region walls. A reflection
/// flips the matching heading component. Throws InvalidArgument when `dir`
/// is not a unit vector within 1e-9.
Motion update_location(Vec2 loc, double speed, Vec2 dir, const Region& region);

/// Undirected simple graph with sorted adjacency lists.
class Graph {
 public:
  Graph() = default;
  explicit Graph(std::size_t n) : adj_(n) {}
  /// Takes adjacency lists that are already sorted, symmetric and loop-free.
  static Graph from_adjacency(std::vector<std::vector<NodeId>> adj);

  std::size_t size() const { return adj_.size(); }
  std::span<const NodeId> neighbors(NodeId u) const { return adj_[u]; }
  std::size_t degree(NodeId u) const { return adj_[u].size(); }
  bool has_edge(NodeId u, NodeId v) const;
  std::size_t edge_count() const;
  /// All edges (u < v), ordered.
  std::vector<std::pair<NodeId, NodeId>> edges() const;

  /// Adds u-v once; ignores self-loops and duplicates.
  void add_edge(NodeId u, NodeId v);
  void remove_node_edges(NodeId u);

  /// Hop distances from `src`, entering only nodes accepted by `pass` and
  /// stopping at `limit` hops. Unreached = SIZE_MAX.
  template <class Pass>
  std::vector<std::size_t> hops_from(NodeId src, Pass&& pass, std::size_t limit = SIZE_MAX) const;

  std::vector<std::size_t> hops_from(NodeId src) const {
    return hops_from(src, [](NodeId) { return true; });
  }

  bool operator==(const Graph&) const = default;

 private:
  std::vector<std::vector<NodeId>> adj_;
};

template <class Pass>
std::vector<std::size_t> Graph::hops_from(NodeId src, Pass&& pass, std::size_t limit) const {
  std::vector<std::size_t> dist(adj_.size(), SIZE_MAX);
  std::vector<NodeId> frontier{src};
  dist[src] = 0;
  for (std::size_t d = 0; !frontier.empty() && d < limit; ++d) {
    std::vector<NodeId> next;
    for (NodeId u : frontier) {
      for (NodeId v : adj_[u]) {
        if (dist[v] != SIZE_MAX || !pass(v)) continue;
        dist[v] = d + 1;
        next.push_back(v);
      }
    }
    frontier = std::move(next);
  }
  return dist;
}

/// Disk model: edge iff distance <= radio_range (inclusive), between live
/// nodes. Throws InvalidArgument if radio_range <= 0.
Graph connectivity_graph(std::span<const NodeState> nodes, double radio_range);

struct ProbationResult {
  Role role;
  std::optional<Tick> joined_cluster_at;
};

/// Role after the probation rule. Nodes whose local density (themselves plus
/// radio neighbors) is below `min_density` become RelayExcluded; a node that
/// regains density enters probation at `now`; probationers become members
/// once `now - joined >= probation_ticks`.
ProbationResult probation_update(const NodeState& node, Tick now, Tick probation_ticks,
                                 std::size_t neighbor_count, std::size_t min_density);

struct ClusterView {
  ClusterId id = 0;  // equals the head id
  NodeId head = 0;
  std::vector<NodeId> members;  // sorted, contains head
  std::size_t edges = 0;        // intracluster links
  std::uint64_t exchange_count = 0;
  Tick formed_at = 0;

  bool contains(NodeId v) const;
  bool operator==(const ClusterView&) const = default;
};

/// Partitions post-probation nodes into clusters. Repeatedly elects the
/// unassigned node with the largest residual capacity (ties: lowest id) and
/// claims every unassigned post-probation node within `zone_radius_hops`
/// through unassigned nodes. Clusters are returned in election order.
std::vector<ClusterView> form_clusters(const Graph& graph, std::span<const NodeState> nodes,
                                       Tick now, unsigned zone_radius_hops);

struct GetTree {
  NodeId root = 0;
  std::vector<std::pair<NodeId, NodeId>> children;  // (parent, child)
  unsigned depth = 0;

  bool operator==(const GetTree&) const = default;
};

/// Gradual energy tree of a cluster: rooted at the least-energy member (ties:
/// lowest id), members within two hops attached in descending energy order.
/// Members without a strictly-higher-energy attachment point are left out.
GetTree build_get_tree(const ClusterView& cluster, const Graph& graph,
                       std::span<const double> energies);

/// Root is the energy argmin among tree nodes, children have strictly more
/// energy than the root, depth <= 2, and every link is a graph edge.
bool get_tree_valid(const GetTree& tree, const Graph& graph, std::span<const double> energies);

/// Per-hop success probability exp(-(d/decay)^exponent); path probability is
/// the product over hops.
struct ReachabilityModel {
  double decay = 250.0;
  double exponent = 1.0;

  double hop(double d) const;
  /// -log(hop(d)).
  double cost(double d) const;
  bool operator==(const ReachabilityModel&) const = default;
};

/// Set of positions p for which u -> w -> p beats u -> p.
class RelayRegion {
 public:
  RelayRegion(Vec2 u, Vec2 w, ReachabilityModel model) : u_(u), w_(w), model_(model) {}

  double relay_probability(Vec2 p) const { return model_.hop(distance(u_, w_)) * model_.hop(distance(w_, p)); }
  double direct_probability(Vec2 p) const { return model_.hop(distance(u_, p)); }
  bool contains(Vec2 p) const { return relay_probability(p) > direct_probability(p); }
  bool operator()(Vec2 p) const { return contains(p); }

 private:
  Vec2 u_;
  Vec2 w_;
  ReachabilityModel model_;
};

/// Throws InvalidArgument when u and w are the same node.
RelayRegion relay_region(const NodeState& u, const NodeState& w, const ReachabilityModel& model);

}  // namespace epirep
