#include "epirep/community.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace epirep {

double streaming_factor(const CommunityStats& stats, double w_max) {
  if (stats.total_dlds == 0 || stats.inactive_chunks == 0) return w_max;
  return (stats.dld_rate * static_cast<double>(stats.sharing_chunks)) /
         (static_cast<double>(stats.total_dlds) * static_cast<double>(stats.inactive_chunks));
}

std::optional<double> cluster_cohesion(const CohesionInput& input, double w) {
  if (!(input.relay_prob > w)) return std::nullopt;
  if (input.interconnected < 2) return std::nullopt;
  const auto n = static_cast<double>(input.interconnected);
  return 2.0 * static_cast<double>(input.exchange_count) / (n * (n - 1.0));
}

Advertisement neighbor_feedback(const ClusterView& cluster, const Graph& graph, NodeId holder,
                                ChunkId chunk, std::size_t k) {
  Advertisement ad{chunk, holder, {}};
  const std::uint64_t n = cluster.members.size();
  if (k == 0 || n < 2 || !cluster.contains(holder)) return ad;
  if (!(cluster.exchange_count > n * (n - 1) / 2)) return ad;

  const auto hops = graph.hops_from(holder, [&](NodeId v) { return cluster.contains(v); });
  std::vector<NodeId> peers;
  for (NodeId v : cluster.members) {
    if (v != holder) peers.push_back(v);
  }
  std::sort(peers.begin(), peers.end(), [&](NodeId a, NodeId b) {
    if (hops[a] != hops[b]) return hops[a] < hops[b];
    return a < b;
  });
  peers.resize(std::min(k, peers.size()));
  ad.recipients = std::move(peers);
  return ad;
}

CommunityView::CommunityView(std::size_t node_count, std::span<const ClusterView> clusters,
                             std::span<const std::optional<double>> cohesion)
    : cluster_of_(node_count, -1), cohesive_(clusters.size(), false) {
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (NodeId v : clusters[c].members) cluster_of_[v] = static_cast<std::int64_t>(c);
    cohesive_[c] = c < cohesion.size() && cohesion[c].has_value();
  }
}

bool k_valid(NodeId a, NodeId b, const CommunityView& view) {
  const auto ca = view.cluster_index(a);
  const auto cb = view.cluster_index(b);
  return ca && cb && *ca == *cb && view.cohesive(*ca);
}

double cluster_relay_probability(const ClusterView& cluster, const Graph& graph,
                                 std::span<const NodeState> nodes, const ReachabilityModel& model) {
  const std::size_t m = cluster.members.size();
  if (m < 2) return 1.0;

  // Dense Dijkstra over -log(probability); clusters are small.
  auto index_of = [&](NodeId v) {
    return static_cast<std::size_t>(
        std::lower_bound(cluster.members.begin(), cluster.members.end(), v) -
        cluster.members.begin());
  };
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> cost(m, inf);
  std::vector<bool> done(m, false);
  cost[index_of(cluster.head)] = 0.0;
  for (std::size_t round = 0; round < m; ++round) {
    std::size_t best = m;
    for (std::size_t i = 0; i < m; ++i) {
      if (!done[i] && cost[i] < inf && (best == m || cost[i] < cost[best])) best = i;
    }
    if (best == m) break;
    done[best] = true;
    const NodeId u = cluster.members[best];
    for (NodeId v : graph.neighbors(u)) {
      if (!cluster.contains(v)) continue;
      const std::size_t j = index_of(v);
      const double c = cost[best] + model.cost(distance(nodes[u].loc, nodes[v].loc));
      if (c < cost[j]) cost[j] = c;
    }
  }

  double total = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (cluster.members[i] == cluster.head) continue;
    total += std::exp(-cost[i]);
  }
  return total / static_cast<double>(m - 1);
}

}  // namespace epirep
