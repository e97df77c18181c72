#pragma once

// Social-interaction metrics: community streaming factor, gated cluster
// cohesion, neighbor feedback and the k_valid predicate used by gossip.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "epirep/topology.hpp"
#include "epirep/types.hpp"

namespace epirep {

struct CommunityStats {
  double dld_rate = 0.0;            // completed downloads per tick (windowed)
  std::uint64_t sharing_chunks = 0; // chunks with an active share right now
  std::uint64_t total_dlds = 0;     // cumulative completed downloads
  std::uint64_t inactive_chunks = 0;

  bool operator==(const CommunityStats&) const = default;
};

struct CohesionInput {
  std::uint64_t exchange_count = 0;  // h_N(t)
  std::uint64_t interconnected = 0;  // I_C(N)(t)
  double relay_prob = 0.0;           // P(u -> w -> (x,y)) of the gating pair
};

/// W = (dld_rate * sharing) / (total_dlds * inactive). A zero denominator
/// yields `w_max`.
double streaming_factor(const CommunityStats& stats, double w_max);

/// C_N = 2 h / (I (I - 1)) when relay_prob > w and at least two nodes are
/// interconnected; nullopt ("no community") otherwise.
std::optional<double> cluster_cohesion(const CohesionInput& input, double w);

struct Advertisement {
  ChunkId chunk = 0;
  NodeId holder = 0;
  std::vector<NodeId> recipients;
};

/// When the cluster's exchange count exceeds N(N-1)/2, `holder` announces
/// `chunk` to min(k, N-1) co-members, closest by hop count (through members)
/// and then by id. Otherwise the recipient list is empty.
Advertisement neighbor_feedback(const ClusterView& cluster, const Graph& graph, NodeId holder,
                                ChunkId chunk, std::size_t k);

/// Cluster membership plus the cohesion verdict of each cluster.
class CommunityView {
 public:
  CommunityView() = default;
  CommunityView(std::size_t node_count, std::span<const ClusterView> clusters,
                std::span<const std::optional<double>> cohesion);

  std::optional<std::size_t> cluster_index(NodeId v) const {
    if (v >= cluster_of_.size() || cluster_of_[v] < 0) return std::nullopt;
    return static_cast<std::size_t>(cluster_of_[v]);
  }
  bool cohesive(std::size_t cluster) const { return cohesive_[cluster]; }

  bool operator==(const CommunityView&) const = default;

 private:
  std::vector<std::int64_t> cluster_of_;
  std::vector<bool> cohesive_;
};

/// Social interaction is valid when a and b share a cluster whose cohesion
/// gate passes.
bool k_valid(NodeId a, NodeId b, const CommunityView& view);

/// Mean over non-head members of the most reliable head -> member route
/// within the cluster (product of per-hop probabilities). A singleton cluster
/// returns 1.
double cluster_relay_probability(const ClusterView& cluster, const Graph& graph,
                                 std::span<const NodeState> nodes, const ReachabilityModel& model);

}  // namespace epirep
