#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "epirep/topology.hpp"
#include "epirep/types.hpp"

namespace epirep {

enum class SessionStatus : std::uint8_t { Active, Completed, Expired, Failed };

enum class FailureReason : std::uint8_t {
  None,
  NotFound,    // index lookup miss
  DelayBound,  // estimated delay exceeds the chunk's bound
  SocialGate,  // endpoints fail k_valid
  NoRelay,     // no route, or every relay exhausted
  NoCapacity,  // requester has no free slot
  LossBudget,  // a packet exceeded its retransmission budget
  Purged,      // chunk certified dead mid-transfer
};

const char* to_string(SessionStatus s);
const char* to_string(FailureReason r);

struct HopDelayModel {
  double base = 1.0;        // ticks per hop
  double per_byte = 0.0;    // ticks per byte
  double jitter_std = 0.2;  // ticks
  double loss_prob = 0.01;  // per packet, per hop
  unsigned retry_budget = 3;
  Tick route_patience = 20;  // ticks a holder waits for a lost route to come back

  /// Mean realized hop delay for a chunk, before retransmissions.
  double expected_hop_delay(double chunk_bytes) const;

  std::vector<std::string> violations() const;
  bool operator==(const HopDelayModel&) const = default;
};

struct TransferSession {
  SessionId id = 0;
  NodeId src = 0;
  NodeId dst = 0;
  ChunkId chunk = 0;
  std::vector<NodeId> path;  // src ... dst
  Tick started_at = 0;
  double deadline = kUnbounded;  // streaming delay bound, ticks
  std::vector<double> per_hop_delays;
  std::uint64_t packets_sent = 0;
  std::uint64_t packets_lost = 0;
  std::uint64_t packets_delivered = 0;
  SessionStatus status = SessionStatus::Active;
  FailureReason reason = FailureReason::None;

  // Progress bookkeeping.
  std::size_t hop = 0;            // path index of the node holding the data
  double setup_delay = 0.0;       // index lookup latency before the first hop
  double elapsed = 0.0;           // session clock, ticks since start
  std::optional<double> in_flight;  // realized delay of the hop being traversed
  std::uint64_t in_flight_sent = 0;
  std::uint64_t in_flight_lost = 0;
  std::uint64_t in_flight_delivered = 0;
  std::uint32_t reroutes = 0;
  double stall = 0.0;  // time spent waiting for a route, charged to the next hop
  Tick stalled_at = kNever;
  std::vector<NodeId> supervisors;  // cluster heads registered for the transfer
  bool intercluster = false;
  std::uint64_t request = 0;
  Tick closed_at = kNever;

  bool closed() const { return status != SessionStatus::Active; }
  bool operator==(const TransferSession&) const = default;
};

struct PathResult {
  bool reachable = false;
  std::vector<NodeId> path;
  double delay = 0.0;  // d_p

  bool operator==(const PathResult&) const = default;
};

using EdgeWeight = std::function<double(NodeId, NodeId)>;

/// Dijkstra over non-negative weights. Ties on total delay go to fewer hops,
/// then to the lexicographically smaller node sequence. Intermediate nodes
/// must satisfy `can_relay` when given. src == dst yields [src] with d_p = 0.
PathResult min_delay_path(const Graph& graph, const EdgeWeight& weight, NodeId src, NodeId dst,
                          const std::function<bool(NodeId)>& can_relay = nullptr);

/// Best path from `src` to every node under the same ordering; unreachable
/// nodes have reachable == false.
std::vector<PathResult> min_delay_tree(const Graph& graph, const EdgeWeight& weight, NodeId src,
                                       const std::function<bool(NodeId)>& can_relay = nullptr);

/// Expired once now - started_at exceeds the deadline; otherwise Active.
SessionStatus check_stream_deadline(const TransferSession& session, Tick now);

/// Sum of realized per-hop delays.
double total_transfer_delay(const TransferSession& session);

/// Multipart download time (tau0 / m) * log2(n). Throws InvalidArgument if
/// m or n is zero.
double multipart_delay_estimate(double tau0, unsigned m, unsigned n);

}  // namespace epirep
