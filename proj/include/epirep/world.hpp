#pragma once

// Complete simulation state. The engine owns all mutation; everything else
// reads.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "epirep/analytics.hpp"
#include "epirep/community.hpp"
#include "epirep/config.hpp"
#include "epirep/epidemic.hpp"
#include "epirep/rng.hpp"
#include "epirep/topology.hpp"
#include "epirep/transfer.hpp"

namespace epirep {

struct ChunkInfo {
  std::uint32_t file = 0;
  double deadline = kUnbounded;  // streaming bound for delay-sensitive chunks
  std::vector<NodeId> origins;

  bool operator==(const ChunkInfo&) const = default;
};

/// A file request split into per-chunk sessions.
struct Request {
  std::uint64_t id = 0;
  NodeId requester = 0;
  std::uint32_t file = 0;
  Tick at = 0;
  std::size_t pending = 0;
  bool failed = false;

  bool operator==(const Request&) const = default;
};

/// Intracluster exchange between two nodes, kept for the h_N window.
struct ExchangeEvent {
  Tick at;
  NodeId a;
  NodeId b;

  bool operator==(const ExchangeEvent&) const = default;
};

struct Tallies {
  std::uint64_t initiated = 0;  // sessions opened
  std::uint64_t completed = 0;
  std::uint64_t expired = 0;
  std::uint64_t failed = 0;  // closed with Failed
  std::uint64_t rejected = 0;
  std::uint64_t packets_sent = 0;
  std::uint64_t packets_lost = 0;
  std::uint64_t packets_delivered = 0;
  double bytes_delivered = 0.0;
  double delay_sum = 0.0;  // completed sessions, setup + hops
  double intercluster_delay_sum = 0.0;
  std::uint64_t intercluster_completed = 0;
  std::uint64_t completed_files = 0;
  std::uint64_t downloads = 0;  // completed sessions plus gossip recoveries
  std::uint64_t purged = 0;
  std::uint64_t respreads = 0;

  bool operator==(const Tallies&) const = default;
};

/// Quantities that reset every tick.
struct TickScratch {
  std::uint64_t deaths = 0;
  std::uint64_t get_rebuilds = 0;
  std::uint64_t downloads = 0;
  double total_eff = 0.0;

  bool operator==(const TickScratch&) const = default;
};

struct World {
  WorldConfig config;
  Tick tick = 0;
  KeyedRng rng;

  std::vector<NodeState> nodes;
  std::vector<bool> retention_site;
  Graph graph;

  std::vector<ClusterView> clusters;
  std::vector<GetTree> get_trees;  // parallel to clusters
  std::vector<double> relay_prob;  // parallel to clusters
  std::vector<std::optional<double>> cohesion;
  CommunityView community;
  CommunityStats stats;
  double w = 0.0;

  std::vector<ChunkInfo> chunks;
  /// Chunk-major: replicas[chunk * node_count + node].
  std::vector<ChunkReplicaState> replicas;
  std::vector<ChunkCensus> census;

  std::vector<TransferSession> sessions;  // active, ascending id
  std::vector<TransferSession> closed;    // closed during the current tick
  std::map<std::uint64_t, Request> requests;
  SessionId next_session = 1;
  std::uint64_t next_request = 1;

  /// Neighbor-feedback hints: (node, chunk) -> advertised holder.
  std::map<std::pair<NodeId, ChunkId>, NodeId> hints;
  /// Unordered node pairs (low, high) with an intracluster exchange inside
  /// the h window; sorted, unique.
  std::vector<std::pair<NodeId, NodeId>> interacted;

  CertificateRegistry certificates;
  /// Nodes that know the certificate of a chunk.
  std::map<ChunkId, std::vector<bool>> informed;

  std::deque<ExchangeEvent> exchanges;
  std::deque<std::uint64_t> download_window;  // downloads per tick, newest last

  std::vector<std::size_t> recovered_series;  // R(t) over all chunks, from tick 0
  double bped = 0.0;

  Tallies tallies;
  TickScratch scratch;

  std::size_t node_count() const { return nodes.size(); }
  std::size_t chunk_count() const { return chunks.size(); }

  ChunkReplicaState& replica(ChunkId c, NodeId v) { return replicas[c * nodes.size() + v]; }
  const ChunkReplicaState& replica(ChunkId c, NodeId v) const {
    return replicas[c * nodes.size() + v];
  }
  std::span<ChunkReplicaState> chunk_replicas(ChunkId c) {
    return {replicas.data() + c * nodes.size(), nodes.size()};
  }
  std::span<const ChunkReplicaState> chunk_replicas(ChunkId c) const {
    return {replicas.data() + c * nodes.size(), nodes.size()};
  }

  bool informed_of(ChunkId c, NodeId v) const {
    auto it = informed.find(c);
    return it != informed.end() && it->second[v];
  }

  bool operator==(const World&) const = default;
};

}  // namespace epirep
