#pragma once

// Mutation helpers shared by the engine phases and the exchange procedure.

#include <algorithm>
#include <cmath>

#include "epirep/community.hpp"
#include "epirep/error.hpp"
#include "epirep/world.hpp"

namespace epirep::detail {

/// Moves one replica a step along S->I->R->D and keeps census, slot usage and
/// death counts in sync.
inline void set_state(World& w, ChunkId c, NodeId v, ReplicaState to, Tick now) {
  auto& rep = w.replica(c, v);
  check_chain(rep.state, to);
  w.census[c].apply(rep.state, to);
  if (to == ReplicaState::Infected) ++w.nodes[v].used_slots;
  if (to == ReplicaState::Dead) {
    --w.nodes[v].used_slots;
    ++w.scratch.deaths;
  }
  rep.state = to;
  rep.since = now;
  if (to != ReplicaState::Infected) {
    rep.infected_deadline.reset();
    rep.session_bound = false;
  }
}

inline Tick gossip_deadline(const World& w, ChunkId c, Tick now) {
  const auto& cen = w.census[c];
  const double ttl = infection_ttl(w.config.epidemic, cen.s, cen.i);
  if (!(ttl < 1e15)) return kNever;
  return now + static_cast<Tick>(std::ceil(ttl));
}

/// Gossip-type infection of a susceptible replica (TTL from the census).
inline void infect(World& w, ChunkId c, NodeId v, Tick now) {
  const Tick deadline = gossip_deadline(w, c, now);
  set_state(w, c, v, ReplicaState::Infected, now);
  auto& rep = w.replica(c, v);
  rep.infected_deadline = deadline;
  rep.aborted = false;
}

inline bool can_relay(const World& w, NodeId v) {
  return w.nodes[v].alive() && w.nodes[v].role != Role::RelayExcluded;
}

inline double hop_weight(const World& w) {
  return w.config.hop_delay.expected_hop_delay(w.config.chunk_bytes);
}

inline bool can_host(const World& w, ChunkId c, NodeId v, Tick now) {
  const auto& node = w.nodes[v];
  if (!node.alive() || node.residual_capacity() == 0) return false;
  if (const auto* cert = w.certificates.find(c)) {
    if (w.informed_of(c, v) || now - cert->issued_at >= cert->t2) return false;
  }
  return true;
}

/// Epidemic-strategy push filter: same cohesive cluster and a recent
/// exchange between the two nodes.
inline bool gossip_valid(const World& w, NodeId from, NodeId to) {
  const std::pair<NodeId, NodeId> key = std::minmax(from, to);
  return k_valid(from, to, w.community) &&
         std::binary_search(w.interacted.begin(), w.interacted.end(), key);
}

inline void record_exchange(World& w, NodeId a, NodeId b, Tick now) {
  w.exchanges.push_back({now, a, b});
}

/// Spreads the certificate of `c` from `v` to its cluster neighbors and its
/// cluster head.
inline void respread(World& w, NodeId v, ChunkId c) {
  auto it = w.informed.find(c);
  if (it == w.informed.end()) return;
  auto& known = it->second;
  if (const auto idx = w.community.cluster_index(v)) {
    const auto& cl = w.clusters[*idx];
    for (NodeId u : w.graph.neighbors(v)) {
      if (cl.contains(u)) known[u] = true;
    }
    known[cl.head] = true;
  } else {
    for (NodeId u : w.graph.neighbors(v)) known[u] = true;
  }
  ++w.tallies.respreads;
}

}  // namespace epirep::detail
