#include "epirep/exchange.hpp"

#include <algorithm>
#include <cmath>

#include "world_ops.hpp"

namespace epirep {

namespace {

constexpr std::uint32_t kMaxReroutes = 3;

using detail::can_relay;
using detail::hop_weight;
using detail::set_state;

struct Route {
  bool ok = false;
  std::vector<NodeId> path;
  double delay = 0.0;
};

Route route_between(const World& w, NodeId a, NodeId b) {
  const double wt = hop_weight(w);
  auto res = min_delay_path(
      w.graph, [wt](NodeId, NodeId) { return wt; }, a, b,
      [&w](NodeId v) { return can_relay(w, v); });
  return {res.reachable, std::move(res.path), res.delay};
}

// Drops the cycle whenever a node reappears, keeping the first visit.
std::vector<NodeId> remove_loops(const std::vector<NodeId>& path) {
  std::vector<NodeId> out;
  for (NodeId v : path) {
    auto it = std::find(out.begin(), out.end(), v);
    if (it != out.end()) out.erase(it + 1, out.end());
    else out.push_back(v);
  }
  return out;
}

std::optional<NodeId> head_of(const World& w, NodeId v) {
  const auto idx = w.community.cluster_index(v);
  if (!idx) return std::nullopt;
  return w.clusters[*idx].head;
}

void add_supervisor(TransferSession& s, NodeId head) {
  if (std::find(s.supervisors.begin(), s.supervisors.end(), head) == s.supervisors.end()) {
    s.supervisors.push_back(head);
  }
}

void spend(World& w, NodeId v, std::uint64_t packets) {
  auto& e = w.nodes[v].energy;
  e = std::max(0.0, e - w.config.energy.per_packet * static_cast<double>(packets));
}

void close_session(World& w, TransferSession& s, SessionStatus status, FailureReason reason,
                   Tick now) {
  s.status = status;
  s.reason = reason;
  s.closed_at = now;
  if (s.in_flight) {
    // The hop never finished; its packets count as sent and lost.
    s.packets_sent += s.in_flight_sent;
    s.packets_lost += s.in_flight_sent;
    s.in_flight.reset();
    s.in_flight_sent = s.in_flight_lost = s.in_flight_delivered = 0;
  }

  const bool done = status == SessionStatus::Completed;
  auto& rep = w.replica(s.chunk, s.dst);
  if (rep.state == ReplicaState::Infected && rep.session_bound) {
    set_state(w, s.chunk, s.dst, ReplicaState::Recovered, now);
    rep.aborted = !done;
  } else if (rep.state == ReplicaState::Recovered && done) {
    rep.aborted = false;
  }

  auto& t = w.tallies;
  t.packets_sent += s.packets_sent;
  t.packets_lost += s.packets_lost;
  t.packets_delivered += s.packets_delivered;
  if (done) {
    const double total = s.setup_delay + total_transfer_delay(s);
    ++t.completed;
    ++t.downloads;
    ++w.scratch.downloads;
    t.bytes_delivered += w.config.chunk_bytes;
    t.delay_sum += total;
    if (s.intercluster) {
      t.intercluster_delay_sum += total;
      ++t.intercluster_completed;
    }
    if (total > 0) {
      const double hops = static_cast<double>(s.per_hop_delays.size());
      w.scratch.total_eff += hops * (8.0 * w.config.chunk_bytes * w.config.chunk_bytes / total);
    }
  } else if (status == SessionStatus::Expired) {
    ++t.expired;
  } else {
    ++t.failed;
  }

  if (s.request != 0) {
    auto it = w.requests.find(s.request);
    if (it != w.requests.end()) {
      auto& req = it->second;
      if (!done) req.failed = true;
      if (--req.pending == 0) {
        if (!req.failed) ++t.completed_files;
        w.requests.erase(it);
      }
    }
  }
}

enum class Recovery { Rerouted, Waiting, Closed };

// Failure at the current holder: push copies to neighbors with free
// capacity, register the cluster head and route around the break. Without a
// route the holder keeps the data and retries every tick for up to
// route_patience ticks.
Recovery recover(World& w, TransferSession& s, Tick now) {
  const NodeId u = s.path[s.hop];
  if (!w.nodes[u].alive()) {
    close_session(w, s, SessionStatus::Failed, FailureReason::NoRelay, now);
    return Recovery::Closed;
  }

  if (s.stalled_at == kNever) {
    auto stream = w.rng.stream(Phase::Diffusion, s.id, now, s.reroutes);
    std::function<bool(NodeId)> valid = [&](NodeId v) {
      if (w.replica(s.chunk, v).state != ReplicaState::Susceptible) return false;
      if (!detail::can_host(w, s.chunk, v, now)) return false;
      return w.config.strategy == Strategy::Random || detail::gossip_valid(w, u, v);
    };
    for (NodeId v : select_gossip_targets(u, w.graph.neighbors(u), w.config.epidemic.fanout,
                                          stream, valid)) {
      detail::infect(w, s.chunk, v, now);
    }
    if (auto head = head_of(w, u)) add_supervisor(s, *head);
    s.stalled_at = now;
  }

  const double clock = static_cast<double>(now - s.started_at + 1);
  Route r = route_between(w, u, s.dst);
  if (!r.ok) {
    if (now - s.stalled_at >= w.config.hop_delay.route_patience) {
      close_session(w, s, SessionStatus::Failed, FailureReason::NoRelay, now);
      return Recovery::Closed;
    }
    s.stall = clock - s.elapsed;
    return Recovery::Waiting;
  }
  if (++s.reroutes > kMaxReroutes || s.elapsed + s.stall + r.delay > s.deadline) {
    close_session(w, s, SessionStatus::Failed, FailureReason::NoRelay, now);
    return Recovery::Closed;
  }
  s.stalled_at = kNever;
  s.path.resize(s.hop + 1);
  s.path.insert(s.path.end(), r.path.begin() + 1, r.path.end());
  return Recovery::Rerouted;
}

// Draws the packets of the next hop. Returns false when a packet ran out of
// retransmissions.
bool realize_hop(World& w, TransferSession& s, Tick now) {
  const auto& hd = w.config.hop_delay;
  auto stream = w.rng.stream(Phase::Transfer, s.id, now,
                             (static_cast<std::uint64_t>(s.reroutes) << 32) | s.hop);
  const std::size_t packets = w.config.packets_per_chunk();
  const unsigned attempts_max = 1 + hd.retry_budget;
  std::uint64_t sent = 0, lost = 0, delivered = 0;
  unsigned rounds = 0;
  bool exhausted = false;
  for (std::size_t k = 0; k < packets; ++k) {
    unsigned a = 0;
    bool ok = false;
    while (a < attempts_max && !ok) {
      ++a;
      ++sent;
      ok = !stream.bernoulli(hd.loss_prob);
      if (!ok) ++lost;
    }
    if (ok) ++delivered;
    else exhausted = true;
    rounds = std::max(rounds, a - 1);
  }
  spend(w, s.path[s.hop], sent);
  spend(w, s.path[s.hop + 1], sent);

  if (exhausted) {
    s.packets_sent += sent;
    s.packets_lost += lost;
    s.packets_delivered += delivered;
    close_session(w, s, SessionStatus::Failed, FailureReason::LossBudget, now);
    return false;
  }
  const double jitter = std::abs(stream.normal() * hd.jitter_std);
  s.in_flight = s.stall + hd.base + hd.per_byte * w.config.chunk_bytes + jitter + rounds * hd.base;
  s.stall = 0.0;
  s.in_flight_sent = sent;
  s.in_flight_lost = lost;
  s.in_flight_delivered = delivered;
  return true;
}

void finish(World& w, TransferSession& s, Tick now) {
  const double total = s.setup_delay + total_transfer_delay(s);
  if (total > s.deadline) {
    close_session(w, s, SessionStatus::Expired, FailureReason::None, now);
  } else {
    close_session(w, s, SessionStatus::Completed, FailureReason::None, now);
  }
}

void advance(World& w, TransferSession& s, Tick now) {
  if (s.closed()) return;
  if (w.certificates.contains(s.chunk)) {
    close_session(w, s, SessionStatus::Failed, FailureReason::Purged, now);
    return;
  }
  if (check_stream_deadline(s, now) == SessionStatus::Expired) {
    close_session(w, s, SessionStatus::Expired, FailureReason::None, now);
    return;
  }
  const double budget = static_cast<double>(now - s.started_at + 1);
  while (true) {
    if (s.hop + 1 >= s.path.size()) {
      finish(w, s, now);
      return;
    }
    const NodeId u = s.path[s.hop];
    const NodeId v = s.path[s.hop + 1];
    const bool link = w.graph.has_edge(u, v) && w.nodes[u].alive() && w.nodes[v].alive();
    if (!link) {
      if (s.in_flight) {
        s.packets_sent += s.in_flight_sent;
        s.packets_lost += s.in_flight_sent;
        s.in_flight.reset();
        s.in_flight_sent = s.in_flight_lost = s.in_flight_delivered = 0;
      }
      if (recover(w, s, now) != Recovery::Rerouted) return;
      continue;
    }
    if (!s.in_flight && !realize_hop(w, s, now)) return;
    if (s.elapsed + *s.in_flight > budget) return;

    s.elapsed += *s.in_flight;
    s.per_hop_delays.push_back(*s.in_flight);
    s.packets_sent += s.in_flight_sent;
    s.packets_lost += s.in_flight_lost;
    s.packets_delivered += s.in_flight_delivered;
    s.in_flight.reset();
    s.in_flight_sent = s.in_flight_lost = s.in_flight_delivered = 0;
    ++s.hop;
    detail::record_exchange(w, u, v, now);
  }
}

void sweep_closed(World& w) {
  auto it = std::stable_partition(w.sessions.begin(), w.sessions.end(),
                                  [](const TransferSession& s) { return !s.closed(); });
  for (auto c = it; c != w.sessions.end(); ++c) w.closed.push_back(std::move(*c));
  w.sessions.erase(it, w.sessions.end());
}

}  // namespace

ExchangeOutcome run_chunk_exchange(World& w, NodeId dst, ChunkId chunk, Tick now,
                                   std::optional<NodeId> source, std::uint64_t request) {
  if (dst >= w.node_count() || chunk >= w.chunk_count()) {
    throw InvalidArgument("run_chunk_exchange: node or chunk out of range");
  }
  ExchangeOutcome out;
  const auto& rep = w.replica(chunk, dst);
  if (rep.state == ReplicaState::Dead || rep.state == ReplicaState::Infected || rep.has_data() ||
      !w.nodes[dst].alive()) {
    out.skipped = true;
    return out;
  }
  auto reject = [&](FailureReason r) {
    out.reason = r;
    ++w.tallies.rejected;
    return out;
  };

  // (1) Index lookup: holders that can serve the chunk.
  if (w.certificates.contains(chunk)) return reject(FailureReason::NotFound);
  double setup = w.config.lookup_delay;
  std::optional<NodeId> src = source;
  if (!src) {
    auto hint = w.hints.find({dst, chunk});
    if (hint != w.hints.end() && w.replica(chunk, hint->second).has_data() &&
        w.nodes[hint->second].alive()) {
      src = hint->second;
      setup = 0.0;
    }
  }

  Route route;
  if (src) {
    if (*src == dst || !w.replica(chunk, *src).has_data() || !w.nodes[*src].alive()) {
      return reject(FailureReason::NotFound);
    }
    route = route_between(w, *src, dst);
    if (!route.ok) return reject(FailureReason::NoRelay);
  } else {
    bool any = false;
    const double wt = hop_weight(w);
    const auto tree = min_delay_tree(
        w.graph, [wt](NodeId, NodeId) { return wt; }, dst,
        [&w](NodeId v) { return can_relay(w, v); });
    const PathResult* best = nullptr;
    for (NodeId h = 0; h < w.node_count(); ++h) {
      if (h == dst || !w.replica(chunk, h).has_data() || !w.nodes[h].alive()) continue;
      any = true;
      const auto& pr = tree[h];
      if (!pr.reachable) continue;
      if (!best || pr.delay < best->delay ||
          (pr.delay == best->delay && pr.path.size() < best->path.size())) {
        best = &pr;
        src = h;
      }
    }
    if (!any) return reject(FailureReason::NotFound);
    if (!best) return reject(FailureReason::NoRelay);
    route.ok = true;
    route.path.assign(best->path.rbegin(), best->path.rend());
    route.delay = best->delay;
  }

  // (2) Intercluster legs pass both cluster heads unless the ends are linked.
  const auto ca = w.community.cluster_index(*src);
  const auto cb = w.community.cluster_index(dst);
  const bool intercluster = !(ca && cb && *ca == *cb);
  std::vector<NodeId> supervisors;
  if (intercluster && route.path.size() > 2) {
    std::vector<NodeId> stops{*src};
    if (ca) stops.push_back(w.clusters[*ca].head);
    if (cb) stops.push_back(w.clusters[*cb].head);
    stops.push_back(dst);
    std::vector<NodeId> full{*src};
    for (std::size_t k = 0; k + 1 < stops.size(); ++k) {
      if (stops[k] == stops[k + 1]) continue;
      Route leg = route_between(w, stops[k], stops[k + 1]);
      if (!leg.ok) return reject(FailureReason::NoRelay);
      full.insert(full.end(), leg.path.begin() + 1, leg.path.end());
    }
    route.path = remove_loops(full);
    route.delay = hop_weight(w) * static_cast<double>(route.path.size() - 1);
    if (ca) supervisors.push_back(w.clusters[*ca].head);
    if (cb && (!ca || *cb != *ca)) supervisors.push_back(w.clusters[*cb].head);
  }

  // (3) Setup plus route delay must beat the chunk deadline.
  const double deadline = w.chunks[chunk].deadline;
  if (std::isfinite(deadline) && !(setup + route.delay < deadline)) {
    return reject(FailureReason::DelayBound);
  }
  // (4) Social gate for intracluster transfers.
  if (!intercluster && !k_valid(*src, dst, w.community)) return reject(FailureReason::SocialGate);
  // (5) Requester capacity.
  if (rep.state == ReplicaState::Susceptible && w.nodes[dst].residual_capacity() == 0) {
    return reject(FailureReason::NoCapacity);
  }

  TransferSession s;
  s.id = w.next_session++;
  s.src = *src;
  s.dst = dst;
  s.chunk = chunk;
  s.path = std::move(route.path);
  s.started_at = now;
  s.deadline = deadline;
  s.setup_delay = setup;
  s.elapsed = setup;
  s.supervisors = std::move(supervisors);
  s.intercluster = intercluster;
  s.request = request;

  if (rep.state == ReplicaState::Susceptible) {
    set_state(w, chunk, dst, ReplicaState::Infected, now);
    auto& r = w.replica(chunk, dst);
    r.session_bound = true;
    r.aborted = false;
    r.infected_deadline =
        std::isfinite(deadline) ? now + static_cast<Tick>(std::ceil(deadline)) : kNever;
  }
  ++w.tallies.initiated;
  if (request != 0) {
    auto it = w.requests.find(request);
    if (it != w.requests.end()) ++it->second.pending;
  }

  out.initiated = true;
  out.session = s.id;
  w.sessions.push_back(std::move(s));
  advance(w, w.sessions.back(), now);
  sweep_closed(w);
  return out;
}

void advance_sessions(World& w, Tick now) {
  for (auto& s : w.sessions) advance(w, s, now);
  sweep_closed(w);
}

const TransferSession* find_session(const World& w, SessionId id) {
  for (const auto& s : w.sessions) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

}  // namespace epirep
