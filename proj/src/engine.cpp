#include "epirep/engine.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <numeric>
#include <string>

#include "epirep/exchange.hpp"
#include "world_ops.hpp"

namespace epirep {

namespace {

using detail::set_state;

Vec2 random_heading(Stream& s) {
  const double a = 2.0 * std::numbers::pi * s.uniform();
  return {std::cos(a), std::sin(a)};
}

template <class F>
void for_each_node(const World& w, bool reverse, F&& f) {
  const auto n = static_cast<NodeId>(w.node_count());
  if (reverse) {
    for (NodeId v = n; v-- > 0;) f(v);
  } else {
    for (NodeId v = 0; v < n; ++v) f(v);
  }
}

// (1) Straight-line steps with reflection and occasional heading redraws.
void phase_mobility(World& w, Tick now, bool reverse) {
  const double redraw = -std::expm1(-1.0 / w.config.mobility.dwell_mean);
  for_each_node(w, reverse, [&](NodeId v) {
    auto& n = w.nodes[v];
    if (!n.alive() || n.speed <= 0.0) return;
    auto s = w.rng.stream(Phase::Mobility, v, now);
    if (s.bernoulli(redraw)) n.dir = random_heading(s);
    const auto m = update_location(n.loc, n.speed, n.dir, w.config.region);
    n.loc = m.loc;
    n.dir = m.dir;
  });
}

// (3) Probation, cluster election and GET maintenance.
void phase_clusters(World& w, Tick now, const RunOptions& opt) {
  for_each_node(w, opt.reverse_iteration, [&](NodeId v) {
    auto& n = w.nodes[v];
    if (!n.alive()) {
      n.role = Role::RelayExcluded;
      return;
    }
    if (n.role == Role::ClusterHead) n.role = Role::Member;
    const auto r = probation_update(n, now, w.config.probation_ticks, w.graph.degree(v),
                                    w.config.min_cluster_density);
    n.role = r.role;
    n.joined_cluster_at = r.joined_cluster_at;
  });

  auto fresh = form_clusters(w.graph, w.nodes, now, w.config.zone_radius_hops);
  std::vector<double> energies(w.node_count());
  for (NodeId v = 0; v < w.node_count(); ++v) energies[v] = w.nodes[v].energy;

  std::vector<GetTree> trees(fresh.size());
  for (std::size_t c = 0; c < fresh.size(); ++c) {
    auto& cl = fresh[c];
    w.nodes[cl.head].role = Role::ClusterHead;
    auto old = std::find_if(w.clusters.begin(), w.clusters.end(),
                            [&](const ClusterView& o) { return o.id == cl.id; });
    if (old != w.clusters.end()) {
      cl.formed_at = old->formed_at;
      if (old->members == cl.members) {
        trees[c] = w.get_trees[static_cast<std::size_t>(old - w.clusters.begin())];
        continue;
      }
    }
    trees[c] = build_get_tree(cl, w.graph, energies);
    ++w.scratch.get_rebuilds;
    if (!get_tree_valid(trees[c], w.graph, energies)) {
      throw InvariantViolation("clusters", "GET tree of cluster " + std::to_string(cl.id) +
                                               " violates its invariants");
    }
    if (opt.on_get_rebuild) opt.on_get_rebuild(cl, trees[c], w.graph, energies);
  }
  w.clusters = std::move(fresh);
  w.get_trees = std::move(trees);
}

// (4) W, cohesion gates and neighbor feedback.
void phase_community(World& w, Tick now) {
  const Tick window = w.config.h_window;
  while (!w.exchanges.empty() && w.exchanges.front().at <= now - window) w.exchanges.pop_front();

  // Provisional view for cluster lookup while counting exchanges.
  w.community = CommunityView(w.node_count(), w.clusters, {});
  for (auto& cl : w.clusters) cl.exchange_count = 0;
  w.interacted.clear();
  for (const auto& e : w.exchanges) {
    const auto ca = w.community.cluster_index(e.a);
    const auto cb = w.community.cluster_index(e.b);
    if (ca && cb && *ca == *cb) {
      ++w.clusters[*ca].exchange_count;
      w.interacted.push_back(std::minmax(e.a, e.b));
    }
  }
  std::sort(w.interacted.begin(), w.interacted.end());
  w.interacted.erase(std::unique(w.interacted.begin(), w.interacted.end()), w.interacted.end());

  auto& st = w.stats;
  const auto recent = std::accumulate(w.download_window.begin(), w.download_window.end(),
                                      std::uint64_t{0});
  st.dld_rate = static_cast<double>(recent) / static_cast<double>(window);
  st.total_dlds = w.tallies.downloads;
  st.sharing_chunks = 0;
  for (const auto& c : w.census) {
    if (c.i > 0) ++st.sharing_chunks;
  }
  std::vector<std::pair<ChunkId, NodeId>> serving;
  for (const auto& s : w.sessions) serving.emplace_back(s.chunk, s.src);
  std::sort(serving.begin(), serving.end());
  st.inactive_chunks = 0;
  for (ChunkId c = 0; c < w.chunk_count(); ++c) {
    for (NodeId v = 0; v < w.node_count(); ++v) {
      const auto& rep = w.replica(c, v);
      if (rep.state != ReplicaState::Recovered || rep.aborted) continue;
      if (!std::binary_search(serving.begin(), serving.end(), std::pair{c, v})) {
        ++st.inactive_chunks;
      }
    }
  }
  if (w.config.community.w_fixed >= 0) {
    w.w = w.config.community.w_fixed;
  } else {
    w.w = std::min(streaming_factor(st, w.config.w_max), w.config.w_max);
  }

  w.relay_prob.assign(w.clusters.size(), 1.0);
  w.cohesion.assign(w.clusters.size(), std::nullopt);
  for (std::size_t c = 0; c < w.clusters.size(); ++c) {
    const auto& cl = w.clusters[c];
    w.relay_prob[c] = cluster_relay_probability(cl, w.graph, w.nodes, w.config.reachability);
    w.cohesion[c] = cluster_cohesion({cl.exchange_count, cl.members.size(), w.relay_prob[c]}, w.w);
  }
  w.community = CommunityView(w.node_count(), w.clusters, w.cohesion);

  w.hints.clear();
  if (w.config.community.feedback_k == 0) return;
  for (const auto& cl : w.clusters) {
    const std::uint64_t n = cl.members.size();
    if (n < 2 || !(cl.exchange_count > n * (n - 1) / 2)) continue;
    for (NodeId holder : cl.members) {
      const auto ad = neighbor_feedback(cl, w.graph, holder, 0, w.config.community.feedback_k);
      if (ad.recipients.empty()) continue;
      for (ChunkId c = 0; c < w.chunk_count(); ++c) {
        if (!w.replica(c, holder).has_data()) continue;
        for (NodeId r : ad.recipients) w.hints.try_emplace({r, c}, holder);
      }
    }
  }
}

// (5) Session progress, then Poisson request arrivals.
void phase_workload(World& w, Tick now) {
  advance_sessions(w, now);

  std::vector<NodeId> eligible;
  for (const auto& n : w.nodes) {
    if (post_probation(n.role) && n.alive()) eligible.push_back(n.id);
  }
  if (eligible.empty() || w.config.workload <= 0) return;

  auto s = w.rng.stream(Phase::Workload, 0, now);
  const auto arrivals = s.poisson(w.config.workload);
  const std::size_t m = w.config.chunks_per_file;
  for (std::uint64_t k = 0; k < arrivals; ++k) {
    const NodeId requester = eligible[s.below(eligible.size())];
    const auto file = static_cast<std::uint32_t>(s.below(w.config.file_count));
    const std::uint64_t id = w.next_request++;
    // One guard count keeps the request open while its chunks are issued.
    w.requests[id] = Request{id, requester, file, now, 1, false};
    bool any = false;
    for (std::size_t j = 0; j < m; ++j) {
      const auto chunk = static_cast<ChunkId>(file * m + j);
      const auto out = run_chunk_exchange(w, requester, chunk, now, std::nullopt, id);
      if (out.initiated) any = true;
      else if (!out.skipped) w.requests[id].failed = true;
    }
    auto& req = w.requests[id];
    if (--req.pending == 0) {
      if (any && !req.failed) ++w.tallies.completed_files;
      w.requests.erase(id);
    }
  }
}

// (6) Gossip pushes from infected replicas, then the SIRD step per chunk.
void phase_epidemic(World& w, Tick now, bool reverse) {
  const std::size_t n = w.node_count();
  const auto& p = w.config.epidemic;
  std::vector<std::uint32_t> exposure(n);
  std::vector<NodeId> pusher(n);
  auto host = std::make_unique<bool[]>(n);
  std::vector<NodeId> obsolete;

  for (ChunkId c = 0; c < w.chunk_count(); ++c) {
    std::fill(exposure.begin(), exposure.end(), 0);
    std::fill(pusher.begin(), pusher.end(), static_cast<NodeId>(n));
    obsolete.clear();
    const bool certified = w.certificates.contains(c);

    if (w.census[c].i > 0) for_each_node(w, reverse, [&](NodeId v) {
      const auto& rep = w.replica(c, v);
      if (rep.state != ReplicaState::Infected || !w.nodes[v].alive()) return;
      if (certified && w.informed_of(c, v)) return;
      auto s = w.rng.stream(Phase::Gossip, v, now, c);
      std::vector<NodeId> targets;
      if (w.config.strategy == Strategy::Epidemic) {
        targets = select_gossip_targets(v, w.graph.neighbors(v), p.fanout, s,
                                        [&](NodeId u) { return detail::gossip_valid(w, v, u); });
      } else {
        targets = select_gossip_targets(v, w.graph.neighbors(v), p.fanout, s);
      }
      for (NodeId u : targets) {
        ++exposure[u];
        pusher[u] = std::min(pusher[u], v);
        if (certified && w.informed_of(c, u)) obsolete.push_back(u);
      }
    });

    for (NodeId v = 0; v < n; ++v) host[v] = detail::can_host(w, c, v, now);
    const auto census = w.census[c];
    const auto trans = step_replicas(c, w.chunk_replicas(c), exposure,
                                     std::span<const bool>(host.get(), n), census, p, now, w.rng);
    for (const auto& t : trans) {
      w.census[c].apply(t.from, t.to);
      if (t.to == ReplicaState::Infected) {
        ++w.nodes[t.node].used_slots;
        if (pusher[t.node] < n) detail::record_exchange(w, pusher[t.node], t.node, now);
      } else if (t.to == ReplicaState::Dead) {
        --w.nodes[t.node].used_slots;
        ++w.scratch.deaths;
      } else if (t.cause == TransitionCause::Recovery && !w.replica(c, t.node).origin) {
        ++w.tallies.downloads;
        ++w.scratch.downloads;
      }
    }

    std::sort(obsolete.begin(), obsolete.end());
    obsolete.erase(std::unique(obsolete.begin(), obsolete.end()), obsolete.end());
    for (NodeId u : obsolete) detail::respread(w, u, c);
  }
}

void purge(World& w, ChunkId c, NodeId v, Tick now) {
  auto& rep = w.replica(c, v);
  if (rep.state == ReplicaState::Infected) {
    set_state(w, c, v, ReplicaState::Recovered, now);
    rep.aborted = true;
  }
  set_state(w, c, v, ReplicaState::Dead, now);
  ++w.tallies.purged;
}

// (7) Scheduled deletions, certificate gossip and purging.
void phase_certificates(World& w, Tick now, bool reverse) {
  const auto& del = w.config.deletions;
  if (del.count > 0 && now == del.at) {
    auto s = w.rng.stream(Phase::Deletion, 0, now);
    std::vector<ChunkId> pool(w.chunk_count());
    std::iota(pool.begin(), pool.end(), ChunkId{0});
    for (std::size_t k = 0; k < del.count; ++k) {
      const auto j = k + static_cast<std::size_t>(s.below(pool.size() - k));
      std::swap(pool[k], pool[j]);
    }
    pool.resize(del.count);
    std::sort(pool.begin(), pool.end());
    for (ChunkId c : pool) delete_chunk(w, c);
  }

  for (const auto& [c, cert] : w.certificates) {
    auto& known = w.informed.at(c);
    if (now > cert.issued_at && now < cert.issued_at + cert.t2) {
      std::vector<NodeId> reached;
      for_each_node(w, reverse, [&](NodeId v) {
        if (!known[v] || !w.nodes[v].alive()) return;
        auto s = w.rng.stream(Phase::Certificate, v, now, c);
        for (NodeId u : select_gossip_targets(v, w.graph.neighbors(v), w.config.epidemic.fanout, s)) {
          reached.push_back(u);
        }
      });
      for (NodeId u : reached) known[u] = true;
    }

    for (NodeId v = 0; v < w.node_count(); ++v) {
      const auto& rep = w.replica(c, v);
      if (!rep.live()) continue;
      // Uninformed holders reconcile through the shared index at t2, like
      // retention sites.
      const bool late = w.retention_site[v] || !known[v];
      if (apply_death_certificate(rep, cert, now, late).purge) purge(w, c, v, now);
    }
  }
}

// (8) Recovered population, BPED and the download window.
void phase_bookkeeping(World& w, Tick now) {
  std::size_t r = 0;
  for (const auto& c : w.census) r += c.r;
  w.recovered_series.push_back(r);
  w.bped += purge_hazard(w.config.epidemic.hazard,
                         w.config.epidemic.lambda * static_cast<double>(now)) *
            static_cast<double>(r);
  w.download_window.push_back(w.scratch.downloads);
  while (w.download_window.size() > static_cast<std::size_t>(w.config.h_window)) {
    w.download_window.pop_front();
  }
}

// Cheap per-phase check; the full recount runs once per tick.
void check_census_sums(const World& w, const char* phase) {
  for (ChunkId c = 0; c < w.chunk_count(); ++c) {
    const auto& cen = w.census[c];
    if (!cen.consistent() || cen.n != w.node_count()) {
      throw InvariantViolation(phase, "census of chunk " + std::to_string(c) + " does not sum to N");
    }
  }
}

}  // namespace

World init_world(const WorldConfig& config) {
  config.validate();
  World w;
  w.config = config;
  w.rng = KeyedRng(config.seed);
  const std::size_t n = config.node_count;

  w.nodes.resize(n);
  w.retention_site.resize(n);
  for (NodeId v = 0; v < n; ++v) {
    auto s = w.rng.stream(Phase::Placement, v, 0);
    auto& node = w.nodes[v];
    node.id = v;
    node.loc = {s.uniform() * config.region.width, s.uniform() * config.region.height};
    node.speed = config.mobility.speed_min +
                 s.uniform() * (config.mobility.speed_max - config.mobility.speed_min);
    node.dir = random_heading(s);
    node.energy = config.energy.min + s.uniform() * (config.energy.max - config.energy.min);
    node.capacity = config.capacity.min +
                    static_cast<unsigned>(s.below(config.capacity.max - config.capacity.min + 1));
    w.retention_site[v] = w.rng.hash_unit(Phase::Retention, v) < config.retention_fraction;
  }

  const std::size_t chunks = config.chunk_count();
  w.chunks.resize(chunks);
  w.replicas.assign(chunks * n, ChunkReplicaState{});
  w.census.assign(chunks, ChunkCensus{n, 0, 0, 0, n});
  for (ChunkId c = 0; c < chunks; ++c) {
    auto s = w.rng.stream(Phase::Placement, n + c, 0);
    auto& info = w.chunks[c];
    info.file = static_cast<std::uint32_t>(c / config.chunks_per_file);
    if (s.uniform() < config.sensitive_fraction) info.deadline = config.epidemic.tau;

    std::vector<NodeId> pool;
    for (NodeId v = 0; v < n; ++v) {
      if (w.nodes[v].residual_capacity() > 0) pool.push_back(v);
    }
    if (pool.size() < config.initial_replicas) {
      throw ConfigError("capacity.min", 0, "not enough buffer capacity to seed every chunk");
    }
    for (std::size_t k = 0; k < config.initial_replicas; ++k) {
      const auto j = k + static_cast<std::size_t>(s.below(pool.size() - k));
      std::swap(pool[k], pool[j]);
      info.origins.push_back(pool[k]);
    }
    std::sort(info.origins.begin(), info.origins.end());
    for (NodeId v : info.origins) {
      set_state(w, c, v, ReplicaState::Infected, 0);
      auto& rep = w.replica(c, v);
      rep.origin = true;
      rep.infected_deadline = kNever;
    }
  }

  w.graph = connectivity_graph(w.nodes, config.radio_range);
  w.community = CommunityView(n, w.clusters, w.cohesion);
  w.w = config.community.w_fixed >= 0 ? config.community.w_fixed : config.w_max;
  w.recovered_series.push_back(0);
  w.scratch = {};
  return w;
}

MetricsRow tick(World& w, const RunOptions& opt) {
  const Tick now = w.tick + 1;
  w.tick = now;
  w.scratch = {};
  w.closed.clear();

  phase_mobility(w, now, opt.reverse_iteration);
  w.graph = connectivity_graph(w.nodes, w.config.radio_range);
  phase_clusters(w, now, opt);
  phase_community(w, now);
  phase_workload(w, now);
  if (opt.audit) check_census_sums(w, "workload");
  phase_epidemic(w, now, opt.reverse_iteration);
  if (opt.audit) check_census_sums(w, "epidemic");
  phase_certificates(w, now, opt.reverse_iteration);
  if (opt.audit) audit_world(w, "certificates");
  phase_bookkeeping(w, now);

  auto row = record_tick(w);
  if (opt.on_tick) opt.on_tick(w);
  return row;
}

RunSummary summarize(std::span<const MetricsRow> series) {
  RunSummary s;
  s.ticks = static_cast<Tick>(series.size());
  if (series.empty()) return s;
  double sdr_sum = 0.0, eff_sum = 0.0;
  s.min_sdr = 1.0;
  s.max_sdr = 0.0;
  for (const auto& r : series) {
    sdr_sum += r.sdr;
    eff_sum += r.eff;
    s.min_sdr = std::min(s.min_sdr, r.sdr);
    s.max_sdr = std::max(s.max_sdr, r.sdr);
  }
  const auto k = static_cast<double>(series.size());
  s.mean_sdr = sdr_sum / k;
  s.mean_eff = eff_sum / k;
  const auto& last = series.back();
  s.completed_files = last.completed_files;
  s.sessions_completed = last.completed_sessions;
  s.sessions_failed = last.failed_sessions;
  s.sessions_initiated = last.completed_sessions + last.failed_sessions + last.active_sessions;
  s.requests_rejected = last.rejected_requests;
  return s;
}

RunResult run(const WorldConfig& config, const RunOptions& opt) {
  RunResult out;
  out.world = init_world(config);
  out.series.reserve(static_cast<std::size_t>(config.ticks));
  for (Tick t = 0; t < config.ticks; ++t) out.series.push_back(tick(out.world, opt));
  out.summary = summarize(out.series);
  return out;
}

void audit_world(const World& w, const char* phase) {
  const std::size_t n = w.node_count();
  auto fail = [&](const std::string& what) { throw InvariantViolation(phase, what); };

  std::vector<unsigned> live(n, 0);
  for (ChunkId c = 0; c < w.chunk_count(); ++c) {
    const auto reps = w.chunk_replicas(c);
    const auto actual = ChunkCensus::of(reps);
    const auto& cen = w.census[c];
    if (!cen.consistent() || cen.n != n) {
      fail("census of chunk " + std::to_string(c) + " does not sum to N");
    }
    if (!(actual == cen)) fail("census of chunk " + std::to_string(c) + " drifted from replicas");
    for (NodeId v = 0; v < n; ++v) {
      const auto& r = reps[v];
      if (r.live()) ++live[v];
      if ((r.state == ReplicaState::Infected) != r.infected_deadline.has_value()) {
        fail("infected deadline out of sync at node " + std::to_string(v) + " chunk " +
             std::to_string(c));
      }
    }
  }
  for (NodeId v = 0; v < n; ++v) {
    const auto& node = w.nodes[v];
    if (node.used_slots != live[v]) fail("slot usage out of sync at node " + std::to_string(v));
    if (node.used_slots > node.capacity) fail("node " + std::to_string(v) + " over capacity");
    if (!(node.energy >= 0)) fail("negative energy at node " + std::to_string(v));
    if (!w.config.region.contains(node.loc)) fail("node " + std::to_string(v) + " left the region");
  }
  for (const auto& s : w.sessions) {
    if (s.closed()) fail("closed session " + std::to_string(s.id) + " still active");
    if (s.path.empty() || s.path.front() != s.src || s.path.back() != s.dst) {
      fail("session " + std::to_string(s.id) + " path does not join src and dst");
    }
    if (s.packets_lost > s.packets_sent) fail("session " + std::to_string(s.id) + " lost > sent");
  }
  for (const auto& s : w.closed) {
    if (s.packets_sent != s.packets_delivered + s.packets_lost) {
      fail("session " + std::to_string(s.id) + " packet accounting does not balance");
    }
    if (s.status == SessionStatus::Completed) {
      if (s.per_hop_delays.size() + 1 != s.path.size()) {
        fail("session " + std::to_string(s.id) + " hop delays do not match its path");
      }
      if (s.setup_delay + total_transfer_delay(s) > s.deadline) {
        fail("session " + std::to_string(s.id) + " completed past its deadline");
      }
    }
  }
}

const DeathCertificate& delete_chunk(World& w, ChunkId chunk) {
  if (chunk >= w.chunk_count()) throw InvalidArgument("delete_chunk: chunk out of range");
  const auto& cert = w.certificates.issue(chunk, w.tick, w.config.epidemic);
  auto [it, fresh] = w.informed.try_emplace(chunk, std::vector<bool>(w.node_count(), false));
  if (fresh) {
    for (NodeId v : w.chunks[chunk].origins) it->second[v] = true;
  }
  return cert;
}

bool inject_obsolete_update(World& w, NodeId node, ChunkId chunk) {
  if (node >= w.node_count() || chunk >= w.chunk_count()) {
    throw InvalidArgument("inject_obsolete_update: node or chunk out of range");
  }
  if (!w.informed_of(chunk, node)) return false;
  detail::respread(w, node, chunk);
  return true;
}

}  // namespace epirep
