#include "epirep/epidemic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "epirep/error.hpp"

namespace epirep {

const char* to_string(ReplicaState s) {
  switch (s) {
    case ReplicaState::Susceptible: return "S";
    case ReplicaState::Infected: return "I";
    case ReplicaState::Recovered: return "R";
    case ReplicaState::Dead: return "D";
  }
  return "?";
}

std::vector<std::string> EpidemicParams::violations() const {
  std::vector<std::string> out;
  auto need = [&](bool ok, const char* msg) {
    if (!ok) out.emplace_back(msg);
  };
  need(std::isfinite(beta) && beta >= 0, "epidemic.beta must be >= 0");
  need(std::isfinite(gamma) && gamma >= 0, "epidemic.gamma must be >= 0");
  need(std::isfinite(lambda) && lambda >= 0, "epidemic.lambda must be >= 0");
  need(std::isfinite(tau) && tau > 0, "epidemic.tau must be > 0");
  need(t1 > 0, "epidemic.t1 must be > 0");
  need(t1 <= t2, "epidemic.t1 must be <= epidemic.t2");
  need(fanout >= 1, "epidemic.fanout must be >= 1");
  need(std::isfinite(hosting_time) && hosting_time >= 0, "epidemic.hosting_time must be >= 0");
  return out;
}

void EpidemicParams::validate() const {
  const auto v = violations();
  if (v.empty()) return;
  std::ostringstream msg;
  msg << "invalid epidemic parameters:";
  for (const auto& s : v) msg << "\n  " << s;
  throw InvalidArgument(msg.str());
}

void ChunkCensus::apply(ReplicaState from, ReplicaState to) {
  auto slot = [this](ReplicaState s) -> std::size_t& {
    switch (s) {
      case ReplicaState::Susceptible: return this->s;
      case ReplicaState::Infected: return this->i;
      case ReplicaState::Recovered: return this->r;
      case ReplicaState::Dead: break;
    }
    return this->d;
  };
  --slot(from);
  ++slot(to);
}

ChunkCensus ChunkCensus::of(std::span<const ChunkReplicaState> replicas) {
  ChunkCensus c;
  c.n = replicas.size();
  for (const auto& r : replicas) {
    switch (r.state) {
      case ReplicaState::Susceptible: ++c.s; break;
      case ReplicaState::Infected: ++c.i; break;
      case ReplicaState::Recovered: ++c.r; break;
      case ReplicaState::Dead: ++c.d; break;
    }
  }
  return c;
}

void check_chain(ReplicaState from, ReplicaState to) {
  const auto a = static_cast<int>(from);
  const auto b = static_cast<int>(to);
  if (b != a + 1) {
    throw InvariantViolation("epidemic", std::string("illegal replica transition ") +
                                             to_string(from) + "->" + to_string(to));
  }
}

double infection_rate(const EpidemicParams& p, std::size_t s, std::size_t i, std::size_t k) {
  if (k == 0) throw InvalidArgument("infection_rate: population k must be >= 1");
  if (s + i > k) throw InvalidArgument("infection_rate: s + i exceeds population k");
  if (s == 0 || i == 0) return 0.0;
  // I * [beta (k-1)] * [S / (k-1)]; the (k-1) factors cancel, and k = 1
  // cannot reach here with both s and i positive.
  return p.beta * static_cast<double>(s * i);
}

double recovery_rate(const EpidemicParams& p, std::size_t i) {
  return p.gamma * static_cast<double>(i);
}

double infection_ttl(const EpidemicParams& p, std::size_t s, std::size_t i) {
  return p.tau * p.beta * static_cast<double>(s) * static_cast<double>(i);
}

double death_ttl(double t, double lambda, std::size_t i, std::size_t r) {
  if (t < 0) throw InvalidArgument("death_ttl: t must be >= 0");
  return t * lambda * static_cast<double>(i + r);
}

double purge_hazard(PurgeHazard shape, double x) {
  switch (shape) {
    case PurgeHazard::Saturating: return -std::expm1(-x);
    case PurgeHazard::Linear: return x;
  }
  return 0.0;
}

double bped(double lambda, std::span<const std::size_t> r_series, std::size_t horizon,
            PurgeHazard shape) {
  if (r_series.size() < horizon + 1) {
    throw InvalidArgument("bped: recovered series shorter than horizon + 1");
  }
  double total = 0.0;
  for (std::size_t t = 0; t <= horizon; ++t) {
    total += purge_hazard(shape, lambda * static_cast<double>(t)) *
             static_cast<double>(r_series[t]);
  }
  return total;
}

namespace {

Tick ttl_deadline(Tick now, double ttl) {
  if (!(ttl < 1e15)) return kNever;
  return now + static_cast<Tick>(std::ceil(ttl));
}

}  // namespace

std::vector<Transition> step_replicas(ChunkId chunk, std::span<ChunkReplicaState> replicas,
                                      std::span<const std::uint32_t> exposure,
                                      std::span<const bool> can_host, const ChunkCensus& census,
                                      const EpidemicParams& p, Tick now, const KeyedRng& rng) {
  if (exposure.size() != replicas.size()) {
    throw InvalidArgument("step_replicas: exposure size differs from replica count");
  }
  if (!can_host.empty() && can_host.size() != replicas.size()) {
    throw InvalidArgument("step_replicas: can_host size differs from replica count");
  }

  const double recover_p = std::min(1.0, p.gamma);
  const double ttl = infection_ttl(p, census.s, census.i);
  const double stale_after = death_ttl(p.hosting_time, p.lambda, census.i, census.r);

  std::vector<Transition> out;
  for (std::size_t v = 0; v < replicas.size(); ++v) {
    auto& rep = replicas[v];
    const auto node = static_cast<NodeId>(v);
    switch (rep.state) {
      case ReplicaState::Susceptible: {
        if (exposure[v] == 0) break;
        if (!can_host.empty() && !can_host[v]) break;
        const double prob = std::min(1.0, p.beta * static_cast<double>(exposure[v]));
        auto s = rng.stream(Phase::Epidemic, node, now, chunk);
        if (!s.bernoulli(prob)) break;
        rep.state = ReplicaState::Infected;
        rep.since = now;
        rep.infected_deadline = ttl_deadline(now, ttl);
        rep.aborted = false;
        out.push_back({node, chunk, ReplicaState::Susceptible, ReplicaState::Infected,
                       TransitionCause::Infection});
        break;
      }
      case ReplicaState::Infected: {
        if (rep.session_bound) break;
        const bool expired = rep.infected_deadline && now > *rep.infected_deadline;
        bool recovers = false;
        if (!expired) {
          auto s = rng.stream(Phase::Epidemic, node, now, chunk);
          recovers = s.bernoulli(recover_p);
        }
        if (!expired && !recovers) break;
        rep.state = ReplicaState::Recovered;
        rep.since = now;
        rep.infected_deadline.reset();
        rep.aborted = expired && !rep.origin;
        out.push_back({node, chunk, ReplicaState::Infected, ReplicaState::Recovered,
                       expired ? TransitionCause::TtlExpiry : TransitionCause::Recovery});
        break;
      }
      case ReplicaState::Recovered: {
        if (rep.origin || p.lambda <= 0.0) break;
        if (static_cast<double>(now - rep.since) <= stale_after) break;
        rep.state = ReplicaState::Dead;
        rep.since = now;
        out.push_back({node, chunk, ReplicaState::Recovered, ReplicaState::Dead,
                       TransitionCause::Staleness});
        break;
      }
      case ReplicaState::Dead:
        break;
    }
  }
  return out;
}

std::vector<Transition> step_chunk_states(const ChunkCensus& census, ChunkId chunk,
                                          std::span<ChunkReplicaState> replicas,
                                          const EpidemicParams& p, Tick now, const KeyedRng& rng) {
  if (!census.consistent() || !(census == ChunkCensus::of(replicas))) {
    throw InvariantViolation("epidemic", "census does not match replica states for chunk " +
                                             std::to_string(chunk));
  }
  std::vector<std::uint32_t> exposure(replicas.size(), static_cast<std::uint32_t>(census.i));
  return step_replicas(chunk, replicas, exposure, {}, census, p, now, rng);
}

DeathCertificate issue_death_certificate(ChunkId chunk, Tick now, const EpidemicParams& p) {
  if (p.t1 > p.t2) throw InvalidArgument("death certificate requires t1 <= t2");
  return DeathCertificate{chunk, now, p.t1, p.t2};
}

const DeathCertificate& CertificateRegistry::issue(ChunkId chunk, Tick now,
                                                   const EpidemicParams& p) {
  auto it = certs_.find(chunk);
  if (it != certs_.end()) return it->second;
  return certs_.emplace(chunk, issue_death_certificate(chunk, now, p)).first->second;
}

const DeathCertificate* CertificateRegistry::find(ChunkId chunk) const {
  auto it = certs_.find(chunk);
  return it == certs_.end() ? nullptr : &it->second;
}

CertificateAction apply_death_certificate(const ChunkReplicaState& replica,
                                          const DeathCertificate& cert, Tick now,
                                          bool is_retention_site, bool obsolete_update) {
  CertificateAction act;
  const Tick age = now - cert.issued_at;
  const Tick threshold = is_retention_site ? cert.t2 : cert.t1;
  act.purge = replica.live() && age >= threshold;
  act.respread = obsolete_update;
  return act;
}

std::vector<NodeId> select_gossip_targets(NodeId node, std::span<const NodeId> neighbors,
                                          unsigned fanout, Stream& rng) {
  return select_gossip_targets(node, neighbors, fanout, rng, nullptr);
}

std::vector<NodeId> select_gossip_targets(NodeId node, std::span<const NodeId> neighbors,
                                          unsigned fanout, Stream& rng,
                                          const std::function<bool(NodeId)>& valid) {
  if (fanout == 0) throw InvalidArgument("select_gossip_targets: fanout must be >= 1");
  std::vector<NodeId> pool;
  pool.reserve(neighbors.size());
  for (NodeId v : neighbors) {
    if (v == node) continue;
    if (valid && !valid(v)) continue;
    pool.push_back(v);
  }
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());

  const std::size_t take = std::min<std::size_t>(fanout, pool.size());
  if (take < pool.size()) {
    // Partial Fisher-Yates: the first `take` entries become the sample.
    for (std::size_t i = 0; i < take; ++i) {
      const auto j = i + static_cast<std::size_t>(rng.below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(take);
    std::sort(pool.begin(), pool.end());
  }
  return pool;
}

}  // namespace epirep
