#pragma once

// SIRD lifecycle of chunk replicas: rates, time-to-live rules, the per-tick
// stochastic step, death certificates and gossip target selection.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epirep/rng.hpp"
#include "epirep/types.hpp"

namespace epirep {

enum class ReplicaState : std::uint8_t { Susceptible, Infected, Recovered, Dead };

const char* to_string(ReplicaState s);

/// Shape of the hazard f used by the buffer purging degree.
enum class PurgeHazard : std::uint8_t {
  Saturating,  // f(x) = 1 - exp(-x)
  Linear,      // f(x) = x
};

struct EpidemicParams {
  double beta = 0.02;       // contact rate per host per tick
  double gamma = 0.1;       // download (recovery) rate per tick
  double lambda = 0.01;     // death rate per tick
  double tau = 40.0;        // delay-sensitive transfer limit, ticks
  Tick t1 = 30;             // majority deletion age
  Tick t2 = 90;             // retention-site deletion age
  unsigned fanout = 2;      // gossip targets per infected host per tick
  double hosting_time = 20; // hosting period t in the death TTL, ticks
  PurgeHazard hazard = PurgeHazard::Saturating;

  /// Every violated invariant, one message per entry. Empty when valid.
  std::vector<std::string> violations() const;
  /// Throws InvalidArgument listing all violations.
  void validate() const;

  bool operator==(const EpidemicParams&) const = default;
};

struct ChunkReplicaState {
  ReplicaState state = ReplicaState::Susceptible;
  Tick since = 0;
  std::optional<Tick> infected_deadline;
  bool origin = false;         // seeded copy; exempt from stale death
  bool aborted = false;        // Recovered without completing the download
  bool session_bound = false;  // Infected by an active transfer session

  /// True when this node can serve the chunk to others.
  bool has_data() const {
    if (state == ReplicaState::Recovered) return !aborted;
    return origin && state == ReplicaState::Infected;
  }
  /// Occupies a buffer slot.
  bool live() const {
    return state == ReplicaState::Infected || state == ReplicaState::Recovered;
  }

  bool operator==(const ChunkReplicaState&) const = default;
};

struct ChunkCensus {
  std::size_t s = 0;
  std::size_t i = 0;
  std::size_t r = 0;
  std::size_t d = 0;
  std::size_t n = 0;

  bool consistent() const { return s + i + r + d == n; }
  void apply(ReplicaState from, ReplicaState to);

  static ChunkCensus of(std::span<const ChunkReplicaState> replicas);

  bool operator==(const ChunkCensus&) const = default;
};

enum class TransitionCause : std::uint8_t {
  Infection,      // gossip contact
  Recovery,       // download finished (gamma)
  TtlExpiry,      // infection outlived its TTL
  Staleness,      // recovered copy older than the death TTL
  Purge,          // death certificate enforcement
  SessionStart,   // requester starts a transfer session
  SessionClose,   // transfer session closed
  Diffusion,      // replica copy pushed during failure recovery
};

struct Transition {
  NodeId node;
  ChunkId chunk;
  ReplicaState from;
  ReplicaState to;
  TransitionCause cause;

  bool operator==(const Transition&) const = default;
};

/// Throws InvariantViolation unless `from -> to` is one step of S->I->R->D.
void check_chain(ReplicaState from, ReplicaState to);

/// Filesharing transition rate I*[beta(k-1)]*[S/(k-1)] = beta*S*I.
double infection_rate(const EpidemicParams& p, std::size_t s, std::size_t i, std::size_t k);

double recovery_rate(const EpidemicParams& p, std::size_t i);

/// I_TTL = tau * beta * S * I, in ticks.
double infection_ttl(const EpidemicParams& p, std::size_t s, std::size_t i);

/// d_TTL = t * lambda * (I + R), in ticks.
double death_ttl(double t, double lambda, std::size_t i, std::size_t r);

double purge_hazard(PurgeHazard shape, double x);

/// Buffer purging enforcement degree: sum over t in [0, horizon] of
/// f(lambda * t) * R(t). Throws InvalidArgument if the series is too short.
double bped(double lambda, std::span<const std::size_t> r_series, std::size_t horizon,
            PurgeHazard shape = PurgeHazard::Saturating);

/// One stochastic tick for a single chunk.
///
/// `replicas[v]` is node v's copy and `exposure[v]` counts infected contacts
/// that reached v this tick. A susceptible copy becomes infected with
/// probability min(1, beta * exposure) if `can_host[v]` (empty span = all may
/// host). Infected copies past their deadline are forced to Recovered (aborted);
/// the rest recover with probability min(1, gamma). Recovered copies older
/// than the death TTL die; origin copies and session-bound copies are left to
/// their owners. TTLs use the pre-step census. Draws come from the
/// (Epidemic, node, now, chunk) sub-stream, so results do not depend on
/// visiting order.
std::vector<Transition> step_replicas(ChunkId chunk, std::span<ChunkReplicaState> replicas,
                                      std::span<const std::uint32_t> exposure,
                                      std::span<const bool> can_host, const ChunkCensus& census,
                                      const EpidemicParams& p, Tick now, const KeyedRng& rng);

/// Complete-mixing step: every susceptible host is exposed to all I infected
/// hosts, which gives per-host infection probability min(1, beta*I), i.e.
/// infection_rate / S. Throws InvariantViolation if `census` disagrees with
/// `replicas`.
std::vector<Transition> step_chunk_states(const ChunkCensus& census, ChunkId chunk,
                                          std::span<ChunkReplicaState> replicas,
                                          const EpidemicParams& p, Tick now, const KeyedRng& rng);

struct DeathCertificate {
  ChunkId chunk;
  Tick issued_at;
  Tick t1;
  Tick t2;

  bool operator==(const DeathCertificate&) const = default;
};

DeathCertificate issue_death_certificate(ChunkId chunk, Tick now, const EpidemicParams& p);

/// Issued certificates, at most one per chunk. Issuing twice returns the
/// first certificate unchanged.
class CertificateRegistry {
 public:
  const DeathCertificate& issue(ChunkId chunk, Tick now, const EpidemicParams& p);
  const DeathCertificate* find(ChunkId chunk) const;
  bool contains(ChunkId chunk) const { return certs_.contains(chunk); }
  std::size_t size() const { return certs_.size(); }

  auto begin() const { return certs_.begin(); }
  auto end() const { return certs_.end(); }

  bool operator==(const CertificateRegistry&) const = default;

 private:
  std::map<ChunkId, DeathCertificate> certs_;
};

struct CertificateAction {
  bool purge = false;
  bool respread = false;

  bool operator==(const CertificateAction&) const = default;
};

/// Decision for one node's copy. Live copies are purged once the certificate
/// is t1 old, or t2 old on retention sites. An obsolete update reaching the
/// node asks it to spread the certificate again.
CertificateAction apply_death_certificate(const ChunkReplicaState& replica,
                                          const DeathCertificate& cert, Tick now,
                                          bool is_retention_site, bool obsolete_update = false);

/// Up to `fanout` distinct neighbors, uniformly without replacement, sorted
/// by id. Returns an empty set for an empty list.
std::vector<NodeId> select_gossip_targets(NodeId node, std::span<const NodeId> neighbors,
                                          unsigned fanout, Stream& rng);

/// Same, restricted to neighbors accepted by `valid`.
std::vector<NodeId> select_gossip_targets(NodeId node, std::span<const NodeId> neighbors,
                                          unsigned fanout, Stream& rng,
                                          const std::function<bool(NodeId)>& valid);

}  // namespace epirep
