#pragma once

// World construction and the fixed per-tick phase order:
//   1 mobility, 2 connectivity, 3 probation + clusters + GET, 4 community,
//   5 sessions + workload, 6 gossip epidemic, 7 death certificates, 8 metrics.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "epirep/world.hpp"

namespace epirep {

struct RunOptions {
  /// Full invariant audit after every tick (census, slots, sessions).
  bool audit = true;
  /// Visit nodes in descending id order inside phases. Outputs must not
  /// change; exists to test that claim.
  bool reverse_iteration = false;
  /// Called after every tick with the finished world.
  std::function<void(const World&)> on_tick;
  /// Called right after each GET rebuild with the energies it was built on.
  std::function<void(const ClusterView&, const GetTree&, const Graph&, std::span<const double>)>
      on_get_rebuild;
};

/// Places nodes, splits files into chunks and seeds every chunk on its
/// origin nodes. Throws ConfigError listing every violated invariant.
World init_world(const WorldConfig& config);

/// Advances the world by one tick and returns that tick's metrics.
/// Throws InvariantViolation naming the phase that detected a broken
/// invariant.
MetricsRow tick(World& world, const RunOptions& options = {});

struct RunSummary {
  Tick ticks = 0;
  double mean_sdr = 1.0;
  double min_sdr = 1.0;
  double max_sdr = 1.0;
  double mean_eff = 1.0;
  std::uint64_t completed_files = 0;
  std::uint64_t sessions_initiated = 0;
  std::uint64_t sessions_completed = 0;
  std::uint64_t sessions_failed = 0;  // includes expired
  std::uint64_t requests_rejected = 0;

  bool operator==(const RunSummary&) const = default;
};

struct RunResult {
  std::vector<MetricsRow> series;  // ticks 1..T
  RunSummary summary;
  World world;
};

RunResult run(const WorldConfig& config, const RunOptions& options = {});

RunSummary summarize(std::span<const MetricsRow> series);

/// Throws InvariantViolation(phase) if any joint invariant fails.
void audit_world(const World& world, const char* phase = "audit");

/// The origin deletes `chunk`: issues its certificate at the current tick and
/// informs the origin nodes. Idempotent.
const DeathCertificate& delete_chunk(World& world, ChunkId chunk);

/// An obsolete update for `chunk` reaches `node`. A node that holds the
/// certificate spreads it again to its cluster neighbors and cluster head.
/// Returns true when a re-spread happened.
bool inject_obsolete_update(World& world, NodeId node, ChunkId chunk);

}  // namespace epirep
