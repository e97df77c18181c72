#pragma once

// Throughput metrics, the logistic epidemic solution and per-tick metric rows.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "epirep/types.hpp"

namespace epirep {

struct World;

struct LogisticParams {
  double beta = 0.0;
  double n = 1.0;
  double i0 = 1.0;
};

/// clamp(1 - loss * (size / time) / bandwidth, 0, 1). Throws InvalidArgument
/// when time or bandwidth is not positive.
double effective_throughput(double loss, double size, double time, double bandwidth);

struct ThroughputPair {
  double hops = 0.0;  // n_i
  double chunk_bits = 0.0;
  double size = 0.0;
  double time = 0.0;
};

/// Sum of n_i * (chunk_bits * size / time). Throws InvalidArgument on a
/// non-positive time.
double total_effective_throughput(std::span<const ThroughputPair> pairs);

/// N / (1 + ((N - I0) / I0) * exp(-beta * N * t)).
double logistic_infected(const LogisticParams& p, double t);

/// logistic_infected / N.
double spreading_ratio(const LogisticParams& p, double t);

/// completed / initiated, 1 when nothing was initiated. Throws
/// InvariantViolation when completed > initiated.
double sdr(std::uint64_t completed, std::uint64_t initiated);

struct MetricsRow {
  Tick tick = 0;
  double infected_mean = 0.0;  // infected replicas per cluster
  double sdr = 1.0;
  double eff = 1.0;
  double total_eff = 0.0;
  double mean_transfer_delay = 0.0;  // completed sessions, cumulative mean
  double end_to_end_delay = 0.0;     // completed intercluster sessions, cumulative mean
  double w_factor = 0.0;
  std::uint64_t completed_files = 0;
  std::uint64_t death_rate_events = 0;  // replicas entering D this tick
  double bped = 0.0;

  std::uint64_t active_sessions = 0;
  std::uint64_t intercluster_sessions = 0;  // active
  std::uint64_t completed_sessions = 0;     // cumulative
  std::uint64_t failed_sessions = 0;        // cumulative, includes expired
  std::uint64_t rejected_requests = 0;      // cumulative
  std::uint64_t packets_delivered = 0;      // cumulative
  std::uint64_t clusters = 0;
  std::uint64_t participating_nodes = 0;  // post-probation members
  std::uint64_t get_rebuilds = 0;         // this tick
  std::uint64_t purged_replicas = 0;      // cumulative
  std::uint64_t respread_events = 0;      // cumulative
  std::uint64_t infected_total = 0;       // infected replicas, all nodes

  bool operator==(const MetricsRow&) const = default;
};

/// Column names in CSV order.
const std::vector<std::string>& metrics_columns();

/// Value of column `name` as a double. Throws InvalidArgument for an
/// unknown column.
double metric_value(const MetricsRow& row, std::string_view name);

std::string csv_header();
std::string csv_row(const MetricsRow& row);
std::string to_csv(std::span<const MetricsRow> rows);

/// Snapshot of the world's observables at its current tick. Pure read.
MetricsRow record_tick(const World& world);

}  // namespace epirep
