#pragma once

// Scenario configuration and its flat `key = value` text format.

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "epirep/epidemic.hpp"
#include "epirep/topology.hpp"
#include "epirep/transfer.hpp"

namespace epirep {

enum class Strategy : std::uint8_t { Epidemic, Random };

const char* to_string(Strategy s);

struct MobilityConfig {
  double speed_min = 0.5;  // meters per tick
  double speed_max = 2.0;
  double dwell_mean = 30.0;  // mean ticks between heading changes

  bool operator==(const MobilityConfig&) const = default;
};

struct EnergyConfig {
  double min = 50.0;
  double max = 100.0;
  double per_packet = 0.001;  // spent by both ends of every packet attempt

  bool operator==(const EnergyConfig&) const = default;
};

struct CapacityConfig {
  unsigned min = 6;
  unsigned max = 16;

  bool operator==(const CapacityConfig&) const = default;
};

struct CommunityConfig {
  double w_fixed = -1.0;       // >= 0 replaces the computed W
  std::size_t feedback_k = 2;  // neighbor feedback receivers

  bool operator==(const CommunityConfig&) const = default;
};

struct DeletionConfig {
  std::size_t count = 0;  // chunks deleted by their origin
  Tick at = 0;            // tick of deletion

  bool operator==(const DeletionConfig&) const = default;
};

struct WorldConfig {
  std::size_t node_count = 50;
  Region region{600.0, 600.0};
  double radio_range = 150.0;
  Tick ticks = 2000;
  std::uint64_t seed = 1;
  Strategy strategy = Strategy::Epidemic;

  std::size_t file_count = 10;
  std::size_t chunks_per_file = 4;
  double chunk_bytes = 1024.0;
  double packet_bytes = 128.0;
  double workload = 0.2;            // file requests per tick
  double sensitive_fraction = 0.5;  // share of delay-bounded chunks
  std::size_t initial_replicas = 1;
  double retention_fraction = 0.1;
  double w_max = 10.0;
  Tick h_window = 50;

  Tick probation_ticks = 5;
  unsigned zone_radius_hops = 2;
  std::size_t min_cluster_density = 2;
  double lookup_delay = 1.0;  // index lookup latency, ticks
  double bandwidth = 1024.0;  // bytes per tick

  EpidemicParams epidemic;
  HopDelayModel hop_delay;
  MobilityConfig mobility;
  EnergyConfig energy;
  CapacityConfig capacity;
  ReachabilityModel reachability;
  CommunityConfig community;
  DeletionConfig deletions;

  std::size_t chunk_count() const { return file_count * chunks_per_file; }
  std::size_t packets_per_chunk() const;

  std::vector<std::string> violations() const;
  /// Throws ConfigError listing every violation.
  void validate() const;

  bool operator==(const WorldConfig&) const = default;
};

/// Parses `key = value` lines. `#` starts a comment; blank lines are
/// ignored. Missing keys keep their defaults. Throws ConfigError naming the
/// key and line for unknown keys, malformed values and violated invariants.
WorldConfig parse_config(std::string_view text);

/// Every key in canonical order, one per line. parse_config(emit_config(c))
/// == c for any valid c.
std::string emit_config(const WorldConfig& config);

/// Assigns one key from its textual value. Throws ConfigError (line 0).
void set_config_value(WorldConfig& config, std::string_view key, std::string_view value);

std::string get_config_value(const WorldConfig& config, std::string_view key);

std::vector<std::string> config_keys();

/// Shortest text that reads back to the same double.
std::string format_double(double v);

}  // namespace epirep
