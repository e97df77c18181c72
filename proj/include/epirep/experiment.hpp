#pragma once

// Experiment presets, batch seed sweeps, aggregation and strategy comparison.

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "epirep/config.hpp"
#include "epirep/engine.hpp"

namespace epirep {

using Override = std::pair<std::string, std::string>;

/// Labeled set of overrides applied before the sweep (e.g. high/low W).
struct SweepGroup {
  std::string label;
  std::vector<Override> overrides;
};

struct ExperimentPreset {
  std::string name;
  std::string description;
  WorldConfig base;
  std::string sweep_param;  // empty: a single point
  std::vector<std::string> sweep_values;
  std::vector<SweepGroup> groups;  // empty: one unlabeled group
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> outputs;  // aggregated columns
};

const std::vector<ExperimentPreset>& presets();

/// Throws InvalidArgument naming the preset when it does not exist.
const ExperimentPreset& find_preset(const std::string& name);

/// Single-point experiment around a parsed config.
ExperimentPreset preset_from_config(const WorldConfig& config, std::string name = "custom");

/// One sweep point: group/sweep label plus the resolved config (seed unset).
struct SweepPoint {
  std::string label;  // file-name safe
  std::string group;
  std::string value;
  WorldConfig config;
};

/// Expands groups x sweep values. Throws ConfigError for a bad override or
/// invalid resulting config.
std::vector<SweepPoint> expand(const ExperimentPreset& preset);

struct ExperimentOptions {
  std::vector<std::uint64_t> seeds;  // empty: the preset's seeds
  unsigned jobs = 1;
  bool json = false;  // per-run series as JSON instead of CSV
  std::vector<Override> overrides;  // applied to every point after expansion
  RunOptions run;
};

struct SeriesStats {
  std::vector<std::string> columns;
  std::vector<Tick> ticks;
  std::vector<std::vector<double>> mean;  // [column][tick]
  std::vector<std::vector<double>> stddev;
};

/// Per-tick mean and sample standard deviation (0 for one seed) of the
/// selected columns. All series must have equal length.
SeriesStats aggregate(const std::vector<std::vector<MetricsRow>>& runs,
                      const std::vector<std::string>& columns);

std::string aggregate_csv(const SeriesStats& stats);

struct PointResult {
  SweepPoint point;
  std::vector<std::uint64_t> seeds;
  std::vector<std::vector<MetricsRow>> series;  // per seed
  std::vector<RunSummary> summaries;
};

struct ExperimentResult {
  std::vector<PointResult> points;
  std::vector<std::filesystem::path> files;  // written, in order
};

/// Runs every (point, seed) pair, then writes per-run series, aggregated
/// CSVs and summary.json under `out_dir`. Runs may execute in parallel;
/// files are written afterwards in a fixed order. Throws std::runtime_error
/// when out_dir cannot be written.
ExperimentResult run_experiment(const ExperimentPreset& preset,
                                const std::filesystem::path& out_dir,
                                const ExperimentOptions& options = {});

/// Same runs without writing anything.
std::vector<PointResult> run_points(const ExperimentPreset& preset,
                                    const ExperimentOptions& options = {});

struct SignTest {
  std::uint64_t below = 0;  // ticks where a < b
  std::uint64_t above = 0;
  std::uint64_t ties = 0;
  double p_value = 1.0;  // two-sided binomial test over non-tied ticks

  bool operator==(const SignTest&) const = default;
};

SignTest sign_test(std::span<const double> differences);

struct Comparison {
  std::vector<std::uint64_t> seeds;
  std::vector<Tick> ticks;
  // Per-tick mean over seeds of (a - b).
  std::vector<double> infected_diff;
  std::vector<double> sdr_diff;
  std::vector<double> eff_diff;
  SignTest infected_sign;
  SignTest sdr_sign;
  SignTest eff_sign;
  // Per-seed raw series of a and b.
  std::vector<std::vector<MetricsRow>> a;
  std::vector<std::vector<MetricsRow>> b;
};

/// Runs both configs on identical seeds and pairs their series tick by tick.
Comparison compare_configs(const WorldConfig& a, const WorldConfig& b,
                           const std::vector<std::uint64_t>& seeds, unsigned jobs = 1,
                           const RunOptions& run = {});

/// compare_configs with strategy Epidemic on the left and Random on the right.
Comparison compare_strategies(const WorldConfig& config, const std::vector<std::uint64_t>& seeds,
                              unsigned jobs = 1, const RunOptions& run = {});

std::string comparison_csv(const Comparison& c);
std::string comparison_json(const Comparison& c);

/// JSON document for one run's series.
std::string series_json(std::span<const MetricsRow> rows);

}  // namespace epirep
