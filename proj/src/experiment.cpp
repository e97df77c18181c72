#include "epirep/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "epirep/error.hpp"

namespace epirep {

namespace {

using json = nlohmann::ordered_json;

std::vector<std::uint64_t> seed_range(std::uint64_t n) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t s = 1; s <= n; ++s) out.push_back(s);
  return out;
}

ExperimentPreset make(std::string name, std::string description, std::string param,
                      std::vector<std::string> values, std::vector<std::string> outputs) {
  ExperimentPreset p;
  p.name = std::move(name);
  p.description = std::move(description);
  p.sweep_param = std::move(param);
  p.sweep_values = std::move(values);
  p.seeds = seed_range(5);
  p.outputs = std::move(outputs);
  return p;
}

std::vector<ExperimentPreset> build_presets() {
  std::vector<ExperimentPreset> out;

  out.push_back(make("fig6-infected", "mean infected replicas per cluster, epidemic vs random targets",
                     "strategy", {"epidemic", "random"},
                     {"infected_mean", "infected_total", "completed_sessions", "sdr"}));

  out.push_back(make("fig7-sessions", "intercluster sessions and delivered packets vs workload",
                     "workload", {"0.1", "0.2", "0.4"},
                     {"intercluster_sessions", "active_sessions", "completed_sessions",
                      "packets_delivered", "sdr"}));

  auto fig8 = make("fig8-delay", "intercluster end-to-end delay vs workload, both strategies",
                   "workload", {"0.1", "0.3"},
                   {"end_to_end_delay", "intercluster_sessions", "mean_transfer_delay"});
  fig8.groups = {{"epidemic", {{"strategy", "epidemic"}}}, {"random", {{"strategy", "random"}}}};
  out.push_back(std::move(fig8));

  auto fig9 = make("fig9-death", "death events and purging degree vs death rate", "epidemic.lambda",
                   {"0", "0.01", "0.05"},
                   {"death_rate_events", "bped", "purged_replicas", "rejected_requests"});
  fig9.base.deletions = {5, 500};
  out.push_back(std::move(fig9));

  out.push_back(make("fig10-transfer-delay", "total transfer delay vs simultaneous sessions",
                     "workload", {"0.1", "0.2", "0.4"},
                     {"mean_transfer_delay", "active_sessions", "intercluster_sessions"}));

  auto fig11 = make("fig11-sdr", "successful delivery rate vs chunks per file", "chunks_per_file",
                    {"2", "4", "8"}, {"sdr", "active_sessions", "completed_sessions"});
  fig11.base.hop_delay.loss_prob = 0.01;
  fig11.base.hop_delay.retry_budget = 2;
  fig11.seeds = seed_range(10);
  out.push_back(std::move(fig11));

  out.push_back(make("fig12-throughput", "throughput vs mean total transfer delay",
                     "hop_delay.base", {"0.5", "1", "2"},
                     {"total_eff", "eff", "mean_transfer_delay"}));

  out.push_back(make("fig13-throughput", "throughput vs participating cluster nodes",
                     "min_cluster_density", {"2", "4", "6"},
                     {"total_eff", "eff", "participating_nodes"}));

  auto fig14 = make("fig14-network-size", "completed files vs network size at high and low W",
                    "node_count", {"30", "50", "80"},
                    {"completed_files", "completed_sessions", "sdr"});
  fig14.groups = {{"w-high", {{"community.w_fixed", "0.6"}}},
                  {"w-low", {{"community.w_fixed", "0.05"}}}};
  out.push_back(std::move(fig14));

  out.push_back(make("fig16-streaming-factor", "streaming factor vs chunks being shared",
                     "workload", {"0.1", "0.2", "0.4"},
                     {"w_factor", "infected_total", "active_sessions"}));

  out.push_back(make("fig17-community-sdr", "SDR vs community request load", "workload",
                     {"0.1", "0.3", "0.6"}, {"sdr", "rejected_requests", "completed_sessions"}));

  out.push_back(make("fig18-w-throughput", "throughput vs fixed community streaming factor",
                     "community.w_fixed", {"0.05", "0.2", "0.5", "0.8"},
                     {"total_eff", "eff", "w_factor", "completed_sessions"}));
  return out;
}

std::string safe_label(std::string s) {
  for (auto& ch : s) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || (ch >= '0' && ch <= '9') ||
                    ch == '.' || ch == '-' || ch == '_';
    if (!ok) ch = '_';
  }
  return s;
}

// Runs tasks [0, n) on up to `jobs` threads; rethrows the lowest-index error.
template <class F>
void parallel_for(std::size_t n, unsigned jobs, F&& f) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned k = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(n)));
  if (k <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < k; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("cannot write " + path.string());
}

json summary_json(const RunSummary& s) {
  json j;
  j["ticks"] = s.ticks;
  j["mean_sdr"] = s.mean_sdr;
  j["min_sdr"] = s.min_sdr;
  j["max_sdr"] = s.max_sdr;
  j["mean_eff"] = s.mean_eff;
  j["completed_files"] = s.completed_files;
  j["sessions_initiated"] = s.sessions_initiated;
  j["sessions_completed"] = s.sessions_completed;
  j["sessions_failed"] = s.sessions_failed;
  j["requests_rejected"] = s.requests_rejected;
  return j;
}

double binomial_two_sided(std::uint64_t k, std::uint64_t n) {
  if (n == 0) return 1.0;
  const std::uint64_t lo = std::min(k, n - k);
  // P(X <= lo) for X ~ Bin(n, 1/2), summed in log space.
  double total = 0.0;
  const double ln_half_n = static_cast<double>(n) * std::log(0.5);
  for (std::uint64_t i = 0; i <= lo; ++i) {
    const double ln_c = std::lgamma(static_cast<double>(n) + 1) -
                        std::lgamma(static_cast<double>(i) + 1) -
                        std::lgamma(static_cast<double>(n - i) + 1);
    total += std::exp(ln_c + ln_half_n);
  }
  return std::min(1.0, 2.0 * total);
}

}  // namespace

const std::vector<ExperimentPreset>& presets() {
  static const std::vector<ExperimentPreset> registry = build_presets();
  return registry;
}

const ExperimentPreset& find_preset(const std::string& name) {
  for (const auto& p : presets()) {
    if (p.name == name) return p;
  }
  throw InvalidArgument("preset not found: '" + name + "'");
}

ExperimentPreset preset_from_config(const WorldConfig& config, std::string name) {
  ExperimentPreset p;
  p.name = std::move(name);
  p.description = "single configuration";
  p.base = config;
  p.seeds = {config.seed};
  p.outputs = metrics_columns();
  p.outputs.erase(p.outputs.begin());  // tick is the index column
  return p;
}

std::vector<SweepPoint> expand(const ExperimentPreset& preset) {
  std::vector<SweepGroup> groups = preset.groups;
  if (groups.empty()) groups.push_back({});
  std::vector<std::string> values = preset.sweep_values;
  if (preset.sweep_param.empty()) values = {""};
  if (values.empty()) throw InvalidArgument("preset '" + preset.name + "' has no sweep values");

  std::vector<SweepPoint> out;
  for (const auto& g : groups) {
    for (const auto& v : values) {
      SweepPoint pt;
      pt.group = g.label;
      pt.value = v;
      pt.config = preset.base;
      for (const auto& [k, val] : g.overrides) set_config_value(pt.config, k, val);
      std::string label = g.label;
      if (!preset.sweep_param.empty()) {
        set_config_value(pt.config, preset.sweep_param, v);
        if (!label.empty()) label += "__";
        label += preset.sweep_param + "=" + v;
      }
      pt.label = safe_label(label.empty() ? "base" : label);
      pt.config.validate();
      out.push_back(std::move(pt));
    }
  }
  return out;
}

SeriesStats aggregate(const std::vector<std::vector<MetricsRow>>& runs,
                      const std::vector<std::string>& columns) {
  SeriesStats st;
  st.columns = columns;
  if (runs.empty()) return st;
  const std::size_t len = runs.front().size();
  for (const auto& r : runs) {
    if (r.size() != len) throw InvalidArgument("aggregate: series lengths differ");
  }
  for (std::size_t t = 0; t < len; ++t) st.ticks.push_back(runs.front()[t].tick);
  const double k = static_cast<double>(runs.size());
  st.mean.assign(columns.size(), std::vector<double>(len, 0.0));
  st.stddev.assign(columns.size(), std::vector<double>(len, 0.0));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    for (std::size_t t = 0; t < len; ++t) {
      double sum = 0.0;
      for (const auto& r : runs) sum += metric_value(r[t], columns[c]);
      const double mean = sum / k;
      st.mean[c][t] = mean;
      if (runs.size() > 1) {
        double ss = 0.0;
        for (const auto& r : runs) {
          const double d = metric_value(r[t], columns[c]) - mean;
          ss += d * d;
        }
        st.stddev[c][t] = std::sqrt(ss / (k - 1.0));
      }
    }
  }
  return st;
}

std::string aggregate_csv(const SeriesStats& st) {
  std::string out = "tick";
  for (const auto& c : st.columns) out += "," + c + "_mean," + c + "_std";
  out += '\n';
  for (std::size_t t = 0; t < st.ticks.size(); ++t) {
    out += std::to_string(st.ticks[t]);
    for (std::size_t c = 0; c < st.columns.size(); ++c) {
      out += ',' + format_double(st.mean[c][t]) + ',' + format_double(st.stddev[c][t]);
    }
    out += '\n';
  }
  return out;
}

std::string series_json(std::span<const MetricsRow> rows) {
  json j;
  for (const auto& name : metrics_columns()) {
    json col = json::array();
    for (const auto& r : rows) col.push_back(metric_value(r, name));
    j[name] = std::move(col);
  }
  return j.dump() + "\n";
}

std::vector<PointResult> run_points(const ExperimentPreset& preset,
                                    const ExperimentOptions& options) {
  auto points = expand(preset);
  for (auto& pt : points) {
    for (const auto& [k, v] : options.overrides) set_config_value(pt.config, k, v);
    pt.config.validate();
  }
  const auto seeds = options.seeds.empty() ? preset.seeds : options.seeds;
  if (seeds.empty()) throw InvalidArgument("experiment needs at least one seed");

  std::vector<PointResult> results(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    results[p].point = points[p];
    results[p].seeds = seeds;
    results[p].series.resize(seeds.size());
    results[p].summaries.resize(seeds.size());
  }
  parallel_for(points.size() * seeds.size(), options.jobs, [&](std::size_t task) {
    const std::size_t p = task / seeds.size();
    const std::size_t s = task % seeds.size();
    WorldConfig cfg = points[p].config;
    cfg.seed = seeds[s];
    auto r = run(cfg, options.run);
    results[p].series[s] = std::move(r.series);
    results[p].summaries[s] = r.summary;
  });
  return results;
}

ExperimentResult run_experiment(const ExperimentPreset& preset,
                                const std::filesystem::path& out_dir,
                                const ExperimentOptions& options) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir / "runs", ec);
  if (ec) throw std::runtime_error("cannot create " + (out_dir / "runs").string() + ": " + ec.message());
  fs::create_directories(out_dir / "aggregate", ec);
  if (ec) throw std::runtime_error("cannot create " + (out_dir / "aggregate").string());

  ExperimentResult res;
  res.points = run_points(preset, options);

  json summary;
  summary["preset"] = preset.name;
  summary["description"] = preset.description;
  summary["sweep"] = preset.sweep_param;
  summary["outputs"] = preset.outputs;
  json pts = json::array();
  for (const auto& pr : res.points) {
    const auto& label = pr.point.label;
    const auto cfg_path = out_dir / "runs" / (label + ".cfg");
    write_file(cfg_path, emit_config(pr.point.config));
    res.files.push_back(cfg_path);

    json runs = json::array();
    RunSummary mean;
    mean.ticks = pr.summaries.empty() ? 0 : pr.summaries.front().ticks;
    double sdr_sum = 0, min_sdr_sum = 0, eff_sum = 0, files_sum = 0;
    for (std::size_t s = 0; s < pr.seeds.size(); ++s) {
      const auto base = label + "__seed" + std::to_string(pr.seeds[s]);
      const auto path = out_dir / "runs" / (base + (options.json ? ".json" : ".csv"));
      write_file(path, options.json ? series_json(pr.series[s]) : to_csv(pr.series[s]));
      res.files.push_back(path);
      json r = summary_json(pr.summaries[s]);
      r["seed"] = pr.seeds[s];
      runs.push_back(std::move(r));
      sdr_sum += pr.summaries[s].mean_sdr;
      min_sdr_sum += pr.summaries[s].min_sdr;
      eff_sum += pr.summaries[s].mean_eff;
      files_sum += static_cast<double>(pr.summaries[s].completed_files);
    }
    const auto k = static_cast<double>(pr.seeds.size());
    const auto stats = aggregate(pr.series, preset.outputs);
    const auto agg_path = out_dir / "aggregate" / (label + ".csv");
    write_file(agg_path, aggregate_csv(stats));
    res.files.push_back(agg_path);

    json pt;
    pt["label"] = label;
    pt["group"] = pr.point.group;
    pt["value"] = pr.point.value;
    pt["mean_sdr"] = sdr_sum / k;
    pt["mean_min_sdr"] = min_sdr_sum / k;
    pt["mean_eff"] = eff_sum / k;
    pt["mean_completed_files"] = files_sum / k;
    pt["runs"] = std::move(runs);
    pts.push_back(std::move(pt));
  }
  summary["points"] = std::move(pts);
  const auto sum_path = out_dir / "summary.json";
  write_file(sum_path, summary.dump(2) + "\n");
  res.files.push_back(sum_path);
  return res;
}

SignTest sign_test(std::span<const double> d) {
  SignTest t;
  for (double x : d) {
    if (x < 0) ++t.below;
    else if (x > 0) ++t.above;
    else ++t.ties;
  }
  t.p_value = binomial_two_sided(t.below, t.below + t.above);
  return t;
}

Comparison compare_configs(const WorldConfig& a, const WorldConfig& b,
                           const std::vector<std::uint64_t>& seeds, unsigned jobs,
                           const RunOptions& run_opts) {
  if (seeds.empty()) throw InvalidArgument("compare: seeds must be non-empty");
  a.validate();
  b.validate();
  if (a.ticks != b.ticks) throw InvalidArgument("compare: configs must share the run length");

  Comparison c;
  c.seeds = seeds;
  c.a.resize(seeds.size());
  c.b.resize(seeds.size());
  parallel_for(seeds.size() * 2, jobs, [&](std::size_t task) {
    const std::size_t s = task / 2;
    WorldConfig cfg = task % 2 == 0 ? a : b;
    cfg.seed = seeds[s];
    auto r = run(cfg, run_opts);
    (task % 2 == 0 ? c.a : c.b)[s] = std::move(r.series);
  });

  const std::size_t len = c.a.front().size();
  const double k = static_cast<double>(seeds.size());
  c.infected_diff.assign(len, 0.0);
  c.sdr_diff.assign(len, 0.0);
  c.eff_diff.assign(len, 0.0);
  for (std::size_t t = 0; t < len; ++t) {
    c.ticks.push_back(c.a.front()[t].tick);
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      c.infected_diff[t] += c.a[s][t].infected_mean - c.b[s][t].infected_mean;
      c.sdr_diff[t] += c.a[s][t].sdr - c.b[s][t].sdr;
      c.eff_diff[t] += c.a[s][t].eff - c.b[s][t].eff;
    }
    c.infected_diff[t] /= k;
    c.sdr_diff[t] /= k;
    c.eff_diff[t] /= k;
  }
  c.infected_sign = sign_test(c.infected_diff);
  c.sdr_sign = sign_test(c.sdr_diff);
  c.eff_sign = sign_test(c.eff_diff);
  return c;
}

Comparison compare_strategies(const WorldConfig& config, const std::vector<std::uint64_t>& seeds,
                              unsigned jobs, const RunOptions& run_opts) {
  WorldConfig a = config;
  WorldConfig b = config;
  a.strategy = Strategy::Epidemic;
  b.strategy = Strategy::Random;
  return compare_configs(a, b, seeds, jobs, run_opts);
}

std::string comparison_csv(const Comparison& c) {
  std::string out = "tick,infected_diff,sdr_diff,eff_diff\n";
  for (std::size_t t = 0; t < c.ticks.size(); ++t) {
    out += std::to_string(c.ticks[t]) + ',' + format_double(c.infected_diff[t]) + ',' +
           format_double(c.sdr_diff[t]) + ',' + format_double(c.eff_diff[t]) + '\n';
  }
  return out;
}

std::string comparison_json(const Comparison& c) {
  auto sign = [](const SignTest& s) {
    json j;
    j["below"] = s.below;
    j["above"] = s.above;
    j["ties"] = s.ties;
    j["p_value"] = s.p_value;
    return j;
  };
  json j;
  j["seeds"] = c.seeds;
  j["ticks"] = c.ticks.size();
  j["infected"] = sign(c.infected_sign);
  j["sdr"] = sign(c.sdr_sign);
  j["eff"] = sign(c.eff_sign);
  return j.dump(2) + "\n";
}

}  // namespace epirep
