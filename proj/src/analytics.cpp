#include "epirep/analytics.hpp"

#include <algorithm>
#include <cmath>

#include "epirep/config.hpp"
#include "epirep/error.hpp"
#include "epirep/world.hpp"

namespace epirep {

double effective_throughput(double loss, double size, double time, double bandwidth) {
  if (!(time > 0)) throw InvalidArgument("effective_throughput: time must be > 0");
  if (!(bandwidth > 0)) throw InvalidArgument("effective_throughput: bandwidth must be > 0");
  const double e = 1.0 - loss * (size / time) * (1.0 / bandwidth);
  return std::clamp(e, 0.0, 1.0);
}

double total_effective_throughput(std::span<const ThroughputPair> pairs) {
  double total = 0.0;
  for (const auto& p : pairs) {
    if (!(p.time > 0)) throw InvalidArgument("total_effective_throughput: time must be > 0");
    total += p.hops * (p.chunk_bits * p.size / p.time);
  }
  return total;
}

double logistic_infected(const LogisticParams& p, double t) {
  if (!(p.n >= 1)) throw InvalidArgument("logistic_infected: n must be >= 1");
  if (!(p.i0 >= 1 && p.i0 <= p.n)) throw InvalidArgument("logistic_infected: need 1 <= i0 <= n");
  if (!(p.beta >= 0)) throw InvalidArgument("logistic_infected: beta must be >= 0");
  return p.n / (1.0 + ((p.n - p.i0) / p.i0) * std::exp(-p.beta * p.n * t));
}

double spreading_ratio(const LogisticParams& p, double t) { return logistic_infected(p, t) / p.n; }

double sdr(std::uint64_t completed, std::uint64_t initiated) {
  if (completed > initiated) {
    throw InvariantViolation("analytics", "completed sessions exceed initiated sessions");
  }
  if (initiated == 0) return 1.0;
  return static_cast<double>(completed) / static_cast<double>(initiated);
}

namespace {

struct Column {
  const char* name;
  double (*get)(const MetricsRow&);
};

#define EPIREP_COL(field) \
  Column { #field, [](const MetricsRow& r) { return static_cast<double>(r.field); } }

const std::vector<Column>& columns() {
  static const std::vector<Column> cols{
      EPIREP_COL(tick),
      EPIREP_COL(infected_mean),
      EPIREP_COL(sdr),
      EPIREP_COL(eff),
      EPIREP_COL(total_eff),
      EPIREP_COL(mean_transfer_delay),
      EPIREP_COL(end_to_end_delay),
      EPIREP_COL(w_factor),
      EPIREP_COL(completed_files),
      EPIREP_COL(death_rate_events),
      EPIREP_COL(bped),
      EPIREP_COL(active_sessions),
      EPIREP_COL(intercluster_sessions),
      EPIREP_COL(completed_sessions),
      EPIREP_COL(failed_sessions),
      EPIREP_COL(rejected_requests),
      EPIREP_COL(packets_delivered),
      EPIREP_COL(clusters),
      EPIREP_COL(participating_nodes),
      EPIREP_COL(get_rebuilds),
      EPIREP_COL(purged_replicas),
      EPIREP_COL(respread_events),
      EPIREP_COL(infected_total),
  };
  return cols;
}

#undef EPIREP_COL

}  // namespace

const std::vector<std::string>& metrics_columns() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& c : columns()) out.emplace_back(c.name);
    return out;
  }();
  return names;
}

double metric_value(const MetricsRow& row, std::string_view name) {
  for (const auto& c : columns()) {
    if (name == c.name) return c.get(row);
  }
  throw InvalidArgument("unknown metrics column '" + std::string(name) + "'");
}

std::string csv_header() {
  std::string out;
  for (const auto& c : columns()) {
    if (!out.empty()) out += ',';
    out += c.name;
  }
  return out;
}

std::string csv_row(const MetricsRow& row) {
  std::string out;
  bool first = true;
  for (const auto& c : columns()) {
    if (!first) out += ',';
    first = false;
    out += format_double(c.get(row));
  }
  return out;
}

std::string to_csv(std::span<const MetricsRow> rows) {
  std::string out = csv_header() + '\n';
  for (const auto& r : rows) {
    out += csv_row(r);
    out += '\n';
  }
  return out;
}

MetricsRow record_tick(const World& w) {
  MetricsRow row;
  const auto& t = w.tallies;
  row.tick = w.tick;

  std::vector<std::uint64_t> infected(w.node_count(), 0);
  for (ChunkId c = 0; c < w.chunk_count(); ++c) {
    for (NodeId v = 0; v < w.node_count(); ++v) {
      if (w.replica(c, v).state == ReplicaState::Infected) ++infected[v];
    }
  }
  for (auto k : infected) row.infected_total += k;
  if (!w.clusters.empty()) {
    double sum = 0.0;
    for (const auto& cl : w.clusters) {
      for (NodeId v : cl.members) sum += static_cast<double>(infected[v]);
    }
    row.infected_mean = sum / static_cast<double>(w.clusters.size());
  }

  row.sdr = sdr(t.completed, t.completed + t.expired + t.failed);
  if (w.tick > 0) {
    const double loss =
        t.packets_sent == 0 ? 0.0
                            : static_cast<double>(t.packets_lost) / static_cast<double>(t.packets_sent);
    row.eff = effective_throughput(loss, t.bytes_delivered, static_cast<double>(w.tick),
                                   w.config.bandwidth);
  }
  row.total_eff = w.scratch.total_eff;
  if (t.completed > 0) row.mean_transfer_delay = t.delay_sum / static_cast<double>(t.completed);
  if (t.intercluster_completed > 0) {
    row.end_to_end_delay = t.intercluster_delay_sum / static_cast<double>(t.intercluster_completed);
  }
  row.w_factor = w.w;
  row.completed_files = t.completed_files;
  row.death_rate_events = w.scratch.deaths;
  row.bped = w.bped;

  row.active_sessions = w.sessions.size();
  for (const auto& s : w.sessions) {
    if (s.intercluster) ++row.intercluster_sessions;
  }
  row.completed_sessions = t.completed;
  row.failed_sessions = t.expired + t.failed;
  row.rejected_requests = t.rejected;
  row.packets_delivered = t.packets_delivered;
  row.clusters = w.clusters.size();
  for (const auto& n : w.nodes) {
    if (post_probation(n.role)) ++row.participating_nodes;
  }
  row.get_rebuilds = w.scratch.get_rebuilds;
  row.purged_replicas = t.purged;
  row.respread_events = t.respreads;
  return row;
}

}  // namespace epirep
