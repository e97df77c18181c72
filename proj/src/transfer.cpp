#include "epirep/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "epirep/error.hpp"

namespace epirep {

const char* to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::Active: return "active";
    case SessionStatus::Completed: return "completed";
    case SessionStatus::Expired: return "expired";
    case SessionStatus::Failed: return "failed";
  }
  return "?";
}

const char* to_string(FailureReason r) {
  switch (r) {
    case FailureReason::None: return "none";
    case FailureReason::NotFound: return "not_found";
    case FailureReason::DelayBound: return "delay_bound";
    case FailureReason::SocialGate: return "social_gate";
    case FailureReason::NoRelay: return "no_relay";
    case FailureReason::NoCapacity: return "no_capacity";
    case FailureReason::LossBudget: return "loss_budget";
    case FailureReason::Purged: return "purged";
  }
  return "?";
}

double HopDelayModel::expected_hop_delay(double chunk_bytes) const {
  // E|N(0, s)| = s * sqrt(2 / pi)
  return base + per_byte * chunk_bytes + jitter_std * std::sqrt(2.0 / std::numbers::pi);
}

std::vector<std::string> HopDelayModel::violations() const {
  std::vector<std::string> out;
  if (!(base >= 0)) out.emplace_back("hop_delay.base must be >= 0");
  if (!(per_byte >= 0)) out.emplace_back("hop_delay.per_byte must be >= 0");
  if (!(jitter_std >= 0)) out.emplace_back("hop_delay.jitter_std must be >= 0");
  if (!(loss_prob >= 0 && loss_prob <= 1)) out.emplace_back("hop_delay.loss_prob must be in [0,1]");
  if (route_patience < 0) out.emplace_back("hop_delay.route_patience must be >= 0");
  return out;
}

namespace {

bool label_less(const PathResult& a, const PathResult& b) {
  if (a.delay != b.delay) return a.delay < b.delay;
  if (a.path.size() != b.path.size()) return a.path.size() < b.path.size();
  return a.path < b.path;
}

std::vector<PathResult> run_dijkstra(const Graph& graph, const EdgeWeight& weight, NodeId src,
                                     std::optional<NodeId> stop_at,
                                     const std::function<bool(NodeId)>& can_relay) {
  const std::size_t n = graph.size();
  std::vector<PathResult> best(n);
  std::vector<bool> settled(n, false);
  best[src] = PathResult{true, {src}, 0.0};

  for (;;) {
    std::size_t u = n;
    for (std::size_t v = 0; v < n; ++v) {
      if (settled[v] || !best[v].reachable) continue;
      if (u == n || label_less(best[v], best[u])) u = v;
    }
    if (u == n) break;
    settled[u] = true;
    if (stop_at && u == *stop_at) break;
    const auto uid = static_cast<NodeId>(u);
    if (uid != src && can_relay && !can_relay(uid)) continue;

    for (NodeId v : graph.neighbors(uid)) {
      if (settled[v]) continue;
      const double w = weight(uid, v);
      if (!(w >= 0)) {
        if (std::isinf(w)) continue;
        throw InvalidArgument("min_delay_path: edge weights must be non-negative");
      }
      const double d = best[u].delay + w;
      const std::size_t len = best[u].path.size() + 1;
      auto& cur = best[v];
      bool take = !cur.reachable || d < cur.delay || (d == cur.delay && len < cur.path.size());
      if (!take && d == cur.delay && len == cur.path.size()) {
        // Equal cost and length: compare best[u].path + [v] with cur.path.
        const auto& pu = best[u].path;
        const auto mis = std::mismatch(pu.begin(), pu.end(), cur.path.begin());
        take = mis.first != pu.end() ? *mis.first < *mis.second : v < cur.path.back();
      }
      if (!take) continue;
      cur.reachable = true;
      cur.delay = d;
      cur.path.clear();
      cur.path.reserve(len);
      cur.path.insert(cur.path.end(), best[u].path.begin(), best[u].path.end());
      cur.path.push_back(v);
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    if (!settled[v]) best[v] = PathResult{};
  }
  return best;
}

}  // namespace

PathResult min_delay_path(const Graph& graph, const EdgeWeight& weight, NodeId src, NodeId dst,
                          const std::function<bool(NodeId)>& can_relay) {
  if (src >= graph.size() || dst >= graph.size()) {
    throw InvalidArgument("min_delay_path: endpoint outside graph");
  }
  if (src == dst) return PathResult{true, {src}, 0.0};
  auto labels = run_dijkstra(graph, weight, src, dst, can_relay);
  return std::move(labels[dst]);
}

std::vector<PathResult> min_delay_tree(const Graph& graph, const EdgeWeight& weight, NodeId src,
                                       const std::function<bool(NodeId)>& can_relay) {
  if (src >= graph.size()) throw InvalidArgument("min_delay_tree: source outside graph");
  return run_dijkstra(graph, weight, src, std::nullopt, can_relay);
}

SessionStatus check_stream_deadline(const TransferSession& session, Tick now) {
  if (std::isinf(session.deadline)) return SessionStatus::Active;
  return static_cast<double>(now - session.started_at) > session.deadline
             ? SessionStatus::Expired
             : SessionStatus::Active;
}

double total_transfer_delay(const TransferSession& session) {
  return std::accumulate(session.per_hop_delays.begin(), session.per_hop_delays.end(), 0.0);
}

double multipart_delay_estimate(double tau0, unsigned m, unsigned n) {
  if (m == 0) throw InvalidArgument("multipart_delay_estimate: chunk count must be >= 1");
  if (n == 0) throw InvalidArgument("multipart_delay_estimate: peer count must be >= 1");
  return tau0 / static_cast<double>(m) * std::log2(static_cast<double>(n));
}

}  // namespace epirep
