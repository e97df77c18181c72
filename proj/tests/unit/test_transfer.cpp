#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "../common/oracles.hpp"
#include "epirep/error.hpp"
#include "epirep/transfer.hpp"

using namespace epirep;

namespace {

EdgeWeight table(const std::vector<std::vector<double>>& w) {
  return [&w](NodeId u, NodeId v) { return w[u][v]; };
}

}  // namespace

TEST_CASE("min delay path basics") {
  constexpr double inf = std::numeric_limits<double>::infinity();
  Graph g(3);
  g.add_edge(0, 1);
  g.add_edge(0, 2);
  g.add_edge(2, 1);
  // u = 0, v = 1, w = 2
  const std::vector<std::vector<double>> w{{inf, 5, 1}, {5, inf, 1}, {1, 1, inf}};

  auto r = min_delay_path(g, table(w), 0, 0);
  CHECK(r.reachable);
  CHECK(r.path == std::vector<NodeId>{0});
  CHECK(r.delay == 0.0);

  r = min_delay_path(g, table(w), 0, 1);
  CHECK(r.reachable);
  CHECK(r.path == std::vector<NodeId>{0, 2, 1});
  CHECK(r.delay == 2.0);

  r = min_delay_path(g, table(w), 0, 1, [](NodeId v) { return v != 2; });
  CHECK(r.path == std::vector<NodeId>{0, 1});
  CHECK(r.delay == 5.0);

  Graph lone(2);
  CHECK_FALSE(min_delay_path(lone, table(w), 0, 1).reachable);
  CHECK_THROWS_AS(min_delay_path(g, table(w), 0, 7), InvalidArgument);
  const std::vector<std::vector<double>> neg{{inf, -1, 1}, {-1, inf, 1}, {1, 1, inf}};
  CHECK_THROWS_AS(min_delay_path(g, table(neg), 0, 1), InvalidArgument);
}

TEST_CASE("ties go to fewer hops, then smaller sequence") {
  constexpr double inf = std::numeric_limits<double>::infinity();
  // 0-3 direct costs 2, as does 0-1-3 and 0-2-3.
  Graph g(4);
  g.add_edge(0, 3);
  g.add_edge(0, 1);
  g.add_edge(1, 3);
  g.add_edge(0, 2);
  g.add_edge(2, 3);
  std::vector<std::vector<double>> w(4, std::vector<double>(4, inf));
  auto set = [&](NodeId a, NodeId b, double x) { w[a][b] = w[b][a] = x; };
  set(0, 3, 2);
  set(0, 1, 1);
  set(1, 3, 1);
  set(0, 2, 1);
  set(2, 3, 1);
  CHECK(min_delay_path(g, table(w), 0, 3).path == std::vector<NodeId>{0, 3});
  set(0, 3, 3);
  CHECK(min_delay_path(g, table(w), 0, 3).path == std::vector<NodeId>{0, 1, 3});
  CHECK(min_delay_path(g, table(w), 3, 0).path == std::vector<NodeId>{3, 1, 0});
}

TEST_CASE("min delay path matches exhaustive search") {
  Stream rng(2024);
  for (int trial = 0; trial < 150; ++trial) {
    const std::size_t n = 2 + rng.below(7);
    const auto wg = oracle::random_graph(n, 0.45, rng);
    const auto src = static_cast<NodeId>(rng.below(n));
    const auto tree = min_delay_tree(wg.graph, table(wg.w), src);
    for (NodeId dst = 0; dst < n; ++dst) {
      const auto want = oracle::brute_force_path(n, wg.w, src, dst);
      const auto got = min_delay_path(wg.graph, table(wg.w), src, dst);
      REQUIRE(got.reachable == want.reachable);
      if (!want.reachable) continue;
      CHECK(got.delay == want.delay);
      CHECK(got.path == want.path);
      CHECK(tree[dst] == got);
    }
  }
}

TEST_CASE("stream deadline") {
  TransferSession s;
  s.started_at = 0;
  s.deadline = 10;
  CHECK(check_stream_deadline(s, 10) == SessionStatus::Active);
  CHECK(check_stream_deadline(s, 11) == SessionStatus::Expired);
  s.deadline = kUnbounded;
  CHECK(check_stream_deadline(s, 1'000'000'000) == SessionStatus::Active);
}

TEST_CASE("transfer delay sums") {
  TransferSession s;
  CHECK(total_transfer_delay(s) == 0.0);
  s.per_hop_delays = {2, 3, 4};
  CHECK(total_transfer_delay(s) == 9.0);
  TransferSession a, b, ab;
  a.per_hop_delays = {1.5, 2};
  b.per_hop_delays = {0.25, 3};
  ab.per_hop_delays = {1.5, 2, 0.25, 3};
  CHECK(total_transfer_delay(ab) == total_transfer_delay(a) + total_transfer_delay(b));
}

TEST_CASE("multipart delay estimate") {
  CHECK(multipart_delay_estimate(100, 4, 16) == 100.0);
  CHECK(multipart_delay_estimate(37, 3, 1) == 0.0);
  CHECK(multipart_delay_estimate(12.5, 1, 2) == 12.5);
  CHECK_THROWS_AS(multipart_delay_estimate(1, 0, 2), InvalidArgument);
  CHECK_THROWS_AS(multipart_delay_estimate(1, 2, 0), InvalidArgument);
}

TEST_CASE("hop delay model") {
  HopDelayModel m;
  m.base = 1;
  m.per_byte = 0.001;
  m.jitter_std = 0.5;
  CHECK(m.expected_hop_delay(1000) ==
        doctest::Approx(2.0 + 0.5 * std::sqrt(2.0 / std::numbers::pi)));
  CHECK(m.violations().empty());
  m.loss_prob = 1.5;
  CHECK_FALSE(m.violations().empty());
}
