#include <doctest.h>

#include <cmath>
#include <optional>
#include <vector>

#include "epirep/community.hpp"

using namespace epirep;

namespace {

ClusterView cluster(NodeId head, std::vector<NodeId> members, std::uint64_t exchanges = 0) {
  ClusterView c;
  c.id = head;
  c.head = head;
  c.members = std::move(members);
  c.exchange_count = exchanges;
  return c;
}

}  // namespace

TEST_CASE("streaming factor") {
  CHECK(streaming_factor({10, 5, 25, 2}, 10) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(streaming_factor({0, 5, 25, 2}, 10) == 0.0);
  CHECK(streaming_factor({10, 5, 25, 0}, 10) == 10.0);
  CHECK(streaming_factor({10, 5, 0, 3}, 4) == 4.0);
}

TEST_CASE("cluster cohesion") {
  auto c = cluster_cohesion({6, 4, 0.9}, 0.5);
  REQUIRE(c.has_value());
  CHECK(*c == 1.0);
  CHECK_FALSE(cluster_cohesion({6, 4, 0.4}, 0.5).has_value());
  CHECK_FALSE(cluster_cohesion({0, 1, 0.9}, 0.5).has_value());
  c = cluster_cohesion({3, 3, 0.9}, 0.5);
  REQUIRE(c.has_value());
  CHECK(*c == 1.0);
  c = cluster_cohesion({3, 4, 0.9}, 0.5);
  REQUIRE(c.has_value());
  CHECK(*c == doctest::Approx(0.5));
}

TEST_CASE("neighbor feedback") {
  Graph g(4);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.add_edge(2, 3);
  auto c = cluster(1, {0, 1, 2, 3}, 7);
  auto ad = neighbor_feedback(c, g, 0, 5, 2);
  CHECK(ad.chunk == 5);
  CHECK(ad.holder == 0);
  CHECK(ad.recipients == std::vector<NodeId>{1, 2});

  ad = neighbor_feedback(c, g, 2, 5, 10);
  CHECK(ad.recipients == std::vector<NodeId>{1, 3, 0});

  c.exchange_count = 6;
  CHECK(neighbor_feedback(c, g, 0, 5, 2).recipients.empty());
  c.exchange_count = 7;
  CHECK(neighbor_feedback(c, g, 0, 5, 0).recipients.empty());
}

TEST_CASE("k_valid") {
  const std::vector<ClusterView> cl{cluster(0, {0, 1, 2}), cluster(3, {3, 4})};
  const std::vector<std::optional<double>> coh{1.0, std::nullopt};
  const CommunityView view(6, cl, coh);
  CHECK(k_valid(0, 2, view));
  CHECK_FALSE(k_valid(0, 3, view));
  CHECK_FALSE(k_valid(3, 4, view));
  CHECK_FALSE(k_valid(0, 5, view));
  CHECK(view.cluster_index(4) == std::optional<std::size_t>{1});
  CHECK_FALSE(view.cluster_index(5).has_value());
}

TEST_CASE("cluster relay probability") {
  const ReachabilityModel m{100.0, 1.0};
  std::vector<NodeState> n(4);
  n[0].loc = {0, 0};
  n[1].loc = {50, 0};
  n[2].loc = {100, 0};
  n[3].loc = {50, 80};

  CHECK(cluster_relay_probability(cluster(0, {0}), Graph(4), n, m) == 1.0);

  Graph g(4);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  g.add_edge(0, 2);
  g.add_edge(1, 3);
  const auto c = cluster(0, {0, 1, 2, 3});
  // Best route per member, by hand: 0-1, 0-2 direct (equal to 0-1-2), 0-1-3.
  const double p1 = m.hop(50);
  const double p2 = m.hop(100);
  const double p3 = m.hop(50) * m.hop(80);
  CHECK(cluster_relay_probability(c, g, n, m) == doctest::Approx((p1 + p2 + p3) / 3).epsilon(1e-12));

  // Members unreachable inside the cluster contribute 0.
  Graph split(4);
  split.add_edge(0, 1);
  CHECK(cluster_relay_probability(cluster(0, {0, 1, 2}), split, n, m) ==
        doctest::Approx(p1 / 2).epsilon(1e-12));
}
