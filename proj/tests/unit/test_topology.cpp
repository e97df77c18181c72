#include <doctest.h>

#include <cmath>
#include <vector>

#include "epirep/error.hpp"
#include "epirep/rng.hpp"
#include "epirep/topology.hpp"

using namespace epirep;

namespace {

NodeState node_at(NodeId id, double x, double y, double energy = 10.0) {
  NodeState n;
  n.id = id;
  n.loc = {x, y};
  n.energy = energy;
  return n;
}

std::vector<NodeState> members(const std::vector<unsigned>& caps) {
  std::vector<NodeState> out;
  for (NodeId v = 0; v < caps.size(); ++v) {
    auto n = node_at(v, 10.0 * v, 0);
    n.capacity = caps[v];
    n.role = Role::Member;
    out.push_back(n);
  }
  return out;
}

Graph path_graph(std::size_t n) {
  Graph g(n);
  for (NodeId v = 0; v + 1 < n; ++v) g.add_edge(v, v + 1);
  return g;
}

Graph complete_graph(std::size_t n) {
  Graph g(n);
  for (NodeId u = 0; u < n; ++u)
    for (NodeId v = u + 1; v < n; ++v) g.add_edge(u, v);
  return g;
}

}  // namespace

TEST_CASE("update_location") {
  const Region r{1000, 1000};
  auto m = update_location({0, 0}, 2, {1, 0}, r);
  CHECK(m.loc == Vec2{2, 0});
  m = update_location({5, 5}, 0, {0, 1}, r);
  CHECK(m.loc == Vec2{5, 5});

  m = update_location({999, 0}, 2, {1, 0}, r);
  CHECK(m.loc.x == doctest::Approx(999.0));
  CHECK(m.loc.y == 0.0);
  CHECK(m.dir == Vec2{-1, 0});

  CHECK_THROWS_AS(update_location({0, 0}, 1, {1, 1}, r), InvalidArgument);
}

TEST_CASE("connectivity graph") {
  SUBCASE("coincident nodes") {
    std::vector<NodeState> n{node_at(0, 3, 3), node_at(1, 3, 3)};
    CHECK(connectivity_graph(n, 10).edge_count() == 1);
  }
  SUBCASE("boundary inclusive") {
    std::vector<NodeState> n{node_at(0, 0, 0), node_at(1, 150, 0)};
    CHECK(connectivity_graph(n, 150).has_edge(0, 1));
    n[1].loc = {150.000001, 0};
    CHECK_FALSE(connectivity_graph(n, 150).has_edge(0, 1));
  }
  SUBCASE("dead nodes have no links") {
    std::vector<NodeState> n{node_at(0, 0, 0), node_at(1, 1, 0, 0.0)};
    CHECK(connectivity_graph(n, 10).edge_count() == 0);
  }
  SUBCASE("random layouts match the pairwise check") {
    for (std::uint64_t seed = 1; seed <= 25; ++seed) {
      Stream s(seed);
      std::vector<NodeState> n;
      for (NodeId v = 0; v < 20; ++v) n.push_back(node_at(v, s.uniform() * 300, s.uniform() * 300));
      const double range = 80;
      const auto g = connectivity_graph(n, range);
      for (NodeId u = 0; u < 20; ++u) {
        for (NodeId v = 0; v < 20; ++v) {
          const bool expect =
              u != v && std::hypot(n[u].loc.x - n[v].loc.x, n[u].loc.y - n[v].loc.y) <= range;
          CHECK(g.has_edge(u, v) == expect);
        }
      }
    }
  }
  CHECK_THROWS_AS(connectivity_graph({}, 0), InvalidArgument);
}

TEST_CASE("probation") {
  NodeState n = node_at(0, 0, 0);
  n.role = Role::Probationer;
  n.joined_cluster_at = 10;
  CHECK(probation_update(n, 15, 5, 3, 2).role == Role::Member);
  CHECK(probation_update(n, 12, 5, 3, 2).role == Role::Probationer);
  CHECK(probation_update(n, 12, 5, 0, 2).role == Role::RelayExcluded);

  NodeState fresh = node_at(1, 0, 0);
  const auto r = probation_update(fresh, 7, 5, 2, 2);
  CHECK(r.role == Role::Probationer);
  CHECK(r.joined_cluster_at == 7);
}

TEST_CASE("cluster formation") {
  SUBCASE("head is the largest capacity, lowest id") {
    auto n = members({3, 9, 4, 9, 1});
    const auto cl = form_clusters(complete_graph(5), n, 0, 2);
    REQUIRE(cl.size() == 1);
    CHECK(cl[0].head == 1);
    CHECK(cl[0].members == std::vector<NodeId>{0, 1, 2, 3, 4});
    CHECK(cl[0].edges == 10);
  }
  SUBCASE("two components give two clusters") {
    auto n = members({3, 9, 4, 9, 1});
    Graph g(5);
    g.add_edge(0, 1);
    g.add_edge(2, 3);
    g.add_edge(3, 4);
    const auto cl = form_clusters(g, n, 0, 2);
    REQUIRE(cl.size() == 2);
    CHECK(cl[0].head == 1);
    CHECK(cl[1].head == 3);
  }
  SUBCASE("a higher-capacity arrival takes over as head") {
    auto n = members({3, 9, 4, 9, 1, 12});
    n[5].role = Role::Probationer;
    auto g = complete_graph(6);
    const auto before = form_clusters(g, n, 0, 2);
    REQUIRE(before.size() == 1);
    CHECK(before[0].head == 1);
    n[5].role = Role::Member;
    const auto after = form_clusters(g, n, 1, 2);
    REQUIRE(after.size() == 1);
    CHECK(after[0].head == 5);
    std::vector<double> e{5, 6, 7, 8, 9, 10};
    const auto t0 = build_get_tree(before[0], g, e);
    const auto t1 = build_get_tree(after[0], g, e);
    CHECK(t0.children.size() + 1 == t1.children.size());
  }
  SUBCASE("zone radius bounds the cluster") {
    auto n = members({1, 1, 1, 1, 9});
    const auto cl = form_clusters(path_graph(5), n, 0, 2);
    REQUIRE(cl.size() == 2);
    CHECK(cl[0].head == 4);
    CHECK(cl[0].members == std::vector<NodeId>{2, 3, 4});
    CHECK(cl[1].members == std::vector<NodeId>{0, 1});
  }
  SUBCASE("probationers stay out") {
    auto n = members({2, 2});
    n[1].role = Role::Probationer;
    const auto cl = form_clusters(complete_graph(2), n, 0, 2);
    REQUIRE(cl.size() == 1);
    CHECK(cl[0].members == std::vector<NodeId>{0});
  }
}

TEST_CASE("gradual energy tree") {
  SUBCASE("singleton") {
    ClusterView c;
    c.head = 0;
    c.members = {0};
    const std::vector<double> e{5};
    const auto t = build_get_tree(c, Graph(1), e);
    CHECK(t.root == 0);
    CHECK(t.children.empty());
    CHECK(get_tree_valid(t, Graph(1), e));
  }
  SUBCASE("children in descending energy") {
    ClusterView c;
    c.head = 1;
    c.members = {0, 1, 2};
    const std::vector<double> e{1, 7, 3};
    const auto g = complete_graph(3);
    const auto t = build_get_tree(c, g, e);
    CHECK(t.root == 0);
    REQUIRE(t.children.size() == 2);
    CHECK(t.children[0] == std::pair<NodeId, NodeId>{0, 1});
    CHECK(t.children[1] == std::pair<NodeId, NodeId>{0, 2});
    CHECK(t.depth == 1);
    CHECK(get_tree_valid(t, g, e));
  }
  SUBCASE("three hops from the root is excluded") {
    ClusterView c;
    c.head = 3;
    c.members = {0, 1, 2, 3};
    const std::vector<double> e{1, 2, 3, 4};
    const auto g = path_graph(4);
    const auto t = build_get_tree(c, g, e);
    CHECK(t.root == 0);
    CHECK(t.depth <= 2);
    for (const auto& [p, ch] : t.children) CHECK(ch != 3);
    CHECK(get_tree_valid(t, g, e));
  }
  SUBCASE("validator rejects a bad root") {
    GetTree t;
    t.root = 1;
    t.children = {{1, 0}};
    t.depth = 1;
    const std::vector<double> e{1, 7};
    CHECK_FALSE(get_tree_valid(t, complete_graph(2), e));
  }
}

TEST_CASE("relay region") {
  const ReachabilityModel model{100.0, 1.0};
  const auto u = node_at(0, 0, 0);
  const auto w = node_at(1, 60, 0);
  const auto region = relay_region(u, w, model);

  CHECK(region.relay_probability(w.loc) == doctest::Approx(model.hop(60)));
  CHECK(region.contains(w.loc) == (model.hop(60) > model.hop(60)));
  CHECK(region.direct_probability(u.loc) == 1.0);
  CHECK_FALSE(region.contains(u.loc));
  CHECK_THROWS_AS(relay_region(u, u, model), InvalidArgument);

  const ReachabilityModel sq{100.0, 2.0};
  const auto region2 = relay_region(u, w, sq);
  std::size_t inside = 0;
  for (int i = 0; i < 100; ++i) {
    for (int j = 0; j < 100; ++j) {
      const Vec2 p{-100.0 + 3.0 * i, -150.0 + 3.0 * j};
      const auto p_hop = [](double d) { return std::exp(-(d / 100.0) * (d / 100.0)); };
      const double relay = p_hop(60.0) * p_hop(std::hypot(p.x - 60.0, p.y));
      const double direct = p_hop(std::hypot(p.x, p.y));
      const bool expect = relay > direct;
      inside += expect;
      CHECK(region2.contains(p) == expect);
    }
  }
  CHECK(inside > 0);
  CHECK(inside < 10000);
}
