#include <doctest.h>

#include <chrono>
#include <vector>

#include "epirep/engine.hpp"
#include "epirep/error.hpp"
#include "epirep/exchange.hpp"

using namespace epirep;

namespace {

WorldConfig quiet(std::size_t n) {
  WorldConfig c;
  c.node_count = n;
  c.workload = 0;
  c.epidemic.beta = 0;
  c.epidemic.gamma = 0;
  c.epidemic.lambda = 0;
  c.mobility.speed_min = 0;
  c.mobility.speed_max = 0;
  return c;
}

// Tiny static world for driving one exchange by hand: one chunk, no gossip,
// no deadlines, every pair of nodes within range.
World exchange_world(std::vector<Vec2> at, double range, double loss) {
  WorldConfig c = quiet(at.size());
  c.region = {300, 300};
  c.radio_range = range;
  c.file_count = 1;
  c.chunks_per_file = 1;
  c.sensitive_fraction = 0;
  c.probation_ticks = 0;
  c.community.w_fixed = 0;
  c.hop_delay.base = 3;
  c.hop_delay.jitter_std = 0;
  c.hop_delay.loss_prob = loss;
  c.hop_delay.retry_budget = 0;
  auto w = init_world(c);
  for (std::size_t v = 0; v < at.size(); ++v) w.nodes[v].loc = at[v];
  // Hand the only copy to node 0.
  const NodeId o = w.chunks[0].origins.at(0);
  if (o != 0) {
    std::swap(w.replica(0, 0), w.replica(0, o));
    std::swap(w.nodes[0].used_slots, w.nodes[o].used_slots);
    w.chunks[0].origins = {0};
  }
  tick(w);
  return w;
}

struct Closed {
  std::vector<TransferSession> sessions;
};

Closed drain(World& w, Tick max_ticks) {
  // Sessions that closed on admission are still in w.closed.
  Closed out{w.closed};
  for (Tick t = 0; t < max_ticks && !w.sessions.empty(); ++t) {
    tick(w);
    out.sessions.insert(out.sessions.end(), w.closed.begin(), w.closed.end());
  }
  return out;
}

}  // namespace

TEST_CASE("init_world") {
  SUBCASE("single node") {
    auto c = quiet(1);
    c.file_count = 1;
    const auto w = init_world(c);
    REQUIRE(w.node_count() == 1);
    CHECK(w.nodes[0].role == Role::Free);
    CHECK(w.clusters.empty());
  }
  SUBCASE("deterministic") {
    WorldConfig c;
    CHECK(init_world(c) == init_world(c));
    WorldConfig d = c;
    d.seed = 2;
    CHECK_FALSE(init_world(c) == init_world(d));
  }
  SUBCASE("initial census") {
    WorldConfig c;
    const auto w = init_world(c);
    REQUIRE(w.chunk_count() == c.chunk_count());
    for (ChunkId k = 0; k < w.chunk_count(); ++k) {
      const auto& cs = w.census[k];
      CHECK(cs.s == c.node_count - 1);
      CHECK(cs.i + cs.r == 1);
      CHECK(cs.d == 0);
      CHECK(cs.n == c.node_count);
      CHECK(w.replica(k, w.chunks[k].origins[0]).origin);
    }
    CHECK_NOTHROW(audit_world(w));
  }
  SUBCASE("invalid config") {
    WorldConfig c;
    c.node_count = 0;
    CHECK_THROWS_AS(init_world(c), ConfigError);
  }
}

TEST_CASE("static quiet world is a fixed point") {
  auto c = quiet(30);
  auto w = init_world(c);
  // Roles settle once probation has run out.
  for (Tick t = 0; t <= c.probation_ticks; ++t) tick(w);
  const World first = w;
  for (int k = 0; k < 5; ++k) tick(w);
  CHECK(w.tick == first.tick + 5);
  CHECK(w.nodes == first.nodes);
  CHECK(w.replicas == first.replicas);
  CHECK(w.census == first.census);
  CHECK(w.graph == first.graph);
  CHECK(w.clusters == first.clusters);
  CHECK(w.get_trees == first.get_trees);
  CHECK(w.sessions == first.sessions);
  CHECK(w.tallies == first.tallies);
}

TEST_CASE("run") {
  SUBCASE("zero ticks") {
    WorldConfig c;
    c.ticks = 0;
    CHECK(run(c).series.empty());
  }
  SUBCASE("census holds every tick") {
    WorldConfig c;
    c.ticks = 200;
    RunOptions opt;
    std::size_t checked = 0;
    opt.on_tick = [&](const World& w) {
      for (const auto& cs : w.census) {
        CHECK(cs.s + cs.i + cs.r + cs.d == w.node_count());
        ++checked;
      }
    };
    const auto r = run(c, opt);
    CHECK(r.series.size() == 200);
    CHECK(checked == 200 * c.chunk_count());
  }
  SUBCASE("repeatable") {
    WorldConfig c;
    c.ticks = 300;
    const auto a = run(c);
    const auto b = run(c);
    CHECK(to_csv(a.series) == to_csv(b.series));
    CHECK(a.world == b.world);
  }
  SUBCASE("visiting order does not matter") {
    WorldConfig c;
    c.ticks = 300;
    RunOptions rev;
    rev.reverse_iteration = true;
    const auto a = run(c);
    const auto b = run(c, rev);
    CHECK(to_csv(a.series) == to_csv(b.series));
    CHECK(a.world == b.world);
  }
  SUBCASE("strategies diverge") {
    WorldConfig c;
    c.ticks = 300;
    WorldConfig d = c;
    d.strategy = Strategy::Random;
    CHECK_FALSE(to_csv(run(c).series) == to_csv(run(d).series));
  }
  SUBCASE("default scenario is fast") {
    WorldConfig c;
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run(c);
    const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    CHECK(r.series.size() == 2000);
    CHECK(s < 10.0);
  }
}

TEST_CASE("chunk exchange") {
  SUBCASE("adjacent pair on an ideal channel completes") {
    auto w = exchange_world({{10, 10}, {60, 10}}, 100, 0.0);
    tick(w);
    const auto out = run_chunk_exchange(w, 1, 0, w.tick, NodeId{0});
    REQUIRE(out.initiated);
    CHECK(w.replica(0, 1).state == ReplicaState::Infected);
    const auto closed = drain(w, 50);
    REQUIRE(closed.sessions.size() == 1);
    const auto& s = closed.sessions[0];
    CHECK(s.status == SessionStatus::Completed);
    CHECK(s.path == std::vector<NodeId>{0, 1});
    CHECK(s.packets_lost == 0);
    CHECK(s.packets_delivered == w.config.packets_per_chunk());
    CHECK(w.replica(0, 1).state == ReplicaState::Recovered);
    CHECK(w.replica(0, 1).has_data());
  }
  SUBCASE("total loss fails the session") {
    auto w = exchange_world({{10, 10}, {60, 10}}, 100, 1.0);
    tick(w);
    const auto out = run_chunk_exchange(w, 1, 0, w.tick, NodeId{0});
    REQUIRE(out.initiated);
    const auto closed = drain(w, 50);
    REQUIRE(closed.sessions.size() == 1);
    const auto& s = closed.sessions[0];
    CHECK(s.status == SessionStatus::Failed);
    CHECK(s.reason == FailureReason::LossBudget);
    CHECK(s.packets_sent > 0);
    CHECK(s.packets_lost == s.packets_sent);
    CHECK(w.replica(0, 1).state == ReplicaState::Recovered);
    CHECK_FALSE(w.replica(0, 1).has_data());
  }
  SUBCASE("relay leaving mid-transfer is routed around") {
    // 0 -- 1 -- 3 and 0 -- 2 -- 3; node 1 wins the tie and then walks away.
    auto w = exchange_world({{10, 100}, {110, 100}, {110, 160}, {210, 100}}, 120, 0.0);
    tick(w);
    const auto out = run_chunk_exchange(w, 3, 0, w.tick, NodeId{0});
    REQUIRE(out.initiated);
    const auto* s = find_session(w, out.session);
    REQUIRE(s != nullptr);
    CHECK(s->path == std::vector<NodeId>{0, 1, 3});
    w.nodes[1].loc = {290, 290};
    const auto closed = drain(w, 100);
    REQUIRE(closed.sessions.size() == 1);
    const auto& done = closed.sessions[0];
    CHECK(done.status == SessionStatus::Completed);
    CHECK(done.reroutes >= 1);
    CHECK(done.path.back() == 3);
    CHECK(std::find(done.path.begin(), done.path.end(), 1) == done.path.end());
  }
  SUBCASE("relay leaving with no alternative fails") {
    auto w = exchange_world({{10, 100}, {110, 100}, {210, 100}}, 120, 0.0);
    tick(w);
    const auto out = run_chunk_exchange(w, 2, 0, w.tick, NodeId{0});
    REQUIRE(out.initiated);
    w.nodes[1].loc = {290, 290};
    const auto closed = drain(w, 100);
    REQUIRE(closed.sessions.size() == 1);
    CHECK(closed.sessions[0].status == SessionStatus::Failed);
    CHECK(closed.sessions[0].reason == FailureReason::NoRelay);
  }
  SUBCASE("holder of the data is skipped") {
    auto w = exchange_world({{10, 10}, {60, 10}}, 100, 0.0);
    tick(w);
    CHECK(run_chunk_exchange(w, 0, 0, w.tick).skipped);
  }
}

TEST_CASE("deletion and re-spread") {
  WorldConfig c;
  c.ticks = 0;
  auto w = init_world(c);
  for (int k = 0; k < 20; ++k) tick(w);
  const auto& cert = delete_chunk(w, 3);
  CHECK(cert.issued_at == w.tick);
  CHECK(delete_chunk(w, 3) == cert);
  const NodeId origin = w.chunks[3].origins[0];
  CHECK(w.informed_of(3, origin));
  const auto before = w.tallies.respreads;
  CHECK(inject_obsolete_update(w, origin, 3));
  CHECK(w.tallies.respreads == before + 1);
  NodeId outsider = 0;
  while (w.informed_of(3, outsider)) ++outsider;
  CHECK_FALSE(inject_obsolete_update(w, outsider, 3));
  for (Tick t = 0; t <= c.epidemic.t2; ++t) tick(w);
  for (NodeId v = 0; v < w.node_count(); ++v) CHECK_FALSE(w.replica(3, v).live());
}

TEST_CASE("epidemic pushes need a recent exchange between the pair") {
  auto c = quiet(4);
  c.region = {50, 50};
  c.radio_range = 200;
  c.file_count = 1;
  c.chunks_per_file = 1;
  c.initial_replicas = 1;
  c.probation_ticks = 0;
  c.community.w_fixed = 0;
  c.epidemic.beta = 1;
  c.epidemic.fanout = 8;

  SUBCASE("no exchange history, no pushes") {
    c.strategy = Strategy::Epidemic;
    auto w = init_world(c);
    for (int t = 0; t < 10; ++t) tick(w);
    CHECK(w.interacted.empty());
    CHECK(w.census[0].i == 1);
  }
  SUBCASE("random ignores the history") {
    c.strategy = Strategy::Random;
    auto w = init_world(c);
    for (int t = 0; t < 10; ++t) tick(w);
    CHECK(w.census[0].i > 1);
  }
}
