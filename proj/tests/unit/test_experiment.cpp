#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "epirep/error.hpp"
#include "epirep/experiment.hpp"

using namespace epirep;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("epirep_test_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("preset registry") {
  const std::vector<std::string> required{
      "fig6-infected",        "fig7-sessions",        "fig8-delay",
      "fig9-death",           "fig10-transfer-delay", "fig11-sdr",
      "fig12-throughput",     "fig13-throughput",     "fig14-network-size",
      "fig16-streaming-factor", "fig17-community-sdr", "fig18-w-throughput"};
  std::set<std::string> names;
  for (const auto& p : presets()) {
    CHECK(names.insert(p.name).second);
    CHECK_FALSE(p.sweep_values.empty());
    CHECK_FALSE(p.seeds.empty());
    for (const auto& col : p.outputs) CHECK_NOTHROW(metric_value(MetricsRow{}, col));
    CHECK_NOTHROW(expand(p));
  }
  for (const auto& r : required) CHECK(names.count(r) == 1);
  CHECK_THROWS_AS(find_preset("fig99"), InvalidArgument);

  const auto pts = expand(find_preset("fig6-infected"));
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].config.strategy == Strategy::Epidemic);
  CHECK(pts[1].config.strategy == Strategy::Random);

  const auto f14 = expand(find_preset("fig14-network-size"));
  CHECK(f14.size() == 6);
  std::set<std::string> labels;
  for (const auto& p : f14) labels.insert(p.label);
  CHECK(labels.size() == 6);
}

TEST_CASE("aggregate") {
  WorldConfig c;
  c.ticks = 60;
  const auto r = run(c);
  const std::vector<std::string> cols{"sdr", "infected_mean"};
  const auto one = aggregate({r.series}, cols);
  REQUIRE(one.ticks.size() == 60);
  for (std::size_t t = 0; t < 60; ++t) {
    CHECK(one.mean[0][t] == r.series[t].sdr);
    CHECK(one.mean[1][t] == r.series[t].infected_mean);
    CHECK(one.stddev[0][t] == 0.0);
  }

  std::vector<MetricsRow> a(2), b(2);
  a[0].sdr = 1.0;
  b[0].sdr = 0.0;
  a[1].sdr = b[1].sdr = 0.5;
  const auto two = aggregate({a, b}, {"sdr"});
  CHECK(two.mean[0][0] == 0.5);
  CHECK(two.stddev[0][0] == doctest::Approx(std::sqrt(0.5)));
  CHECK(two.stddev[0][1] == 0.0);
  CHECK_THROWS(aggregate({a, std::vector<MetricsRow>(3)}, {"sdr"}));
}

TEST_CASE("sign test") {
  const std::vector<double> zeros(10, 0.0);
  const auto z = sign_test(zeros);
  CHECK(z.ties == 10);
  CHECK(z.p_value == 1.0);
  const std::vector<double> neg(10, -1.0);
  const auto s = sign_test(neg);
  CHECK(s.below == 10);
  CHECK(s.p_value == doctest::Approx(2.0 / 1024.0));
}

TEST_CASE("comparison") {
  WorldConfig c;
  c.ticks = 80;
  SUBCASE("self comparison is exactly zero") {
    const auto cmp = compare_configs(c, c, {1, 2});
    REQUIRE(cmp.ticks.size() == 80);
    for (double d : cmp.infected_diff) CHECK(d == 0.0);
    for (double d : cmp.sdr_diff) CHECK(d == 0.0);
    for (double d : cmp.eff_diff) CHECK(d == 0.0);
    CHECK(cmp.infected_sign.ties == 80);
  }
  SUBCASE("single seed is one paired series") {
    const auto cmp = compare_strategies(c, {4});
    REQUIRE(cmp.a.size() == 1);
    REQUIRE(cmp.b.size() == 1);
    for (std::size_t t = 0; t < cmp.ticks.size(); ++t) {
      CHECK(cmp.infected_diff[t] == cmp.a[0][t].infected_mean - cmp.b[0][t].infected_mean);
    }
    CHECK(comparison_csv(cmp).find("tick,") == 0);
    CHECK_FALSE(comparison_json(cmp).empty());
  }
  CHECK_THROWS_AS(compare_strategies(c, {}), InvalidArgument);
}

TEST_CASE("run_experiment output") {
  auto preset = find_preset("fig6-infected");
  ExperimentOptions opt;
  opt.seeds = {1, 2};
  opt.overrides = {{"ticks", "40"}};
  const auto dir_a = scratch_dir("a");
  const auto dir_b = scratch_dir("b");
  const auto ra = run_experiment(preset, dir_a, opt);
  opt.jobs = 2;
  const auto rb = run_experiment(preset, dir_b, opt);
  REQUIRE(ra.files.size() == rb.files.size());
  CHECK(fs::exists(dir_a / "summary.json"));
  CHECK(fs::exists(dir_a / "aggregate"));
  std::size_t csvs = 0;
  for (std::size_t k = 0; k < ra.files.size(); ++k) {
    CHECK(ra.files[k].filename() == rb.files[k].filename());
    CHECK(slurp(ra.files[k]) == slurp(rb.files[k]));
    if (ra.files[k].extension() == ".csv") ++csvs;
  }
  // 2 points x 2 seeds plus 2 aggregates.
  CHECK(csvs == 6);

  opt.json = true;
  const auto rj = run_experiment(preset, scratch_dir("j"), opt);
  std::size_t jsons = 0;
  for (const auto& f : rj.files) jsons += f.extension() == ".json";
  CHECK(jsons == 5);

  const auto blocker = scratch_dir("file");
  std::ofstream(blocker) << "x";
  CHECK_THROWS(run_experiment(preset, blocker / "sub", opt));
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
}

TEST_CASE("config preset") {
  WorldConfig c;
  c.ticks = 10;
  const auto p = preset_from_config(c, "mine");
  const auto pts = expand(p);
  REQUIRE(pts.size() == 1);
  CHECK(pts[0].config == c);
}
