// epirep: run experiment presets or config files and write metric series.
//
//   epirep --preset fig6-infected --out out --seeds 5 --jobs 4
//   epirep --config my.cfg --seed-list 3,7,11 --format json
//   epirep compare --config my.cfg --seeds 20
//   epirep list-presets
//   epirep print-config --preset fig11-sdr
//
// Exit status: 0 success, 1 configuration or I/O error, 2 invariant violation.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "epirep/config.hpp"
#include "epirep/error.hpp"
#include "epirep/experiment.hpp"

namespace fs = std::filesystem;
using namespace epirep;

namespace {

struct Source {
  std::string preset;
  std::string config;
  std::vector<std::string> sets;
};

struct Seeds {
  std::uint64_t count = 0;
  std::vector<std::uint64_t> list;

  std::vector<std::uint64_t> resolve() const {
    if (!list.empty()) return list;
    std::vector<std::uint64_t> out;
    for (std::uint64_t s = 1; s <= count; ++s) out.push_back(s);
    return out;
  }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("", 0, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Override> parse_sets(const std::vector<std::string>& sets) {
  std::vector<Override> out;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError(s, 0, "--set expects key=value, got '" + s + "'");
    out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return out;
}

ExperimentPreset load(const Source& src) {
  ExperimentPreset p;
  if (!src.config.empty()) {
    const fs::path path(src.config);
    p = preset_from_config(parse_config(read_file(src.config)), path.stem().string());
  } else if (!src.preset.empty()) {
    p = find_preset(src.preset);
  } else {
    throw ConfigError("", 0, "need --preset NAME or --config PATH");
  }
  for (const auto& [k, v] : parse_sets(src.sets)) set_config_value(p.base, k, v);
  p.base.validate();
  return p;
}

void add_source(CLI::App& app, Source& src) {
  auto* pre = app.add_option("--preset", src.preset, "named experiment preset");
  auto* cfg = app.add_option("--config", src.config, "config file (key = value lines)");
  pre->excludes(cfg);
  app.add_option("--set", src.sets, "override a config key (key=value), repeatable");
}

void add_seeds(CLI::App& app, Seeds& seeds) {
  auto* n = app.add_option("--seeds", seeds.count, "use seeds 1..N")->check(CLI::PositiveNumber);
  auto* l = app.add_option("--seed-list", seeds.list, "explicit seeds")->delimiter(',');
  n->excludes(l);
}

void write(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

int run_main(int argc, char** argv) {
  CLI::App app{"Clustered mobile P2P epidemic replication simulator"};
  app.require_subcommand(0, 1);

  const char* env_out = std::getenv("EPIREP_OUT_DIR");
  std::string out_dir = env_out && *env_out ? env_out : "out";
  Source src;
  Seeds seeds;
  unsigned jobs = 1;
  std::string format = "csv";

  add_source(app, src);
  add_seeds(app, seeds);
  app.add_option("--out", out_dir, "output directory (default $EPIREP_OUT_DIR or ./out)");
  app.add_option("--jobs", jobs, "parallel runs")->check(CLI::PositiveNumber);
  app.add_option("--format", format, "per-run series format")
      ->check(CLI::IsMember({"csv", "json"}));

  auto* list = app.add_subcommand("list-presets", "list experiment presets");

  Source pc_src;
  auto* print = app.add_subcommand("print-config", "print the resolved base config");
  add_source(*print, pc_src);

  Source cmp_src;
  Seeds cmp_seeds;
  std::string cmp_out;
  unsigned cmp_jobs = 1;
  std::string cmp_format = "csv";
  auto* cmp = app.add_subcommand("compare", "paired epidemic vs random comparison");
  add_source(*cmp, cmp_src);
  add_seeds(*cmp, cmp_seeds);
  cmp->add_option("--out", cmp_out, "write comparison here instead of stdout");
  cmp->add_option("--jobs", cmp_jobs, "parallel runs")->check(CLI::PositiveNumber);
  cmp->add_option("--format", cmp_format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (*list) {
    for (const auto& p : presets()) std::cout << p.name << "\t" << p.description << "\n";
    return 0;
  }

  if (*print) {
    std::cout << emit_config(load(pc_src).base);
    return 0;
  }

  if (*cmp) {
    const auto preset = load(cmp_src);
    auto s = cmp_seeds.resolve();
    if (s.empty()) s = preset.seeds;
    const auto c = compare_strategies(preset.base, s, cmp_jobs);
    const std::string text = cmp_format == "json" ? comparison_json(c) : comparison_csv(c);
    if (cmp_out.empty()) {
      std::cout << text;
    } else {
      std::error_code ec;
      fs::create_directories(cmp_out, ec);
      if (ec) throw std::runtime_error("cannot create " + cmp_out + ": " + ec.message());
      write(fs::path(cmp_out) / ("compare." + cmp_format), text);
    }
    std::cerr << "infected: a<b " << c.infected_sign.below << " a>b " << c.infected_sign.above
              << " ties " << c.infected_sign.ties << " p=" << c.infected_sign.p_value << "\n";
    return 0;
  }

  const auto preset = load(src);
  ExperimentOptions opt;
  opt.seeds = seeds.resolve();
  opt.jobs = jobs;
  opt.json = format == "json";
  const auto res = run_experiment(preset, out_dir, opt);
  for (const auto& f : res.files) std::cout << f.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_main(argc, argv);
  } catch (const InvariantViolation& e) {
    std::cerr << "invariant violation: " << e.what() << "\n";
    return 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
