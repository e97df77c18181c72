// Python module epirep._core: configs, single runs, presets, strategy
// comparison and the closed-form formulas.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "epirep/analytics.hpp"
#include "epirep/community.hpp"
#include "epirep/config.hpp"
#include "epirep/engine.hpp"
#include "epirep/epidemic.hpp"
#include "epirep/error.hpp"
#include "epirep/experiment.hpp"
#include "epirep/transfer.hpp"

namespace py = pybind11;
using namespace epirep;

namespace {

py::dict summary_dict(const RunSummary& s) {
  py::dict d;
  d["ticks"] = s.ticks;
  d["mean_sdr"] = s.mean_sdr;
  d["min_sdr"] = s.min_sdr;
  d["max_sdr"] = s.max_sdr;
  d["mean_eff"] = s.mean_eff;
  d["completed_files"] = s.completed_files;
  d["sessions_initiated"] = s.sessions_initiated;
  d["sessions_completed"] = s.sessions_completed;
  d["sessions_failed"] = s.sessions_failed;
  d["requests_rejected"] = s.requests_rejected;
  return d;
}

// Column name -> per-tick values.
py::dict series_dict(const std::vector<MetricsRow>& rows) {
  py::dict d;
  for (const auto& col : metrics_columns()) {
    std::vector<double> v;
    v.reserve(rows.size());
    for (const auto& r : rows) v.push_back(metric_value(r, col));
    d[py::str(col)] = std::move(v);
  }
  return d;
}

py::dict sign_dict(const SignTest& s) {
  py::dict d;
  d["below"] = s.below;
  d["above"] = s.above;
  d["ties"] = s.ties;
  d["p_value"] = s.p_value;
  return d;
}

py::dict preset_dict(const ExperimentPreset& p) {
  py::dict d;
  d["name"] = p.name;
  d["description"] = p.description;
  d["sweep_param"] = p.sweep_param;
  d["sweep_values"] = p.sweep_values;
  std::vector<std::string> groups;
  for (const auto& g : p.groups) groups.push_back(g.label);
  d["groups"] = groups;
  d["seeds"] = p.seeds;
  d["outputs"] = p.outputs;
  return d;
}

WorldConfig config_with(const WorldConfig& base, const std::map<std::string, std::string>& set) {
  WorldConfig c = base;
  for (const auto& [k, v] : set) set_config_value(c, k, v);
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Clustered mobile P2P epidemic replication simulator";

  py::exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::exception<InvariantViolation>(m, "InvariantViolation", PyExc_RuntimeError);
  py::register_exception_translator([](std::exception_ptr p) {
    auto raise = [](const char* name, const char* what) {
      py::object type = py::module_::import("epirep._core").attr(name);
      py::object inst = type(what);
      return std::pair{type, inst};
    };
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      auto [type, inst] = raise("ConfigError", e.what());
      inst.attr("key") = e.key();
      inst.attr("line") = e.line();
      PyErr_SetObject(type.ptr(), inst.ptr());
    } catch (const InvariantViolation& e) {
      auto [type, inst] = raise("InvariantViolation", e.what());
      inst.attr("phase") = e.phase();
      PyErr_SetObject(type.ptr(), inst.ptr());
    }
  });

  py::class_<WorldConfig>(m, "Config", "Scenario configuration addressed by dotted keys.")
      .def(py::init<>())
      .def_static("parse", &parse_config, py::arg("text"))
      .def("__getitem__", [](const WorldConfig& c, const std::string& k) { return get_config_value(c, k); })
      .def("__setitem__",
           [](WorldConfig& c, const std::string& k, py::object v) {
             set_config_value(c, k, py::isinstance<py::str>(v) ? v.cast<std::string>()
                                                                : py::str(v).cast<std::string>());
           })
      .def_static("keys", &config_keys)
      .def("to_text", &emit_config)
      .def("violations", &WorldConfig::violations)
      .def("validate", &WorldConfig::validate)
      .def("copy", [](const WorldConfig& c) { return c; })
      .def("__repr__", [](const WorldConfig& c) {
        return "<epirep.Config nodes=" + get_config_value(c, "node_count") +
               " ticks=" + get_config_value(c, "ticks") + " seed=" + get_config_value(c, "seed") + ">";
      });

  m.def("columns", &metrics_columns, "CSV column names in order.");

  m.def(
      "run",
      [](const WorldConfig& config, bool audit) {
        RunResult r;
        {
          py::gil_scoped_release release;
          RunOptions opt;
          opt.audit = audit;
          r = run(config, opt);
        }
        py::dict out;
        out["series"] = series_dict(r.series);
        out["summary"] = summary_dict(r.summary);
        out["csv"] = to_csv(r.series);
        return out;
      },
      py::arg("config"), py::arg("audit") = true,
      "Runs one seed; returns {'series': {column: values}, 'summary': {...}, 'csv': str}.");

  m.def("presets", [] {
    py::list out;
    for (const auto& p : presets()) out.append(preset_dict(p));
    return out;
  });
  m.def("preset_config", [](const std::string& name) { return find_preset(name).base; },
        py::arg("name"));

  m.def(
      "run_experiment",
      [](const std::string& preset, const std::filesystem::path& out_dir,
         std::vector<std::uint64_t> seeds, unsigned jobs, bool json,
         std::map<std::string, std::string> set) {
        const auto& p = find_preset(preset);
        ExperimentOptions opt;
        opt.seeds = std::move(seeds);
        opt.jobs = jobs;
        opt.json = json;
        for (auto& [k, v] : set) opt.overrides.emplace_back(k, v);
        py::gil_scoped_release release;
        return run_experiment(p, out_dir, opt).files;
      },
      py::arg("preset"), py::arg("out_dir"), py::arg("seeds") = std::vector<std::uint64_t>{},
      py::arg("jobs") = 1, py::arg("json") = false,
      py::arg("set") = std::map<std::string, std::string>{},
      "Runs a named preset and writes its files; returns the written paths.");

  m.def(
      "compare",
      [](const WorldConfig& config, std::vector<std::uint64_t> seeds, unsigned jobs,
         std::map<std::string, std::string> a, std::map<std::string, std::string> b) {
        Comparison c;
        {
          py::gil_scoped_release release;
          RunOptions opt;
          opt.audit = false;
          if (a.empty() && b.empty()) {
            c = compare_strategies(config, seeds, jobs, opt);
          } else {
            c = compare_configs(config_with(config, a), config_with(config, b), seeds, jobs, opt);
          }
        }
        py::dict out;
        out["ticks"] = c.ticks;
        out["infected_diff"] = c.infected_diff;
        out["sdr_diff"] = c.sdr_diff;
        out["eff_diff"] = c.eff_diff;
        out["infected_sign"] = sign_dict(c.infected_sign);
        out["sdr_sign"] = sign_dict(c.sdr_sign);
        out["eff_sign"] = sign_dict(c.eff_sign);
        return out;
      },
      py::arg("config"), py::arg("seeds"), py::arg("jobs") = 1,
      py::arg("a") = std::map<std::string, std::string>{},
      py::arg("b") = std::map<std::string, std::string>{},
      "Paired a - b comparison. With no overrides a is the epidemic strategy and b random.");

  m.def(
      "min_delay_path",
      [](std::size_t n, const std::vector<std::tuple<NodeId, NodeId, double>>& edges, NodeId src,
         NodeId dst) -> py::object {
        Graph g(n);
        std::map<std::pair<NodeId, NodeId>, double> w;
        for (const auto& [u, v, d] : edges) {
          if (u >= n || v >= n) throw InvalidArgument("min_delay_path: edge endpoint out of range");
          g.add_edge(u, v);
          w[std::minmax(u, v)] = d;
        }
        const auto r = min_delay_path(
            g, [&](NodeId u, NodeId v) { return w.at(std::minmax(u, v)); }, src, dst);
        if (!r.reachable) return py::none();
        return py::make_tuple(r.delay, r.path);
      },
      py::arg("n"), py::arg("edges"), py::arg("src"), py::arg("dst"),
      "Minimum-delay path over undirected weighted edges; (delay, path) or None.");

  m.def(
      "streaming_factor",
      [](double dld_rate, std::uint64_t sharing, std::uint64_t total, std::uint64_t inactive,
         double w_max) {
        return streaming_factor({dld_rate, sharing, total, inactive}, w_max);
      },
      py::arg("dld_rate"), py::arg("sharing_chunks"), py::arg("total_dlds"),
      py::arg("inactive_chunks"), py::arg("w_max") = 10.0);
  m.def(
      "cluster_cohesion",
      [](std::uint64_t exchanges, std::uint64_t interconnected, double relay_prob, double w) {
        return cluster_cohesion({exchanges, interconnected, relay_prob}, w);
      },
      py::arg("exchange_count"), py::arg("interconnected"), py::arg("relay_prob"), py::arg("w"),
      "Cohesion value, or None when there is no community.");
  m.def(
      "infection_rate",
      [](double beta, std::size_t s, std::size_t i, std::size_t k) {
        EpidemicParams p;
        p.beta = beta;
        return infection_rate(p, s, i, k);
      },
      py::arg("beta"), py::arg("s"), py::arg("i"), py::arg("k"));
  m.def(
      "recovery_rate",
      [](double gamma, std::size_t i) {
        EpidemicParams p;
        p.gamma = gamma;
        return recovery_rate(p, i);
      },
      py::arg("gamma"), py::arg("i"));
  m.def("multipart_delay_estimate", &multipart_delay_estimate, py::arg("tau0"), py::arg("m"),
        py::arg("n"));
  m.def("effective_throughput", &effective_throughput, py::arg("loss"), py::arg("size"),
        py::arg("time"), py::arg("bandwidth"));
  m.def(
      "spreading_ratio",
      [](double beta, double n, double i0, double t) { return spreading_ratio({beta, n, i0}, t); },
      py::arg("beta"), py::arg("n"), py::arg("i0"), py::arg("t"));
  m.def("sdr", &sdr, py::arg("completed"), py::arg("initiated"));
}
