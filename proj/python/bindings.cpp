#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <string>

#include "psguard/error.hpp"
#include "psguard/pipeline.hpp"
#include "psguard/synth.hpp"

namespace py = pybind11;
using namespace psguard;

namespace {

// Enum-valued fields are exposed as the same strings the CLI accepts.
template <class T, class Parse>
void string_property(py::class_<RunConfig>& cls, const char* name, T RunConfig::*field, Parse parse) {
  cls.def_property(
      name, [field](const RunConfig& c) { return std::string(to_string(c.*field)); },
      [field, parse](RunConfig& c, const std::string& v) { c.*field = parse(v); });
}

py::dict breakdown_dict(const PsBreakdown& b) {
  py::dict d;
  d["feature"] = b.feature;
  d["ps1"] = b.ps1;
  d["ps2"] = b.ps2;
  d["ps3"] = b.ps3;
  d["ps4"] = b.ps4;
  d["ps5"] = b.ps5;
  d["ps_total"] = b.ps_total;
  d["class"] = std::string(to_string(b.class_label));
  d["pv"] = b.inputs.pv;
  d["cf"] = b.inputs.cf;
  d["forward_corr_count"] = b.inputs.forward_corr_count;
  return d;
}

py::dict counts_dict(const ScoreReport& r) {
  const auto c = r.counts();
  py::dict d;
  d["Low"] = c.low;
  d["Medium"] = c.medium;
  d["High"] = c.high;
  return d;
}

}  // namespace

PYBIND11_MODULE(_psguard, m) {
  m.doc() = "Perturb-ability scoring and PS-guided defenses for flow-based NIDS";

  PYBIND11_CONSTINIT static py::gil_safe_call_once_and_store<py::object> error_type;
  error_type.call_once_and_store_result(
      [&]() { return py::exception<Error>(m, "PsguardError", PyExc_RuntimeError); });
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      const auto& type = error_type.get_stored();
      py::object exc = type(e.what());
      exc.attr("exit_code") = exit_code(e.kind());
      exc.attr("module") = e.module();
      py::set_error(type, exc);
    }
  });

  m.def("ps2", &ps2, py::arg("pv"), py::arg("min_r") = 2, py::arg("max_r") = 255);
  m.def("ps3", &ps3, py::arg("cf"));
  m.def("ps_total", &ps_total, py::arg("ps1"), py::arg("ps2"), py::arg("ps3"), py::arg("ps4"), py::arg("ps5"));
  m.def(
      "classify", [](double total, double tau) { return std::string(to_string(classify(total, tau))); },
      py::arg("total"), py::arg("tau") = 0.87);
  m.def("asr", &asr, py::arg("pred_orig"), py::arg("pred_adv"), py::arg("y"),
        "Fraction of attempts that were classified correctly and then flipped.");

  m.def(
      "score_fixture",
      [](const std::filesystem::path& catalog, const std::filesystem::path& fixture, double tau,
         double corr_threshold, std::int64_t min_r, std::int64_t max_r) {
        ThresholdConfig t{min_r, max_r, tau, corr_threshold};
        const auto report = score_all(fixture_inputs(load_catalog(catalog), load_fixture(fixture)), t);
        py::list rows;
        for (const auto& b : report.breakdowns) rows.append(breakdown_dict(b));
        py::dict out;
        out["features"] = rows;
        out["counts"] = counts_dict(report);
        return out;
      },
      py::arg("catalog"), py::arg("fixture"), py::arg("tau") = 0.87, py::arg("corr_threshold") = 0.80,
      py::arg("min_r") = 2, py::arg("max_r") = 255,
      "Scores a catalog with pinned {pv, cf, forward_corr_count} inputs.");

  m.def(
      "synthesize",
      [](std::size_t n_rows, std::uint64_t seed) {
        const auto s = synthesize(n_rows, seed);
        py::dict out;
        out["csv"] = s.csv;
        out["catalog"] = serialize_catalog(s.catalog);
        out["morph_map"] = serialize_morph_map(s.morph_map);
        return out;
      },
      py::arg("n_rows") = 6000, py::arg("seed") = 7);

  py::class_<RunConfig> cfg(m, "RunConfig");
  cfg.def(py::init<>())
      .def_readwrite("dataset", &RunConfig::dataset)
      .def_readwrite("catalog", &RunConfig::catalog)
      .def_readwrite("fixture", &RunConfig::fixture)
      .def_readwrite("morph_map", &RunConfig::morph_map)
      .def_readwrite("out_dir", &RunConfig::out_dir)
      .def_readwrite("label_column", &RunConfig::label_column)
      .def_readwrite("benign_label", &RunConfig::benign_label)
      .def_readwrite("exclude", &RunConfig::exclude)
      .def_readwrite("test_fraction", &RunConfig::test_fraction)
      .def_readwrite("undersample", &RunConfig::undersample)
      .def_readwrite("seed_split", &RunConfig::seed_split)
      .def_readwrite("seed_undersample", &RunConfig::seed_undersample)
      .def_readwrite("seed_train", &RunConfig::seed_train)
      .def_readwrite("seed_attack", &RunConfig::seed_attack)
      .def_readwrite("defenses", &RunConfig::defenses)
      .def_readwrite("epsilon", &RunConfig::epsilon)
      .def_readwrite("budget", &RunConfig::budget)
      .def_readwrite("morphs", &RunConfig::morphs)
      .def_property(
          "tau", [](const RunConfig& c) { return c.thresholds.tau; },
          [](RunConfig& c, double v) { c.thresholds.tau = v; })
      .def_property(
          "corr_threshold", [](const RunConfig& c) { return c.thresholds.corr_threshold; },
          [](RunConfig& c, double v) { c.thresholds.corr_threshold = v; })
      .def_property(
          "epochs", [](const RunConfig& c) { return c.train.epochs; }, [](RunConfig& c, int v) { c.train.epochs = v; })
      .def_property(
          "learning_rate", [](const RunConfig& c) { return c.train.learning_rate; },
          [](RunConfig& c, double v) { c.train.learning_rate = v; })
      .def_property(
          "models",
          [](const RunConfig& c) {
            std::vector<std::string> out;
            for (auto k : c.models) out.emplace_back(to_string(k));
            return out;
          },
          [](RunConfig& c, const std::vector<std::string>& v) {
            c.models.clear();
            for (const auto& s : v) c.models.push_back(parse_model_kind(s));
          })
      .def_property(
          "phase",
          [](const RunConfig& c) -> std::optional<std::string> {
            if (!c.phase) return std::nullopt;
            return std::string(to_string(*c.phase));
          },
          [](RunConfig& c, const std::optional<std::string>& v) {
            c.phase = v ? std::optional(parse_mask_phase(*v)) : std::nullopt;
          })
      .def_property(
          "neutral", [](const RunConfig& c) { return to_string(c.neutral); },
          [](RunConfig& c, const std::string& v) { c.neutral = parse_neutral(v); });
  string_property(cfg, "scaler", &RunConfig::scaler, [](const std::string& v) { return parse_scaler_method(v); });
  string_property(cfg, "attack", &RunConfig::attack, [](const std::string& v) { return parse_attack_kind(v); });
  string_property(cfg, "allowed", &RunConfig::allowed, [](const std::string& v) { return parse_allowed_rule(v); });

  py::class_<CommandOutput>(m, "CommandOutput")
      .def_readonly("files", &CommandOutput::files)
      .def_readonly("text", &CommandOutput::text)
      .def_readonly("warnings", &CommandOutput::warnings);

  m.def("cmd_score", &cmd_score, py::arg("config"), py::call_guard<py::gil_scoped_release>());
  m.def("cmd_defend", &cmd_defend, py::arg("config"), py::call_guard<py::gil_scoped_release>());
  m.def("cmd_experiment", &cmd_experiment, py::arg("config"), py::call_guard<py::gil_scoped_release>());
  m.def("cmd_synth", &cmd_synth, py::arg("n_rows"), py::arg("seed"), py::arg("out_dir"),
        py::call_guard<py::gil_scoped_release>());

  m.attr("__version__") = "0.1.0";
  m.attr("SCHEMA_VERSION") = std::string(kSchemaVersion);
}
