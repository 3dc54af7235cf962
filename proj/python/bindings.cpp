#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "transferscope/error.hpp"
#include "transferscope/report.hpp"

namespace py = pybind11;
using namespace transferscope;

namespace {

Axis parse_axis(const std::string& axis) {
  if (axis == "transfer") return Axis::Transfer;
  if (axis == "target") return Axis::Target;
  throw UsageError("axis must be 'transfer' or 'target'");
}

StepSelector make_selector(const std::optional<std::vector<int>>& steps) {
  if (!steps) return StepSelector::minimal();
  if (steps->size() == 1) return StepSelector::single(steps->front());
  return StepSelector::mean_of(*steps);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Transfer metrics, interference patterns and reports over experiment ledgers";

  py::register_exception<LedgerError>(m, "LedgerError", PyExc_ValueError);
  py::register_exception<MetricError>(m, "MetricError", PyExc_ArithmeticError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);

  py::class_<Ledger>(m, "Ledger")
      .def("models", &Ledger::models)
      .def("tasks", &Ledger::tasks, py::arg("model"))
      .def("transfers", &Ledger::transfers, py::arg("model"), py::arg("task"))
      .def("targets", &Ledger::targets, py::arg("model"), py::arg("task"))
      .def("step_grid", &Ledger::step_grid)
      .def("warnings", &Ledger::warnings)
      .def("baseline", &Ledger::baseline, py::arg("model"), py::arg("task"), py::arg("target"))
      .def("save", [](const Ledger& l, const std::filesystem::path& dir) { save_ledger(l, dir); },
           py::arg("dir"));

  m.def("load_ledger",
        [](const std::filesystem::path& dir, bool strict) { return load_ledger_dir(dir, LoadOptions{strict}); },
        py::arg("dir"), py::arg("strict") = false);

  m.def(
      "synth_ledger",
      [](std::uint64_t seed, int transfers, int targets, int tasks, int reps, double noise_sd,
         double missing_rate) {
        SynthConfig cfg;
        cfg.seed = seed;
        cfg.n_transfer = transfers;
        cfg.n_target = targets;
        cfg.tasks = tasks;
        cfg.rep_count = reps;
        cfg.noise_sd = noise_sd;
        cfg.missing_rate = missing_rate;
        return synth_ledger(cfg).ledger;
      },
      py::arg("seed") = 7, py::arg("transfers") = 3, py::arg("targets") = 4, py::arg("tasks") = 1,
      py::arg("reps") = 10, py::arg("noise_sd") = 1.0, py::arg("missing_rate") = 0.0);

  m.def(
      "transfer_score",
      [](const Ledger& l, const std::string& model, const std::string& task, const std::string& transfer,
         const std::string& target, int steps, bool strict) {
        return transfer_score(l, model, task, transfer, target, steps, strict).value;
      },
      py::arg("ledger"), py::arg("model"), py::arg("task"), py::arg("transfer"), py::arg("target"),
      py::arg("steps"), py::arg("strict") = false);

  m.def(
      "rank_languages",
      [](const Ledger& l, const std::string& model, const std::string& task, const std::string& axis,
         const std::optional<std::vector<int>>& steps) {
        py::list out;
        for (const auto& e : rank_languages(transfer_matrix(l, model, task, make_selector(steps)), parse_axis(axis)))
          out.append(py::make_tuple(e.rank, e.lang, e.agg_ts, e.positive_pct));
        return out;
      },
      py::arg("ledger"), py::arg("model"), py::arg("task"), py::arg("axis") = "transfer",
      py::arg("steps") = py::none());

  m.def(
      "variance_profile",
      [](int max_count, int min_count, int threshold) {
        return std::string(to_string(variance_profile(VarianceStats{0.0, max_count, min_count}, threshold)));
      },
      py::arg("max_count"), py::arg("min_count"), py::arg("threshold") = kDefaultProfileThreshold);

  m.def(
      "improvement_flags",
      [](double base, std::optional<double> first, std::optional<double> last,
         const std::vector<std::optional<double>>& interactions) {
        const auto f = improvement_flags(base, first, last, interactions);
        return py::make_tuple(f.first_step, f.last_step, f.interaction);
      },
      py::arg("base"), py::arg("first_step"), py::arg("last_step"), py::arg("interactions"));

  m.def(
      "project_bilingual",
      [](const std::vector<int>& counts) {
        const auto p = project_bilingual(counts);
        return py::make_tuple(p.x, p.y);
      },
      py::arg("counts"));

  m.def(
      "project_trilingual",
      [](const std::vector<int>& counts) {
        const auto p = project_trilingual(counts);
        return py::make_tuple(p.point.x, p.point.y, std::string(1, sign_char(p.third_sign())));
      },
      py::arg("counts"));

  m.def(
      "pattern_counts",
      [](const Ledger& l, const std::string& model, const std::optional<std::string>& task,
         const std::string& lang, int arity, bool ties_positive) {
        return pattern_counts(l, model, task, lang, arity, ties_positive ? TieRule::Positive : TieRule::Negative)
            .counts;
      },
      py::arg("ledger"), py::arg("model"), py::arg("task"), py::arg("lang"), py::arg("arity") = 2,
      py::arg("ties_positive") = false);

  m.def(
      "spearman",
      [](const std::vector<double>& x, const std::vector<double>& y) {
        const auto r = spearman(x, y);
        return py::make_tuple(r.rho, r.p_value);
      },
      py::arg("x"), py::arg("y"));

  m.def(
      "build_all_reports",
      [](const Ledger& l, int threads) {
        ReportAllOptions options;
        options.threads = threads;
        py::gil_scoped_release release;
        return build_all_reports(l, options);
      },
      py::arg("ledger"), py::arg("threads") = 1);

  m.def(
      "report_all",
      [](const Ledger& l, const std::filesystem::path& out, int threads) {
        ReportAllOptions options;
        options.threads = threads;
        py::gil_scoped_release release;
        return report_all(l, out, options);
      },
      py::arg("ledger"), py::arg("out"), py::arg("threads") = 1);
}
