#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "fractal_evt/cantor.hpp"
#include "fractal_evt/error.hpp"
#include "fractal_evt/experiment.hpp"
#include "fractal_evt/minkowski.hpp"
#include "fractal_evt/qmark.hpp"

namespace py = pybind11;
using namespace fractal_evt;
namespace ex = fractal_evt::experiment;

namespace {

// (value, log value): question-mark measures of small sets underflow a double.
py::tuple scaled(const ScaledReal& r) { return py::make_tuple(r.to_double(), r.log()); }

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Extreme value laws for observables built on fractal sets";

  // Error carries a stable `code` attribute next to the message.
  static PyObject* error_type =
      PyErr_NewException("fractal_evt._core.FractalEvtError", PyExc_RuntimeError, nullptr);
  m.attr("FractalEvtError") = py::handle(error_type);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object instance = py::handle(error_type)(e.what());
      instance.attr("code") = std::string(error_code_name(e.code()));
      PyErr_SetObject(error_type, instance.ptr());
    }
  });

  m.def("qmark_eval", py::overload_cast<double, double>(&qmark_eval), py::arg("x"),
        py::arg("tol") = 0.0, "Minkowski question mark Q(x); exact dyadic value when tol is 0.");
  m.def("qmark_inverse", &qmark_inverse, py::arg("y"), py::arg("tol") = 1e-12);
  m.def("interval_measure", &interval_measure, py::arg("a"), py::arg("b"),
        py::arg("tol") = 0.0, "Q(b) - Q(a).");
  m.def(
      "ball_measure", [](std::uint64_t k, double eps) { return scaled(ball_measure(k, eps)); },
      py::arg("k"), py::arg("eps"), "Q-measure of the ball of radius eps about 1/k as (value, log).");
  m.def(
      "ball_asymptotic",
      [](std::uint64_t k) {
        const BallAsymptotic a = BallAsymptotic::for_center(k);
        return py::dict(py::arg("prefactor") = a.prefactor, py::arg("rate") = a.rate);
      },
      py::arg("k"));

  m.def(
      "gap_order",
      [](double x) -> std::optional<int> {
        const GapOrder g = gap_order(x);
        if (g.is_infinite()) return std::nullopt;
        return g.value();
      },
      py::arg("x"), "Position of the first ternary digit 1, or None for Cantor points.");
  m.def("distance_to_cantor", &distance_to_cantor, py::arg("x"));
  m.def("lebesgue_neighborhood_exact", &lebesgue_neighborhood_exact, py::arg("eps"));
  m.def(
      "qmark_cantor_neighborhood",
      [](double eps) { return scaled(qmark_cantor_neighborhood(eps)); }, py::arg("eps"));
  m.def(
      "harmonic_neighborhood", [](double eps) { return scaled(harmonic_neighborhood(eps)); },
      py::arg("eps"));
  m.def(
      "harmonic_series_measure",
      [](double eps) {
        const HarmonicMeasure h = harmonic_series_measure(eps);
        return py::dict(py::arg("exact") = h.exact, py::arg("log_exact") = h.log_exact,
                        py::arg("series") = h.series, py::arg("log_series") = h.log_series);
      },
      py::arg("eps"));
  m.def("saddle_point_constants", [] {
    const SaddlePoint s = saddle_point_constants();
    return py::dict(py::arg("rate_theory") = s.rate_theory,
                    py::arg("prefactor_numeric") = s.prefactor_numeric,
                    py::arg("reference_eps") = s.reference_eps, py::arg("spread") = s.spread);
  });

  m.def("scenarios", [] {
    py::list out;
    for (const auto& s : ex::scenarios())
      out.append(py::dict(py::arg("name") = s.name, py::arg("anchor") = s.anchor,
                          py::arg("runtime") = s.runtime));
    return out;
  });
  m.def("list_scenarios", &ex::list_scenarios);
  m.def(
      "run_scenario_json",
      [](const std::string& scenario, std::uint64_t seed, unsigned workers,
         const std::filesystem::path& out, const std::map<std::string, std::string>& params) {
        ex::ExperimentConfig cfg;
        cfg.scenario = scenario;
        cfg.seed = seed;
        cfg.workers = workers;
        cfg.output_dir = out;
        cfg.parameters = params;
        nlohmann::json summary;
        {
          py::gil_scoped_release release;
          summary = ex::run(cfg);
        }
        return summary.dump();
      },
      py::arg("scenario"), py::arg("seed") = 1, py::arg("workers") = 1, py::arg("out") = ".",
      py::arg("params") = std::map<std::string, std::string>{});
}
