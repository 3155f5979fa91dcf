#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "voltail/calibration.hpp"
#include "voltail/cli.hpp"
#include "voltail/density.hpp"
#include "voltail/errors.hpp"
#include "voltail/historical.hpp"
#include "voltail/pricing.hpp"
#include "voltail/smile.hpp"
#include "voltail/special_functions.hpp"
#include "voltail/tail.hpp"

namespace py = pybind11;
using namespace voltail;

namespace {

std::vector<VolQuote> to_quotes(const std::vector<double>& x, const std::vector<double>& sigma,
                                const std::optional<std::vector<double>>& weight) {
  if (x.size() != sigma.size() || (weight && weight->size() != x.size())) {
    throw DomainError("x, sigma and weight must have the same length");
  }
  std::vector<VolQuote> q;
  for (std::size_t i = 0; i < x.size(); ++i) q.push_back({x[i], sigma[i], weight ? (*weight)[i] : 1.0});
  return q;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Volatility smile calibration, implied densities and tail statistics";

  auto base = py::register_exception<Error>(m, "VoltailError", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<NoSolutionError>(m, "NoSolutionError", base.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", base.ptr());
  py::register_exception<QuadratureError>(m, "QuadratureError", base.ptr());
  py::register_exception<IntegrityError>(m, "IntegrityError", base.ptr());
  auto fit_error = py::register_exception<FitError>(m, "FitError", base.ptr());
  py::register_exception<SmileFitError>(m, "SmileFitError", fit_error.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  py::enum_<DeltaConvention>(m, "DeltaConvention")
      .value("PAPER_ERF", DeltaConvention::kPaperErf)
      .value("NORM_CDF", DeltaConvention::kMarketNormCdf);

  py::class_<MarketContext>(m, "MarketContext")
      .def(py::init<double, double, double>(), py::arg("spot"), py::arg("rate"), py::arg("maturity"))
      .def_readwrite("spot", &MarketContext::spot)
      .def_readwrite("rate", &MarketContext::rate)
      .def_readwrite("maturity", &MarketContext::maturity);

  m.def("bs_call_price", &bs_call_price, py::arg("ctx"), py::arg("strike"), py::arg("sigma"));
  m.def("bs_delta", &bs_delta, py::arg("ctx"), py::arg("strike"), py::arg("sigma"),
        py::arg("convention") = DeltaConvention::kPaperErf);
  m.def("implied_vol", &implied_vol, py::arg("ctx"), py::arg("strike"), py::arg("price"));
  m.def("delta_to_x", &delta_to_x, py::arg("delta"), py::arg("sigma"), py::arg("maturity"),
        py::arg("convention") = DeltaConvention::kPaperErf);
  m.def("erf_inv", &erf_inv, py::arg("y"));
  m.def("normal_quantile", &normal_quantile, py::arg("p"));

  py::class_<SmileParams>(m, "SmileParams")
      .def(py::init<double, double, double, double>(), py::arg("g"), py::arg("chi"), py::arg("n"),
           py::arg("T"))
      .def_static("from_rho", &SmileParams::from_rho, py::arg("g"), py::arg("chi"), py::arg("rho"),
                  py::arg("T"))
      .def_readwrite("g", &SmileParams::g)
      .def_readwrite("chi", &SmileParams::chi)
      .def_readwrite("n", &SmileParams::n)
      .def_readwrite("T", &SmileParams::T)
      .def_property_readonly("rho", &SmileParams::rho)
      .def_property_readonly("x_min", &SmileParams::x_min)
      .def("__repr__", [](const SmileParams& p) {
        std::ostringstream os;
        os.precision(17);
        os << "SmileParams(g=" << p.g << ", chi=" << p.chi << ", n=" << p.n << ", T=" << p.T << ")";
        return os.str();
      });

  m.def("smile_sigma", &smile_sigma, py::arg("params"), py::arg("x"));
  m.def("perturbation_factor", &perturbation_factor, py::arg("params"), py::arg("x"));
  m.def("implied_pdf", &implied_pdf, py::arg("params"), py::arg("x"));
  m.def("implied_ccdf", &implied_ccdf, py::arg("params"), py::arg("x"));

  py::class_<DensityGrid>(m, "DensityGrid")
      .def_readonly("xs", &DensityGrid::xs)
      .def_readonly("pdf", &DensityGrid::pdf)
      .def_readonly("ccdf", &DensityGrid::ccdf)
      .def_readonly("norm_defect", &DensityGrid::norm_defect)
      .def_readonly("negative_mask", &DensityGrid::negative_mask)
      .def("negative_count", &DensityGrid::negative_count)
      .def("__len__", &DensityGrid::size);
  m.def("density_grid",
        py::overload_cast<const SmileParams&, double, std::size_t>(&density_grid),
        py::arg("params"), py::arg("multiplier") = 10.0, py::arg("points") = 512);

  py::class_<VarResult>(m, "VarResult")
      .def_readonly("lambda_", &VarResult::lambda)
      .def_readonly("level", &VarResult::level)
      .def_readonly("quadrature_error", &VarResult::quadrature_error);
  m.def("value_at_risk", &value_at_risk, py::arg("params"), py::arg("level") = 0.01);
  m.def("has_interior_minimum", &has_interior_minimum, py::arg("params"));

  m.def("f_of_rho", &f_of_rho, py::arg("rho"));
  m.def("mu_predicted", &mu_predicted, py::arg("params"));

  py::enum_<FitMode>(m, "FitMode")
      .value("UNCONDITIONAL", FitMode::kUnconditional)
      .value("CONDITIONAL", FitMode::kConditional);

  py::class_<FitResult>(m, "FitResult")
      .def_readonly("params", &FitResult::params)
      .def_readonly("err_g", &FitResult::err_g)
      .def_readonly("err_chi", &FitResult::err_chi)
      .def_readonly("err_n", &FitResult::err_n)
      .def_readonly("rms", &FitResult::rms)
      .def_readonly("mode", &FitResult::mode)
      .def_readonly("constraint_residual", &FitResult::constraint_residual)
      .def_readonly("iterations", &FitResult::iterations)
      .def_readonly("converged", &FitResult::converged)
      .def_readonly("degenerate", &FitResult::degenerate)
      .def_readonly("warnings", &FitResult::warnings);

  py::class_<HistoricalStats>(m, "HistoricalStats")
      .def(py::init([](double sigma_H, double mu_H, double lag_days) {
             HistoricalStats h{};
             h.sigma_H = sigma_H;
             h.mu_H = mu_H;
             h.lag_days = lag_days;
             h.subgroup_size = kMinSubgroupSize;
             return h;
           }),
           py::arg("sigma_H"), py::arg("mu_H"), py::arg("lag_days") = 1.0)
      .def_readwrite("sigma_H", &HistoricalStats::sigma_H)
      .def_readwrite("mu_H", &HistoricalStats::mu_H)
      .def_readonly("rms_residual", &HistoricalStats::rms_residual)
      .def_readonly("subgroup_size", &HistoricalStats::subgroup_size)
      .def_readwrite("lag_days", &HistoricalStats::lag_days)
      .def_readonly("group_index", &HistoricalStats::group_index)
      .def_readwrite("label", &HistoricalStats::label);

  m.def(
      "fit_unconditional",
      [](const std::vector<double>& x, const std::vector<double>& sigma, double T,
         const std::optional<std::vector<double>>& weight) {
        const auto q = to_quotes(x, sigma, weight);
        return fit_unconditional(q, T);
      },
      py::arg("x"), py::arg("sigma"), py::arg("T"), py::arg("weight") = py::none());
  m.def(
      "fit_conditional",
      [](const std::vector<double>& x, const std::vector<double>& sigma, double T,
         const HistoricalStats& hist, const std::optional<std::vector<double>>& weight) {
        const auto q = to_quotes(x, sigma, weight);
        return fit_conditional(q, T, hist);
      },
      py::arg("x"), py::arg("sigma"), py::arg("T"), py::arg("hist"), py::arg("weight") = py::none());

  py::class_<EmpiricalTail>(m, "EmpiricalTail")
      .def_readonly("mu", &EmpiricalTail::mu)
      .def_readonly("mu_right", &EmpiricalTail::mu_right)
      .def_readonly("mu_left", &EmpiricalTail::mu_left)
      .def_readonly("rms_residual", &EmpiricalTail::rms_residual)
      .def_readonly("points", &EmpiricalTail::points);
  m.def(
      "ccdf_tail_fit",
      [](const std::vector<double>& r) { return ccdf_tail_fit(r); }, py::arg("returns"));
  m.def(
      "subgroup_stats",
      [](const std::vector<double>& r, int lag, std::size_t group_size) {
        ReturnSeries s;
        s.lag = lag;
        s.values = r;
        return subgroup_stats(s, group_size);
      },
      py::arg("returns"), py::arg("lag") = 1, py::arg("group_size") = kMinSubgroupSize);

  py::class_<ScalingFit>(m, "ScalingFit")
      .def_readonly("C1", &ScalingFit::C1)
      .def_readonly("uncertainty", &ScalingFit::uncertainty)
      .def_readonly("points", &ScalingFit::points);
  m.def(
      "fit_scaling",
      [](const std::vector<HistoricalStats>& s) { return fit_scaling(s); }, py::arg("stats"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = run_cli(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool; returns (exit_code, stdout, stderr).");
}
