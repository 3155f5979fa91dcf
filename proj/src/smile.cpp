#include "voltail/smile.hpp"

#include <cmath>
#include <sstream>

#include "voltail/errors.hpp"

namespace voltail {

namespace {

double shifted(const SmileParams& p, double x) { return x + 0.5 * p.g * p.g * p.T; }

// u^2 / (u^2 + n), switching form far out in the wings.
double wing_fraction(double u, double n) {
  const double u2 = u * u;
  if (std::fabs(u) > 1e6 * std::sqrt(n)) return 1.0 / (1.0 + n / u2);
  return u2 / (u2 + n);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

double smile_sigma(const SmileParams& p, double x) {
  return p.g * (1.0 + (p.chi - 1.0) * wing_fraction(shifted(p, x), p.n));
}

double smile_sigma_d1(const SmileParams& p, double x) {
  const double u = shifted(p, x);
  const double s = u * u + p.n;
  return 2.0 * p.g * (p.chi - 1.0) * (p.n / s) * (u / s);
}

double smile_sigma_d2(const SmileParams& p, double x) {
  const double u = shifted(p, x);
  const double s = u * u + p.n;
  return 2.0 * p.g * (p.chi - 1.0) * (p.n / s) * ((p.n - 3.0 * u * u) / s) / s;
}

SmileShapeReport shape_report(const SmileParams& p) {
  SmileShapeReport r{};
  r.x_min = p.x_min();
  r.height = p.g * (p.chi - 1.0);
  r.half_width = std::sqrt(p.n);
  r.rho = p.rho();
  r.c_implied = std::sqrt(p.n) / (p.g * std::sqrt(p.T));
  return r;
}

ValidationResult validate_params(const SmileParams& p, bool table_bounds,
                                 const TableBounds& b) {
  ValidationResult res;
  auto add = [&](std::string field, std::string msg) {
    res.violations.push_back({std::move(field), std::move(msg)});
  };
  if (!(p.g > 0.0) || !std::isfinite(p.g)) add("g", "g must be positive and finite");
  if (!(p.chi >= 1.0) || !std::isfinite(p.chi)) add("chi", "chi must be >= 1 (got " + fmt(p.chi) + ")");
  if (!(p.n > 0.0) || !std::isfinite(p.n)) add("n", "n must be positive and finite");
  if (!(p.T > 0.0) || !std::isfinite(p.T)) add("T", "T must be positive and finite");
  if (!table_bounds || !res.ok()) return res;

  // Relative slack so values produced by day/year conversions at the edges
  // are not rejected.
  constexpr double eps = 1e-12;
  auto range = [&](const char* name, double v, double lo, double hi) {
    if (v < lo * (1 - eps)) add(name, std::string(name) + " below table minimum " + fmt(lo));
    if (v > hi * (1 + eps)) add(name, std::string(name) + " above table maximum " + fmt(hi));
  };
  range("g", p.g, b.g_min, b.g_max);
  range("rho", p.rho(), b.rho_min, b.rho_max);
  range("T_days", p.T * 365.0, b.t_days_min, b.t_days_max);
  range("chi", p.chi, b.chi_min, b.chi_max);
  return res;
}

void require_valid(const SmileParams& p) {
  const auto res = validate_params(p, false);
  if (res.ok()) return;
  std::string msg = "invalid smile parameters:";
  for (const auto& v : res.violations) msg += " " + v.message + ";";
  throw DomainError(msg);
}

}  // namespace voltail
