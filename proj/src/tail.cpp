#include "voltail/tail.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <tuple>

#include "voltail/errors.hpp"
#include "voltail/special_functions.hpp"

namespace voltail {

namespace {

double ln_erfc(double z) {
  if (z < 0.5) return std::log1p(-std::erf(z));
  return log_erfc(z);
}

std::vector<double> linspace(double a, double b, std::size_t n) {
  if (a == b) n = 1;
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = a;
    return v;
  }
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = i + 1 == n ? b : a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return v;
}

}  // namespace

TransitionRegion transition_region(const SmileParams& p, TailSide side) {
  const double w = std::sqrt(p.n);
  return {0.5 * w, w, p.x_min(), side};
}

double f_of_rho(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) throw DomainError("f_of_rho: rho must be positive");
  const double a = std::sqrt(0.5 * rho);
  return (ln_erfc(0.5 * a) - ln_erfc(a)) / std::sqrt(rho);
}

double mu_flat(double g, double T, double rho) {
  if (!(g > 0.0) || !(T > 0.0)) throw DomainError("mu_flat: g and T must be positive");
  return 2.0 / (g * std::sqrt(T)) * f_of_rho(rho);
}

double mu_predicted(const SmileParams& p) {
  require_valid(p);
  return mu_flat(p.g, p.T, p.rho()) / p.chi;
}

TailEstimate fit_tail(const DensityGrid& grid, const TransitionRegion& window) {
  if (!(window.x_lo > 0.0 && window.x_lo < window.x_hi)) {
    throw FitError("fit_tail: window must satisfy 0 < x_lo < x_hi");
  }
  const double lo = window.abs_lo();
  const double hi = window.abs_hi();
  // Tolerate grid points that land on the window edges up to rounding.
  const double slack = 1e-12 * (hi - lo);
  std::vector<double> t;
  std::vector<double> y;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.xs[i];
    if (x < lo - slack || x > hi + slack) continue;
    const double prob = window.side == TailSide::kRight ? grid.ccdf[i] : 1.0 - grid.ccdf[i];
    if (!(prob > 0.0)) {
      throw FitError("fit_tail: non-positive tail probability inside the window");
    }
    t.push_back(std::fabs(x - window.center));
    y.push_back(std::log(prob));
  }
  if (t.size() < 8) throw FitError("fit_tail: fewer than 8 grid points inside the window");

  const double n = static_cast<double>(t.size());
  double tm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    tm += t[i];
    ym += y[i];
  }
  tm /= n;
  ym /= n;
  double stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    stt += (t[i] - tm) * (t[i] - tm);
    sty += (t[i] - tm) * (y[i] - ym);
  }
  if (!(stt > 0.0)) throw FitError("fit_tail: degenerate abscissae");
  const double slope = sty / stt;
  const double icpt = ym - slope * tm;
  double ss = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = y[i] - (icpt + slope * t[i]);
    ss += r * r;
  }
  TailEstimate est{};
  est.mu = -slope;
  est.intercept = icpt + slope * window.x_lo;
  est.rms_residual = std::sqrt(ss / n);
  est.window = window;
  est.points = t.size();
  return est;
}

TailEstimate fit_tail_for(const SmileParams& p, TailSide side) {
  require_valid(p);
  const auto window = transition_region(p, side);
  // 193 points over 1.5 sqrt(n) put 65 of them inside the window.
  const double w = std::sqrt(p.n);
  const double c = p.x_min();
  const auto grid = side == TailSide::kRight ? density_grid(p, c, c + 1.5 * w, 193)
                                             : density_grid(p, c - 1.5 * w, c, 193);
  return fit_tail(grid, window);
}

double SweepPoint::rel_err() const {
  if (!mu_fit) return std::numeric_limits<double>::quiet_NaN();
  return (*mu_fit - mu_pred) / mu_pred;
}

SweepReport validation_sweep(const TableBounds& b, std::size_t samples, TailSide side) {
  if (samples < 1) throw DomainError("validation_sweep: need at least one sample per axis");
  if (!(b.g_min > 0.0 && b.g_min <= b.g_max && b.rho_min > 0.0 && b.rho_min <= b.rho_max &&
        b.t_days_min > 0.0 && b.t_days_min <= b.t_days_max && b.chi_min >= 1.0 &&
        b.chi_min <= b.chi_max)) {
    throw DomainError("validation_sweep: inconsistent bounds");
  }
  const auto gs = linspace(b.g_min, b.g_max, samples);
  const auto chis = linspace(b.chi_min, b.chi_max, samples);
  const auto rhos = linspace(b.rho_min, b.rho_max, samples);
  auto log_days = linspace(std::log(b.t_days_min), std::log(b.t_days_max), samples);
  std::vector<double> days(log_days.size());
  for (std::size_t i = 0; i < days.size(); ++i) days[i] = std::exp(log_days[i]);
  // exp(log(x)) need not return x exactly.
  days.front() = b.t_days_min;
  if (days.size() > 1) days.back() = b.t_days_max;

  SweepReport rep;
  for (double g : gs) {
    for (double chi : chis) {
      for (double rho : rhos) {
        for (double d : days) {
          SweepPoint pt{g, chi, rho, d, 0.0, std::nullopt, {}};
          const auto p = SmileParams::from_rho(g, chi, rho, d / 365.0);
          pt.mu_pred = mu_predicted(p);
          try {
            pt.mu_fit = fit_tail_for(p, side).mu;
          } catch (const Error& e) {
            pt.failure = e.what();
          }
          rep.points.push_back(std::move(pt));
        }
      }
    }
  }
  std::sort(rep.points.begin(), rep.points.end(), [](const SweepPoint& a, const SweepPoint& b) {
    return std::tie(a.g, a.chi, a.rho, a.t_days) < std::tie(b.g, b.chi, b.rho, b.t_days);
  });

  double sum_rel = 0.0, sum_d2 = 0.0, sum_p2 = 0.0;
  std::size_t fitted = 0;
  for (const auto& pt : rep.points) {
    if (!pt.mu_fit) {
      ++rep.failures;
      continue;
    }
    const double r = pt.rel_err();
    sum_rel += r * r;
    sum_d2 += (*pt.mu_fit - pt.mu_pred) * (*pt.mu_fit - pt.mu_pred);
    sum_p2 += pt.mu_pred * pt.mu_pred;
    ++fitted;
  }
  if (fitted > 0) {
    rep.relative_mse = sum_rel / static_cast<double>(fitted);
    rep.normalized_mse = sum_d2 / sum_p2;
  } else {
    rep.relative_mse = std::numeric_limits<double>::quiet_NaN();
    rep.normalized_mse = std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

}  // namespace voltail
