#include "voltail/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "levenberg_marquardt.hpp"
#include "voltail/tail.hpp"

namespace voltail {

namespace {

constexpr double kScalingC = 2.65;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct SmilePartials {
  double sigma;
  double d_g;    // rho held fixed
  double d_chi;
  double d_rho;
};

// sigma and its partials in the (g, chi, rho) parameterization.
SmilePartials smile_partials(double g, double chi, double rho, double T, double x) {
  const double n = rho * g * g * T;
  const double u = x + 0.5 * g * g * T;
  const double s = u * u + n;
  const double w = u * u / s;
  const double dw_du = 2.0 * u * n / (s * s);
  const double dw_dn = -u * u / (s * s);
  SmilePartials out{};
  out.sigma = g * (1.0 + (chi - 1.0) * w);
  out.d_chi = g * w;
  out.d_g = (1.0 + (chi - 1.0) * w) +
            g * (chi - 1.0) * (dw_du * g * T + dw_dn * 2.0 * rho * g * T);
  out.d_rho = g * (chi - 1.0) * dw_dn * g * g * T;
  return out;
}

void check_quotes(std::span<const VolQuote> quotes, double T) {
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("fit: maturity must be positive");
  std::size_t active = 0;
  for (const auto& q : quotes) {
    if (!(q.sigma > 0.0) || !std::isfinite(q.sigma) || !std::isfinite(q.x)) {
      throw DomainError("fit: quote volatilities must be positive and finite");
    }
    if (!(q.weight >= 0.0) || !std::isfinite(q.weight)) {
      throw DomainError("fit: quote weights must be non-negative");
    }
    if (q.weight > 0.0) ++active;
  }
  if (active < 4) throw FitError("fit: need at least 4 weighted quotes");
  // Ties at the minimum (a flat smile) count as one stretch of minimum.
  double s_min = std::numeric_limits<double>::infinity();
  for (const auto& q : quotes) {
    if (q.weight > 0.0) s_min = std::min(s_min, q.sigma);
  }
  double lo_x = std::numeric_limits<double>::infinity();
  double hi_x = -lo_x;
  for (const auto& q : quotes) {
    if (q.weight > 0.0 && q.sigma <= s_min * (1.0 + 1e-12)) {
      lo_x = std::min(lo_x, q.x);
      hi_x = std::max(hi_x, q.x);
    }
  }
  bool left = false, right = false;
  for (const auto& q : quotes) {
    if (q.weight <= 0.0) continue;
    left = left || q.x < hi_x;
    right = right || q.x > lo_x;
  }
  if (!left || !right) throw FitError("fit: quotes must span both sides of the smile minimum");
}

double weighted_rms(std::span<const VolQuote> quotes, const Eigen::VectorXd& r) {
  double wsum = 0.0;
  for (const auto& q : quotes) wsum += q.weight;
  return std::sqrt(r.squaredNorm() / wsum);
}

// Covariance of the parameters from the weighted Jacobian; columns that carry
// no information get NaN variances.
Eigen::MatrixXd covariance(const Eigen::MatrixXd& J, const Eigen::VectorXd& r, std::size_t m_active) {
  const Eigen::Index p = J.cols();
  Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(p, p, kNaN);
  const double dof = static_cast<double>(m_active) - static_cast<double>(p);
  if (dof <= 0.0) return cov;
  const double s2 = r.squaredNorm() / dof;
  double max_norm = 0.0;
  for (Eigen::Index j = 0; j < p; ++j) max_norm = std::max(max_norm, J.col(j).norm());
  std::vector<Eigen::Index> keep;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (J.col(j).norm() > 1e-10 * max_norm) keep.push_back(j);
  }
  if (keep.empty()) return cov;
  Eigen::MatrixXd Jk(J.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) Jk.col(static_cast<Eigen::Index>(k)) = J.col(keep[k]);
  const Eigen::MatrixXd A = Jk.transpose() * Jk;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) return cov;
  const Eigen::MatrixXd inv = lu.inverse() * s2;
  for (std::size_t a = 0; a < keep.size(); ++a) {
    for (std::size_t b = 0; b < keep.size(); ++b) {
      cov(keep[a], keep[b]) = inv(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
  }
  return cov;
}

// Standard error of n = rho g^2 T from the (g, rho) block of a covariance.
double n_error(double g, double rho, double T, double var_g, double var_rho, double cov_g_rho) {
  const double a = 2.0 * rho * g * T;
  const double b = g * g * T;
  const double var = a * a * var_g + b * b * var_rho + 2.0 * a * b * cov_g_rho;
  return var >= 0.0 ? std::sqrt(var) : kNaN;
}

std::size_t active_count(std::span<const VolQuote> quotes) {
  return static_cast<std::size_t>(
      std::count_if(quotes.begin(), quotes.end(), [](const VolQuote& q) { return q.weight > 0.0; }));
}

double min_sigma(std::span<const VolQuote> quotes) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& q : quotes) {
    if (q.weight > 0.0) m = std::min(m, q.sigma);
  }
  return m;
}

double max_sigma(std::span<const VolQuote> quotes) {
  double m = 0.0;
  for (const auto& q : quotes) {
    if (q.weight > 0.0) m = std::max(m, q.sigma);
  }
  return m;
}

}  // namespace

VolQuote quote_from_delta(double delta, double sigma, double maturity, DeltaConvention conv,
                          double weight) {
  return {delta_to_x(delta, sigma, maturity, conv), sigma, weight};
}

FitResult fit_unconditional(std::span<const VolQuote> quotes, double T,
                            const std::optional<SmileParams>& init) {
  check_quotes(quotes, T);
  const Eigen::Index m = static_cast<Eigen::Index>(quotes.size());

  Eigen::VectorXd x0(3);
  if (init) {
    require_valid(*init);
    x0 << init->g, init->chi, std::log(init->n / (init->g * init->g * T));
  } else {
    const double lo = min_sigma(quotes);
    x0 << lo, max_sigma(quotes) / lo, std::log(kScalingC * kScalingC);
  }
  // The width is fitted as ln(rho): it spans decades and its linear
  // sensitivity vanishes as chi -> 1.
  Eigen::VectorXd lower(3), upper(3);
  lower << 1e-10, 1.0, std::log(1e-8);
  upper << 5.0, 10.0, std::log(1e8);

  auto fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    r.resize(m);
    if (jac) jac->resize(m, 3);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& q = quotes[static_cast<std::size_t>(i)];
      const double sw = std::sqrt(q.weight);
      const double rho = std::exp(p[2]);
      const auto d = smile_partials(p[0], p[1], rho, T, q.x);
      r[i] = sw * (d.sigma - q.sigma);
      if (jac) {
        (*jac)(i, 0) = sw * d.d_g;
        (*jac)(i, 1) = sw * d.d_chi;
        (*jac)(i, 2) = sw * d.d_rho * rho;
      }
    }
    return true;
  };
  const auto lm = detail::levenberg_marquardt(fn, x0, lower, upper);

  FitResult res;
  res.mode = FitMode::kUnconditional;
  const double rho = std::exp(lm.x[2]);
  res.params = SmileParams::from_rho(lm.x[0], lm.x[1], rho, T);
  res.rms = weighted_rms(quotes, lm.r);
  res.iterations = lm.iterations;
  res.converged = lm.converged;
  const auto cov = covariance(lm.jac, lm.r, active_count(quotes));
  res.err_g = std::sqrt(cov(0, 0));
  res.err_chi = std::sqrt(cov(1, 1));
  res.err_n = n_error(lm.x[0], rho, T, cov(0, 0), rho * rho * cov(2, 2), rho * cov(0, 2));
  if (lm.x[1] <= 1.0 + 1e-9) {
    res.degenerate = true;
    res.warnings.push_back("degenerate_fit: chi at lower bound 1 (flat smile); n is not identifiable");
  }
  if (lm.x[0] >= upper[0]) res.warnings.push_back("bound: g at upper bound 5");
  if (lm.x[1] >= upper[1]) res.warnings.push_back("bound: chi at upper bound 10");
  if (!lm.converged) {
    throw SmileFitError("fit_unconditional: no convergence within 500 iterations", res);
  }
  return res;
}

double conditional_chi(double mu_H, double sigma_H, double g, double n, double T, bool* below_one) {
  if (!(mu_H > 0.0) || !(sigma_H > 0.0) || !(g > 0.0) || !(n > 0.0) || !(T > 0.0)) {
    throw DomainError("conditional_chi: all inputs must be positive");
  }
  const double chi = 2.0 / (mu_H * sigma_H) * f_of_rho(n / (g * g * T));
  if (below_one) *below_one = chi < 1.0;
  return chi;
}

FitResult fit_conditional(std::span<const VolQuote> quotes, double T, const HistoricalStats& hist,
                          const std::optional<SmileParams>& init) {
  check_quotes(quotes, T);
  if (!(hist.mu_H > 0.0) || !(hist.sigma_H > 0.0)) {
    throw DomainError("fit_conditional: historical mu_H and sigma_H must be positive");
  }
  const double product = hist.mu_H * hist.sigma_H;
  const Eigen::Index m = static_cast<Eigen::Index>(quotes.size());
  auto chi_of = [&](double rho) { return 2.0 * f_of_rho(rho) / product; };

  constexpr double kRhoLo = 1e-8, kRhoHi = 1e8;
  double g0 = init ? init->g : min_sigma(quotes);
  double rho0 = init ? init->n / (init->g * init->g * T) : kScalingC * kScalingC;
  if (init) require_valid(*init);
  if (chi_of(rho0) < 1.0) {
    // f is increasing: move to the smallest width with chi >= 1.
    if (chi_of(kRhoHi) < 1.0) {
      throw FitError("fit_conditional: historical decay is steeper than the flat-smile normal "
                     "for every width (chi < 1)");
    }
    double a = std::log(rho0), b = std::log(kRhoHi);
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (a + b);
      if (chi_of(std::exp(mid)) < 1.0) a = mid; else b = mid;
    }
    rho0 = std::exp(b) * (1.0 + 1e-9);
  }

  Eigen::VectorXd x0(2);
  x0 << g0, rho0;
  Eigen::VectorXd lower(2), upper(2);
  lower << 1e-10, kRhoLo;
  upper << 5.0, kRhoHi;

  auto fn = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* jac) {
    const double chi = chi_of(p[1]);
    if (!(chi >= 1.0)) return false;
    double dchi = 0.0;
    if (jac) {
      const double h = 1e-6 * p[1];
      dchi = (chi_of(p[1] + h) - chi_of(p[1] - h)) / (2.0 * h);
      jac->resize(m, 2);
    }
    r.resize(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto& q = quotes[static_cast<std::size_t>(i)];
      const double sw = std::sqrt(q.weight);
      const auto d = smile_partials(p[0], chi, p[1], T, q.x);
      r[i] = sw * (d.sigma - q.sigma);
      if (jac) {
        (*jac)(i, 0) = sw * d.d_g;
        (*jac)(i, 1) = sw * (d.d_rho + d.d_chi * dchi);
      }
    }
    return true;
  };
  const auto lm = detail::levenberg_marquardt(fn, x0, lower, upper);
  if (lm.iterations == 0) {
    throw FitError("fit_conditional: starting point violates chi >= 1");
  }

  const double g = lm.x[0];
  const double rho = lm.x[1];
  const double chi = chi_of(rho);
  FitResult res;
  res.mode = FitMode::kConditional;
  res.params = SmileParams::from_rho(g, chi, rho, T);
  res.rms = weighted_rms(quotes, lm.r);
  res.iterations = lm.iterations;
  res.converged = lm.converged;
  res.infeasible_trials = lm.infeasible_trials;
  res.constraint_residual =
      std::fabs(chi * product - 2.0 * f_of_rho(res.params.n / (g * g * T)));
  const auto cov = covariance(lm.jac, lm.r, active_count(quotes));
  const double h = 1e-6 * rho;
  const double dchi = (chi_of(rho + h) - chi_of(rho - h)) / (2.0 * h);
  res.err_g = std::sqrt(cov(0, 0));
  res.err_chi = std::fabs(dchi) * std::sqrt(cov(1, 1));
  res.err_n = n_error(g, rho, T, cov(0, 0), cov(1, 1), cov(0, 1));
  if (lm.infeasible_trials > 0) {
    res.warnings.push_back("chi_infeasible: " + std::to_string(lm.infeasible_trials) +
                           " trial point(s) rejected because the constraint gave chi < 1 "
                           "(historical decay steeper than the flat-smile normal)");
  }
  if (chi <= 1.0 + 1e-9) {
    res.degenerate = true;
    res.warnings.push_back("degenerate_fit: constrained chi at 1 (flat smile)");
  }
  if (g >= upper[0]) res.warnings.push_back("bound: g at upper bound 5");
  if (!lm.converged) {
    throw SmileFitError("fit_conditional: no convergence within 500 iterations", res);
  }
  return res;
}

FitComparison compare_fits(std::span<const VolQuote> quotes, double T, const HistoricalStats& hist,
                           double level) {
  FitComparison cmp;
  cmp.level = level;
  cmp.unconditional.fit = fit_unconditional(quotes, T);
  cmp.conditional.fit = fit_conditional(quotes, T, hist);
  for (FitSide* side : {&cmp.unconditional, &cmp.conditional}) {
    const auto& p = side->fit.params;
    side->grid = density_grid(p, 10.0, 512);
    side->interior_minimum = has_interior_minimum(p);
    try {
      side->var = value_at_risk(p, level);
    } catch (const Error& e) {
      side->var_error = e.what();
    }
  }
  if (cmp.unconditional.var && cmp.conditional.var) {
    const double a = cmp.unconditional.var->lambda;
    const double b = cmp.conditional.var->lambda;
    cmp.var_rel_diff = std::fabs(b - a) / a;
  }
  return cmp;
}

}  // namespace voltail
