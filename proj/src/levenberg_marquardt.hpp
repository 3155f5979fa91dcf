#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <functional>

namespace voltail::detail {

/// Residuals (and optionally the Jacobian) at x. Returns false when x is an
/// infeasible trial point.
using ResidualFn = std::function<bool(const Eigen::VectorXd& x, Eigen::VectorXd& r,
                                      Eigen::MatrixXd* jac)>;

struct LmSettings {
  int max_iterations = 500;
  double xtol = 1e-10;  ///< relative parameter step
  double gtol = 1e-12;  ///< projected gradient, infinity norm
};

struct LmOutcome {
  Eigen::VectorXd x;
  Eigen::VectorXd r;
  Eigen::MatrixXd jac;
  double cost = 0.0;  ///< 0.5 |r|^2
  int iterations = 0;
  bool converged = false;
  int infeasible_trials = 0;
};

/// Box-constrained Levenberg-Marquardt: Marquardt scaling, gain-ratio damping
/// update, trial points projected onto the box.
inline LmOutcome levenberg_marquardt(const ResidualFn& fn, Eigen::VectorXd x,
                                     const Eigen::VectorXd& lower,
                                     const Eigen::VectorXd& upper,
                                     const LmSettings& cfg = {}) {
  const Eigen::Index p = x.size();
  auto project = [&](Eigen::VectorXd v) {
    for (Eigen::Index i = 0; i < p; ++i) v[i] = std::clamp(v[i], lower[i], upper[i]);
    return v;
  };

  LmOutcome out;
  out.x = project(std::move(x));
  if (!fn(out.x, out.r, &out.jac)) {
    out.infeasible_trials = 1;
    return out;
  }
  out.cost = 0.5 * out.r.squaredNorm();

  Eigen::MatrixXd A = out.jac.transpose() * out.jac;
  double lambda = 1e-3 * std::max(A.diagonal().maxCoeff(), 1e-300);
  double nu = 2.0;
  Eigen::VectorXd r_new;

  for (out.iterations = 1; out.iterations <= cfg.max_iterations; ++out.iterations) {
    const Eigen::VectorXd grad = out.jac.transpose() * out.r;
    // Gradient components pushing out of an active bound do not count.
    double gmax = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) {
      const bool at_lo = out.x[i] <= lower[i] && grad[i] > 0.0;
      const bool at_hi = out.x[i] >= upper[i] && grad[i] < 0.0;
      if (!at_lo && !at_hi) gmax = std::max(gmax, std::fabs(grad[i]));
    }
    if (gmax <= cfg.gtol) {
      out.converged = true;
      return out;
    }

    Eigen::VectorXd diag = A.diagonal();
    const double dmax = std::max(diag.maxCoeff(), 1e-300);
    for (Eigen::Index i = 0; i < p; ++i) diag[i] = std::max(diag[i], 1e-12 * dmax);
    Eigen::MatrixXd M = A;
    M.diagonal() += lambda * diag;
    const Eigen::VectorXd h = M.ldlt().solve(-grad);
    const Eigen::VectorXd x_new = project(out.x + h);
    const Eigen::VectorXd step = x_new - out.x;
    const double scale = out.x.lpNorm<Eigen::Infinity>();
    if (step.lpNorm<Eigen::Infinity>() <= cfg.xtol * (scale + cfg.xtol)) {
      out.converged = true;
      return out;
    }

    if (!fn(x_new, r_new, nullptr)) {
      ++out.infeasible_trials;
      lambda *= nu;
      nu *= 2.0;
      continue;
    }
    const double cost_new = 0.5 * r_new.squaredNorm();
    const double predicted = -(step.dot(grad) + 0.5 * step.dot(A * step));
    const double gain = predicted > 0.0 ? (out.cost - cost_new) / predicted : -1.0;
    if (cost_new < out.cost && gain > 0.0) {
      out.x = x_new;
      fn(out.x, out.r, &out.jac);
      out.cost = 0.5 * out.r.squaredNorm();
      A = out.jac.transpose() * out.jac;
      lambda *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * gain - 1.0, 3));
      nu = 2.0;
    } else {
      lambda *= nu;
      nu *= 2.0;
    }
    if (!std::isfinite(lambda) || lambda > 1e300) {
      // No descent direction left within floating-point resolution.
      out.converged = true;
      return out;
    }
  }
  out.iterations = cfg.max_iterations;
  return out;
}

}  // namespace voltail::detail
