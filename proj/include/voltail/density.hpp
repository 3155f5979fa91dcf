#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "voltail/smile.hpp"

namespace voltail {

/// F(x) = (1 - x sigma'/sigma)^2 - (sigma' sigma T)^2 / 4 + sigma sigma'' T.
/// Identically 1 for a flat smile; negative values flag butterfly arbitrage.
double perturbation_factor(const SmileParams& p, double x);

/// Density of the log-return x implied by the smile-adjusted call prices:
/// a normal kernel with local volatility sigma(x) and mean -sigma(x)^2 T / 2,
/// multiplied by perturbation_factor. May be negative.
double implied_pdf(const SmileParams& p, double x);

/// E(x) = 1 - integral_{-inf}^{x} P(y) dy.
///
/// Adaptive quadrature over +-12 g chi sqrt(T) around the smile minimum with
/// a normal tail closure outside. Right of the minimum the upper integral is
/// used instead of 1 - lower, which is the same quantity (the density
/// integrates to one exactly) without cancellation in the right tail.
/// Throws QuadratureError when 1e-9 absolute accuracy is not reached.
double implied_ccdf(const SmileParams& p, double x);

/// 1 - E(x), integrated from the left so small loss-tail masses keep their
/// relative precision.
double implied_cdf(const SmileParams& p, double x);

struct DensityGrid {
  std::vector<double> xs;
  std::vector<double> pdf;
  std::vector<double> ccdf;
  /// |1 - integral of pdf over [xs.front(), xs.back()]|
  double norm_defect = 0.0;
  /// 1 where F(x) < 0
  std::vector<std::uint8_t> negative_mask;

  std::size_t size() const { return xs.size(); }
  std::size_t negative_count() const;
};

/// Uniform grid of n_points on [x_lo, x_hi]; requires x_lo < x_hi and
/// n_points >= 16.
DensityGrid density_grid(const SmileParams& p, double x_lo, double x_hi,
                         std::size_t n_points);

/// Default plotting window: x_min +- multiplier * g sqrt(T).
DensityGrid density_grid(const SmileParams& p, double multiplier = 10.0,
                         std::size_t n_points = 512);

struct VarResult {
  double lambda;            ///< loss threshold, log-return units
  double level;             ///< tail probability
  double quadrature_error;  ///< estimated absolute error of the tail mass
};

/// Loss threshold Lambda with integral_{-inf}^{-Lambda} P = level, by
/// bisection on [0, 12 g chi sqrt(T) + g^2 chi^2 T / 2].
///
/// The left tail is scanned for F < 0. When the quantile would require
/// integrating through such a region an IntegrityError names its x-range;
/// negative regions to the right of the quantile are not integrated and do
/// not block the result. Throws DomainError for level outside (0, 0.5].
VarResult value_at_risk(const SmileParams& p, double level = 0.01);

struct ExtremaCount {
  std::size_t minima = 0;
  std::size_t maxima = 0;
};

/// Interior local extrema of the implied pdf sampled at `samples` points of
/// [a, b].
ExtremaCount pdf_extrema(const SmileParams& p, double a, double b,
                         std::size_t samples = 2001);

/// True when the pdf has an interior local minimum on [x_min, x_min + 3 sqrt(n)].
bool has_interior_minimum(const SmileParams& p);

}  // namespace voltail
