#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "voltail/density.hpp"
#include "voltail/smile.hpp"

namespace voltail {

enum class TailSide {
  kRight,  ///< E(x) on the gain side
  kLeft,   ///< mirrored loss tail, 1 - E(x) against |u|
};

/// The band sqrt(n)/2 <= |u| <= sqrt(n), u = x - center, where the smile
/// moves from g toward g chi.
struct TransitionRegion {
  double x_lo;    ///< sqrt(n) / 2
  double x_hi;    ///< sqrt(n)
  double center;  ///< smile-minimum abscissa -g^2 T / 2
  TailSide side = TailSide::kRight;

  /// Absolute x-interval covered by the region.
  double abs_lo() const { return side == TailSide::kRight ? center + x_lo : center - x_hi; }
  double abs_hi() const { return side == TailSide::kRight ? center + x_hi : center - x_lo; }
};

TransitionRegion transition_region(const SmileParams& p,
                                   TailSide side = TailSide::kRight);

struct TailEstimate {
  double mu;            ///< decay rate of exp(-mu |x|)
  double intercept;     ///< ln tail probability at the window start
  double rms_residual;  ///< rms of the straight-line fit in ln units
  TransitionRegion window;
  std::size_t points;
};

/// f(rho) = ln[erfc(sqrt(rho/2)/2) / erfc(sqrt(rho/2))] / sqrt(rho), with the
/// logarithms taken directly so large rho does not underflow.
double f_of_rho(double rho);

/// Decay of the flat-smile normal CCDF across the transition region:
/// mu_1 = 2 f(rho) / (g sqrt(T)).
double mu_flat(double g, double T, double rho);

/// mu_chi = mu_1 / chi.
double mu_predicted(const SmileParams& p);

/// Ordinary least squares of ln(tail probability) against |u| over the grid
/// points that fall inside `window`. Throws FitError for fewer than 8 points
/// or a non-positive tail probability.
TailEstimate fit_tail(const DensityGrid& grid, const TransitionRegion& window);

struct SweepPoint {
  double g;
  double chi;
  double rho;
  double t_days;
  double mu_pred;
  std::optional<double> mu_fit;  ///< empty when the fit failed
  std::string failure;

  double rel_err() const;  ///< (mu_fit - mu_pred) / mu_pred, NaN on failure
};

struct SweepReport {
  std::vector<SweepPoint> points;  ///< sorted by (g, chi, rho, t_days)
  /// Mean over fitted points of ((mu_fit - mu_pred) / mu_pred)^2.
  double relative_mse = 0.0;
  /// sum (mu_fit - mu_pred)^2 / sum mu_pred^2, for reference.
  double normalized_mse = 0.0;
  std::size_t failures = 0;
};

/// Samples TableBounds on a regular grid (uniform in g, chi and rho, uniform
/// in ln T, endpoints included; one sample sits at each minimum; an axis
/// with min == max has a single sample), fits the
/// tail on the transition region of each density and compares it with
/// mu_predicted. Points whose fit fails are recorded, not fatal.
SweepReport validation_sweep(const TableBounds& bounds, std::size_t samples_per_axis,
                             TailSide side = TailSide::kRight);

/// Tail fit for a single parameter set using the sweep's grid layout.
TailEstimate fit_tail_for(const SmileParams& p, TailSide side = TailSide::kRight);

}  // namespace voltail
