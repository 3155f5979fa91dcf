#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voltail/density.hpp"
#include "voltail/errors.hpp"
#include "voltail/historical.hpp"
#include "voltail/pricing.hpp"
#include "voltail/smile.hpp"

namespace voltail {

/// One market point of the smile.
struct VolQuote {
  double x;      ///< moneyness ln(K/S0) - rT
  double sigma;  ///< implied volatility, > 0
  double weight = 1.0;
};

/// Quote given against delta; the delta is mapped to x with the quote's own
/// volatility in a single pass.
VolQuote quote_from_delta(double delta, double sigma, double maturity,
                          DeltaConvention conv = DeltaConvention::kPaperErf,
                          double weight = 1.0);

enum class FitMode { kUnconditional, kConditional };

struct FitResult {
  SmileParams params{};
  /// Standard errors of (g, chi, n) from the linearized covariance; NaN when
  /// a parameter is not identifiable.
  double err_g = 0.0, err_chi = 0.0, err_n = 0.0;
  double rms = 0.0;
  FitMode mode = FitMode::kUnconditional;
  /// |chi mu_H sigma_H - 2 f(n / (g^2 T))|, conditional fits only.
  std::optional<double> constraint_residual;
  int iterations = 0;
  bool converged = false;
  /// chi pinned at its lower bound 1; n is then not identifiable.
  bool degenerate = false;
  /// Trial points rejected because the constraint gave chi < 1.
  int infeasible_trials = 0;
  std::vector<std::string> warnings;
};

/// Raised when the optimizer hits its iteration cap; carries the best iterate.
class SmileFitError : public FitError {
 public:
  SmileFitError(const std::string& what, FitResult best)
      : FitError(what), best_iterate(std::move(best)) {}
  FitResult best_iterate;
};

/// Weighted least squares of the smile over (g, chi, n), internally over
/// (g, chi, rho) with n = rho g^2 T. Bounds: g in (0, 5], chi in [1, 10],
/// n > 0. Default start: g = min quoted sigma, chi = max/min, n = (2.65 g
/// sqrt(T))^2. Needs >= 4 quotes on both sides of the lowest quote.
FitResult fit_unconditional(std::span<const VolQuote> quotes, double T,
                            const std::optional<SmileParams>& init = std::nullopt);

/// chi = 2 f(n / (g^2 T)) / (mu_H sigma_H). A value below 1 is returned as is
/// and flagged through `below_one`.
double conditional_chi(double mu_H, double sigma_H, double g, double n, double T,
                       bool* below_one = nullptr);

/// Least squares over (g, n) only, chi following the historical-decay
/// constraint at every trial point. Trials with chi < 1 are rejected.
FitResult fit_conditional(std::span<const VolQuote> quotes, double T,
                          const HistoricalStats& hist,
                          const std::optional<SmileParams>& init = std::nullopt);

struct FitSide {
  FitResult fit;
  DensityGrid grid;
  std::optional<VarResult> var;
  std::string var_error;
  bool interior_minimum = false;
};

struct FitComparison {
  FitSide unconditional;
  FitSide conditional;
  /// |Lambda_cond - Lambda_uncond| / Lambda_uncond when both VaRs exist.
  std::optional<double> var_rel_diff;
  double level = 0.01;
};

/// Runs both fits on the same quotes, tabulates both densities (x_min +- 10
/// g sqrt(T), 512 points) and computes the VaR of each. Fit errors propagate;
/// VaR errors are recorded per side.
FitComparison compare_fits(std::span<const VolQuote> quotes, double T,
                           const HistoricalStats& hist, double level = 0.01);

}  // namespace voltail
