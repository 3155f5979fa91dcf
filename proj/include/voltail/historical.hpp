#pragma once

#include <chrono>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace voltail {

/// Daily closes of one instrument. Dates strictly ascending, closes > 0.
struct PriceSeries {
  std::vector<std::chrono::sys_days> dates;
  std::vector<double> closes;
  std::string label;
};

/// Throws DomainError when the invariants do not hold.
void validate_series(const PriceSeries& s);

enum class ReturnSampling {
  kNonOverlapping,  ///< x_i = ln(S_{(i+1) lag} / S_{i lag})
  kOverlapping,     ///< x_i = ln(S_{i + lag} / S_i)
};

struct ReturnSeries {
  int lag = 1;  ///< days (observations)
  std::vector<double> values;
  std::string label;
};

/// Lagged log-returns. Non-overlapping sampling is the default; for lag 1
/// both modes coincide. Throws DomainError for lag < 1 or a series with
/// fewer than lag + 1 closes.
ReturnSeries log_returns(const PriceSeries& s, int lag,
                         ReturnSampling sampling = ReturnSampling::kNonOverlapping);

enum class TailPooling { kBoth, kRight, kLeft };

struct EmpiricalTailOptions {
  double lower_quantile = 0.85;
  double upper_quantile = 0.99;
  TailPooling pooling = TailPooling::kBoth;
};

/// Straight-line fit of ln(CCDF) against x in the empirical tail.
struct EmpiricalTail {
  double mu;  ///< pooled decay (mean of the fitted sides)
  double mu_right;
  double mu_left;
  double rms_residual;  ///< pooled rms of the ln-CCDF residuals
  std::size_t points;   ///< points used per side (right side when pooled)
};

/// Empirical CCDF with plotting positions x_(k) -> 1 - k/(N+1) (k = 1..N in
/// ascending order), fitted between the lower and upper quantiles; the left
/// tail is fitted on the negated sample. Throws FitError for fewer than 50
/// values, no spread, or fewer than 8 points in a window.
EmpiricalTail ccdf_tail_fit(std::span<const double> returns,
                            const EmpiricalTailOptions& opts = {});

/// Empirical CCDF of a sample: ascending values with their plotting positions.
struct EmpiricalCcdf {
  std::vector<double> x;
  std::vector<double> ccdf;
};
EmpiricalCcdf empirical_ccdf(std::span<const double> returns);

struct HistoricalStats {
  double sigma_H;  ///< sample standard deviation (N - 1) of the subgroup
  double mu_H;     ///< tail decay of the subgroup
  double rms_residual;
  std::size_t subgroup_size;
  double lag_days;
  std::size_t group_index = 0;
  std::string label;
};

inline constexpr std::size_t kMinSubgroupSize = 300;

/// Consecutive disjoint subgroups of exactly group_size returns (trailing
/// remainder dropped), each with its standard deviation and tail decay.
std::vector<HistoricalStats> subgroup_stats(const ReturnSeries& returns,
                                            std::size_t group_size = kMinSubgroupSize,
                                            const EmpiricalTailOptions& opts = {});

struct ScalingFit {
  double C1;
  double uncertainty;  ///< standard error of C1
  std::size_t points;
};

/// Least squares of ln(mu_H) = -ln(sigma_H) + ln(C1) with the unit slope
/// imposed, i.e. sigma_H = C1 / mu_H. Needs at least 3 entries.
ScalingFit fit_scaling(std::span<const HistoricalStats> stats);

/// Moves (mu_H, sigma_H) from the stats' lag to `target_years` with
/// mu ~ 1/sqrt(T) and sigma ~ sqrt(T); the product is unchanged.
HistoricalStats extrapolate_hist(const HistoricalStats& hist, double target_years);

}  // namespace voltail
