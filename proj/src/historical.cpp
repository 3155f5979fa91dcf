#include "voltail/historical.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "voltail/errors.hpp"

namespace voltail {

namespace {

struct LineFit {
  double slope;
  double rms;
};

LineFit ols(const std::vector<double>& t, const std::vector<double>& y) {
  const double n = static_cast<double>(t.size());
  const double tm = std::accumulate(t.begin(), t.end(), 0.0) / n;
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    stt += (t[i] - tm) * (t[i] - tm);
    sty += (t[i] - tm) * (y[i] - ym);
  }
  if (!(stt > 0.0)) throw FitError("ccdf_tail_fit: no spread of returns inside the tail window");
  const double slope = sty / stt;
  double ss = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double r = y[i] - (ym + slope * (t[i] - tm));
    ss += r * r;
  }
  return {slope, std::sqrt(ss / n)};
}

// Fit on an ascending-sorted sample.
struct SideFit {
  double mu;
  double rms;
  std::size_t points;
};

SideFit fit_side(const std::vector<double>& sorted, const EmpiricalTailOptions& opts) {
  const std::size_t n = sorted.size();
  const double denom = static_cast<double>(n + 1);
  std::vector<double> t, y;
  for (std::size_t k = 1; k <= n; ++k) {
    const double q = static_cast<double>(k) / denom;
    if (q < opts.lower_quantile || q > opts.upper_quantile) continue;
    t.push_back(sorted[k - 1]);
    y.push_back(std::log(1.0 - q));
  }
  if (t.size() < 8) throw FitError("ccdf_tail_fit: fewer than 8 points in the tail window");
  const auto fit = ols(t, y);
  return {-fit.slope, fit.rms, t.size()};
}

double sample_std(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (n - 1.0));
}

}  // namespace

void validate_series(const PriceSeries& s) {
  if (s.dates.size() != s.closes.size()) {
    throw DomainError("price series: dates and closes differ in length");
  }
  if (s.closes.size() < 2) throw DomainError("price series: need at least 2 closes");
  for (std::size_t i = 0; i < s.closes.size(); ++i) {
    if (!(s.closes[i] > 0.0) || !std::isfinite(s.closes[i])) {
      throw DomainError("price series: close " + std::to_string(i) + " is not positive");
    }
    if (i > 0 && !(s.dates[i - 1] < s.dates[i])) {
      throw DomainError("price series: dates not strictly ascending at index " +
                        std::to_string(i));
    }
  }
}

ReturnSeries log_returns(const PriceSeries& s, int lag, ReturnSampling sampling) {
  if (lag < 1) throw DomainError("log_returns: lag must be >= 1");
  const std::size_t L = static_cast<std::size_t>(lag);
  if (s.closes.size() < L + 1) {
    throw DomainError("log_returns: series shorter than lag + 1");
  }
  ReturnSeries out;
  out.lag = lag;
  out.label = s.label;
  const std::size_t stride = sampling == ReturnSampling::kOverlapping ? 1 : L;
  for (std::size_t i = 0; i + L < s.closes.size(); i += stride) {
    out.values.push_back(std::log(s.closes[i + L] / s.closes[i]));
  }
  return out;
}

EmpiricalCcdf empirical_ccdf(std::span<const double> returns) {
  EmpiricalCcdf out;
  out.x.assign(returns.begin(), returns.end());
  std::sort(out.x.begin(), out.x.end());
  const double denom = static_cast<double>(out.x.size() + 1);
  out.ccdf.resize(out.x.size());
  for (std::size_t k = 0; k < out.x.size(); ++k) {
    out.ccdf[k] = 1.0 - static_cast<double>(k + 1) / denom;
  }
  return out;
}

EmpiricalTail ccdf_tail_fit(std::span<const double> returns, const EmpiricalTailOptions& opts) {
  if (returns.size() < 50) throw FitError("ccdf_tail_fit: need at least 50 returns");
  if (!(opts.lower_quantile > 0.0 && opts.lower_quantile < opts.upper_quantile &&
        opts.upper_quantile < 1.0)) {
    throw DomainError("ccdf_tail_fit: need 0 < lower_quantile < upper_quantile < 1");
  }
  std::vector<double> sorted(returns.begin(), returns.end());
  std::sort(sorted.begin(), sorted.end());
  if (!(sorted.back() > sorted.front())) {
    throw FitError("ccdf_tail_fit: returns have no spread");
  }

  EmpiricalTail out{};
  out.mu_right = out.mu_left = std::nan("");
  double ss = 0.0;
  int sides = 0;
  if (opts.pooling != TailPooling::kLeft) {
    const auto r = fit_side(sorted, opts);
    out.mu_right = r.mu;
    out.points = r.points;
    ss += r.rms * r.rms;
    ++sides;
  }
  if (opts.pooling != TailPooling::kRight) {
    std::vector<double> mirrored(sorted.rbegin(), sorted.rend());
    for (double& v : mirrored) v = -v;
    const auto l = fit_side(mirrored, opts);
    out.mu_left = l.mu;
    if (sides == 0) out.points = l.points;
    ss += l.rms * l.rms;
    ++sides;
  }
  switch (opts.pooling) {
    case TailPooling::kBoth: out.mu = 0.5 * (out.mu_right + out.mu_left); break;
    case TailPooling::kRight: out.mu = out.mu_right; break;
    case TailPooling::kLeft: out.mu = out.mu_left; break;
  }
  out.rms_residual = std::sqrt(ss / sides);
  return out;
}

std::vector<HistoricalStats> subgroup_stats(const ReturnSeries& returns,
                                            std::size_t group_size,
                                            const EmpiricalTailOptions& opts) {
  if (group_size < kMinSubgroupSize) {
    throw DomainError("subgroup_stats: group size must be at least 300");
  }
  if (returns.values.size() < group_size) {
    throw DomainError("subgroup_stats: fewer returns than one subgroup");
  }
  std::vector<HistoricalStats> out;
  const std::size_t groups = returns.values.size() / group_size;
  for (std::size_t gi = 0; gi < groups; ++gi) {
    const std::span<const double> grp(returns.values.data() + gi * group_size, group_size);
    const auto tail = ccdf_tail_fit(grp, opts);
    HistoricalStats st{};
    st.sigma_H = sample_std(grp);
    st.mu_H = tail.mu;
    st.rms_residual = tail.rms_residual;
    st.subgroup_size = group_size;
    st.lag_days = returns.lag;
    st.group_index = gi;
    st.label = returns.label;
    if (!(st.mu_H > 0.0)) throw FitError("subgroup_stats: non-decaying tail in subgroup " + std::to_string(gi));
    out.push_back(std::move(st));
  }
  return out;
}

ScalingFit fit_scaling(std::span<const HistoricalStats> stats) {
  if (stats.size() < 3) throw FitError("fit_scaling: need at least 3 entries");
  std::vector<double> lp;
  lp.reserve(stats.size());
  for (const auto& s : stats) {
    if (!(s.sigma_H > 0.0) || !(s.mu_H > 0.0)) {
      throw FitError("fit_scaling: sigma_H and mu_H must be positive");
    }
    lp.push_back(std::log(s.sigma_H) + std::log(s.mu_H));
  }
  const double m = static_cast<double>(lp.size());
  const double mean = std::accumulate(lp.begin(), lp.end(), 0.0) / m;
  double ss = 0.0;
  for (double v : lp) ss += (v - mean) * (v - mean);
  const double se_log = std::sqrt(ss / (m - 1.0)) / std::sqrt(m);
  const double c1 = std::exp(mean);
  return {c1, c1 * se_log, stats.size()};
}

HistoricalStats extrapolate_hist(const HistoricalStats& hist, double target_years) {
  if (!(target_years > 0.0) || !(hist.lag_days > 0.0)) {
    throw DomainError("extrapolate_hist: maturities must be positive");
  }
  const double t1 = hist.lag_days / 365.0;
  HistoricalStats out = hist;
  out.mu_H = hist.mu_H * std::sqrt(t1 / target_years);
  out.sigma_H = hist.sigma_H * std::sqrt(target_years / t1);
  out.lag_days = target_years * 365.0;
  return out;
}

}  // namespace voltail
