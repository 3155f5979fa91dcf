#include "voltail/density.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "quadrature.hpp"
#include "voltail/errors.hpp"
#include "voltail/special_functions.hpp"

namespace voltail {

namespace {

constexpr double kTruncationWidths = 12.0;

struct Support {
  double lo;
  double hi;
};

// Integration support: 12 wing standard deviations around the smile minimum.
Support support(const SmileParams& p) {
  const double half = kTruncationWidths * p.g * p.chi * std::sqrt(p.T);
  return {p.x_min() - half, p.x_min() + half};
}

// Normal mass beyond x using the local volatility at x.
double lower_closure(const SmileParams& p, double x) {
  const double s = smile_sigma(p, x);
  return normal_cdf((x + 0.5 * s * s * p.T) / (s * std::sqrt(p.T)));
}

double upper_closure(const SmileParams& p, double x) {
  const double s = smile_sigma(p, x);
  return normal_cdf(-(x + 0.5 * s * s * p.T) / (s * std::sqrt(p.T)));
}

detail::Integral left_mass(const SmileParams& p, double x) {
  const auto sup = support(p);
  if (x <= sup.lo) return {lower_closure(p, x), 0.0};
  auto I = detail::integrate([&](double y) { return implied_pdf(p, y); }, sup.lo, x);
  I.value += lower_closure(p, sup.lo);
  return I;
}

detail::Integral right_mass(const SmileParams& p, double x) {
  const auto sup = support(p);
  if (x >= sup.hi) return {upper_closure(p, x), 0.0};
  auto I = detail::integrate([&](double y) { return implied_pdf(p, y); }, x, sup.hi);
  I.value += upper_closure(p, sup.hi);
  return I;
}

}  // namespace

double perturbation_factor(const SmileParams& p, double x) {
  const double s = smile_sigma(p, x);
  const double s1 = smile_sigma_d1(p, x);
  const double s2 = smile_sigma_d2(p, x);
  const double a = 1.0 - s1 / s * x;
  const double b = s1 * s * p.T;
  return a * a - 0.25 * b * b + s * s2 * p.T;
}

double implied_pdf(const SmileParams& p, double x) {
  const double s = smile_sigma(p, x);
  const double var = s * s * p.T;
  const double z = x + 0.5 * var;
  return std::exp(-z * z / (2.0 * var)) / std::sqrt(2.0 * kPi * var) *
         perturbation_factor(p, x);
}

double implied_cdf(const SmileParams& p, double x) {
  require_valid(p);
  return left_mass(p, x).value;
}

double implied_ccdf(const SmileParams& p, double x) {
  require_valid(p);
  if (x <= p.x_min()) return 1.0 - left_mass(p, x).value;
  return right_mass(p, x).value;
}

std::size_t DensityGrid::negative_count() const {
  return static_cast<std::size_t>(std::count(negative_mask.begin(), negative_mask.end(), 1));
}

DensityGrid density_grid(const SmileParams& p, double x_lo, double x_hi,
                         std::size_t n_points) {
  require_valid(p);
  if (!(x_lo < x_hi) || !std::isfinite(x_lo) || !std::isfinite(x_hi)) {
    throw DomainError("density_grid: need finite x_lo < x_hi");
  }
  if (n_points < 16) throw DomainError("density_grid: need at least 16 points");

  DensityGrid grid;
  grid.xs.resize(n_points);
  grid.pdf.resize(n_points);
  grid.ccdf.resize(n_points);
  grid.negative_mask.resize(n_points);
  const double step = (x_hi - x_lo) / static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i) {
    const double x = i + 1 == n_points ? x_hi : x_lo + step * static_cast<double>(i);
    grid.xs[i] = x;
    grid.pdf[i] = implied_pdf(p, x);
    grid.ccdf[i] = implied_ccdf(p, x);
    grid.negative_mask[i] = perturbation_factor(p, x) < 0.0 ? 1 : 0;
  }
  const auto mass =
      detail::integrate([&](double y) { return implied_pdf(p, y); }, x_lo, x_hi);
  grid.norm_defect = std::fabs(1.0 - mass.value);
  return grid;
}

DensityGrid density_grid(const SmileParams& p, double multiplier,
                         std::size_t n_points) {
  require_valid(p);
  if (!(multiplier > 0.0)) throw DomainError("density_grid: multiplier must be positive");
  const double half = multiplier * p.g * std::sqrt(p.T);
  return density_grid(p, p.x_min() - half, p.x_min() + half, n_points);
}

VarResult value_at_risk(const SmileParams& p, double level) {
  require_valid(p);
  if (!(level > 0.0 && level <= 0.5)) {
    throw DomainError("value_at_risk: level must lie in (0, 0.5]");
  }
  const double lambda_cap = kTruncationWidths * p.g * p.chi * std::sqrt(p.T) +
                            0.5 * p.g * p.g * p.chi * p.chi * p.T;
  const auto sup = support(p);

  // Scan the left tail up to x = 0 for negative density.
  constexpr int kScan = 4001;
  const double scan_hi = 0.0;
  const double scan_lo = std::min(sup.lo, -lambda_cap);
  const double dx = (scan_hi - scan_lo) / (kScan - 1);
  int first_neg = -1;
  int last_neg = -1;
  for (int i = 0; i < kScan; ++i) {
    const double x = scan_lo + dx * i;
    if (perturbation_factor(p, x) < 0.0) {
      if (first_neg < 0) first_neg = i;
      last_neg = i;
    } else if (first_neg >= 0) {
      break;
    }
  }

  double lam_lo = 0.0;  // mass(-lam_lo) >= level
  double lam_hi = lambda_cap;
  if (first_neg >= 0) {
    const double x_clean = scan_lo + dx * (first_neg - 1);
    const double neg_lo = scan_lo + dx * first_neg;
    const double neg_hi = scan_lo + dx * last_neg;
    if (first_neg == 0 || left_mass(p, x_clean).value < level) {
      std::ostringstream os;
      os << "value_at_risk: negative implied density on x in [" << neg_lo << ", "
         << neg_hi << "] lies inside the loss tail needed for level " << level;
      throw IntegrityError(os.str(), neg_lo, neg_hi);
    }
    lam_lo = -x_clean;
  } else if (left_mass(p, -lam_lo).value < level) {
    throw NoSolutionError("value_at_risk: loss quantile lies at a positive return");
  }
  if (left_mass(p, -lam_hi).value > level) {
    throw NoSolutionError("value_at_risk: quantile beyond the truncation range");
  }

  double err = 0.0;
  for (int it = 0; it < 200 && lam_hi - lam_lo > 1e-15 * lam_hi; ++it) {
    const double mid = 0.5 * (lam_lo + lam_hi);
    const auto m = left_mass(p, -mid);
    err = m.error;
    if (m.value > level) {
      lam_lo = mid;
    } else {
      lam_hi = mid;
    }
  }
  const double lambda = 0.5 * (lam_lo + lam_hi);
  const auto final_mass = left_mass(p, -lambda);
  err = std::max(err, final_mass.error);
  if (std::fabs(final_mass.value - level) > 1e-8) {
    throw ConvergenceError("value_at_risk: tail mass did not reach the requested level",
                           lam_lo, lam_hi);
  }
  return {lambda, level, err};
}

ExtremaCount pdf_extrema(const SmileParams& p, double a, double b,
                         std::size_t samples) {
  require_valid(p);
  if (!(a < b) || samples < 3) throw DomainError("pdf_extrema: need a < b and >= 3 samples");
  std::vector<double> v(samples);
  const double step = (b - a) / static_cast<double>(samples - 1);
  for (std::size_t i = 0; i < samples; ++i) v[i] = implied_pdf(p, a + step * static_cast<double>(i));
  ExtremaCount c;
  for (std::size_t i = 1; i + 1 < samples; ++i) {
    if (v[i] < v[i - 1] && v[i] < v[i + 1]) ++c.minima;
    if (v[i] > v[i - 1] && v[i] > v[i + 1]) ++c.maxima;
  }
  return c;
}

bool has_interior_minimum(const SmileParams& p) {
  const double a = p.x_min();
  return pdf_extrema(p, a, a + 3.0 * std::sqrt(p.n)).minima > 0;
}

}  // namespace voltail
