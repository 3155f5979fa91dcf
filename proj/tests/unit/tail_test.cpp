#include <doctest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <tuple>

#include "voltail/errors.hpp"
#include "voltail/special_functions.hpp"
#include "voltail/tail.hpp"

using namespace voltail;
using boost::multiprecision::cpp_bin_float_50;

namespace {

const SmileParams kRefSmile{0.1758, 1.20, 0.00030, 1.0 / 365.0};

double f_reference(double rho) {
  const cpp_bin_float_50 r(rho);
  const cpp_bin_float_50 a = sqrt(r / 2);
  return (log(erfc(a / 2) / erfc(a)) / sqrt(r)).convert_to<double>();
}

DensityGrid exponential_grid(double mu, double a, double b, std::size_t n) {
  DensityGrid g;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    g.xs.push_back(x);
    g.ccdf.push_back(std::exp(-mu * x));
    g.pdf.push_back(mu * std::exp(-mu * x));
    g.negative_mask.push_back(0);
  }
  return g;
}

}  // namespace

TEST_CASE("f_of_rho against a 50-digit evaluation") {
  for (double rho : {1e-6, 1e-3, 0.5, 2.5, 2.65 * 2.65, 10.0, 100.0, 1e4, 1e6}) {
    CAPTURE(rho);
    CHECK(f_of_rho(rho) == doctest::Approx(f_reference(rho)).epsilon(1e-13));
  }
  CHECK_THROWS_AS(f_of_rho(0.0), DomainError);
  CHECK_THROWS_AS(f_of_rho(-1.0), DomainError);
}

TEST_CASE("f_of_rho limits of the formula") {
  // Small rho: ln[erfc(a/2)/erfc(a)] ~ a/sqrt(pi), a = sqrt(rho/2).
  CHECK(f_of_rho(1e-6) == doctest::Approx(1.0 / std::sqrt(2 * kPi)).epsilon(1e-3));
  // Large rho: the ratio grows like exp(3 a^2 / 4), so f ~ (3/8) sqrt(rho).
  CHECK(f_of_rho(1e6) / 1e3 == doctest::Approx(0.375).epsilon(5e-2));
}

TEST_CASE("f_of_rho stated asymptotic constants (known mismatch)" * doctest::should_fail()) {
  CHECK(std::fabs(f_of_rho(1e-6) - 1.0 / (2 * kSqrtPi)) <= 1e-3);
  CHECK(std::fabs(f_of_rho(1e6) / 1e3 - 1.0) <= 5e-2);
}

TEST_CASE("f_of_rho positive and increasing") {
  double prev = 0.0;
  for (double e = -4.0; e <= 4.0; e += 0.05) {
    const double f = f_of_rho(std::pow(10.0, e));
    CHECK(f > prev);
    prev = f;
  }
}

TEST_CASE("mu_flat") {
  CHECK(mu_flat(0.2, 1.0, 4.0) == doctest::Approx(10.0 * f_of_rho(4.0)).epsilon(1e-15));
  CHECK(mu_flat(2 * 0.1758, 1 / 365.0, 7.0225) ==
        doctest::Approx(0.5 * mu_flat(0.1758, 1 / 365.0, 7.0225)).epsilon(1e-15));

  // Two-point slope of the flat-smile normal CCDF across the window.
  for (const double rho : {2.5, 4.0, 10.0}) {
    const double g = 0.13, T = 0.4;
    const double sd = g * std::sqrt(T);
    const double w = std::sqrt(rho) * sd;
    auto lnP = [&](double u) { return std::log(0.5 * std::erfc(u / (sd * kSqrt2))); };
    const double est = (lnP(w / 2) - lnP(w)) / (w / 2);
    CHECK(est == doctest::Approx(mu_flat(g, T, rho)).epsilon(1e-10));
  }
  CHECK_THROWS_AS(mu_flat(0.0, 1.0, 4.0), DomainError);
}

TEST_CASE("mu_predicted") {
  const auto flat = SmileParams::from_rho(0.2, 1.0, 4.0, 0.5);
  CHECK(mu_predicted(flat) == mu_flat(0.2, 0.5, flat.rho()));
  auto two = flat;
  two.chi = 2.0;
  CHECK(mu_predicted(two) == doctest::Approx(0.5 * mu_predicted(flat)).epsilon(1e-15));

  const double rho = kRefSmile.n / (kRefSmile.g * kRefSmile.g * kRefSmile.T);
  CHECK(rho == doctest::Approx(3.543).epsilon(1e-3));
  CHECK(mu_predicted(kRefSmile) ==
        doctest::Approx(2 * f_of_rho(rho) / (1.2 * kRefSmile.g * std::sqrt(kRefSmile.T))).epsilon(1e-14));

  // mu g sqrt(T) depends on (chi, rho) only; mu decreases in chi.
  const double ref = mu_predicted(SmileParams::from_rho(0.1, 1.7, 5.0, 0.1)) * 0.1 * std::sqrt(0.1);
  for (double g : {0.03, 0.4}) {
    for (double T : {0.01, 2.0}) {
      CHECK(mu_predicted(SmileParams::from_rho(g, 1.7, 5.0, T)) * g * std::sqrt(T) ==
            doctest::Approx(ref).epsilon(1e-13));
    }
  }
  double prev = std::numeric_limits<double>::infinity();
  for (double chi = 1.0; chi <= 3.0; chi += 0.1) {
    const double m = mu_predicted(SmileParams::from_rho(0.2, chi, 5.0, 0.3));
    CHECK(m < prev);
    prev = m;
  }
}

TEST_CASE("transition_region") {
  const auto r = transition_region(kRefSmile);
  CHECK(r.x_lo == doctest::Approx(std::sqrt(kRefSmile.n) / 2));
  CHECK(r.x_hi == doctest::Approx(std::sqrt(kRefSmile.n)));
  CHECK(r.abs_lo() == doctest::Approx(kRefSmile.x_min() + r.x_lo));
  const auto l = transition_region(kRefSmile, TailSide::kLeft);
  CHECK(l.abs_hi() == doctest::Approx(kRefSmile.x_min() - l.x_lo));
  CHECK(l.abs_lo() == doctest::Approx(kRefSmile.x_min() - l.x_hi));
}

TEST_CASE("fit_tail on an exact exponential") {
  const auto grid = exponential_grid(5.0, 0.0, 2.0, 201);
  const auto est = fit_tail(grid, {0.5, 1.0, 0.0, TailSide::kRight});
  CHECK(est.mu == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(est.rms_residual <= 1e-12);
  CHECK(est.points == 51);

  CHECK_THROWS_AS(fit_tail(exponential_grid(5.0, 0.0, 2.0, 11), {0.5, 1.0, 0.0, TailSide::kRight}),
                  FitError);
  auto bad = grid;
  bad.ccdf[60] = 0.0;
  CHECK_THROWS_AS(fit_tail(bad, {0.5, 1.0, 0.0, TailSide::kRight}), FitError);
}

TEST_CASE("fit_tail against the decay model") {
  const auto flat = SmileParams::from_rho(0.2, 1.0, 4.0, 0.5);
  CHECK(fit_tail_for(flat).mu == doctest::Approx(mu_flat(0.2, 0.5, 4.0)).epsilon(2e-2));
  for (double rho : {2.5, 5.0, 7.5, 10.0}) {
    const auto p = SmileParams::from_rho(0.3, 1.0, rho, 0.1);
    CHECK(fit_tail_for(p).mu == doctest::Approx(mu_flat(0.3, 0.1, rho)).epsilon(2e-2));
  }
  CHECK(fit_tail_for(kRefSmile).mu == doctest::Approx(mu_predicted(kRefSmile)).epsilon(5e-2));
}

TEST_CASE("validation_sweep") {
  TableBounds flat;
  flat.chi_min = flat.chi_max = 1.0;
  const auto rep = validation_sweep(flat, 3);
  CHECK(rep.points.size() == 27);
  CHECK(rep.failures == 0);
  for (const auto& pt : rep.points) CHECK(std::fabs(pt.rel_err()) <= 2e-2);

  const auto one = validation_sweep(TableBounds{}, 1);
  REQUIRE(one.points.size() == 1);
  CHECK(one.points[0].g == 0.03);
  CHECK(one.points[0].chi == 1.01);
  CHECK(one.points[0].rho == 2.5);
  CHECK(one.points[0].t_days == 1.0);
  REQUIRE(one.points[0].mu_fit.has_value());
  CHECK(std::isfinite(*one.points[0].mu_fit));
  CHECK(std::isfinite(one.points[0].mu_pred));

  const auto two = validation_sweep(TableBounds{}, 2);
  CHECK(two.points.size() == 16);
  for (std::size_t i = 1; i < two.points.size(); ++i) {
    const auto& a = two.points[i - 1];
    const auto& b = two.points[i];
    CHECK(std::tie(a.g, a.chi, a.rho, a.t_days) < std::tie(b.g, b.chi, b.rho, b.t_days));
  }
}
