#include <doctest.h>

#include <cmath>

#include "voltail/errors.hpp"
#include "voltail/smile.hpp"

using namespace voltail;

namespace {

const SmileParams kRefSmile{0.1758, 1.20, 0.00030, 1.0 / 365.0};

double fd1(const SmileParams& p, double x, double h) {
  return (smile_sigma(p, x + h) - smile_sigma(p, x - h)) / (2 * h);
}

double fd2(const SmileParams& p, double x, double h) {
  return (smile_sigma(p, x + h) - 2 * smile_sigma(p, x) + smile_sigma(p, x - h)) / (h * h);
}

bool has_field(const ValidationResult& r, const std::string& f) {
  for (const auto& v : r.violations) {
    if (v.field == f) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("smile_sigma reference points") {
  const auto& p = kRefSmile;
  CHECK(smile_sigma(p, p.x_min()) == doctest::Approx(0.1758).epsilon(1e-15));
  const double half = smile_sigma(p, p.x_min() + std::sqrt(p.n));
  CHECK(half == doctest::Approx(0.1758 * (1 + 0.2 / 2)).epsilon(1e-14));
  CHECK(half - p.g == doctest::Approx((p.g * p.chi - p.g) / 2).epsilon(1e-12));
  const SmileParams flat{0.3, 1.0, 0.01, 0.5};
  for (double x : {-1.0, 0.0, 0.2, 50.0}) CHECK(smile_sigma(flat, x) == 0.3);
}

TEST_CASE("smile_sigma bounded, symmetric and saturating") {
  for (const SmileParams& p : {kRefSmile, SmileParams::from_rho(0.5, 3.0, 2.5, 3.0)}) {
    for (double k = 0; k <= 2000; ++k) {
      const double u = (k - 1000) / 100.0 * std::sqrt(p.n);
      const double s = smile_sigma(p, p.x_min() + u);
      CHECK(s >= p.g);
      CHECK(s <= p.g * p.chi);
      CHECK(smile_sigma(p, p.x_min() - u) == doctest::Approx(smile_sigma(p, p.x_min() + u)).epsilon(1e-15));
    }
    const double far = smile_sigma(p, p.x_min() + 1e3 * std::sqrt(p.n));
    CHECK(std::fabs(far - p.g * p.chi) <= 1e-3 * p.g * (p.chi - 1));
    CHECK(smile_sigma(p, 1e300) == doctest::Approx(p.g * p.chi).epsilon(1e-15));
    CHECK(smile_sigma(p, -1e300) == doctest::Approx(p.g * p.chi).epsilon(1e-15));
  }
}

TEST_CASE("first derivative against finite differences") {
  CHECK(smile_sigma_d1(kRefSmile, kRefSmile.x_min()) == 0.0);
  CHECK(smile_sigma_d1({0.2, 1.0, 0.01, 1.0}, 0.3) == 0.0);
  CHECK(smile_sigma_d1(kRefSmile, 0.01) == doctest::Approx(fd1(kRefSmile, 0.01, 1e-7)).epsilon(1e-6));
  for (double x : {-0.05, -0.02, 0.003, 0.04}) {
    CHECK(smile_sigma_d1(kRefSmile, x) == doctest::Approx(fd1(kRefSmile, x, 1e-7)).epsilon(1e-6));
  }
}

TEST_CASE("second derivative against finite differences") {
  const auto& p = kRefSmile;
  CHECK(smile_sigma_d2(p, p.x_min()) == doctest::Approx(2 * p.g * (p.chi - 1) / p.n).epsilon(1e-14));
  CHECK(smile_sigma_d2({0.2, 1.0, 0.01, 1.0}, 0.3) == 0.0);
  CHECK(smile_sigma_d2(p, 0.02) == doctest::Approx(fd2(p, 0.02, 1e-5)).epsilon(1e-5));
  for (double x : {-0.04, -0.015, 0.005, 0.03}) {
    CHECK(smile_sigma_d2(p, x) == doctest::Approx(fd2(p, x, 1e-5)).epsilon(1e-5));
  }
}

TEST_CASE("shape_report") {
  const auto r = shape_report(kRefSmile);
  CHECK(r.c_implied == doctest::Approx(std::sqrt(0.0003) / (0.1758 * std::sqrt(1 / 365.0))).epsilon(1e-15));
  CHECK(r.c_implied == doctest::Approx(1.88).epsilon(1e-2));
  CHECK(r.rho == doctest::Approx(r.c_implied * r.c_implied).epsilon(1e-14));
  CHECK(r.x_min <= 0.0);
  CHECK(r.height == doctest::Approx(0.1758 * 0.2).epsilon(1e-14));
  CHECK(r.half_width == doctest::Approx(std::sqrt(0.0003)).epsilon(1e-15));

  const double g = 0.31, T = 0.7;
  const double n = std::pow(2.65 * g * std::sqrt(T), 2);
  CHECK(shape_report({g, 1.5, n, T}).c_implied == doctest::Approx(2.65).epsilon(1e-14));
  CHECK(shape_report({g, 1.0, n, T}).height == 0.0);
}

TEST_CASE("validate_params table bounds") {
  const auto mins = SmileParams::from_rho(0.03, 1.01, 2.5, 1.0 / 365.0);
  CHECK(validate_params(mins, true).ok());
  const auto maxs = SmileParams::from_rho(0.5, 3.0, 10.0, 1080.0 / 365.0);
  CHECK(validate_params(maxs, true).ok());

  const auto big_g = validate_params(SmileParams::from_rho(0.6, 1.5, 4.0, 0.1), true);
  REQUIRE(big_g.violations.size() == 1);
  CHECK(big_g.violations[0].field == "g");
  CHECK(big_g.violations[0].message == "g above table maximum 0.5");

  CHECK(has_field(validate_params(SmileParams::from_rho(0.1, 1.5, 11.0, 0.1), true), "rho"));
  CHECK(has_field(validate_params(SmileParams::from_rho(0.1, 1.5, 4.0, 2000 / 365.0), true), "T_days"));
  CHECK(has_field(validate_params(SmileParams::from_rho(0.1, 1.0, 4.0, 0.1), true), "chi"));
  CHECK(validate_params(SmileParams::from_rho(0.6, 1.0, 40.0, 9.0), false).ok());
}

TEST_CASE("validate_params invariants") {
  CHECK(has_field(validate_params({0.1, 0.9, 0.01, 1}, false), "chi"));
  CHECK(has_field(validate_params({-0.1, 1.2, 0.01, 1}, false), "g"));
  CHECK(has_field(validate_params({0.1, 1.2, 0.0, 1}, false), "n"));
  CHECK(has_field(validate_params({0.1, 1.2, 0.01, 0}, false), "T"));
  CHECK(has_field(validate_params({std::nan(""), 1.2, 0.01, 1}, false), "g"));
  CHECK_NOTHROW(require_valid(kRefSmile));
  CHECK_THROWS_AS(require_valid({0.1, 0.9, 0.01, 1}), DomainError);
}
