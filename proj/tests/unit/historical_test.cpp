#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "voltail/errors.hpp"
#include "voltail/historical.hpp"
#include "voltail/synthetic.hpp"

using namespace voltail;
using std::chrono::sys_days;

namespace {

PriceSeries series_of(const std::vector<double>& closes) {
  PriceSeries s;
  sys_days d{std::chrono::year{2005} / 3 / 1};
  for (double c : closes) {
    s.dates.push_back(d);
    s.closes.push_back(c);
    d += std::chrono::days{1};
  }
  s.label = "test";
  return s;
}

double stdev(const std::vector<double>& v) {
  const double m = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / (v.size() - 1));
}

ReturnSeries as_returns(std::vector<double> v, int lag = 1) {
  ReturnSeries r;
  r.lag = lag;
  r.values = std::move(v);
  r.label = "sample";
  return r;
}

}  // namespace

TEST_CASE("validate_series") {
  CHECK_NOTHROW(validate_series(series_of({1, 2, 3})));
  auto s = series_of({1, 2, 3});
  s.dates[2] = s.dates[1];
  CHECK_THROWS_AS(validate_series(s), DomainError);
  CHECK_THROWS_AS(validate_series(series_of({1, 0, 3})), DomainError);
  CHECK_THROWS_AS(validate_series(series_of({1})), DomainError);
}

TEST_CASE("log_returns") {
  for (double v : log_returns(series_of({5, 5, 5, 5, 5}), 2).values) CHECK(v == 0.0);

  const auto r = log_returns(series_of({1, std::exp(1.0), std::exp(2.0)}), 1);
  REQUIRE(r.values.size() == 2);
  CHECK(r.values[0] == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.values[1] == doctest::Approx(1.0).epsilon(1e-15));

  const auto s = series_of(std::vector<double>(101, 1.0));
  CHECK(log_returns(s, 10).values.size() == 10);
  CHECK(log_returns(s, 10, ReturnSampling::kOverlapping).values.size() == 91);
  CHECK(log_returns(s, 1).values.size() == log_returns(s, 1, ReturnSampling::kOverlapping).values.size());
  CHECK_THROWS_AS(log_returns(s, 0), DomainError);
  CHECK_THROWS_AS(log_returns(s, 101), DomainError);
}

TEST_CASE("log_returns of simulated GBM") {
  const auto s = gbm_series(10000, 0.01, 42);
  const auto r = log_returns(s, 1);
  const double se = 0.01 / std::sqrt(2.0 * (r.values.size() - 1));
  CHECK(std::fabs(stdev(r.values) - 0.01) <= 3 * se);
}

TEST_CASE("ccdf_tail_fit on an exact exponential") {
  const std::size_t n = 2000;
  const double mu = 37.0;
  std::vector<double> v;
  for (std::size_t k = 1; k <= n; ++k) v.push_back(-std::log(1.0 - double(k) / (n + 1)) / mu);
  std::reverse(v.begin(), v.end());
  EmpiricalTailOptions right;
  right.pooling = TailPooling::kRight;
  const auto t = ccdf_tail_fit(v, right);
  CHECK(t.mu == doctest::Approx(mu).epsilon(1e-10));
  CHECK(t.rms_residual <= 1e-10);
}

TEST_CASE("ccdf_tail_fit on sampled distributions") {
  const auto lap = laplace_sample(100000, 50.0, 11);
  const auto tl = ccdf_tail_fit(lap);
  CHECK(tl.mu == doctest::Approx(50.0).epsilon(0.05));
  CHECK(tl.mu_right == doctest::Approx(50.0).epsilon(0.05));
  CHECK(tl.mu_left == doctest::Approx(50.0).epsilon(0.05));

  FixtureRng rng(12);
  std::vector<double> gauss(100000);
  for (double& x : gauss) x = rng.normal(0.0, 0.02);
  const auto tg = ccdf_tail_fit(gauss);
  CHECK(tg.rms_residual > tl.rms_residual);
  // The local slope of a Gaussian tail keeps growing across the window.
  const auto inner = ccdf_tail_fit(gauss, {0.85, 0.92, TailPooling::kBoth});
  const auto outer = ccdf_tail_fit(gauss, {0.92, 0.99, TailPooling::kBoth});
  CHECK(outer.mu > inner.mu);

  CHECK_THROWS_AS(ccdf_tail_fit(std::vector<double>(49, 1.0)), FitError);
  CHECK_THROWS_AS(ccdf_tail_fit(std::vector<double>(300, 1.0)), FitError);
  CHECK_THROWS_AS(ccdf_tail_fit(lap, {0.9, 0.8, TailPooling::kBoth}), DomainError);
}

TEST_CASE("empirical_ccdf") {
  const auto v = laplace_sample(1000, 10.0, 3);
  const auto e = empirical_ccdf(v);
  REQUIRE(e.x.size() == 1000);
  for (std::size_t i = 0; i < e.x.size(); ++i) {
    CHECK(e.ccdf[i] >= 1.0 / 1001 - 1e-15);
    CHECK(e.ccdf[i] <= 1000.0 / 1001 + 1e-15);
    if (i > 0) {
      CHECK(e.x[i] >= e.x[i - 1]);
      CHECK(e.ccdf[i] < e.ccdf[i - 1]);
    }
  }
}

TEST_CASE("subgroup_stats") {
  const auto one = subgroup_stats(as_returns(laplace_sample(600, 100.0, 5)), 600);
  REQUIRE(one.size() == 1);
  CHECK(one[0].sigma_H == doctest::Approx(std::sqrt(2.0) / 100).epsilon(0.15));
  CHECK(one[0].subgroup_size == 600);

  CHECK(subgroup_stats(as_returns(laplace_sample(650, 100.0, 5)), 300).size() == 2);
  CHECK_THROWS_AS(subgroup_stats(as_returns(std::vector<double>(300, 0.01)), 300), FitError);
  CHECK_THROWS_AS(subgroup_stats(as_returns(laplace_sample(650, 100.0, 5)), 299), DomainError);
  CHECK_THROWS_AS(subgroup_stats(as_returns(laplace_sample(250, 100.0, 5)), 300), DomainError);

  const auto r = as_returns(laplace_sample(3000, 80.0, 9), 10);
  const auto a = subgroup_stats(r, 500);
  const auto b = subgroup_stats(r, 500);
  REQUIRE(a.size() == 6);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].group_index == i);
    CHECK(a[i].lag_days == 10.0);
    CHECK(a[i].sigma_H == b[i].sigma_H);
    CHECK(a[i].mu_H == b[i].mu_H);
  }
}

TEST_CASE("scale equivariance") {
  const auto v = laplace_sample(1200, 60.0, 21);
  const auto base = subgroup_stats(as_returns(v), 400);
  for (double k : {4.0, 3.0}) {
    std::vector<double> w(v);
    for (double& x : w) x *= k;
    const auto scaled = subgroup_stats(as_returns(w), 400);
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK(scaled[i].sigma_H == doctest::Approx(k * base[i].sigma_H).epsilon(1e-13));
      CHECK(scaled[i].mu_H == doctest::Approx(base[i].mu_H / k).epsilon(1e-13));
      CHECK(scaled[i].sigma_H * scaled[i].mu_H ==
            doctest::Approx(base[i].sigma_H * base[i].mu_H).epsilon(1e-13));
    }
  }
}

TEST_CASE("lag invariance of the product for a Gaussian walk") {
  const auto s = gbm_series(30001 * 3, 0.006, 77);
  std::vector<double> products;
  for (int lag : {1, 10, 100}) {
    double sum = 0;
    const auto st = subgroup_stats(log_returns(s, lag), 300);
    for (const auto& h : st) sum += h.sigma_H * h.mu_H;
    products.push_back(sum / st.size());
  }
  const auto [lo, hi] = std::minmax_element(products.begin(), products.end());
  CHECK(*hi / *lo - 1.0 <= 0.2);
}

TEST_CASE("fit_scaling") {
  std::vector<HistoricalStats> exact;
  for (double s : {0.004, 0.01, 0.03, 0.1}) {
    HistoricalStats h{};
    h.sigma_H = s;
    h.mu_H = 1.6 / s;
    exact.push_back(h);
  }
  const auto f = fit_scaling(exact);
  CHECK(f.C1 == doctest::Approx(1.6).epsilon(1e-14));
  CHECK(f.uncertainty <= 1e-14);
  CHECK(f.points == 4);

  std::vector<HistoricalStats> lap;
  std::uint64_t seed = 100;
  for (double mu : {20.0, 50.0, 120.0, 300.0}) {
    const auto st = subgroup_stats(as_returns(laplace_sample(20000, mu, seed++)), 20000);
    lap.insert(lap.end(), st.begin(), st.end());
  }
  const auto c = fit_scaling(lap);
  CHECK(c.C1 >= 1.3);
  CHECK(c.C1 <= 1.6);

  CHECK_THROWS_AS(fit_scaling(std::vector<HistoricalStats>(exact.begin(), exact.begin() + 2)), FitError);
  exact[1].mu_H = 0.0;
  CHECK_THROWS_AS(fit_scaling(exact), FitError);
}

TEST_CASE("extrapolate_hist") {
  HistoricalStats h{};
  h.mu_H = 100.0;
  h.sigma_H = 0.01;
  h.lag_days = 1.0;
  const auto e = extrapolate_hist(h, 100.0 / 365.0);
  CHECK(e.mu_H == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(e.sigma_H == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(e.lag_days == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(std::fabs(e.mu_H * e.sigma_H - h.mu_H * h.sigma_H) <= 1e-15);
  CHECK_THROWS_AS(extrapolate_hist(h, 0.0), DomainError);
}
