#include "voltail/synthetic.hpp"

#include <cmath>

#include "voltail/special_functions.hpp"

namespace voltail {

double FixtureRng::uniform() {
  // 53 random bits, shifted off zero.
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double FixtureRng::laplace(double mu) {
  const double u = uniform() - 0.5;
  const double mag = -std::log1p(-2.0 * std::fabs(u)) / mu;
  return u < 0.0 ? -mag : mag;
}

double FixtureRng::normal(double mean, double sd) {
  return mean + sd * normal_quantile(uniform());
}

std::vector<double> laplace_sample(std::size_t n, double mu, std::uint64_t seed) {
  FixtureRng rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = rng.laplace(mu);
  return out;
}

namespace {

template <class Step>
PriceSeries walk(std::size_t n, std::chrono::sys_days start, Step&& step) {
  PriceSeries s;
  s.dates.reserve(n);
  s.closes.reserve(n);
  double log_price = std::log(100.0);
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) log_price += step();
    s.dates.push_back(start + std::chrono::days{static_cast<int>(i)});
    s.closes.push_back(std::exp(log_price));
  }
  return s;
}

}  // namespace

PriceSeries gbm_series(std::size_t n, double sigma_daily, std::uint64_t seed,
                       std::chrono::sys_days start) {
  FixtureRng rng(seed);
  auto s = walk(n, start, [&] { return rng.normal(-0.5 * sigma_daily * sigma_daily, sigma_daily); });
  s.label = "GBM";
  return s;
}

PriceSeries laplace_walk(std::size_t n, double mu, std::uint64_t seed,
                         std::chrono::sys_days start) {
  FixtureRng rng(seed);
  auto s = walk(n, start, [&] { return rng.laplace(mu); });
  s.label = "LAPLACE";
  return s;
}

}  // namespace voltail
