#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "voltail/historical.hpp"

namespace voltail {

/// Seeded generator for fixtures. Draws come from the raw mt19937_64 stream
/// through inverse CDFs, so a seed gives the same sample on every standard
/// library (std::*_distribution are implementation-defined).
class FixtureRng {
 public:
  explicit FixtureRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Symmetric Laplace with density (mu/2) exp(-mu |x|).
  double laplace(double mu);
  double normal(double mean, double sd);

 private:
  std::mt19937_64 engine_;
};

std::vector<double> laplace_sample(std::size_t n, double mu, std::uint64_t seed);

/// Geometric Brownian closes with daily log-volatility sigma_daily and zero
/// drift, one per calendar day from `start`.
PriceSeries gbm_series(std::size_t n, double sigma_daily, std::uint64_t seed,
                       std::chrono::sys_days start = std::chrono::sys_days{std::chrono::year{2001} /
                                                                            1 / 1});

/// Closes whose daily log-increments are Laplace(mu).
PriceSeries laplace_walk(std::size_t n, double mu, std::uint64_t seed,
                         std::chrono::sys_days start = std::chrono::sys_days{std::chrono::year{2001} /
                                                                              1 / 1});

}  // namespace voltail
