#include "voltail/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "voltail/errors.hpp"
#include "voltail/special_functions.hpp"

namespace voltail {

namespace {

constexpr double kVolFloor = 1e-6;
constexpr double kVolCap = 10.0;
constexpr int kMaxIterations = 100;

void check_context(const MarketContext& ctx) {
  if (!(ctx.spot > 0.0) || !std::isfinite(ctx.spot)) {
    throw DomainError("market context: spot must be positive and finite");
  }
  if (!(ctx.maturity > 0.0) || !std::isfinite(ctx.maturity)) {
    throw DomainError("market context: maturity must be positive and finite");
  }
  if (!std::isfinite(ctx.rate)) {
    throw DomainError("market context: rate must be finite");
  }
}

void check_inputs(const MarketContext& ctx, double strike, double sigma) {
  check_context(ctx);
  if (!(strike >= 0.0) || !std::isfinite(strike)) {
    throw DomainError("strike must be non-negative and finite");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw DomainError("volatility must be positive and finite");
  }
}

double d1_of(const MarketContext& ctx, double strike, double sigma) {
  const double sd = sigma * std::sqrt(ctx.maturity);
  return (std::log(ctx.spot / strike) +
          (ctx.rate + 0.5 * sigma * sigma) * ctx.maturity) /
         sd;
}

}  // namespace

double moneyness(const MarketContext& ctx, double strike) {
  check_context(ctx);
  if (!(strike > 0.0)) throw DomainError("moneyness: strike must be positive");
  return std::log(strike / ctx.spot) - ctx.rate * ctx.maturity;
}

double strike_from_moneyness(const MarketContext& ctx, double x) {
  check_context(ctx);
  return ctx.spot * std::exp(x + ctx.rate * ctx.maturity);
}

double bs_call_price(const MarketContext& ctx, double strike, double sigma) {
  check_inputs(ctx, strike, sigma);
  if (strike == 0.0) return ctx.spot;
  const double discounted = strike * std::exp(-ctx.rate * ctx.maturity);
  const double d1 = d1_of(ctx, strike, sigma);
  const double d2 = d1 - sigma * std::sqrt(ctx.maturity);
  const double price = ctx.spot * normal_cdf(d1) - discounted * normal_cdf(d2);
  const double lower = std::max(ctx.spot - discounted, 0.0);
  return std::clamp(price, lower, ctx.spot);
}

double bs_delta(const MarketContext& ctx, double strike, double sigma,
                DeltaConvention conv) {
  check_inputs(ctx, strike, sigma);
  if (strike == 0.0) return 1.0;
  const double d1 = d1_of(ctx, strike, sigma);
  return conv == DeltaConvention::kPaperErf ? std::erf(d1) : normal_cdf(d1);
}

double delta_to_x(double delta, double sigma, double maturity,
                  DeltaConvention conv) {
  if (!(sigma > 0.0) || !(maturity > 0.0)) {
    throw DomainError("delta_to_x: sigma and maturity must be positive");
  }
  double d1;
  if (conv == DeltaConvention::kPaperErf) {
    if (!(std::fabs(delta) < 1.0)) {
      throw DomainError("delta_to_x: erf-convention delta must lie in (-1, 1)");
    }
    d1 = erf_inv(delta);
  } else {
    if (!(delta > 0.0 && delta < 1.0)) {
      throw DomainError("delta_to_x: N(d1)-convention delta must lie in (0, 1)");
    }
    d1 = normal_quantile(delta);
  }
  return 0.5 * sigma * sigma * maturity - sigma * std::sqrt(maturity) * d1;
}

double implied_vol(const MarketContext& ctx, double strike,
                   double observed_price) {
  check_context(ctx);
  if (!(strike >= 0.0)) throw DomainError("implied_vol: strike must be >= 0");
  const double discounted = strike * std::exp(-ctx.rate * ctx.maturity);
  const double lower = std::max(ctx.spot - discounted, 0.0);
  if (!(observed_price > lower && observed_price < ctx.spot)) {
    throw NoSolutionError(
        "implied_vol: price outside the no-arbitrage band (max(S0 - K e^{-rT}, "
        "0), S0)");
  }
  const double sqrt_t = std::sqrt(ctx.maturity);

  // Newton on the log price of the out-of-the-money option (the put by
  // parity for in-the-money strikes), which stays well scaled when the time
  // value is many orders below the spot.
  const bool call = discounted >= ctx.spot;
  const double target = std::log(call ? observed_price : observed_price - lower);
  auto otm_price = [&](double sigma) {
    const double d1 = d1_of(ctx, strike, sigma);
    const double d2 = d1 - sigma * sqrt_t;
    return call ? ctx.spot * normal_cdf(d1) - discounted * normal_cdf(d2)
                : discounted * normal_cdf(-d2) - ctx.spot * normal_cdf(-d1);
  };
  auto residual = [&](double sigma) {
    const double v = otm_price(sigma);
    return v > 0.0 ? std::log(v) - target : -std::numeric_limits<double>::infinity();
  };

  double lo = kVolFloor;
  double hi = kVolCap;
  if (residual(lo) > 0.0 || residual(hi) < 0.0) {
    throw NoSolutionError("implied_vol: root lies outside [1e-6, 10]");
  }

  // Initial guess from the at-the-money expansion C ~ S0 sigma sqrt(T/2pi).
  double sigma = std::clamp(observed_price / ctx.spot * kSqrt2Pi / sqrt_t,
                            0.05, 2.0);
  for (int it = 0; it < kMaxIterations; ++it) {
    const double v = otm_price(sigma);
    const double h = v > 0.0 ? std::log(v) - target
                             : -std::numeric_limits<double>::infinity();
    if (h == 0.0) return sigma;
    if (h > 0.0) {
      hi = sigma;
    } else {
      lo = sigma;
    }
    const double vega = ctx.spot * normal_pdf(d1_of(ctx, strike, sigma)) * sqrt_t;
    const double step = (v > 0.0 && vega > 0.0) ? h * v / vega
                                                : std::numeric_limits<double>::infinity();
    if (std::fabs(step) <= 1e-13 * sigma) return std::clamp(sigma - step, lo, hi);
    if (hi - lo <= 1e-15 * hi) return sigma;
    double next = sigma - step;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    sigma = next;
  }
  throw ConvergenceError("implied_vol: iteration cap reached", lo, hi);
}

}  // namespace voltail
