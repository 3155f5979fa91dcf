#pragma once

namespace voltail {

/// Spot, continuously-compounded rate and maturity of a European option.
struct MarketContext {
  double spot;      ///< S0 > 0
  double rate;      ///< r, 1/year
  double maturity;  ///< T in years, > 0
};

/// Day-quoted maturities convert to year fractions on a 365-day basis.
constexpr double years_from_days(double days) { return days / 365.0; }

/// Log-return coordinate x = ln(K/S0) - rT.
double moneyness(const MarketContext& ctx, double strike);

/// Strike with moneyness x: K = S0 exp(x + rT).
double strike_from_moneyness(const MarketContext& ctx, double x);

enum class DeltaConvention {
  kPaperErf,       ///< Delta = erf(d1)
  kMarketNormCdf,  ///< Delta = N(d1)
};

/// Black-Scholes European call price S0 N(d1) - K e^{-rT} N(d2).
/// Throws DomainError for sigma <= 0, strike < 0 or an invalid context.
double bs_call_price(const MarketContext& ctx, double strike, double sigma);

/// Call delta under the chosen convention.
double bs_delta(const MarketContext& ctx, double strike, double sigma,
                DeltaConvention conv = DeltaConvention::kPaperErf);

/// Inverts the delta definition for the moneyness coordinate:
/// x = sigma^2 T / 2 - sigma sqrt(T) erf^-1(Delta) for kPaperErf, with the
/// normal quantile in place of erf^-1 for kMarketNormCdf. Decreasing in Delta.
double delta_to_x(double delta, double sigma, double maturity,
                  DeltaConvention conv = DeltaConvention::kPaperErf);

/// Implied volatility of a call price by safeguarded Newton on [1e-6, 10].
///
/// Throws NoSolutionError when the price is outside the open no-arbitrage
/// band (max(S0 - K e^{-rT}, 0), S0), or when the root lies outside the
/// search bracket; ConvergenceError (with the final bracket) after 100
/// iterations.
double implied_vol(const MarketContext& ctx, double strike,
                   double observed_price);

}  // namespace voltail
