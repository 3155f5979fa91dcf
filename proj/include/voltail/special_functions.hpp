#pragma once

namespace voltail {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kSqrt2 = 1.414213562373095048801688724209698079;
inline constexpr double kSqrtPi = 1.772453850905516027298167483341145183;
inline constexpr double kSqrt2Pi = 2.506628274631000502415765284811045253;

/// Standard normal density.
double normal_pdf(double z);

/// Standard normal CDF, evaluated through erfc so both tails keep full
/// relative precision.
double normal_cdf(double z);

/// Inverse of the error function on (-1, 1).
///
/// A rational initial guess is refined with Halley steps on erf (or on erfc
/// when |y| > 0.5, where erf loses relative precision). Absolute error is
/// below 1e-14 on |y| <= 1 - 1e-12. Throws DomainError for |y| >= 1 or NaN.
double erf_inv(double y);

/// Inverse standard normal CDF on (0, 1).
double normal_quantile(double p);

/// ln(erfc(z)), accurate for large positive z where erfc underflows.
double log_erfc(double z);

}  // namespace voltail
