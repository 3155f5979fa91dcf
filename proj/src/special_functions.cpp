#include "voltail/special_functions.hpp"

#include <cmath>
#include <limits>

#include "voltail/errors.hpp"

namespace voltail {

namespace {

// Single-precision rational guess for erf^-1, parameterized by
// w = -ln((1 - y)(1 + y)) so callers in the erfc branch can form w from q
// without cancellation.
double initial_erf_inv(double y, double w) {
  double p;
  if (w < 5.0) {
    w -= 2.5;
    p = 2.81022636e-08;
    p = 3.43273939e-07 + p * w;
    p = -3.5233877e-06 + p * w;
    p = -4.39150654e-06 + p * w;
    p = 0.00021858087 + p * w;
    p = -0.00125372503 + p * w;
    p = -0.00417768164 + p * w;
    p = 0.246640727 + p * w;
    p = 1.50140941 + p * w;
  } else {
    w = std::sqrt(w) - 3.0;
    p = -0.000200214257;
    p = 0.000100950558 + p * w;
    p = 0.00134934322 + p * w;
    p = -0.00367342844 + p * w;
    p = 0.00573950773 + p * w;
    p = -0.0076224613 + p * w;
    p = 0.00943887047 + p * w;
    p = 1.00167406 + p * w;
    p = 2.83297682 + p * w;
  }
  return p * y;
}

// Halley iteration for erf(x) = y (use_erfc false) or erfc(x) = q. Both
// residuals share f''/f' = -2x.
double halley_refine(double x, double target, bool use_erfc) {
  const double scale = 2.0 / kSqrtPi;
  for (int it = 0; it < 4; ++it) {
    const double deriv = scale * std::exp(-x * x);
    if (deriv == 0.0) break;
    double t;
    if (use_erfc) {
      t = (std::erfc(x) - target) / -deriv;
    } else {
      t = (std::erf(x) - target) / deriv;
    }
    const double step = t / (1.0 + x * t);
    x -= step;
    if (std::fabs(step) <= 1e-17 * std::fabs(x)) break;
  }
  return x;
}

// Newton on ln erfc(x) = ln q; the rational guess is only good to w ~ 36.
double erfc_inv_tiny(double q) {
  const double target = std::log(q);
  double x = std::sqrt(-target);
  for (int it = 0; it < 50; ++it) {
    const double le = log_erfc(x);
    const double slope = -2.0 / kSqrtPi * std::exp(-x * x - le);
    const double step = (le - target) / slope;
    x -= step;
    if (std::fabs(step) <= 1e-16 * x) break;
  }
  return x;
}

// x with erfc(x) = q for q in (0, 1].
double erfc_inv_upper(double q) {
  if (q < 1e-12) return erfc_inv_tiny(q);
  const double y = 1.0 - q;
  const double w = -std::log(q * (2.0 - q));
  const double guess = initial_erf_inv(y, w);
  if (q >= 0.5) return halley_refine(guess, y, false);
  return halley_refine(guess, q, true);
}

}  // namespace

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / kSqrt2Pi; }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / kSqrt2); }

double erf_inv(double y) {
  if (!(y > -1.0 && y < 1.0)) {
    throw DomainError("erf_inv: argument must lie in (-1, 1)");
  }
  if (y == 0.0) return 0.0;
  const double a = std::fabs(y);
  double x;
  if (a <= 0.5) {
    const double w = -std::log((1.0 - a) * (1.0 + a));
    x = halley_refine(initial_erf_inv(a, w), a, false);
  } else {
    x = erfc_inv_upper(1.0 - a);
  }
  return y < 0.0 ? -x : x;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("normal_quantile: probability must lie in (0, 1)");
  }
  // Phi^-1(p) = -sqrt(2) erfc^-1(2p)
  const double q = 2.0 * p;
  if (q <= 1.0) return -kSqrt2 * erfc_inv_upper(q);
  return kSqrt2 * erfc_inv_upper(2.0 - q);
}

double log_erfc(double z) {
  if (z < 20.0) return std::log(std::erfc(z));
  // erfc(z) = exp(-z^2) / (z sqrt(pi)) * sum_k (-1)^k (2k-1)!! / (2z^2)^k
  const double inv = 1.0 / (2.0 * z * z);
  double term = 1.0;
  double sum = 1.0;
  for (int k = 1; k < 12; ++k) {
    term *= -(2.0 * k - 1.0) * inv;
    sum += term;
    if (std::fabs(term) < 1e-18) break;
  }
  return -z * z - std::log(z * kSqrtPi) + std::log(sum);
}

}  // namespace voltail
