#pragma once

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "voltail/errors.hpp"

namespace voltail::detail {

struct Integral {
  double value;
  double error;
};

inline constexpr double kQuadAbsTol = 1e-9;

/// Adaptive 15-point Gauss-Kronrod on [a, b]. The relative target keeps tail
/// integrals precise; the contract is the absolute error bound kQuadAbsTol.
/// Tighter targets or deeper recursion only accumulate rounding noise in the
/// error estimate.
template <class F>
Integral integrate(F&& f, double a, double b) {
  if (a == b) return {0.0, 0.0};
  double error = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, a, b, 15, 1e-11, &error);
  if (!(error <= kQuadAbsTol)) {
    throw QuadratureError("adaptive quadrature did not reach 1e-9 absolute error",
                          error);
  }
  return {value, error};
}

}  // namespace voltail::detail
