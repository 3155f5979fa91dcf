#pragma once

#include <string>
#include <vector>

namespace voltail {

/// Parameters of the symmetric smile
///   sigma(x) = g [1 + (chi - 1) u^2 / (u^2 + n)],  u = x + g^2 T / 2.
struct SmileParams {
  double g;    ///< minimum implied volatility, annualized
  double chi;  ///< ratio of the far-wing volatility to g, >= 1
  double n;    ///< squared half width at half height, log-return^2
  double T;    ///< maturity in years

  /// Builds parameters from the scale-free width rho = n / (g^2 T).
  static SmileParams from_rho(double g, double chi, double rho, double T) {
    return {g, chi, rho * g * g * T, T};
  }

  double rho() const { return n / (g * g * T); }
  /// Abscissa of the smile minimum, -g^2 T / 2.
  double x_min() const { return -0.5 * g * g * T; }
};

struct SmileShapeReport {
  double x_min;
  double height;      ///< g (chi - 1)
  double half_width;  ///< sqrt(n)
  double rho;         ///< n / (g^2 T)
  double c_implied;   ///< sqrt(n) / (g sqrt(T)); rho == c_implied^2
};

/// One failed check from validate_params.
struct ParamViolation {
  std::string field;
  std::string message;
};

struct ValidationResult {
  std::vector<ParamViolation> violations;
  bool ok() const { return violations.empty(); }
};

/// Parameter ranges swept when validating the decay model.
struct TableBounds {
  double g_min = 0.03, g_max = 0.5;
  double rho_min = 2.5, rho_max = 10.0;
  double t_days_min = 1.0, t_days_max = 1080.0;
  double chi_min = 1.01, chi_max = 3.0;
};

double smile_sigma(const SmileParams& p, double x);
double smile_sigma_d1(const SmileParams& p, double x);
double smile_sigma_d2(const SmileParams& p, double x);

SmileShapeReport shape_report(const SmileParams& p);

/// Checks the type invariants (g > 0, chi >= 1, n > 0, T > 0, all finite)
/// and, when `table_bounds` is set, the simulation ranges of TableBounds.
/// Never throws.
ValidationResult validate_params(const SmileParams& p, bool table_bounds,
                                 const TableBounds& bounds = {});

/// Throws DomainError listing every invariant violation.
void require_valid(const SmileParams& p);

}  // namespace voltail
