#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "voltail/calibration.hpp"
#include "voltail/density.hpp"
#include "voltail/historical.hpp"
#include "voltail/pricing.hpp"
#include "voltail/smile.hpp"
#include "voltail/tail.hpp"

// File formats:
//   quotes   "# T_days=<int> convention=<paper_erf|norm_cdf>" then a header
//            "delta,sigma" or "x,sigma" (optional third column "weight")
//   prices   "date,close" with ISO-8601 dates, strictly ascending
//   density  "x,pdf,ccdf,negative_flag"
//   stats    "label,lag_days,group_index,sigma_H,mu_H,rms_residual"
//   sweep    "g,chi,rho,T_days,mu_fit,mu_pred,rel_err"
// Numbers in CSV output use the shortest representation that round-trips.
namespace voltail::io {

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

/// Six significant digits, for human-facing reports.
std::string format_short(double v);

enum class QuoteAxis { kDelta, kMoneyness };

struct QuoteFile {
  int t_days = 0;
  DeltaConvention convention = DeltaConvention::kPaperErf;
  QuoteAxis axis = QuoteAxis::kMoneyness;
  /// As read: delta or x in `x`, depending on `axis`.
  std::vector<VolQuote> raw;

  double maturity() const { return years_from_days(t_days); }
  /// Quotes in moneyness; delta rows are converted with their own sigma.
  std::vector<VolQuote> to_moneyness() const;
  std::vector<VolQuote> to_moneyness(DeltaConvention conv) const;
};

QuoteFile read_quotes(std::istream& in);
QuoteFile read_quotes_file(const std::string& path);
void write_quotes(std::ostream& out, const QuoteFile& file);

PriceSeries read_prices(std::istream& in, std::string label);
/// Label defaults to the file stem.
PriceSeries read_prices_file(const std::string& path);
void write_prices(std::ostream& out, const PriceSeries& series);

void write_density_csv(std::ostream& out, const DensityGrid& grid);

void write_stats_csv(std::ostream& out, std::span<const HistoricalStats> stats);
std::vector<HistoricalStats> read_stats_csv(std::istream& in);
std::vector<HistoricalStats> read_stats_file(const std::string& path);

void write_sweep_csv(std::ostream& out, const SweepReport& report);

/// Structured text: human lines at six significant digits, WARN: lines, and
/// exact.* lines that read_fit_report uses to recover the parameters.
void write_fit_report(std::ostream& out, const FitResult& fit);
SmileParams read_fit_report(std::istream& in);
SmileParams read_fit_report_file(const std::string& path);

}  // namespace voltail::io
