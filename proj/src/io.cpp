#include "voltail/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "voltail/errors.hpp"

namespace voltail::io {

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0, b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

[[noreturn]] void fail_row(std::size_t row, const std::string& msg) {
  throw ParseError("line " + std::to_string(row) + ": " + msg);
}

double parse_double(const std::string& s, std::size_t row, const char* what) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (!s.empty() && *b == '+') ++b;
  auto [ptr, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || ptr != e || s.empty() || !std::isfinite(v)) {
    fail_row(row, std::string("cannot parse ") + what + " '" + s + "'");
  }
  return v;
}

long parse_int(const std::string& s, std::size_t row, const char* what) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    fail_row(row, std::string("cannot parse ") + what + " '" + s + "'");
  }
  return v;
}

std::chrono::sys_days parse_date(const std::string& s, std::size_t row) {
  // YYYY-MM-DD
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') fail_row(row, "date '" + s + "' is not YYYY-MM-DD");
  const long y = parse_int(s.substr(0, 4), row, "year");
  const long m = parse_int(s.substr(5, 2), row, "month");
  const long d = parse_int(s.substr(8, 2), row, "day");
  const std::chrono::year_month_day ymd{std::chrono::year{static_cast<int>(y)},
                                        std::chrono::month{static_cast<unsigned>(m)},
                                        std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) fail_row(row, "invalid calendar date '" + s + "'");
  return std::chrono::sys_days{ymd};
}

std::string format_date(std::chrono::sys_days d) {
  const std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

bool is_blank(const std::string& s) { return trim(s).empty(); }

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), ptr);
}

std::string format_short(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

std::vector<VolQuote> QuoteFile::to_moneyness() const { return to_moneyness(convention); }

std::vector<VolQuote> QuoteFile::to_moneyness(DeltaConvention conv) const {
  if (axis == QuoteAxis::kMoneyness) return raw;
  std::vector<VolQuote> out;
  out.reserve(raw.size());
  for (const auto& q : raw) out.push_back(quote_from_delta(q.x, q.sigma, maturity(), conv, q.weight));
  return out;
}

QuoteFile read_quotes(std::istream& in) {
  QuoteFile f;
  bool have_t = false;
  bool have_header = false;
  bool weighted = false;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (is_blank(line)) continue;
    const std::string t = trim(line);
    if (t[0] == '#') {
      std::istringstream is(t.substr(1));
      std::string tok;
      while (is >> tok) {
        const auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        const std::string key = tok.substr(0, eq);
        const std::string val = tok.substr(eq + 1);
        if (key == "T_days") {
          const long d = parse_int(val, row, "T_days");
          if (d <= 0) fail_row(row, "T_days must be positive");
          f.t_days = static_cast<int>(d);
          have_t = true;
        } else if (key == "convention") {
          if (val == "paper_erf") {
            f.convention = DeltaConvention::kPaperErf;
          } else if (val == "norm_cdf") {
            f.convention = DeltaConvention::kMarketNormCdf;
          } else {
            fail_row(row, "unknown convention '" + val + "' (expected paper_erf or norm_cdf)");
          }
        }
      }
      continue;
    }
    const auto cols = split(t, ',');
    if (!have_header) {
      if (cols.size() < 2 || cols.size() > 3 || cols[1] != "sigma" ||
          (cols.size() == 3 && cols[2] != "weight")) {
        fail_row(row, "expected header 'delta,sigma' or 'x,sigma' (optionally ',weight')");
      }
      if (cols[0] == "delta") {
        f.axis = QuoteAxis::kDelta;
      } else if (cols[0] == "x") {
        f.axis = QuoteAxis::kMoneyness;
      } else {
        fail_row(row, "first column must be 'delta' or 'x'");
      }
      weighted = cols.size() == 3;
      have_header = true;
      continue;
    }
    if (cols.size() != (weighted ? 3u : 2u)) fail_row(row, "wrong number of columns");
    VolQuote q;
    q.x = parse_double(cols[0], row, f.axis == QuoteAxis::kDelta ? "delta" : "x");
    q.sigma = parse_double(cols[1], row, "sigma");
    if (!(q.sigma > 0.0)) fail_row(row, "sigma must be positive");
    if (weighted) {
      q.weight = parse_double(cols[2], row, "weight");
      if (q.weight < 0.0) fail_row(row, "weight must be non-negative");
    }
    f.raw.push_back(q);
  }
  if (!have_t) throw ParseError("quotes: missing '# T_days=<int>' metadata line");
  if (!have_header) throw ParseError("quotes: missing header line");
  if (f.raw.empty()) throw ParseError("quotes: no data rows");
  return f;
}

QuoteFile read_quotes_file(const std::string& path) {
  auto in = open_in(path);
  try {
    return read_quotes(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_quotes(std::ostream& out, const QuoteFile& f) {
  out << "# T_days=" << f.t_days << " convention="
      << (f.convention == DeltaConvention::kPaperErf ? "paper_erf" : "norm_cdf") << "\n";
  bool weighted = false;
  for (const auto& q : f.raw) weighted = weighted || q.weight != 1.0;
  out << (f.axis == QuoteAxis::kDelta ? "delta" : "x") << ",sigma" << (weighted ? ",weight" : "")
      << "\n";
  for (const auto& q : f.raw) {
    out << format_double(q.x) << "," << format_double(q.sigma);
    if (weighted) out << "," << format_double(q.weight);
    out << "\n";
  }
}

PriceSeries read_prices(std::istream& in, std::string label) {
  PriceSeries s;
  s.label = std::move(label);
  bool have_header = false;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (is_blank(line)) continue;
    const auto cols = split(trim(line), ',');
    if (!have_header) {
      if (cols.size() != 2 || cols[0] != "date" || cols[1] != "close") {
        fail_row(row, "expected header 'date,close'");
      }
      have_header = true;
      continue;
    }
    if (cols.size() != 2) fail_row(row, "expected 2 columns");
    const auto d = parse_date(cols[0], row);
    const double c = parse_double(cols[1], row, "close");
    if (!(c > 0.0)) fail_row(row, "close must be positive");
    if (!s.dates.empty() && !(s.dates.back() < d)) {
      fail_row(row, "date " + cols[0] + " is not after the previous row's " +
                        format_date(s.dates.back()) + " (rows must be strictly ascending)");
    }
    s.dates.push_back(d);
    s.closes.push_back(c);
  }
  if (!have_header) throw ParseError("prices: missing header 'date,close'");
  if (s.closes.size() < 2) throw ParseError("prices: need at least 2 rows");
  return s;
}

PriceSeries read_prices_file(const std::string& path) {
  auto in = open_in(path);
  try {
    return read_prices(in, std::filesystem::path(path).stem().string());
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_prices(std::ostream& out, const PriceSeries& s) {
  out << "date,close\n";
  for (std::size_t i = 0; i < s.closes.size(); ++i) {
    out << format_date(s.dates[i]) << "," << format_double(s.closes[i]) << "\n";
  }
}

void write_density_csv(std::ostream& out, const DensityGrid& g) {
  out << "x,pdf,ccdf,negative_flag\n";
  for (std::size_t i = 0; i < g.size(); ++i) {
    out << format_double(g.xs[i]) << "," << format_double(g.pdf[i]) << ","
        << format_double(g.ccdf[i]) << "," << static_cast<int>(g.negative_mask[i]) << "\n";
  }
}

void write_stats_csv(std::ostream& out, std::span<const HistoricalStats> stats) {
  out << "label,lag_days,group_index,sigma_H,mu_H,rms_residual\n";
  for (const auto& s : stats) {
    out << s.label << "," << format_double(s.lag_days) << "," << s.group_index << ","
        << format_double(s.sigma_H) << "," << format_double(s.mu_H) << ","
        << format_double(s.rms_residual) << "\n";
  }
}

std::vector<HistoricalStats> read_stats_csv(std::istream& in) {
  std::vector<HistoricalStats> out;
  bool have_header = false;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (is_blank(line)) continue;
    const auto cols = split(trim(line), ',');
    if (!have_header) {
      if (cols != std::vector<std::string>{"label", "lag_days", "group_index", "sigma_H", "mu_H",
                                           "rms_residual"}) {
        fail_row(row, "expected header 'label,lag_days,group_index,sigma_H,mu_H,rms_residual'");
      }
      have_header = true;
      continue;
    }
    if (cols.size() != 6) fail_row(row, "expected 6 columns");
    HistoricalStats s{};
    s.label = cols[0];
    s.lag_days = parse_double(cols[1], row, "lag_days");
    s.group_index = static_cast<std::size_t>(parse_int(cols[2], row, "group_index"));
    s.sigma_H = parse_double(cols[3], row, "sigma_H");
    s.mu_H = parse_double(cols[4], row, "mu_H");
    s.rms_residual = parse_double(cols[5], row, "rms_residual");
    if (!(s.sigma_H > 0.0) || !(s.mu_H > 0.0) || !(s.lag_days > 0.0)) {
      fail_row(row, "sigma_H, mu_H and lag_days must be positive");
    }
    out.push_back(std::move(s));
  }
  if (out.empty()) throw ParseError("stats: no data rows");
  return out;
}

std::vector<HistoricalStats> read_stats_file(const std::string& path) {
  auto in = open_in(path);
  try {
    return read_stats_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_sweep_csv(std::ostream& out, const SweepReport& rep) {
  out << "g,chi,rho,T_days,mu_fit,mu_pred,rel_err\n";
  for (const auto& p : rep.points) {
    out << format_double(p.g) << "," << format_double(p.chi) << "," << format_double(p.rho) << ","
        << format_double(p.t_days) << ","
        << format_double(p.mu_fit ? *p.mu_fit : std::nan("")) << "," << format_double(p.mu_pred)
        << "," << format_double(p.rel_err()) << "\n";
  }
}

void write_fit_report(std::ostream& out, const FitResult& fit) {
  const auto& p = fit.params;
  const auto shape = shape_report(p);
  out << "mode: " << (fit.mode == FitMode::kUnconditional ? "unconditional" : "conditional") << "\n";
  out << "converged: " << (fit.converged ? "yes" : "no") << "\n";
  out << "iterations: " << fit.iterations << "\n";
  out << "g: " << format_short(p.g) << " +/- " << format_short(fit.err_g) << "\n";
  out << "chi: " << format_short(p.chi) << " +/- " << format_short(fit.err_chi) << "\n";
  out << "n: " << format_short(p.n) << " +/- " << format_short(fit.err_n) << "\n";
  out << "rho: " << format_short(shape.rho) << "\n";
  out << "c_implied: " << format_short(shape.c_implied) << "\n";
  out << "x_min: " << format_short(shape.x_min) << "\n";
  out << "T_days: " << format_short(p.T * 365.0) << "\n";
  out << "rms: " << format_short(fit.rms) << "\n";
  out << "constraint_residual: "
      << (fit.constraint_residual ? format_short(*fit.constraint_residual) : std::string("n/a"))
      << "\n";
  if (fit.infeasible_trials > 0) out << "infeasible_trials: " << fit.infeasible_trials << "\n";
  out << "degenerate: " << (fit.degenerate ? "yes" : "no") << "\n";
  for (const auto& w : fit.warnings) out << "WARN: " << w << "\n";
  out << "exact.g=" << format_double(p.g) << "\n";
  out << "exact.chi=" << format_double(p.chi) << "\n";
  out << "exact.n=" << format_double(p.n) << "\n";
  out << "exact.T=" << format_double(p.T) << "\n";
}

SmileParams read_fit_report(std::istream& in) {
  std::map<std::string, double> vals;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const std::string t = trim(line);
    if (t.rfind("exact.", 0) != 0) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) fail_row(row, "malformed exact.* line");
    vals[t.substr(6, eq - 6)] = parse_double(trim(t.substr(eq + 1)), row, "parameter");
  }
  for (const char* k : {"g", "chi", "n", "T"}) {
    if (!vals.count(k)) throw ParseError(std::string("fit report: missing exact.") + k);
  }
  return {vals["g"], vals["chi"], vals["n"], vals["T"]};
}

SmileParams read_fit_report_file(const std::string& path) {
  auto in = open_in(path);
  try {
    return read_fit_report(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace voltail::io
