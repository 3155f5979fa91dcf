#include "voltail/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "voltail/calibration.hpp"
#include "voltail/density.hpp"
#include "voltail/errors.hpp"
#include "voltail/historical.hpp"
#include "voltail/io.hpp"
#include "voltail/tail.hpp"

namespace voltail {

namespace {

struct RunConfig {
  std::string command;
  std::string quotes;
  std::string mode = "unconditional";
  double mu_h = 0.0;
  double sigma_h = 0.0;
  std::string hist_stats;
  std::string convention;
  std::string out;
  std::string params;
  double g = 0.0, chi = 0.0, n = 0.0, rho = 0.0, t_days = 0.0;
  double grid_mult = 10.0;
  std::size_t points = 512;
  double level = 0.01;
  std::vector<std::string> prices;
  std::vector<int> lags{1, 10, 100};
  std::size_t group_size = kMinSubgroupSize;
  bool overlapping = false;
  std::string tails = "both";
  std::size_t samples = 3;
  std::string side = "right";
  std::string density_prefix;

  // Set when the corresponding flag was given.
  bool has_mu_h = false, has_sigma_h = false;
  bool has_g = false, has_chi = false, has_n = false, has_rho = false, has_t_days = false;
};

// Bad flag combinations and missing inputs.
class UsageError : public Error {
 public:
  using Error::Error;
};

void warn(std::ostream& err, const std::string& code, const std::string& message) {
  err << "warning: " << message << "\n";
  err << "WARN: " << code << ": " << message << "\n";
}

// Fit warnings are stored as "code: message".
void warn_coded(std::ostream& err, const std::string& coded, const std::string& prefix = "") {
  const auto pos = coded.find(": ");
  if (pos == std::string::npos) {
    warn(err, "fit", prefix + coded);
  } else {
    warn(err, coded.substr(0, pos), prefix + coded.substr(pos + 2));
  }
}

// Writes to --out when given, otherwise to the default stream.
void emit(const RunConfig& cfg, std::ostream& out, const std::string& text) {
  if (cfg.out.empty()) {
    out << text;
    return;
  }
  std::ofstream f(cfg.out, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + cfg.out + "' for writing");
  f << text;
  if (!f) throw IoError("write to '" + cfg.out + "' failed");
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw IoError("write to '" + path + "' failed");
}

io::QuoteFile load_quotes(const RunConfig& cfg, std::vector<VolQuote>& quotes) {
  if (cfg.quotes.empty()) throw UsageError(cfg.command + ": --quotes is required");
  auto qf = io::read_quotes_file(cfg.quotes);
  if (cfg.convention == "paper_erf") {
    qf.convention = DeltaConvention::kPaperErf;
  } else if (cfg.convention == "norm_cdf") {
    qf.convention = DeltaConvention::kMarketNormCdf;
  }
  quotes = qf.to_moneyness();
  return qf;
}

HistoricalStats load_hist(const RunConfig& cfg, double T, std::ostream& err) {
  if (cfg.has_mu_h || cfg.has_sigma_h) {
    if (!(cfg.has_mu_h && cfg.has_sigma_h)) {
      throw UsageError(cfg.command + ": --mu-h and --sigma-h must be given together");
    }
    HistoricalStats h{};
    h.mu_H = cfg.mu_h;
    h.sigma_H = cfg.sigma_h;
    h.subgroup_size = kMinSubgroupSize;
    h.lag_days = T * 365.0;
    h.label = "flags";
    return h;
  }
  if (cfg.hist_stats.empty()) {
    throw UsageError(cfg.command + ": needs --mu-h/--sigma-h or --hist-stats");
  }
  const auto rows = io::read_stats_file(cfg.hist_stats);
  // Groups at the lag closest (in ratio) to the quote maturity, averaged.
  const double days = T * 365.0;
  double best = rows.front().lag_days;
  for (const auto& r : rows) {
    if (std::fabs(std::log(r.lag_days / days)) < std::fabs(std::log(best / days))) best = r.lag_days;
  }
  HistoricalStats h{};
  std::size_t m = 0;
  for (const auto& r : rows) {
    if (r.lag_days != best) continue;
    h.sigma_H += r.sigma_H;
    h.mu_H += r.mu_H;
    h.rms_residual += r.rms_residual;
    h.subgroup_size = r.subgroup_size;
    ++m;
  }
  h.sigma_H /= static_cast<double>(m);
  h.mu_H /= static_cast<double>(m);
  h.rms_residual /= static_cast<double>(m);
  h.lag_days = best;
  h.label = rows.front().label;
  err << "hist: " << m << " group(s) at lag " << io::format_short(best) << " days, sigma_H*mu_H = "
      << io::format_short(h.sigma_H * h.mu_H) << "\n";
  return extrapolate_hist(h, T);
}

SmileParams load_params(const RunConfig& cfg) {
  SmileParams p{};
  bool have_n = false;
  if (!cfg.params.empty()) {
    p = io::read_fit_report_file(cfg.params);
    have_n = true;
  } else if (!(cfg.has_g && cfg.has_chi && cfg.has_t_days && (cfg.has_n || cfg.has_rho))) {
    throw UsageError(cfg.command + ": needs --params or --g, --chi, --T-days and one of --n/--rho");
  }
  if (cfg.has_n && cfg.has_rho) throw UsageError(cfg.command + ": give --n or --rho, not both");
  if (cfg.has_g) p.g = cfg.g;
  if (cfg.has_chi) p.chi = cfg.chi;
  if (cfg.has_t_days) p.T = years_from_days(cfg.t_days);
  if (cfg.has_n) {
    p.n = cfg.n;
    have_n = true;
  }
  if (cfg.has_rho) {
    p.n = cfg.rho * p.g * p.g * p.T;
    have_n = true;
  }
  if (!have_n) throw UsageError(cfg.command + ": missing --n or --rho");
  require_valid(p);
  return p;
}

void warn_negative(std::ostream& err, const DensityGrid& grid, const std::string& who = "") {
  const std::size_t k = grid.negative_count();
  if (k == 0) return;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!grid.negative_mask[i]) continue;
    lo = std::min(lo, grid.xs[i]);
    hi = std::max(hi, grid.xs[i]);
  }
  warn(err, "negative_density",
       who + "implied density negative at " + std::to_string(k) + " of " +
           std::to_string(grid.size()) + " grid points, x in [" + io::format_short(lo) + ", " +
           io::format_short(hi) + "]");
}

int cmd_fit(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<VolQuote> quotes;
  const auto qf = load_quotes(cfg, quotes);
  const double T = qf.maturity();
  FitResult fit;
  if (cfg.mode == "unconditional") {
    fit = fit_unconditional(quotes, T);
  } else {
    fit = fit_conditional(quotes, T, load_hist(cfg, T, err));
  }
  for (const auto& w : fit.warnings) warn_coded(err, w);
  std::ostringstream os;
  io::write_fit_report(os, fit);
  emit(cfg, out, os.str());
  return kExitOk;
}

int cmd_density(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto p = load_params(cfg);
  const auto grid = density_grid(p, cfg.grid_mult, cfg.points);
  err << "norm_defect: " << io::format_short(grid.norm_defect) << "\n";
  warn_negative(err, grid);
  std::ostringstream os;
  io::write_density_csv(os, grid);
  emit(cfg, out, os.str());
  return kExitOk;
}

int cmd_var(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto p = load_params(cfg);
  // Flag negative density in the plotting window even when the quantile
  // does not reach it.
  const double half = cfg.grid_mult * p.g * std::sqrt(p.T);
  const std::size_t m = 2001;
  std::size_t neg = 0;
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double x = p.x_min() - half + 2.0 * half * static_cast<double>(i) / (m - 1);
    if (perturbation_factor(p, x) < 0.0) {
      if (neg == 0) lo = x;
      hi = x;
      ++neg;
    }
  }
  if (neg > 0) {
    warn(err, "negative_density",
         "implied density negative at " + std::to_string(neg) + " of " + std::to_string(m) +
             " scan points, x in [" + io::format_short(lo) + ", " + io::format_short(hi) + "]");
  }
  const auto v = value_at_risk(p, cfg.level);
  std::ostringstream os;
  os << "level: " << io::format_short(v.level) << "\n";
  os << "lambda: " << io::format_short(v.lambda) << "\n";
  os << "quadrature_error: " << io::format_short(v.quadrature_error) << "\n";
  os << "exact.level=" << io::format_double(v.level) << "\n";
  os << "exact.lambda=" << io::format_double(v.lambda) << "\n";
  emit(cfg, out, os.str());
  return kExitOk;
}

int cmd_hist(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  if (cfg.prices.empty()) throw UsageError("hist: at least one --prices file is required");
  if (cfg.lags.empty()) throw UsageError("hist: --lags is empty");
  EmpiricalTailOptions opts;
  if (cfg.tails == "right") {
    opts.pooling = TailPooling::kRight;
  } else if (cfg.tails == "left") {
    opts.pooling = TailPooling::kLeft;
  }
  const auto sampling = cfg.overlapping ? ReturnSampling::kOverlapping : ReturnSampling::kNonOverlapping;
  std::vector<HistoricalStats> all;
  for (const auto& path : cfg.prices) {
    const auto series = io::read_prices_file(path);
    for (int lag : cfg.lags) {
      if (lag < 1) throw UsageError("hist: lags must be >= 1");
      const std::size_t avail =
          series.closes.size() <= static_cast<std::size_t>(lag)
              ? 0
              : (cfg.overlapping ? series.closes.size() - lag : (series.closes.size() - 1) / lag);
      if (avail < cfg.group_size && cfg.group_size >= kMinSubgroupSize) {
        warn(err, "insufficient_data",
             series.label + ": lag " + std::to_string(lag) + " gives " + std::to_string(avail) +
                 " returns, fewer than one group of " + std::to_string(cfg.group_size));
        continue;
      }
      const auto r = log_returns(series, lag, sampling);
      auto stats = subgroup_stats(r, cfg.group_size, opts);
      all.insert(all.end(), stats.begin(), stats.end());
    }
  }
  if (all.empty()) throw FitError("hist: no subgroup could be formed");
  if (all.size() >= 3) {
    const auto sc = fit_scaling(all);
    err << "C1: " << io::format_short(sc.C1) << " +/- " << io::format_short(sc.uncertainty) << " ("
        << sc.points << " groups)\n";
  }
  std::ostringstream os;
  io::write_stats_csv(os, all);
  emit(cfg, out, os.str());
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const auto side = cfg.side == "left" ? TailSide::kLeft : TailSide::kRight;
  const auto rep = validation_sweep(TableBounds{}, cfg.samples, side);
  err << "relative_mse: " << io::format_short(rep.relative_mse) << "\n";
  err << "normalized_mse: " << io::format_short(rep.normalized_mse) << "\n";
  if (rep.failures > 0) {
    warn(err, "sweep_failures",
         std::to_string(rep.failures) + " of " + std::to_string(rep.points.size()) +
             " sweep points could not be fitted");
  }
  std::ostringstream os;
  io::write_sweep_csv(os, rep);
  emit(cfg, out, os.str());
  return kExitOk;
}

std::string side_value(const FitSide& s, const std::string& what) {
  const auto& p = s.fit.params;
  if (what == "g") return io::format_short(p.g);
  if (what == "chi") return io::format_short(p.chi);
  if (what == "n") return io::format_short(p.n);
  if (what == "rho") return io::format_short(p.rho());
  if (what == "rms") return io::format_short(s.fit.rms);
  if (what == "converged") return s.fit.converged ? "yes" : "no";
  if (what == "var_lambda") return s.var ? io::format_short(s.var->lambda) : "error";
  if (what == "norm_defect") return io::format_short(s.grid.norm_defect);
  if (what == "negative_points") return std::to_string(s.grid.negative_count());
  if (what == "interior_minimum") return s.interior_minimum ? "yes" : "no";
  if (what == "constraint_residual") {
    return s.fit.constraint_residual ? io::format_short(*s.fit.constraint_residual) : "n/a";
  }
  return "";
}

int cmd_compare(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::vector<VolQuote> quotes;
  const auto qf = load_quotes(cfg, quotes);
  const double T = qf.maturity();
  const auto cmp = compare_fits(quotes, T, load_hist(cfg, T, err), cfg.level);

  const std::pair<const char*, const FitSide*> sides[] = {{"unconditional", &cmp.unconditional},
                                                          {"conditional", &cmp.conditional}};
  for (const auto& [name, s] : sides) {
    const std::string who = std::string(name) + " fit: ";
    for (const auto& w : s->fit.warnings) warn_coded(err, w, who);
    warn_negative(err, s->grid, who);
    if (!s->var) warn(err, "var_failed", who + s->var_error);
    if (s->interior_minimum) {
      warn(err, "spurious_minimum", who + "implied density has an interior local minimum");
    }
  }

  std::ostringstream os;
  os << std::left << std::setw(21) << "quantity" << std::setw(16) << "unconditional"
     << "conditional\n";
  for (const char* q : {"g", "chi", "n", "rho", "rms", "converged", "constraint_residual",
                        "var_lambda", "norm_defect", "negative_points", "interior_minimum"}) {
    os << std::setw(21) << q << std::setw(16) << side_value(cmp.unconditional, q)
       << side_value(cmp.conditional, q) << "\n";
  }
  os << "level: " << io::format_short(cmp.level) << "\n";
  os << "var_rel_diff: " << (cmp.var_rel_diff ? io::format_short(*cmp.var_rel_diff) : "n/a")
     << "\n";
  emit(cfg, out, os.str());

  if (!cfg.density_prefix.empty()) {
    for (const auto& [name, s] : sides) {
      std::ostringstream d;
      io::write_density_csv(d, s->grid);
      write_file(cfg.density_prefix + "_" + name + ".csv", d.str());
    }
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Volatility smile calibration, implied densities and tail statistics", "voltail"};
  app.set_config("--config", "", "key=value file; command-line flags take precedence");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  app.add_option("--quotes", cfg.quotes, "Quote CSV");
  app.add_option("--mode", cfg.mode, "Fit mode")
      ->check(CLI::IsMember({"unconditional", "conditional"}));
  auto* o_mu = app.add_option("--mu-h", cfg.mu_h, "Historical tail decay mu_H");
  auto* o_sig = app.add_option("--sigma-h", cfg.sigma_h, "Historical volatility sigma_H");
  app.add_option("--hist-stats", cfg.hist_stats, "Stats CSV from the hist command");
  app.add_option("--convention", cfg.convention, "Delta convention, overrides the quote file")
      ->check(CLI::IsMember({"paper_erf", "norm_cdf"}));
  app.add_option("--out", cfg.out, "Output file (default stdout)");
  app.add_option("--params", cfg.params, "Fit report to take parameters from");
  auto* o_g = app.add_option("--g", cfg.g, "Smile minimum g");
  auto* o_chi = app.add_option("--chi", cfg.chi, "Wing ratio chi");
  auto* o_n = app.add_option("--n", cfg.n, "Smile width n");
  auto* o_rho = app.add_option("--rho", cfg.rho, "Scale-free width n/(g^2 T)");
  auto* o_t = app.add_option("--T-days", cfg.t_days, "Maturity in days");
  app.add_option("--grid-mult", cfg.grid_mult, "Grid half-width in units of g sqrt(T)")
      ->check(CLI::PositiveNumber);
  app.add_option("--points", cfg.points, "Grid points")->check(CLI::Range(16, 10000000));
  app.add_option("--level", cfg.level, "VaR tail probability")
      ->check(CLI::Range(std::numeric_limits<double>::min(), 0.5));
  app.add_option("--prices", cfg.prices, "Price CSV (repeatable)");
  app.add_option("--lags", cfg.lags, "Return lags in days")->delimiter(',');
  app.add_option("--group-size", cfg.group_size, "Returns per subgroup")
      ->check(CLI::Range(static_cast<std::size_t>(kMinSubgroupSize),
                         std::numeric_limits<std::size_t>::max()));
  app.add_flag("--overlapping", cfg.overlapping, "Overlapping lagged returns");
  app.add_option("--tails", cfg.tails, "Tails pooled in the decay fit")
      ->check(CLI::IsMember({"both", "right", "left"}));
  app.add_option("--samples", cfg.samples, "Sweep samples per axis")->check(CLI::Range(1, 50));
  app.add_option("--side", cfg.side, "Sweep tail side")->check(CLI::IsMember({"right", "left"}));
  app.add_option("--density-prefix", cfg.density_prefix, "Write both density grids with this prefix");

  const std::pair<const char*, const char*> commands[] = {
      {"fit", "Calibrate the smile to a quote file"},
      {"density", "Tabulate the implied density"},
      {"var", "Value at risk of the implied density"},
      {"hist", "Subgroup volatility and tail decay of price series"},
      {"sweep", "Tail-decay validation sweep"},
      {"compare", "Unconditional against conditional fit"},
  };
  for (const auto& [name, help] : commands) {
    app.add_subcommand(name, help)->fallthrough()->callback([&cfg, n = std::string(name)] {
      cfg.command = n;
    });
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
  cfg.has_mu_h = o_mu->count() > 0;
  cfg.has_sigma_h = o_sig->count() > 0;
  cfg.has_g = o_g->count() > 0;
  cfg.has_chi = o_chi->count() > 0;
  cfg.has_n = o_n->count() > 0;
  cfg.has_rho = o_rho->count() > 0;
  cfg.has_t_days = o_t->count() > 0;

  try {
    if (cfg.command == "fit") return cmd_fit(cfg, out, err);
    if (cfg.command == "density") return cmd_density(cfg, out, err);
    if (cfg.command == "var") return cmd_var(cfg, out, err);
    if (cfg.command == "hist") return cmd_hist(cfg, out, err);
    if (cfg.command == "sweep") return cmd_sweep(cfg, out, err);
    if (cfg.command == "compare") return cmd_compare(cfg, out, err);
    err << "error: no command\n";
    return kExitInput;
  } catch (const SmileFitError& e) {
    err << "error: " << e.what() << "\n";
    std::ostringstream os;
    io::write_fit_report(os, e.best_iterate);
    err << "best iterate:\n" << os.str();
    return kExitNumerical;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const IntegrityError& e) {
    warn(err, "negative_density",
         std::string(e.what()) + " (x in [" + io::format_short(e.x_lo) + ", " +
             io::format_short(e.x_hi) + "])");
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace voltail
