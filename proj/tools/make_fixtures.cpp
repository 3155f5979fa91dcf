// Regenerates the bundled fixtures in data/.
#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "voltail/io.hpp"
#include "voltail/smile.hpp"
#include "voltail/special_functions.hpp"
#include "voltail/synthetic.hpp"
#include "voltail/tail.hpp"

namespace fs = std::filesystem;
using namespace voltail;

namespace {

void save(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  std::cout << "wrote " << path.string() << "\n";
}

// Quotes at `m` moneyness points spread over x_min +- half.
io::QuoteFile smile_quotes(const SmileParams& p, int t_days, double half, int m) {
  io::QuoteFile f;
  f.t_days = t_days;
  f.axis = io::QuoteAxis::kMoneyness;
  for (int i = 0; i < m; ++i) {
    const double x = p.x_min() - half + 2.0 * half * i / (m - 1);
    f.raw.push_back({x, smile_sigma(p, x)});
  }
  return f;
}

// Same smile quoted against Delta = erf(d1).
io::QuoteFile delta_quotes(const SmileParams& p, int t_days, double half, int m) {
  io::QuoteFile f = smile_quotes(p, t_days, half, m);
  f.axis = io::QuoteAxis::kDelta;
  for (auto& q : f.raw) {
    const double s = q.sigma * std::sqrt(p.T);
    q.x = std::erf((0.5 * s * s - q.x) / s);
  }
  return f;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regenerate bundled fixtures", "make_fixtures"};
  std::uint64_t seed = 20100101;
  std::string out_dir = "data";
  app.add_option("--seed", seed, "Seed of the price fixture");
  app.add_option("--out-dir", out_dir, "Destination directory");
  CLI11_PARSE(app, argc, argv);

  const fs::path dir(out_dir);
  fs::create_directories(dir);
  std::ostringstream os;

  // One-day smile used throughout the documentation.
  const SmileParams ref_smile{0.1758, 1.20, 0.00030, years_from_days(1)};
  const double w1 = 3.0 * std::sqrt(ref_smile.n);
  io::write_quotes(os, smile_quotes(ref_smile, 1, w1, 11));
  save(dir / "ref_smile_quotes.csv", os.str());
  os.str("");
  io::write_quotes(os, delta_quotes(ref_smile, 1, w1, 15));
  save(dir / "ref_smile_delta_quotes.csv", os.str());
  os.str("");

  const SmileParams flat{0.10, 1.0, 0.001, years_from_days(30)};
  io::write_quotes(os, smile_quotes(flat, 30, 0.1, 11));
  save(dir / "flat_quotes.csv", os.str());
  os.str("");

  // High-chi smile with historical statistics whose decay implies chi near 1.3.
  const SmileParams wide = SmileParams::from_rho(0.10, 2.5, 3.0, years_from_days(30));
  io::write_quotes(os, smile_quotes(wide, 30, 3.0 * std::sqrt(wide.n), 21));
  save(dir / "high_chi_quotes.csv", os.str());
  os.str("");
  HistoricalStats h{};
  h.sigma_H = wide.g * std::sqrt(wide.T);
  h.mu_H = 2.0 * f_of_rho(3.0) / (1.3 * h.sigma_H);
  h.subgroup_size = kMinSubgroupSize;
  h.lag_days = 30;
  h.label = "constructed";
  const std::vector<HistoricalStats> hs{h};
  io::write_stats_csv(os, hs);
  save(dir / "high_chi_hist.csv", os.str());
  os.str("");

  // Laplace random walk, daily decay 100 (daily std sqrt(2)/100).
  io::write_prices(os, laplace_walk(20001, 100.0, seed));
  save(dir / "laplace_walk.csv", os.str());
  return 0;
}
