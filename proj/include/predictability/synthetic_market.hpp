#pragma once

// Deterministic synthetic market: daily and intraday price panels whose
// quartile-discretized returns follow Markov chains of known entropy rate.
//
// Each ticker draws a symbol path from a mixed cycle chain; symbol s maps to a
// return in its own band ((s - 1.5) +/- 0.4) * scale, so quartile
// discretization recovers the path up to bucket-boundary effects. Part of the
// in-band noise is shared within a sector, which gives the correlation
// network some structure.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "predictability/csv_io.hpp"
#include "predictability/series_model.hpp"
#include "predictability/synth_validation.hpp"

namespace predictability {

struct SyntheticMarketParams {
  std::size_t tickers = 91;
  int sectors = 9;
  std::size_t daily_prices = 2521;         // about ten years of sessions
  std::size_t sessions = 15;               // intraday trading days
  std::size_t prices_per_session = 391;    // 09:30 to 16:00 inclusive, 1-minute bars
  double daily_entropy = 1.95;             // bits per symbol, cohort centre
  double intraday_entropy = 1.88;
  double entropy_jitter = 0.03;            // per-ticker uniform +/- jitter
  double daily_scale = 0.01;
  double intraday_scale = 0.0005;
  std::uint64_t seed = 2013;
};

struct SyntheticMarket {
  std::vector<PriceSeries> daily;
  std::vector<PriceSeries> intraday;
  std::map<std::string, std::string> sectors;
  std::map<std::string, double> daily_entropy;     // analytic, per ticker
  std::map<std::string, double> intraday_entropy;
};

namespace detail {

inline bool is_weekday(std::int64_t days_since_epoch) {
  const std::int64_t dow = ((days_since_epoch % 7) + 11) % 7;  // 0 = Sunday
  return dow != 0 && dow != 6;
}

inline std::vector<std::int64_t> business_days(std::int64_t first_day, std::size_t count) {
  std::vector<std::int64_t> out;
  for (std::int64_t d = first_day; out.size() < count; ++d) {
    if (is_weekday(d)) out.push_back(d);
  }
  return out;
}

inline PriceSeries synthetic_series(const std::string& ticker, Sampling sampling,
                                    const std::vector<std::int64_t>& stamps,
                                    const SymbolSequence& path, std::span<const double> common,
                                    double scale, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  PriceSeries s{ticker, sampling, {}};
  double log_price = std::log(100.0);
  s.points.push_back({stamps[0], 100.0});
  for (std::size_t t = 1; t < stamps.size(); ++t) {
    const double band = static_cast<double>(path[t - 1]) - 1.5;
    const double noise = 0.4 * (0.5 * common[t - 1] + 0.5 * unit(rng));
    log_price += (band + noise) * scale;
    s.points.push_back({stamps[t], std::exp(log_price)});
  }
  return s;
}

}  // namespace detail

inline SyntheticMarket generate_market(const SyntheticMarketParams& p) {
  SyntheticMarket m;
  const std::int64_t daily_start = detail::days_from_civil(2003, 11, 11);
  std::vector<std::int64_t> daily_stamps;
  for (std::int64_t d : detail::business_days(daily_start, p.daily_prices)) daily_stamps.push_back(d * 86400);

  const std::int64_t intraday_start = detail::days_from_civil(2013, 10, 21);
  std::vector<std::int64_t> intraday_stamps;
  for (std::int64_t d : detail::business_days(intraday_start, p.sessions)) {
    for (std::size_t k = 0; k < p.prices_per_session; ++k) {
      intraday_stamps.push_back(d * 86400 + 9 * 3600 + 30 * 60 + static_cast<std::int64_t>(k) * 60);
    }
  }

  // Sector-wide noise shared by every member, one stream per sector and cohort.
  auto sector_noise = [&](int sector, std::size_t len, std::uint64_t cohort) {
    auto rng = make_rng(p.seed, 1000 + cohort * 100 + static_cast<std::uint64_t>(sector));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    std::vector<double> v(len);
    for (auto& x : v) x = unit(rng);
    return v;
  };
  std::vector<std::vector<double>> daily_common, intraday_common;
  for (int s = 0; s < p.sectors; ++s) {
    daily_common.push_back(sector_noise(s, daily_stamps.size(), 0));
    intraday_common.push_back(sector_noise(s, intraday_stamps.size(), 1));
  }

  for (std::size_t i = 0; i < p.tickers; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "S%03zu", i + 1);
    const std::string ticker = name;
    const int sector = static_cast<int>(i % static_cast<std::size_t>(p.sectors));
    m.sectors[ticker] = "sector_" + std::to_string(sector + 1);

    auto rng = make_rng(p.seed, 10 + i);
    std::uniform_real_distribution<double> jitter(-p.entropy_jitter, p.entropy_jitter);
    const double h_daily = std::min(2.0, p.daily_entropy + jitter(rng));
    const double h_intraday = std::min(2.0, p.intraday_entropy + jitter(rng));
    m.daily_entropy[ticker] = h_daily;
    m.intraday_entropy[ticker] = h_intraday;

    SyntheticSource daily_src{SourceKind::markov, 4, chain_with_entropy(4, h_daily), rng()};
    SyntheticSource intraday_src{SourceKind::markov, 4, chain_with_entropy(4, h_intraday), rng()};
    const auto daily_path = generate(daily_src, daily_stamps.size() - 1);
    const auto intraday_path = generate(intraday_src, intraday_stamps.size() - 1);

    m.daily.push_back(detail::synthetic_series(ticker, Sampling::daily, daily_stamps, daily_path,
                                               daily_common[static_cast<std::size_t>(sector)],
                                               p.daily_scale, rng));
    m.intraday.push_back(detail::synthetic_series(ticker, Sampling::intraday, intraday_stamps,
                                                  intraday_path,
                                                  intraday_common[static_cast<std::size_t>(sector)],
                                                  p.intraday_scale, rng));
  }
  return m;
}

/// Writes `timestamp,ticker,close` rows with epoch-second timestamps.
inline void write_price_csv(std::ostream& out, std::span<const PriceSeries> series) {
  out << "timestamp,ticker,close\n";
  char buf[32];
  for (const auto& s : series) {
    for (const auto& pt : s.points) {
      std::snprintf(buf, sizeof buf, "%.10f", pt.price);
      out << pt.timestamp << ',' << s.ticker << ',' << buf << '\n';
    }
  }
}

inline void write_sectors_csv(std::ostream& out, const std::map<std::string, std::string>& sectors) {
  out << "ticker,sector\n";
  for (const auto& [ticker, sector] : sectors) out << ticker << ',' << sector << '\n';
}

}  // namespace predictability
