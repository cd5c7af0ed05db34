#pragma once

// Long-only mean-reversion strategy against buy-and-hold.
//
// At each bar with a full window the z-score of the close against the
// rolling mean and population standard deviation of the last `window` closes
// is computed. Flat and z <= entry_z opens a position with all capital;
// long and z >= exit_z closes it. No costs, no shorting, no leverage.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "predictability/error.hpp"
#include "predictability/series_model.hpp"

namespace predictability {

enum class Execution {
  signal_close,  // fill at the close that produced the signal
  next_bar,      // fill at the following bar's close
};

struct StrategyParams {
  std::size_t window = 20;
  double entry_z = -1.0;
  double exit_z = 0.0;
  double initial_capital = 10000.0;
  Execution execution = Execution::signal_close;
};

struct Trade {
  std::int64_t entry_timestamp = 0;
  double entry_price = 0.0;
  std::optional<std::int64_t> exit_timestamp;
  std::optional<double> exit_price;
};

struct EquityPoint {
  std::int64_t timestamp = 0;
  double value = 0.0;
};

struct PerformanceReport {
  std::string ticker;
  double strategy_return_pct = 0.0;
  double benchmark_return_pct = 0.0;
  std::size_t num_trades = 0;
  std::vector<EquityPoint> equity_curve;
  std::vector<Trade> trades;
  StrategyParams params;
};

inline void validate(const StrategyParams& p) {
  if (p.window < 2) throw Error(ErrorKind::validation, "strategy window must be >= 2");
  if (!(p.entry_z < 0.0)) throw Error(ErrorKind::validation, "entry_z must be negative");
  if (!(p.entry_z < p.exit_z)) throw Error(ErrorKind::validation, "entry_z must be below exit_z");
  if (!(p.initial_capital > 0.0)) throw Error(ErrorKind::validation, "initial capital must be positive");
}

inline PerformanceReport mean_reversion_backtest(const PriceSeries& series,
                                                 const StrategyParams& params) {
  validate(params);
  const auto& pts = series.points;
  if (pts.size() <= params.window) {
    throw Error(ErrorKind::too_short, "series '" + series.ticker + "' is not longer than the window");
  }
  for (const auto& p : pts) {
    if (!(p.price > 0.0)) throw Error(ErrorKind::domain, "nonpositive price in '" + series.ticker + "'");
  }

  PerformanceReport rep;
  rep.ticker = series.ticker;
  rep.params = params;

  double cash = params.initial_capital;
  double shares = 0.0;
  enum class Pending { none, buy, sell } pending = Pending::none;

  auto buy = [&](std::size_t t) {
    shares = cash / pts[t].price;
    cash = 0.0;
    rep.trades.push_back({pts[t].timestamp, pts[t].price, std::nullopt, std::nullopt});
  };
  auto sell = [&](std::size_t t) {
    cash = shares * pts[t].price;
    shares = 0.0;
    rep.trades.back().exit_timestamp = pts[t].timestamp;
    rep.trades.back().exit_price = pts[t].price;
  };

  const std::size_t w = params.window;
  for (std::size_t t = 0; t < pts.size(); ++t) {
    if (pending == Pending::buy) buy(t);
    if (pending == Pending::sell) sell(t);
    pending = Pending::none;

    if (t + 1 >= w) {
      double mean = 0.0;
      for (std::size_t k = t + 1 - w; k <= t; ++k) mean += pts[k].price;
      mean /= static_cast<double>(w);
      double var = 0.0;
      for (std::size_t k = t + 1 - w; k <= t; ++k) var += (pts[k].price - mean) * (pts[k].price - mean);
      const double sd = std::sqrt(var / static_cast<double>(w));

      // Flat window: no signal on this bar.
      if (sd > 1e-12 * std::abs(mean)) {
        const double z = (pts[t].price - mean) / sd;
        const bool flat = shares == 0.0;
        Pending signal = Pending::none;
        if (flat && z <= params.entry_z) signal = Pending::buy;
        if (!flat && z >= params.exit_z) signal = Pending::sell;
        if (params.execution == Execution::signal_close) {
          if (signal == Pending::buy) buy(t);
          if (signal == Pending::sell) sell(t);
        } else {
          pending = signal;
        }
      }
    }
    rep.equity_curve.push_back({pts[t].timestamp, cash + shares * pts[t].price});
  }

  rep.num_trades = rep.trades.size();
  const double final_equity = rep.equity_curve.back().value;
  rep.strategy_return_pct = (final_equity - params.initial_capital) * 100.0 / params.initial_capital;
  rep.benchmark_return_pct = (pts.back().price - pts.front().price) * 100.0 / pts.front().price;
  return rep;
}

/// Mean of per-series buy-and-hold % returns; all series must span the same
/// first and last timestamps.
inline double benchmark_average(std::span<const PriceSeries> series_list) {
  if (series_list.empty()) throw Error(ErrorKind::empty_input, "no series for benchmark");
  const auto& ref = series_list.front();
  double total = 0.0;
  for (const auto& s : series_list) {
    if (s.points.size() < 2) throw Error(ErrorKind::too_short, "series '" + s.ticker + "' has < 2 prices");
    if (ref.points.size() < 2 || s.points.front().timestamp != ref.points.front().timestamp ||
        s.points.back().timestamp != ref.points.back().timestamp) {
      throw Error(ErrorKind::validation, "series '" + s.ticker + "' covers a different window");
    }
    total += (s.points.back().price - s.points.front().price) * 100.0 / s.points.front().price;
  }
  return total / static_cast<double>(series_list.size());
}

struct CohortSummary {
  std::vector<std::string> tickers;
  double mean_entropy = 0.0;
  double mean_strategy_pct = 0.0;
  double mean_benchmark_pct = 0.0;
  double mean_excess_pct = 0.0;  // strategy minus benchmark
};

struct CohortReport {
  CohortSummary low;
  CohortSummary high;
  bool tie_at_split = false;  // entropies equal across the median boundary
};

/// Median split on entropy: the lower floor(n/2) tickers, ordered by
/// (entropy, ticker), form the low cohort.
inline CohortReport entropy_cohort_report(std::span<const PerformanceReport> reports,
                                          const std::map<std::string, double>& entropies) {
  if (reports.size() < 2) throw Error(ErrorKind::too_short, "cohort split needs at least 2 reports");
  struct Row {
    const PerformanceReport* rep;
    double entropy;
  };
  std::vector<Row> rows;
  for (const auto& r : reports) {
    auto it = entropies.find(r.ticker);
    if (it == entropies.end()) {
      throw Error(ErrorKind::validation, "no entropy for ticker '" + r.ticker + "'");
    }
    rows.push_back({&r, it->second});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.entropy != b.entropy) return a.entropy < b.entropy;
    return a.rep->ticker < b.rep->ticker;
  });

  const std::size_t half = rows.size() / 2;
  auto summarize = [](std::span<const Row> part) {
    CohortSummary s;
    for (const auto& r : part) {
      s.tickers.push_back(r.rep->ticker);
      s.mean_entropy += r.entropy;
      s.mean_strategy_pct += r.rep->strategy_return_pct;
      s.mean_benchmark_pct += r.rep->benchmark_return_pct;
    }
    const double n = static_cast<double>(part.size());
    s.mean_entropy /= n;
    s.mean_strategy_pct /= n;
    s.mean_benchmark_pct /= n;
    s.mean_excess_pct = s.mean_strategy_pct - s.mean_benchmark_pct;
    return s;
  };
  const std::span<const Row> all(rows);
  CohortReport out;
  out.low = summarize(all.first(half));
  out.high = summarize(all.subspan(half));
  out.tie_at_split = rows[half - 1].entropy == rows[half].entropy;
  return out;
}

}  // namespace predictability
