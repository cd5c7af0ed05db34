#pragma once

// Batch analysis pipeline behind the command-line tool.
//
// analyze() runs the requested command over ingested price series and
// returns an AnalysisReport; render_outputs() turns that report into named
// file bodies; write_outputs() publishes them atomically. run_pipeline()
// chains the three.
//
// Per-ticker work is isolated: an exception marks that ticker failed and the
// run continues. Configuration errors abort before any output is written.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "predictability/backtest.hpp"
#include "predictability/csv_io.hpp"
#include "predictability/ctw_entropy.hpp"
#include "predictability/error.hpp"
#include "predictability/lz_entropy.hpp"
#include "predictability/market_graphs.hpp"
#include "predictability/randomness_bds.hpp"
#include "predictability/series_model.hpp"
#include "predictability/stats_compare.hpp"
#include "predictability/synth_validation.hpp"

namespace predictability {

inline constexpr std::string_view kVersion = "0.1.0";

enum class Command { estimate, validate, bds, compare, graph, backtest, report };

inline std::string_view to_string(Command c) {
  switch (c) {
    case Command::estimate: return "estimate";
    case Command::validate: return "validate";
    case Command::bds: return "bds";
    case Command::compare: return "compare";
    case Command::graph: return "graph";
    case Command::backtest: return "backtest";
    case Command::report: return "report";
  }
  return "unknown";
}

struct RunConfig {
  Command command = Command::report;
  std::vector<std::filesystem::path> inputs;
  std::optional<std::filesystem::path> sectors;
  std::filesystem::path output_dir;
  int states = 4;
  int ctw_depth = kDefaultCtwDepth;
  BdsParams bds;
  int permutations = kDefaultPermutations;
  StrategyParams strategy;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool split_sessions = false;
  std::vector<std::size_t> validate_sizes{100, 250, 500, 1000, 2000, 4000, 7000, 10000};
  int validate_trials = 10;
};

struct TickerRecord {
  std::string ticker;
  Sampling sampling = Sampling::daily;
  std::string sector;
  std::size_t n_returns = 0;
  std::optional<double> lz_entropy;
  std::optional<double> ctw_entropy;
  std::optional<double> bds_statistic;
  std::optional<double> bds_p;
  bool ok = true;
  std::string reason;
};

struct SamplingSummary {
  Sampling sampling = Sampling::daily;
  std::size_t count = 0;
  std::optional<SummaryStats> lz;
  std::optional<SummaryStats> ctw;
  std::optional<double> entropy_bds_spearman;
};

struct SectorSummary {
  Sampling sampling = Sampling::daily;
  std::string sector;
  std::size_t count = 0;
  double ctw_mean = 0.0;
  double lz_mean = 0.0;
};

struct DensityComparison {
  std::string metric;
  std::size_t n_daily = 0;
  std::size_t n_intraday = 0;
  EqualityTestResult test;
};

struct GraphResult {
  Sampling sampling = Sampling::daily;
  CorrelationMatrix correlation;
  FilteredGraph mst;
  std::optional<FilteredGraph> pmfg;
};

struct BacktestEntry {
  Sampling sampling = Sampling::daily;
  std::optional<PerformanceReport> report;
  std::string ticker;
  std::string failure;
};

struct NamedCurve {
  std::string name;
  ConvergenceCurve curve;
};

struct AnalysisReport {
  RunConfig config;
  std::vector<TickerRecord> records;
  std::vector<SamplingSummary> summaries;
  std::vector<SectorSummary> sectors;
  std::vector<DensityComparison> comparisons;
  std::vector<GraphResult> graphs;
  std::vector<BacktestEntry> backtests;
  std::vector<std::pair<Sampling, CohortReport>> cohorts;
  std::vector<std::pair<Sampling, double>> benchmarks;
  std::vector<NamedCurve> curves;
  std::vector<std::string> failures;  // cross-sectional steps that failed
  std::vector<std::string> notes;     // steps skipped for lack of data
  std::size_t skipped_price_rows = 0;
  std::size_t malformed_rows = 0;
  std::size_t duplicate_rows = 0;
  std::string started_at;
  std::string finished_at;

  bool partial_failure() const {
    if (!failures.empty()) return true;
    for (const auto& r : records) {
      if (!r.ok) return true;
    }
    for (const auto& b : backtests) {
      if (!b.failure.empty()) return true;
    }
    return false;
  }

  int exit_code() const { return partial_failure() ? 2 : 0; }
};

namespace detail {

inline std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

template <typename F>
void parallel_for(std::size_t n, int jobs, F&& body) {
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
  };
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n);
  if (workers <= 1) {
    worker();
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
}

inline bool needs_entropy(Command c) { return c != Command::bds && c != Command::validate; }
inline bool needs_bds(Command c) {
  return c == Command::bds || c == Command::compare || c == Command::report;
}

}  // namespace detail

inline void validate_config(const RunConfig& c) {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::config, msg); };
  if (c.output_dir.empty()) fail("an output directory is required");
  if (c.states != 4 && c.states != 8) fail("--states must be 4 or 8");
  if (c.ctw_depth < 0 || c.ctw_depth > kMaxCtwDepth) fail("--ctw-depth must be in [0, 48]");
  if (c.bds.embedding_m < 2 || c.bds.embedding_m > 10) fail("--bds-m must be in [2, 10]");
  if (!(c.bds.epsilon_multiplier > 0.0)) fail("--bds-eps must be positive");
  if (c.permutations < 1) fail("--permutations must be positive");
  if (c.jobs < 1) fail("--jobs must be positive");
  try {
    validate(c.strategy);
  } catch (const Error& e) {
    fail(e.what());
  }
  if (c.command == Command::validate) {
    if (c.validate_trials < 1) fail("validation needs at least one trial");
    return;
  }
  if (c.inputs.empty()) fail("at least one --input is required");
  for (const auto& p : c.inputs) {
    if (!std::filesystem::is_regular_file(p)) fail("input '" + p.string() + "' is not readable");
  }
  if (c.sectors && !std::filesystem::is_regular_file(*c.sectors)) {
    fail("sector file '" + c.sectors->string() + "' is not readable");
  }
}

/// Log returns, optionally dropping returns that span two UTC calendar days.
inline ReturnSeries series_returns(const PriceSeries& s, bool split_sessions) {
  ReturnSeries r = log_returns(s);
  if (!split_sessions || s.sampling != Sampling::intraday) return r;
  ReturnSeries kept{s.ticker, {}};
  for (std::size_t t = 1; t < s.points.size(); ++t) {
    const auto day_prev = s.points[t - 1].timestamp / 86400;
    const auto day_cur = s.points[t].timestamp / 86400;
    if (day_prev == day_cur) kept.values.push_back(r.values[t - 1]);
  }
  return kept;
}

inline TickerRecord analyze_series(const PriceSeries& s, const RunConfig& c) {
  TickerRecord rec;
  rec.ticker = s.ticker;
  rec.sampling = s.sampling;
  try {
    const ReturnSeries returns = series_returns(s, c.split_sessions);
    rec.n_returns = returns.values.size();
    if (detail::needs_entropy(c.command)) {
      const SymbolSequence symbols = quantile_discretize(returns, c.states);
      rec.lz_entropy = lz_entropy_rate(symbols).bits_per_symbol;
      rec.ctw_entropy = ctw_entropy_rate(symbols, c.ctw_depth).bits_per_symbol;
    }
    if (detail::needs_bds(c.command)) {
      const BdsResult b = bds_statistic(returns, c.bds);
      rec.bds_statistic = b.statistic;
      rec.bds_p = b.p_value;
    }
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.reason = e.what();
  }
  return rec;
}

namespace detail {

inline std::vector<double> metric_values(const std::vector<TickerRecord>& records, Sampling s,
                                         std::optional<double> TickerRecord::*field) {
  std::vector<double> out;
  for (const auto& r : records) {
    if (r.ok && r.sampling == s && (r.*field)) out.push_back(*(r.*field));
  }
  return out;
}

inline void summarize(AnalysisReport& rep) {
  for (Sampling s : {Sampling::daily, Sampling::intraday}) {
    SamplingSummary sum;
    sum.sampling = s;
    for (const auto& r : rep.records) {
      if (r.sampling == s && r.ok) ++sum.count;
    }
    if (sum.count == 0) continue;
    const auto lz = metric_values(rep.records, s, &TickerRecord::lz_entropy);
    const auto ctw = metric_values(rep.records, s, &TickerRecord::ctw_entropy);
    if (lz.size() >= 2) sum.lz = summary_stats(lz);
    if (ctw.size() >= 2) sum.ctw = summary_stats(ctw);

    std::vector<double> ent, bds;
    for (const auto& r : rep.records) {
      if (r.ok && r.sampling == s && r.ctw_entropy && r.bds_statistic) {
        ent.push_back(*r.ctw_entropy);
        bds.push_back(*r.bds_statistic);
      }
    }
    if (ent.size() >= 3) {
      try {
        sum.entropy_bds_spearman = entropy_bds_association(ent, bds);
      } catch (const Error& e) {
        rep.notes.push_back(std::string("entropy-BDS association (") + std::string(to_string(s)) +
                            "): " + e.what());
      }
    }
    rep.summaries.push_back(sum);

    std::map<std::string, std::vector<const TickerRecord*>> by_sector;
    for (const auto& r : rep.records) {
      if (r.ok && r.sampling == s && r.ctw_entropy && r.lz_entropy && !r.sector.empty()) {
        by_sector[r.sector].push_back(&r);
      }
    }
    for (const auto& [sector, members] : by_sector) {
      SectorSummary ss{s, sector, members.size(), 0.0, 0.0};
      for (const auto* r : members) {
        ss.ctw_mean += *r->ctw_entropy;
        ss.lz_mean += *r->lz_entropy;
      }
      ss.ctw_mean /= static_cast<double>(members.size());
      ss.lz_mean /= static_cast<double>(members.size());
      rep.sectors.push_back(ss);
    }
  }
}

inline void compare_cohorts(AnalysisReport& rep) {
  const RunConfig& c = rep.config;
  struct Metric {
    const char* name;
    std::optional<double> TickerRecord::*field;
  };
  const Metric metrics[] = {{"ctw", &TickerRecord::ctw_entropy},
                            {"lz", &TickerRecord::lz_entropy},
                            {"bds", &TickerRecord::bds_statistic}};
  std::uint64_t stream = 0;
  for (const auto& m : metrics) {
    const auto daily = metric_values(rep.records, Sampling::daily, m.field);
    const auto intraday = metric_values(rep.records, Sampling::intraday, m.field);
    ++stream;
    if (daily.size() < kMinKdeSamples || intraday.size() < kMinKdeSamples) {
      const std::string msg = std::string("comparison of ") + m.name +
                              " needs at least 5 daily and 5 intraday estimates";
      if (c.command == Command::compare) throw Error(ErrorKind::config, msg);
      rep.notes.push_back(msg);
      continue;
    }
    try {
      DensityComparison dc;
      dc.metric = m.name;
      dc.n_daily = daily.size();
      dc.n_intraday = intraday.size();
      dc.test = density_equality_test(daily, intraday, c.permutations, splitmix64(c.seed + stream));
      rep.comparisons.push_back(std::move(dc));
    } catch (const Error& e) {
      rep.failures.push_back(std::string("comparison of ") + m.name + ": " + e.what());
    }
  }
}

inline void build_graphs(AnalysisReport& rep, const std::vector<PriceSeries>& all,
                         const std::map<std::string, std::string>& sectors) {
  for (Sampling s : {Sampling::daily, Sampling::intraday}) {
    std::vector<PriceSeries> cohort;
    for (const auto& p : all) {
      if (p.sampling == s) cohort.push_back(p);
    }
    if (cohort.size() < 3) {
      if (!cohort.empty()) {
        rep.notes.push_back("graph (" + std::string(to_string(s)) + "): fewer than 3 series");
      }
      continue;
    }
    try {
      check_aligned(cohort);
      std::vector<ReturnSeries> returns;
      for (const auto& p : cohort) returns.push_back(series_returns(p, rep.config.split_sessions));
      GraphResult g;
      g.sampling = s;
      g.correlation = correlation_matrix(returns);
      const WeightedGraph complete = distance_graph(g.correlation);
      g.mst = mst(complete);
      g.pmfg = pmfg(complete);
      for (FilteredGraph* f : {&g.mst, &*g.pmfg}) {
        for (std::size_t i = 0; i < f->nodes.size(); ++i) {
          auto sec = sectors.find(f->nodes[i]);
          if (sec != sectors.end()) f->attributes[i].sector = sec->second;
          for (const auto& r : rep.records) {
            if (r.ticker == f->nodes[i] && r.sampling == s && r.ok) f->attributes[i].entropy = r.ctw_entropy;
          }
        }
      }
      rep.graphs.push_back(std::move(g));
    } catch (const Error& e) {
      rep.failures.push_back("graph (" + std::string(to_string(s)) + "): " + e.what());
    }
  }
}

inline void run_backtests(AnalysisReport& rep, const std::vector<PriceSeries>& all) {
  for (const auto& p : all) {
    BacktestEntry b;
    b.sampling = p.sampling;
    b.ticker = p.ticker;
    try {
      b.report = mean_reversion_backtest(p, rep.config.strategy);
    } catch (const std::exception& e) {
      b.failure = e.what();
    }
    rep.backtests.push_back(std::move(b));
  }
  for (Sampling s : {Sampling::daily, Sampling::intraday}) {
    std::vector<PerformanceReport> reports;
    std::vector<PriceSeries> cohort;
    std::map<std::string, double> entropies;
    for (const auto& r : rep.records) {
      if (r.sampling == s && r.ok && r.ctw_entropy) entropies[r.ticker] = *r.ctw_entropy;
    }
    for (const auto& b : rep.backtests) {
      if (b.sampling == s && b.report && entropies.count(b.ticker)) reports.push_back(*b.report);
    }
    for (const auto& p : all) {
      if (p.sampling == s) cohort.push_back(p);
    }
    if (cohort.empty()) continue;
    try {
      rep.benchmarks.emplace_back(s, benchmark_average(cohort));
    } catch (const Error& e) {
      rep.notes.push_back("benchmark (" + std::string(to_string(s)) + "): " + e.what());
    }
    if (reports.size() < 2) {
      rep.notes.push_back("entropy cohorts (" + std::string(to_string(s)) + "): fewer than 2 tickers");
      continue;
    }
    rep.cohorts.emplace_back(s, entropy_cohort_report(reports, entropies));
  }
}

}  // namespace detail

/// Loads every input and merges the series. A (ticker, sampling) pair seen
/// in two inputs is a configuration error.
inline std::vector<PriceSeries> load_inputs(const RunConfig& c, AnalysisReport& rep) {
  std::vector<PriceSeries> all;
  std::set<std::pair<std::string, Sampling>> seen;
  for (const auto& path : c.inputs) {
    IngestResult in;
    try {
      in = ingest_csv(path);
    } catch (const Error& e) {
      throw Error(ErrorKind::config, e.what());
    }
    rep.skipped_price_rows += in.skipped_price_rows;
    rep.malformed_rows += in.malformed_rows;
    rep.duplicate_rows += in.duplicate_rows;
    for (auto& s : in.series) {
      if (!seen.insert({s.ticker, s.sampling}).second) {
        throw Error(ErrorKind::config, "ticker '" + s.ticker + "' (" + std::string(to_string(s.sampling)) +
                                           ") appears in more than one input");
      }
      all.push_back(std::move(s));
    }
  }
  std::sort(all.begin(), all.end(), [](const PriceSeries& a, const PriceSeries& b) {
    return std::pair(a.ticker, a.sampling) < std::pair(b.ticker, b.sampling);
  });
  return all;
}

inline AnalysisReport analyze(const RunConfig& config) {
  validate_config(config);
  AnalysisReport rep;
  rep.config = config;
  rep.started_at = detail::utc_now();

  if (config.command == Command::validate) {
    const SyntheticSource constant{SourceKind::constant, config.states, std::nullopt, config.seed};
    const SyntheticSource uniform{SourceKind::uniform_iid, config.states, std::nullopt, config.seed};
    rep.curves.push_back({"constant", convergence_curve(constant, config.validate_sizes,
                                                        config.validate_trials, config.ctw_depth)});
    rep.curves.push_back({"uniform", convergence_curve(uniform, config.validate_sizes,
                                                       config.validate_trials, config.ctw_depth)});
    rep.finished_at = detail::utc_now();
    return rep;
  }

  const std::vector<PriceSeries> all = load_inputs(config, rep);
  if (all.empty()) throw Error(ErrorKind::config, "inputs contain no tickers");
  std::map<std::string, std::string> sectors;
  if (config.sectors) sectors = read_sectors(*config.sectors);

  rep.records.resize(all.size());
  detail::parallel_for(all.size(), config.jobs, [&](std::size_t i) {
    rep.records[i] = analyze_series(all[i], config);
  });
  for (auto& r : rep.records) {
    auto it = sectors.find(r.ticker);
    if (it != sectors.end()) r.sector = it->second;
  }

  detail::summarize(rep);
  const Command cmd = config.command;
  if (cmd == Command::compare || cmd == Command::report) detail::compare_cohorts(rep);
  if (cmd == Command::graph || cmd == Command::report) detail::build_graphs(rep, all, sectors);
  if (cmd == Command::backtest || cmd == Command::report) detail::run_backtests(rep, all);

  rep.finished_at = detail::utc_now();
  return rep;
}

namespace detail {

class CsvBuilder {
 public:
  CsvBuilder(const RunConfig& c, std::initializer_list<std::string_view> header) {
    out_ << "# seed=" << c.seed << " command=" << to_string(c.command) << '\n';
    row(header);
  }

  template <typename Range>
  void row(const Range& cells) {
    bool first = true;
    for (const auto& cell : cells) {
      if (!first) out_ << ',';
      out_ << csv_cell(cell);
      first = false;
    }
    out_ << '\n';
  }

  void row(std::initializer_list<std::string_view> cells) { row<std::initializer_list<std::string_view>>(cells); }

  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

inline std::string fmt(double v) { return format_number(v); }
inline std::string fmt(std::size_t v) { return std::to_string(v); }
inline std::string fmt(std::int64_t v) { return std::to_string(v); }

inline std::string dot_graph(const RunConfig& c, const FilteredGraph& g, const CorrelationMatrix& corr) {
  std::ostringstream out;
  out << "# seed=" << c.seed << " command=" << to_string(c.command) << '\n';
  out << "graph " << to_string(g.kind) << " {\n";
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    out << "  \"" << g.nodes[i] << "\" [sector=\"" << g.attributes[i].sector << "\"";
    if (g.attributes[i].entropy) out << ", entropy=" << format_number(*g.attributes[i].entropy);
    out << "];\n";
  }
  for (const Edge& e : g.edges) {
    out << "  \"" << g.nodes[e.u] << "\" -- \"" << g.nodes[e.v] << "\" [distance="
        << format_number(e.distance) << ", rho=" << format_number(corr.at(e.u, e.v)) << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace detail

/// File name -> contents for every output of the report. Everything except
/// the provenance block of report.json is a function of config, inputs and
/// seed only.
inline std::map<std::string, std::string> render_outputs(const AnalysisReport& rep) {
  using detail::fmt;
  using json = nlohmann::ordered_json;
  const RunConfig& c = rep.config;
  std::map<std::string, std::string> files;
  const Command cmd = c.command;

  auto status = [](bool ok) { return std::string(ok ? "ok" : "failed"); };

  if (!rep.records.empty() && detail::needs_entropy(cmd)) {
    detail::CsvBuilder csv(c, {"ticker", "sampling", "sector", "n_returns", "lz_entropy", "ctw_entropy",
                               "status", "reason"});
    for (const auto& r : rep.records) {
      csv.row(std::vector<std::string>{r.ticker, std::string(to_string(r.sampling)), r.sector,
                                       fmt(r.n_returns), format_optional(r.lz_entropy),
                                       format_optional(r.ctw_entropy), status(r.ok), r.reason});
    }
    files["entropy.csv"] = csv.str();
  }
  if (!rep.records.empty() && detail::needs_bds(cmd)) {
    detail::CsvBuilder csv(c, {"ticker", "sampling", "n_returns", "bds_statistic", "bds_p", "status",
                               "reason"});
    for (const auto& r : rep.records) {
      csv.row(std::vector<std::string>{r.ticker, std::string(to_string(r.sampling)), fmt(r.n_returns),
                                       format_optional(r.bds_statistic), format_optional(r.bds_p),
                                       status(r.ok), r.reason});
    }
    files["bds.csv"] = csv.str();
  }
  if (!rep.summaries.empty()) {
    detail::CsvBuilder csv(c, {"sampling", "count", "lz_mean", "lz_sd", "ctw_mean", "ctw_sd",
                               "entropy_bds_spearman"});
    for (const auto& s : rep.summaries) {
      csv.row(std::vector<std::string>{
          std::string(to_string(s.sampling)), fmt(s.count),
          s.lz ? fmt(s.lz->mean) : "", s.lz ? fmt(s.lz->sd) : "",
          s.ctw ? fmt(s.ctw->mean) : "", s.ctw ? fmt(s.ctw->sd) : "",
          format_optional(s.entropy_bds_spearman)});
    }
    files["summary.csv"] = csv.str();
  }
  if (!rep.sectors.empty()) {
    detail::CsvBuilder csv(c, {"sampling", "sector", "count", "ctw_mean", "lz_mean"});
    for (const auto& s : rep.sectors) {
      csv.row(std::vector<std::string>{std::string(to_string(s.sampling)), s.sector, fmt(s.count),
                                       fmt(s.ctw_mean), fmt(s.lz_mean)});
    }
    files["sectors.csv"] = csv.str();
  }
  if (!rep.comparisons.empty()) {
    detail::CsvBuilder csv(c, {"metric", "n_daily", "n_intraday", "bandwidth", "statistic", "p_value",
                               "permutations"});
    for (const auto& d : rep.comparisons) {
      csv.row(std::vector<std::string>{d.metric, fmt(d.n_daily), fmt(d.n_intraday), fmt(d.test.bandwidth),
                                       fmt(d.test.statistic), fmt(d.test.p_value),
                                       std::to_string(d.test.num_permutations)});
      detail::CsvBuilder dens(c, {"x", "daily", "intraday", "band_low", "band_high"});
      for (std::size_t g = 0; g < d.test.grid.size(); ++g) {
        dens.row(std::vector<std::string>{fmt(d.test.grid[g]), fmt(d.test.density_a[g]),
                                          fmt(d.test.density_b[g]), fmt(d.test.reference_band_low[g]),
                                          fmt(d.test.reference_band_high[g])});
      }
      files["density_" + d.metric + ".csv"] = dens.str();
    }
    files["compare.csv"] = csv.str();
  }
  for (const auto& g : rep.graphs) {
    const std::string tag = std::string(to_string(g.sampling));
    {
      std::vector<std::string_view> header{"ticker"};
      for (const auto& t : g.correlation.tickers) header.push_back(t);
      std::ostringstream out;
      out << "# seed=" << c.seed << " command=" << to_string(cmd) << '\n';
      for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << csv_cell(header[i]);
      out << '\n';
      for (std::size_t i = 0; i < g.correlation.size(); ++i) {
        out << csv_cell(g.correlation.tickers[i]);
        for (std::size_t j = 0; j < g.correlation.size(); ++j) out << ',' << fmt(g.correlation.at(i, j));
        out << '\n';
      }
      files["correlation_" + tag + ".csv"] = out.str();
    }
    std::vector<const FilteredGraph*> filtered{&g.mst};
    if (g.pmfg) filtered.push_back(&*g.pmfg);
    for (const FilteredGraph* f : filtered) {
      const std::string base = "graph_" + tag + "_" + std::string(to_string(f->kind));
      detail::CsvBuilder csv(c, {"source", "target", "distance", "rho"});
      for (const Edge& e : f->edges) {
        csv.row(std::vector<std::string>{f->nodes[e.u], f->nodes[e.v], fmt(e.distance),
                                         fmt(g.correlation.at(e.u, e.v))});
      }
      files[base + ".csv"] = csv.str();
      files[base + ".dot"] = detail::dot_graph(c, *f, g.correlation);
    }
  }
  if (!rep.backtests.empty()) {
    detail::CsvBuilder summary(c, {"ticker", "sampling", "strategy_return_pct", "benchmark_return_pct",
                                   "num_trades", "status", "reason"});
    detail::CsvBuilder trades(c, {"ticker", "sampling", "entry_timestamp", "entry_price", "exit_timestamp",
                                  "exit_price"});
    detail::CsvBuilder equity(c, {"ticker", "sampling", "timestamp", "equity"});
    for (const auto& b : rep.backtests) {
      const std::string samp(to_string(b.sampling));
      if (!b.report) {
        summary.row(std::vector<std::string>{b.ticker, samp, "", "", "", "failed", b.failure});
        continue;
      }
      const auto& r = *b.report;
      summary.row(std::vector<std::string>{r.ticker, samp, fmt(r.strategy_return_pct),
                                           fmt(r.benchmark_return_pct), fmt(r.num_trades), "ok", ""});
      for (const auto& t : r.trades) {
        trades.row(std::vector<std::string>{
            r.ticker, samp, fmt(t.entry_timestamp), fmt(t.entry_price),
            t.exit_timestamp ? fmt(*t.exit_timestamp) : "", format_optional(t.exit_price)});
      }
      for (const auto& e : r.equity_curve) {
        equity.row(std::vector<std::string>{r.ticker, samp, fmt(e.timestamp), fmt(e.value)});
      }
    }
    files["backtest.csv"] = summary.str();
    files["trades.csv"] = trades.str();
    files["equity.csv"] = equity.str();
  }
  if (!rep.cohorts.empty()) {
    detail::CsvBuilder csv(c, {"sampling", "cohort", "count", "mean_entropy", "mean_strategy_pct",
                               "mean_benchmark_pct", "mean_excess_pct", "tie_at_split", "tickers"});
    for (const auto& [s, cr] : rep.cohorts) {
      for (const auto& [name, part] : {std::pair{"low", &cr.low}, std::pair{"high", &cr.high}}) {
        std::string tickers;
        for (const auto& t : part->tickers) tickers += (tickers.empty() ? "" : " ") + t;
        csv.row(std::vector<std::string>{std::string(to_string(s)), name, fmt(part->tickers.size()),
                                         fmt(part->mean_entropy), fmt(part->mean_strategy_pct),
                                         fmt(part->mean_benchmark_pct), fmt(part->mean_excess_pct),
                                         cr.tie_at_split ? "true" : "false", tickers});
      }
    }
    files["cohorts.csv"] = csv.str();
  }
  for (const auto& nc : rep.curves) {
    detail::CsvBuilder csv(c, {"size", "lz_mean", "ctw_mean", "true_entropy"});
    for (std::size_t i = 0; i < nc.curve.sizes.size(); ++i) {
      csv.row(std::vector<std::string>{fmt(nc.curve.sizes[i]), fmt(nc.curve.estimates_lz[i]),
                                       fmt(nc.curve.estimates_ctw[i]), fmt(nc.curve.true_entropy)});
    }
    files["convergence_" + nc.name + ".csv"] = csv.str();
  }

  json body;
  body["command"] = std::string(to_string(cmd));
  body["seed"] = c.seed;
  body["parameters"] = {
      {"states", c.states},
      {"ctw_depth", c.ctw_depth},
      {"bds_m", c.bds.embedding_m},
      {"bds_eps_multiplier", c.bds.epsilon_multiplier},
      {"permutations", c.permutations},
      {"split_sessions", c.split_sessions},
      {"strategy",
       {{"window", c.strategy.window},
        {"entry_z", c.strategy.entry_z},
        {"exit_z", c.strategy.exit_z},
        {"initial_capital", c.strategy.initial_capital},
        {"execution", c.strategy.execution == Execution::signal_close ? "signal_close" : "next_bar"}}}};
  json records = json::array();
  for (const auto& r : rep.records) {
    json j{{"ticker", r.ticker}, {"sampling", std::string(to_string(r.sampling))}, {"n", r.n_returns}};
    if (!r.sector.empty()) j["sector"] = r.sector;
    j["lz_entropy"] = r.lz_entropy ? json(*r.lz_entropy) : json(nullptr);
    j["ctw_entropy"] = r.ctw_entropy ? json(*r.ctw_entropy) : json(nullptr);
    j["bds_statistic"] = r.bds_statistic ? json(*r.bds_statistic) : json(nullptr);
    j["bds_p"] = r.bds_p ? json(*r.bds_p) : json(nullptr);
    j["status"] = status(r.ok);
    if (!r.ok) j["reason"] = r.reason;
    records.push_back(j);
  }
  body["records"] = records;
  json summaries = json::array();
  for (const auto& s : rep.summaries) {
    json j{{"sampling", std::string(to_string(s.sampling))}, {"count", s.count}};
    if (s.lz) j["lz"] = {{"mean", s.lz->mean}, {"sd", s.lz->sd}};
    if (s.ctw) j["ctw"] = {{"mean", s.ctw->mean}, {"sd", s.ctw->sd}};
    if (s.entropy_bds_spearman) j["entropy_bds_spearman"] = *s.entropy_bds_spearman;
    summaries.push_back(j);
  }
  body["summaries"] = summaries;
  json comparisons = json::array();
  for (const auto& d : rep.comparisons) {
    comparisons.push_back({{"metric", d.metric},
                           {"n_daily", d.n_daily},
                           {"n_intraday", d.n_intraday},
                           {"statistic", d.test.statistic},
                           {"p_value", d.test.p_value},
                           {"bandwidth", d.test.bandwidth},
                           {"permutations", d.test.num_permutations},
                           {"method", "permutation test on integrated squared density difference"}});
  }
  body["comparisons"] = comparisons;
  json graphs = json::array();
  for (const auto& g : rep.graphs) {
    auto total = [](const FilteredGraph& f) {
      double t = 0.0;
      for (const Edge& e : f.edges) t += e.distance;
      return t;
    };
    json j{{"sampling", std::string(to_string(g.sampling))},
           {"nodes", g.correlation.size()},
           {"mst_edges", g.mst.edges.size()},
           {"mst_total_distance", total(g.mst)}};
    if (g.pmfg) {
      j["pmfg_edges"] = g.pmfg->edges.size();
      j["pmfg_total_distance"] = total(*g.pmfg);
    }
    graphs.push_back(j);
  }
  body["graphs"] = graphs;
  json cohorts = json::array();
  for (const auto& [s, cr] : rep.cohorts) {
    auto part = [](const CohortSummary& p) {
      return json{{"tickers", p.tickers},
                  {"mean_entropy", p.mean_entropy},
                  {"mean_strategy_pct", p.mean_strategy_pct},
                  {"mean_benchmark_pct", p.mean_benchmark_pct},
                  {"mean_excess_pct", p.mean_excess_pct}};
    };
    cohorts.push_back({{"sampling", std::string(to_string(s))},
                       {"low", part(cr.low)},
                       {"high", part(cr.high)},
                       {"tie_at_split", cr.tie_at_split}});
  }
  body["entropy_cohorts"] = cohorts;
  json benchmarks = json::object();
  for (const auto& [s, v] : rep.benchmarks) benchmarks[std::string(to_string(s))] = v;
  body["benchmark_average_pct"] = benchmarks;
  body["failures"] = rep.failures;
  body["notes"] = rep.notes;
  body["exit_code"] = rep.exit_code();
  std::vector<std::string> names;
  for (const auto& [name, content] : files) names.push_back(name);
  body["files"] = names;

  json inputs = json::array();
  for (const auto& p : c.inputs) inputs.push_back(p.string());
  body["provenance"] = {
      {"version", std::string(kVersion)},
      {"seed", c.seed},
      {"inputs", inputs},
      {"sectors", c.sectors ? json(c.sectors->string()) : json(nullptr)},
      {"output_dir", c.output_dir.string()},
      {"ingest", {{"skipped_price_rows", rep.skipped_price_rows},
                  {"malformed_rows", rep.malformed_rows},
                  {"duplicate_rows", rep.duplicate_rows}}},
      {"session_handling", c.split_sessions ? "overnight returns excluded" : "overnight returns included"},
      {"density_test", "permutation test with exact permutation reference bands"},
      {"timestamps", {{"started_at", rep.started_at}, {"finished_at", rep.finished_at}}}};
  files["report.json"] = body.dump(2) + "\n";
  return files;
}

/// Writes every file into a staging directory next to `dir`, then renames
/// each into place.
inline void write_outputs(const std::filesystem::path& dir,
                          const std::map<std::string, std::string>& files) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const auto tick = std::chrono::steady_clock::now().time_since_epoch().count();
  const fs::path staging = dir / (".staging-" + std::to_string(tick));
  fs::create_directories(staging);
  try {
    for (const auto& [name, content] : files) {
      std::ofstream out(staging / name, std::ios::binary);
      out << content;
      if (!out) throw Error(ErrorKind::io, "failed to write '" + name + "'");
    }
    for (const auto& [name, content] : files) fs::rename(staging / name, dir / name);
  } catch (...) {
    fs::remove_all(staging);
    throw;
  }
  fs::remove_all(staging);
}

inline AnalysisReport run_pipeline(const RunConfig& config) {
  AnalysisReport rep = analyze(config);
  write_outputs(config.output_dir, render_outputs(rep));
  return rep;
}

}  // namespace predictability
