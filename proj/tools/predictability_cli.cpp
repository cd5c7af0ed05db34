// Command-line front end for the predictability analyses.
//
//   predictability report --input daily.csv --input intraday.csv --out results/
//   predictability synth --out data/
//
// Exit codes: 0 success, 1 configuration error, 2 partial failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "predictability/pipeline.hpp"
#include "predictability/synthetic_market.hpp"

namespace pr = predictability;
namespace fs = std::filesystem;

namespace {

struct CliState {
  pr::RunConfig config;
  std::vector<std::string> inputs;
  std::string sectors;
  std::string out;
  std::string execution = "signal_close";
};

void add_common(CLI::App* sub, CliState& s) {
  sub->add_option("--input", s.inputs, "price CSV (timestamp,ticker,close); repeatable");
  sub->add_option("--out", s.out, "output directory")->required();
  sub->add_option("--states", s.config.states, "discretization states (4 or 8)");
  sub->add_option("--ctw-depth", s.config.ctw_depth, "CTW context depth");
  sub->add_option("--seed", s.config.seed, "seed for every randomized step");
  sub->add_option("--jobs", s.config.jobs, "worker threads for per-ticker work");
  sub->add_flag("--split-sessions", s.config.split_sessions,
                "drop intraday returns that cross a calendar day");
  sub->add_option("--sectors", s.sectors, "ticker,sector CSV");
}

void add_bds(CLI::App* sub, CliState& s) {
  sub->add_option("--bds-m", s.config.bds.embedding_m, "BDS embedding dimension");
  sub->add_option("--bds-eps", s.config.bds.epsilon_multiplier, "BDS radius in sample standard deviations");
}

void add_strategy(CLI::App* sub, CliState& s) {
  sub->add_option("--window", s.config.strategy.window, "rolling window in bars");
  sub->add_option("--entry-z", s.config.strategy.entry_z, "enter long at or below this z-score");
  sub->add_option("--exit-z", s.config.strategy.exit_z, "exit at or above this z-score");
  sub->add_option("--capital", s.config.strategy.initial_capital, "initial capital");
  sub->add_option("--execution", s.execution, "signal_close or next_bar")
      ->check(CLI::IsMember({"signal_close", "next_bar"}));
}

int run_synth(const fs::path& out, const pr::SyntheticMarketParams& params) {
  const pr::SyntheticMarket market = pr::generate_market(params);
  fs::create_directories(out);
  std::ofstream daily(out / "daily.csv"), intraday(out / "intraday.csv"), sectors(out / "sectors.csv");
  pr::write_price_csv(daily, market.daily);
  pr::write_price_csv(intraday, market.intraday);
  pr::write_sectors_csv(sectors, market.sectors);
  if (!daily || !intraday || !sectors) {
    std::cerr << "error: failed to write synthetic data under " << out << '\n';
    return 1;
  }
  std::cout << "wrote " << market.daily.size() << " daily and " << market.intraday.size()
            << " intraday series to " << out.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entropy-rate, randomness and network analysis of price series"};
  app.set_version_flag("--version", std::string(pr::kVersion));
  app.require_subcommand(1);

  CliState state;
  struct Spec {
    pr::Command command;
    const char* help;
    bool bds;
    bool strategy;
  };
  const Spec specs[] = {
      {pr::Command::estimate, "LZ and CTW entropy rates per ticker", false, false},
      {pr::Command::validate, "estimator convergence curves on synthetic sources", false, false},
      {pr::Command::bds, "BDS iid test per ticker", true, false},
      {pr::Command::compare, "daily vs intraday density comparison", true, false},
      {pr::Command::graph, "correlation MST and PMFG per sampling", false, false},
      {pr::Command::backtest, "mean-reversion backtest and entropy cohorts", false, true},
      {pr::Command::report, "every analysis above", true, true},
  };
  std::vector<std::pair<CLI::App*, pr::Command>> subs;
  for (const auto& spec : specs) {
    CLI::App* sub = app.add_subcommand(std::string(pr::to_string(spec.command)), spec.help);
    add_common(sub, state);
    if (spec.bds) add_bds(sub, state);
    if (spec.command == pr::Command::compare || spec.command == pr::Command::report) {
      sub->add_option("--permutations", state.config.permutations, "permutations for the equality test");
    }
    if (spec.strategy) add_strategy(sub, state);
    if (spec.command == pr::Command::validate) {
      sub->add_option("--sizes", state.config.validate_sizes, "sequence lengths");
      sub->add_option("--trials", state.config.validate_trials, "trials per length");
    }
    subs.emplace_back(sub, spec.command);
  }

  pr::SyntheticMarketParams synth;
  std::string synth_out;
  CLI::App* synth_cmd = app.add_subcommand("synth", "write the deterministic 91-ticker synthetic dataset");
  synth_cmd->add_option("--out", synth_out, "output directory")->required();
  synth_cmd->add_option("--seed", synth.seed, "generator seed");
  synth_cmd->add_option("--tickers", synth.tickers, "number of tickers");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  if (synth_cmd->parsed()) return run_synth(synth_out, synth);

  for (const auto& [sub, command] : subs) {
    if (sub->parsed()) state.config.command = command;
  }
  pr::RunConfig& config = state.config;
  for (const auto& in : state.inputs) config.inputs.emplace_back(in);
  if (!state.sectors.empty()) config.sectors = state.sectors;
  config.output_dir = state.out;
  config.strategy.execution =
      state.execution == "next_bar" ? pr::Execution::next_bar : pr::Execution::signal_close;

  try {
    const pr::AnalysisReport report = pr::run_pipeline(config);
    for (const auto& r : report.records) {
      if (!r.ok) std::cerr << "warning: " << r.ticker << " (" << pr::to_string(r.sampling) << "): " << r.reason << '\n';
    }
    for (const auto& b : report.backtests) {
      if (!b.failure.empty()) std::cerr << "warning: backtest " << b.ticker << ": " << b.failure << '\n';
    }
    for (const auto& f : report.failures) std::cerr << "warning: " << f << '\n';
    for (const auto& n : report.notes) std::cerr << "note: " << n << '\n';
    std::cout << "wrote results to " << config.output_dir.string() << '\n';
    return report.exit_code();
  } catch (const pr::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
