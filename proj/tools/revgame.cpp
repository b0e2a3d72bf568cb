// revgame: analyze review-game payoff matrices and run the self-play
// training experiments. Exit codes: 0 success, 1 usage or input parse
// error, 2 runtime failure.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "revgame/bimatrix.hpp"
#include "revgame/config.hpp"
#include "revgame/equilibrium.hpp"
#include "revgame/harness.hpp"
#include "revgame/report.hpp"
#include "revgame/simulator.hpp"
#include "revgame/text.hpp"

namespace {

using namespace revgame;

enum class LogLevel { Quiet = 0, Info = 1, Debug = 2 };

LogLevel log_level() {
  const char* env = std::getenv("REVGAME_LOG");
  if (!env) return LogLevel::Info;
  std::string v(env);
  if (v == "quiet") return LogLevel::Quiet;
  if (v == "debug") return LogLevel::Debug;
  return LogLevel::Info;
}

std::string profile_text(const Bimatrix& game, const StrategyProfile& p) {
  return "(" + game.row_labels()[p.row] + ", " + game.col_labels()[p.col] + ")";
}

std::string profile_kv(const std::vector<StrategyProfile>& ps) {
  std::string out;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(ps[i].row) + ":" + std::to_string(ps[i].col);
  }
  return out.empty() ? "none" : out;
}

std::string dist_kv(const std::vector<double>& d) {
  std::string out;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (i) out += ',';
    out += text::format_double(d[i]);
  }
  return out;
}

void print_profiles(std::ostream& out, const Bimatrix& game,
                    const std::vector<StrategyProfile>& ps) {
  if (ps.empty()) {
    out << "(none)\n";
    return;
  }
  for (const auto& p : ps) out << profile_text(game, p) << '\n';
}

int cmd_analyze(const std::string& matrix_path, bool strict_only, bool weak_only,
                bool mixed, double tol) {
  Bimatrix game = read_bimatrix_file(matrix_path);
  EquilibriumReport report = analyze_game(game, mixed, tol);

  std::ostream& out = std::cout;
  out << "game: " << game.rows() << "x" << game.cols() << " bimatrix\n";

  if (!weak_only) {
    out << "== strict pure Nash equilibria ==\n";
    print_profiles(out, game, report.strict_pure);
  }
  if (!strict_only) {
    out << "== weak pure Nash equilibria ==\n";
    print_profiles(out, game, report.weak_pure);
  }
  out << "== Pareto-efficient profiles ==\n";
  print_profiles(out, game, report.pareto);

  out << "== dominant strategies ==\n";
  auto dominance_text = [&](const std::optional<Dominance>& d,
                            const std::vector<std::string>& labels) {
    if (!d) return std::string("none");
    return labels[d->index] + (d->strict ? " (strict)" : " (weak)");
  };
  out << "player 1: " << dominance_text(report.dominant_row, game.row_labels()) << '\n';
  out << "player 2: " << dominance_text(report.dominant_col, game.col_labels()) << '\n';
  out << "dominant pair: "
      << (report.dominant_pair ? profile_text(game, *report.dominant_pair) : "none") << '\n';

  if (mixed) {
    out << "== mixed equilibria (support enumeration) ==\n";
    if (report.mixed.empty()) out << "(none)\n";
    for (const auto& m : report.mixed) {
      out << "row (";
      for (std::size_t i = 0; i < m.row_dist.size(); ++i)
        out << (i ? ", " : "") << text::fixed(m.row_dist[i], 6);
      out << ")  col (";
      for (std::size_t j = 0; j < m.col_dist.size(); ++j)
        out << (j ? ", " : "") << text::fixed(m.col_dist[j], 6);
      out << ")\n";
    }
  }

  out << "== key-value ==\n";
  out << "rows=" << game.rows() << '\n' << "cols=" << game.cols() << '\n';
  out << "strict_pure=" << profile_kv(report.strict_pure) << '\n';
  out << "weak_pure=" << profile_kv(report.weak_pure) << '\n';
  out << "pareto=" << profile_kv(report.pareto) << '\n';
  auto dominance_kv = [](const std::optional<Dominance>& d) {
    if (!d) return std::string("none");
    return std::to_string(d->index) + (d->strict ? ",strict" : ",weak");
  };
  out << "dominant_row=" << dominance_kv(report.dominant_row) << '\n';
  out << "dominant_col=" << dominance_kv(report.dominant_col) << '\n';
  out << "dominant_pair="
      << (report.dominant_pair ? std::to_string(report.dominant_pair->row) + ":" +
                                     std::to_string(report.dominant_pair->col)
                               : "none")
      << '\n';
  if (mixed) {
    out << "mixed_count=" << report.mixed.size() << '\n';
    for (std::size_t k = 0; k < report.mixed.size(); ++k) {
      out << "mixed_" << k << "_row=" << dist_kv(report.mixed[k].row_dist) << '\n';
      out << "mixed_" << k << "_col=" << dist_kv(report.mixed[k].col_dist) << '\n';
    }
  }
  return 0;
}

void print_run_summary(const RunSummary& s) {
  std::cout << "epochs: " << s.total_epochs << "  stats window: [" << s.stats_begin << ", "
            << (s.stats_begin + s.stats_count) << ")\n";
  std::cout << "reward mean " << text::fixed(s.reward_mean, 4) << "  sigma "
            << text::fixed(s.reward_stddev, 4) << '\n';
  std::cout << "diagonal frequ: (A,A) " << text::fixed(100 * s.pair_frequency[0][0], 2)
            << "%  (Rev,Rev) " << text::fixed(100 * s.pair_frequency[1][1], 2)
            << "%  (Rej,Rej) " << text::fixed(100 * s.pair_frequency[2][2], 2) << "%\n";
  std::cout << "delta_max " << text::fixed(s.delta_max, 4) << '\n';
}

ProgressFn make_progress() {
  if (log_level() == LogLevel::Quiet) return {};
  return [](long epoch, long total, double recent) {
    std::fprintf(stderr, "epoch %ld/%ld  recent reward %.4f\n", epoch, total, recent);
  };
}

int cmd_train(const std::string& config_path, const std::string& out_dir, bool has_seed,
              std::uint64_t seed) {
  ExperimentConfig cfg = load_config_file(config_path);
  if (has_seed) cfg.seed = seed;
  const int agent_threads = std::thread::hardware_concurrency() >= 2 ? 2 : 1;
  RunSummary summary = run_and_write<float>(cfg, out_dir, make_progress(), agent_threads);
  std::cout << "run written to " << out_dir << '\n';
  print_run_summary(summary);
  return 0;
}

int cmd_report(const std::string& run_dir, bool plots) {
  namespace fs = std::filesystem;
  const fs::path dir(run_dir);
  ExperimentConfig cfg = load_config_file(dir / kConfigFileName);
  auto records = read_epochs_csv(dir / kEpochsFileName);
  RunSummary summary = summarize_full(cfg, records);

  {
    std::ofstream out(dir / kSummaryFileName);
    if (!out) throw std::runtime_error("cannot write summary file");
    write_summary_kv(out, summary);
  }
  {
    std::ofstream out(dir / kFrequencyFileName);
    write_frequency_csv(out, summary.pair_frequency);
  }
  {
    std::ofstream out(dir / kMovingAverageFileName);
    write_moving_average_csv(out, summary);
  }
  if (plots) {
    std::ofstream(dir / kRewardPlotFileName) << svg_reward_curve(summary);
    std::ofstream(dir / kDecisionPlotFileName) << svg_decision_grid(summary.pair_frequency);
  }
  print_run_summary(summary);
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::vector<std::uint64_t>& seeds,
              const std::string& out_dir, unsigned jobs) {
  ExperimentConfig base = load_config_file(config_path);
  if (log_level() != LogLevel::Quiet)
    std::fprintf(stderr, "sweeping %zu seeds (%u workers)\n", seeds.size(),
                 jobs ? jobs : std::thread::hardware_concurrency());
  auto results = sweep_runs<float>(base, seeds, out_dir, jobs);
  for (const auto& [seed, summary] : results) {
    std::cout << "== seed " << seed << " ==\n";
    print_run_summary(summary);
  }
  return 0;
}

int cmd_compare(const std::string& current_dir, const std::string& proposed_dir) {
  RunComparison cmp = compare_runs(current_dir, proposed_dir);
  write_comparison(std::cout, cmp);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reviewer-reward game analysis and self-play experiments"};
  app.require_subcommand(1);

  auto* analyze = app.add_subcommand("analyze", "equilibrium analysis of a payoff matrix");
  std::string matrix_path;
  bool strict_only = false, weak_only = false, mixed = false;
  double tol = kEquilibriumTolerance;
  analyze->add_option("--matrix", matrix_path, "bimatrix text file")
      ->required()
      ->check(CLI::ExistingFile);
  auto* strict_flag = analyze->add_flag("--strict", strict_only, "print only strict equilibria");
  auto* weak_flag = analyze->add_flag("--weak", weak_only, "print only weak equilibria");
  strict_flag->excludes(weak_flag);
  analyze->add_flag("--mixed", mixed, "enumerate mixed equilibria (games up to 4x4)");
  analyze->add_option("--tol", tol, "tie tolerance for payoff comparisons");

  auto* train = app.add_subcommand("train", "run one self-play training experiment");
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  train->add_option("--config", config_path, "experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  train->add_option("--out", out_dir, "output run directory")->required();
  auto* seed_opt = train->add_option("--seed", seed, "override the config seed");

  auto* report = app.add_subcommand("report", "recompute reports for a finished run");
  std::string run_dir;
  bool plots = false;
  report->add_option("--run", run_dir, "run directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  report->add_flag("--plots", plots, "also regenerate the SVG plots");

  auto* sweep = app.add_subcommand("sweep", "run several seeds of one experiment");
  std::string sweep_config, sweep_out;
  std::vector<std::uint64_t> seeds;
  unsigned jobs = 0;
  sweep->add_option("--config", sweep_config, "experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--seeds", seeds, "comma-separated seed list")
      ->required()
      ->delimiter(',');
  sweep->add_option("--out", sweep_out, "output directory (one run dir per seed)")->required();
  sweep->add_option("--jobs", jobs, "max concurrent runs (default: hardware threads)");

  auto* compare = app.add_subcommand("compare", "compare a current-system and a proposed-system run");
  std::string cmp_current, cmp_proposed;
  compare->add_option("--current", cmp_current, "current-system run directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  compare->add_option("--proposed", cmp_proposed, "proposed-system run directory")
      ->required()
      ->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*analyze) return cmd_analyze(matrix_path, strict_only, weak_only, mixed, tol);
    if (*train) return cmd_train(config_path, out_dir, seed_opt->count() > 0, seed);
    if (*report) return cmd_report(run_dir, plots);
    if (*sweep) return cmd_sweep(sweep_config, seeds, sweep_out, jobs);
    if (*compare) return cmd_compare(cmp_current, cmp_proposed);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
