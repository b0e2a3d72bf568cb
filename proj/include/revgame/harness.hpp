#pragma once

#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "revgame/config.hpp"
#include "revgame/report.hpp"
#include "revgame/simulator.hpp"

namespace revgame {

using ProgressFn = std::function<void(long epoch, long total, double recent_mean)>;

// Executes one experiment and writes the complete run directory: resolved
// config, epoch CSV stream, both agent checkpoints, and the report files.
// agent_threads=2 trains the two agents on separate threads; the outputs are
// identical either way.
template <class Scalar = float>
RunSummary run_and_write(const ExperimentConfig& cfg, const std::filesystem::path& run_dir,
                         const ProgressFn& progress = {}, int agent_threads = 1) {
  cfg.validate();
  namespace fs = std::filesystem;
  fs::create_directories(run_dir);
  write_config_file(run_dir / kConfigFileName, cfg);

  auto [agent1, agent2] = make_agents<Scalar>(cfg);

  EpochCsvWriter csv(run_dir / kEpochsFileName);
  double running = 0.0;
  long seen = 0;
  const long report_every = 10000;
  auto sink = [&](const EpochRecord& r) {
    csv(r);
    running += r.reward;
    ++seen;
    if (progress && (seen % report_every == 0 || seen == cfg.epochs)) {
      progress(seen, cfg.epochs, running / report_every);
      running = 0.0;
    }
  };

  RunSummary summary = run_experiment(cfg, agent1, agent2, sink, agent_threads);
  csv.close();

  save_checkpoint_file(run_dir / kAgent1CheckpointName, agent1.net, agent1.adam);
  save_checkpoint_file(run_dir / kAgent2CheckpointName, agent2.net, agent2.adam);
  emit_report(summary, run_dir);
  return summary;
}

// Independent seeded runs of the same experiment, written to
// out_dir/seed_<n>/ and executed on up to max_workers threads. Runs share no
// mutable state, so the outputs are identical to running them sequentially.
template <class Scalar = float>
std::vector<std::pair<std::uint64_t, RunSummary>> sweep_runs(
    ExperimentConfig base, const std::vector<std::uint64_t>& seeds,
    const std::filesystem::path& out_dir, unsigned max_workers = 0) {
  base.validate();
  if (seeds.empty()) throw std::invalid_argument("sweep needs at least one seed");
  std::filesystem::create_directories(out_dir);

  if (max_workers == 0) max_workers = std::thread::hardware_concurrency();
  max_workers = std::max(1u, std::min<unsigned>(max_workers, seeds.size()));

  std::vector<std::pair<std::uint64_t, RunSummary>> results(seeds.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::once_flag error_once;

  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= seeds.size()) return;
      try {
        ExperimentConfig cfg = base;
        cfg.seed = seeds[i];
        auto dir = out_dir / ("seed_" + std::to_string(seeds[i]));
        results[i] = {seeds[i], run_and_write<Scalar>(cfg, dir)};
      } catch (...) {
        std::call_once(error_once, [&] { first_error = std::current_exception(); });
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(max_workers);
  for (unsigned w = 0; w < max_workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

}  // namespace revgame
