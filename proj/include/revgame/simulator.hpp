#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <semaphore>
#include <span>
#include <stdexcept>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "revgame/decision.hpp"
#include "revgame/policy_net.hpp"
#include "revgame/quality.hpp"
#include "revgame/random.hpp"
#include "revgame/rewards.hpp"

namespace revgame {

enum class RewardSystem { Current, Proposed };

constexpr std::string_view to_string(RewardSystem s) {
  return s == RewardSystem::Current ? "current" : "proposed";
}

inline RewardSystem parse_reward_system(std::string_view s) {
  if (s == "current") return RewardSystem::Current;
  if (s == "proposed") return RewardSystem::Proposed;
  throw std::invalid_argument("unknown reward system: \"" + std::string(s) + "\"");
}

// Full description of one self-play training run.
struct ExperimentConfig {
  RewardSystem system = RewardSystem::Current;
  long epochs = 100000;
  double learning_rate = 1e-5;
  int hidden_width = 256;
  int residual_blocks = 10;
  double lambda_aux = 0.05;
  double time_discount = 0.2;  // unit-scale d_t
  QualityModel quality{};
  int moving_average_window = 100;
  double stats_window_fraction = 0.2;
  std::uint64_t seed = 0;

  void validate() const {
    quality.validate();
    if (epochs < 0) throw std::invalid_argument("epochs must be nonnegative");
    if (epochs > 0 && epochs < moving_average_window)
      throw std::invalid_argument("epochs must be at least the moving-average window");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
      throw std::invalid_argument("learning_rate must be positive");
    if (hidden_width < 1) throw std::invalid_argument("hidden_width must be >= 1");
    if (residual_blocks < 0) throw std::invalid_argument("residual_blocks must be >= 0");
    if (!std::isfinite(lambda_aux) || lambda_aux < 0.0)
      throw std::invalid_argument("lambda_aux must be nonnegative");
    if (!std::isfinite(time_discount) || time_discount < 0.0 || time_discount >= 1.0)
      throw std::invalid_argument("d_t must satisfy 0 <= d_t < 1");
    if (moving_average_window < 1)
      throw std::invalid_argument("window must be >= 1");
    if (!(stats_window_fraction > 0.0) || stats_window_fraction > 1.0)
      throw std::invalid_argument("stats_window_fraction must be in (0, 1]");
  }

  bool operator==(const ExperimentConfig&) const = default;
};

// One epoch of the environment: latent quality, per-reviewer biases and the
// resulting estimated scores, plus the decision a perfect reviewer would make.
struct PaperSample {
  double true_quality = 0.0;
  double bias1 = 0.0, bias2 = 0.0;
  double est1 = 0.0, est2 = 0.0;
  Decision true_decision = Decision::Reject;
};

template <class Rng>
PaperSample sample_paper(const QualityModel& quality, Rng& rng) {
  PaperSample p;
  p.true_quality = uniform01(rng);
  p.bias1 = uniform_range(rng, -quality.bias_halfwidth, quality.bias_halfwidth);
  p.bias2 = uniform_range(rng, -quality.bias_halfwidth, quality.bias_halfwidth);
  p.est1 = p.true_quality + p.bias1;
  p.est2 = p.true_quality + p.bias2;
  p.true_decision = decide(p.true_quality, quality);
  return p;
}

struct EpochRecord {
  long epoch = 0;
  double true_quality = 0.0;
  double bias1 = 0.0, bias2 = 0.0;
  double est1 = 0.0, est2 = 0.0;
  Decision true_decision = Decision::Reject;
  Decision decision1 = Decision::Reject;
  Decision decision2 = Decision::Reject;
  double reward = 0.0;
  double loss1 = 0.0, loss2 = 0.0;

  bool operator==(const EpochRecord&) const = default;
};

struct AgentLoss {
  double loss = 0.0;
  std::array<double, 3> logit_grad{};
};

// Per-agent loss: the score-function surrogate -R * log p(own action) plus
// lambda times the cross-entropy against the true decision, with the exact
// softmax gradient of both terms.
inline AgentLoss agent_loss(double reward, Decision own_decision, double log_prob_own,
                            const std::array<double, 3>& probs, Decision true_decision,
                            double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0)
    throw std::invalid_argument("lambda must be nonnegative");
  detail::check_distribution(probs);

  const int own = ordinal(own_decision);
  const int truth = ordinal(true_decision);
  const double p_true = probs[truth];
  const double log_true = p_true > 0.0 ? std::max(std::log(p_true), kLogProbFloor)
                                       : kLogProbFloor;

  AgentLoss out;
  out.loss = -reward * log_prob_own + lambda * (-log_true);
  for (int k = 0; k < 3; ++k) {
    out.logit_grad[k] = reward * (probs[k] - (k == own ? 1.0 : 0.0)) +
                        lambda * (probs[k] - (k == truth ? 1.0 : 0.0));
  }
  return out;
}

struct RunSummary {
  long total_epochs = 0;
  int window = 0;
  double stats_window_fraction = 0.0;
  long stats_begin = 0;
  long stats_count = 0;
  std::array<std::array<double, 3>, 3> pair_frequency{};  // [decision1][decision2]
  double delta_aa = 0.0, delta_revrev = 0.0, delta_rr = 0.0, delta_max = 0.0;
  double reward_mean = 0.0;
  double reward_stddev = 0.0;
  std::vector<double> moving_average;  // entry k covers epochs [k, k + window)
};

// Frequency table, diagonal deviations from the uniform 1/3, and raw reward
// mean / population standard deviation over a window of records.
inline RunSummary summarize(std::span<const EpochRecord> records) {
  if (records.empty()) throw std::invalid_argument("summarize: empty window");

  RunSummary s;
  s.stats_begin = records.front().epoch;
  s.stats_count = static_cast<long>(records.size());

  long counts[3][3] = {};
  double sum = 0.0;
  for (const auto& r : records) {
    ++counts[ordinal(r.decision1)][ordinal(r.decision2)];
    sum += r.reward;
  }
  const double n = static_cast<double>(records.size());
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) s.pair_frequency[i][j] = counts[i][j] / n;

  s.reward_mean = sum / n;
  double sq = 0.0;
  for (const auto& r : records) {
    const double d = r.reward - s.reward_mean;
    sq += d * d;
  }
  s.reward_stddev = std::sqrt(sq / n);

  const double third = 1.0 / 3.0;
  s.delta_aa = std::fabs(s.pair_frequency[0][0] - third);
  s.delta_revrev = std::fabs(s.pair_frequency[1][1] - third);
  s.delta_rr = std::fabs(s.pair_frequency[2][2] - third);
  s.delta_max = std::max({s.delta_aa, s.delta_revrev, s.delta_rr});
  return s;
}

// Placement of the summary-statistics window at the end of a run: the final
// round(total * fraction) epochs, at least one.
inline std::pair<long, long> stats_window_bounds(long total_epochs, double fraction) {
  long count = std::lround(static_cast<double>(total_epochs) * fraction);
  count = std::max(1L, std::min(count, total_epochs));
  return {total_epochs - count, count};
}

// Trailing moving average: out[k] = mean(values[k .. k+window-1]).
inline std::vector<double> moving_average(std::span<const double> values, int window) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  if (static_cast<long>(values.size()) < window) return {};
  std::vector<double> out;
  out.reserve(values.size() - window + 1);
  double sum = 0.0;
  for (int i = 0; i < window; ++i) sum += values[i];
  out.push_back(sum / window);
  for (std::size_t i = window; i < values.size(); ++i) {
    sum += values[i] - values[i - window];
    out.push_back(sum / window);
  }
  return out;
}

template <class Scalar>
struct Agent {
  PolicyNetwork<Scalar> net;
  AdamState<Scalar> adam;
};

// Two freshly initialized agents whose weight seeds derive from the
// experiment seed through distinct splitmix64 streams.
template <class Scalar>
std::pair<Agent<Scalar>, Agent<Scalar>> make_agents(const ExperimentConfig& cfg) {
  cfg.validate();
  NetworkConfig nc;
  nc.hidden_width = cfg.hidden_width;
  nc.residual_blocks = cfg.residual_blocks;

  nc.init_seed = splitmix64(2 * cfg.seed + 1);
  Agent<Scalar> a1{PolicyNetwork<Scalar>(nc), AdamState<Scalar>::zeros(nc, cfg.learning_rate)};
  nc.init_seed = splitmix64(2 * cfg.seed + 2);
  Agent<Scalar> a2{PolicyNetwork<Scalar>(nc), AdamState<Scalar>::zeros(nc, cfg.learning_rate)};
  return {std::move(a1), std::move(a2)};
}

namespace detail {

// Per-agent slice of one epoch. The act and learn phases of the two agents
// touch disjoint state, so they can run on separate threads; the shared
// reward is filled in between the phases.
template <class Scalar>
struct AgentTurn {
  Agent<Scalar>* agent = nullptr;
  double input = 0.0;
  double u = 0.0;
  double reward = 0.0;
  Decision truth = Decision::Reject;
  double lambda = 0.0;
  SampledDecision act;
  AgentLoss loss;
  ForwardCache<Scalar> cache;
  ParamSet<Scalar> grads;

  void act_phase() {
    agent->net.forward(input, cache);
    act = sample_decision(cache.probs, u);
  }
  void learn_phase() {
    loss = agent_loss(reward, act.decision, act.log_prob, cache.probs, truth, lambda);
    agent->net.backward(cache, loss.logit_grad, grads);
    adam_step(agent->net, agent->adam, grads);
  }
};

}  // namespace detail

// Self-play training loop. Per epoch: draw a paper and biases, let both
// agents act on their own estimated scores, score the pair under the
// configured reward system, and update each agent with Adam on its own loss.
// Sink receives every EpochRecord in order. Deterministic for a fixed
// (config, agents) input: all randomness flows from cfg.seed, and the
// optional second worker thread only changes where agent 2's arithmetic
// runs, not its result.
template <class Scalar, class Sink>
RunSummary run_experiment(const ExperimentConfig& cfg, Agent<Scalar>& agent1,
                          Agent<Scalar>& agent2, Sink&& sink, int agent_threads = 1) {
  cfg.validate();
  if (agent_threads < 1 || agent_threads > 2)
    throw std::invalid_argument("agent_threads must be 1 or 2");
  for (const Agent<Scalar>* a : {&agent1, &agent2})
    if (a->net.config().hidden_width != cfg.hidden_width ||
        a->net.config().residual_blocks != cfg.residual_blocks)
      throw std::invalid_argument("agent network does not match the experiment config");

  RunSummary summary;
  summary.total_epochs = cfg.epochs;
  summary.window = cfg.moving_average_window;
  summary.stats_window_fraction = cfg.stats_window_fraction;
  if (cfg.epochs == 0) return summary;

  const long n = cfg.epochs;
  const auto [stats_begin, stats_count] = stats_window_bounds(n, cfg.stats_window_fraction);

  detail::ScopedFlushDenormals ftz;
  std::mt19937_64 rng(cfg.seed);
  std::vector<double> rewards;
  rewards.reserve(n);
  std::vector<EpochRecord> window_records;
  window_records.reserve(stats_count);

  detail::AgentTurn<Scalar> turn1, turn2;
  turn1.agent = &agent1;
  turn2.agent = &agent2;
  turn1.lambda = turn2.lambda = cfg.lambda_aux;

  // Worker for agent 2 when a second thread is requested. Semaphore
  // release/acquire pairs order all access to the shared slot.
  std::counting_semaphore<1> go{0}, ready{0};
  enum class Phase { Act, Learn, Quit };
  Phase phase = Phase::Act;
  std::exception_ptr worker_error;
  std::thread worker;
  if (agent_threads == 2) {
    worker = std::thread([&] {
      detail::ScopedFlushDenormals ftz;
      while (true) {
        go.acquire();
        if (phase == Phase::Quit) return;
        try {
          if (phase == Phase::Act)
            turn2.act_phase();
          else
            turn2.learn_phase();
        } catch (...) {
          if (!worker_error) worker_error = std::current_exception();
        }
        ready.release();
      }
    });
  }
  auto run_turn2 = [&](Phase p) {
    if (agent_threads == 2) {
      phase = p;
      go.release();
    } else {
      p == Phase::Act ? turn2.act_phase() : turn2.learn_phase();
    }
  };
  auto join_turn2 = [&] {
    if (agent_threads == 2) {
      ready.acquire();
      if (worker_error) {
        phase = Phase::Quit;
        go.release();
        worker.join();
        std::rethrow_exception(worker_error);
      }
    }
  };
  struct WorkerGuard {
    std::thread* t;
    Phase* phase;
    std::counting_semaphore<1>* go;
    ~WorkerGuard() {
      if (t->joinable()) {
        *phase = Phase::Quit;
        go->release();
        t->join();
      }
    }
  } guard{&worker, &phase, &go};

  for (long t = 0; t < n; ++t) {
    const PaperSample paper = sample_paper(cfg.quality, rng);
    turn1.input = paper.est1;
    turn2.input = paper.est2;
    turn1.u = uniform01(rng);
    turn2.u = uniform01(rng);

    run_turn2(Phase::Act);
    turn1.act_phase();
    join_turn2();

    const double reward =
        cfg.system == RewardSystem::Current
            ? reward_current(turn1.act.decision, turn2.act.decision, cfg.time_discount)
            : reward_proposed(turn1.act.decision, turn2.act.decision);
    turn1.reward = turn2.reward = reward;
    turn1.truth = turn2.truth = paper.true_decision;

    run_turn2(Phase::Learn);
    turn1.learn_phase();
    join_turn2();

    EpochRecord rec;
    rec.epoch = t;
    rec.true_quality = paper.true_quality;
    rec.bias1 = paper.bias1;
    rec.bias2 = paper.bias2;
    rec.est1 = paper.est1;
    rec.est2 = paper.est2;
    rec.true_decision = paper.true_decision;
    rec.decision1 = turn1.act.decision;
    rec.decision2 = turn2.act.decision;
    rec.reward = reward;
    rec.loss1 = turn1.loss.loss;
    rec.loss2 = turn2.loss.loss;

    rewards.push_back(reward);
    if (t >= stats_begin) window_records.push_back(rec);
    sink(rec);
  }

  RunSummary window = summarize(window_records);
  summary.stats_begin = stats_begin;
  summary.stats_count = stats_count;
  summary.pair_frequency = window.pair_frequency;
  summary.delta_aa = window.delta_aa;
  summary.delta_revrev = window.delta_revrev;
  summary.delta_rr = window.delta_rr;
  summary.delta_max = window.delta_max;
  summary.reward_mean = window.reward_mean;
  summary.reward_stddev = window.reward_stddev;
  summary.moving_average = moving_average(rewards, cfg.moving_average_window);
  return summary;
}

template <class Scalar>
std::pair<RunSummary, std::vector<EpochRecord>> run_experiment_collect(
    const ExperimentConfig& cfg, Agent<Scalar>& agent1, Agent<Scalar>& agent2) {
  std::vector<EpochRecord> records;
  records.reserve(cfg.epochs);
  RunSummary summary =
      run_experiment(cfg, agent1, agent2, [&](const EpochRecord& r) { records.push_back(r); });
  return {std::move(summary), std::move(records)};
}

// Rebuilds the full run summary (window statistics plus moving-average
// series) from a stored record stream.
inline RunSummary summarize_full(const ExperimentConfig& cfg,
                                 std::span<const EpochRecord> records) {
  RunSummary summary;
  summary.total_epochs = static_cast<long>(records.size());
  summary.window = cfg.moving_average_window;
  summary.stats_window_fraction = cfg.stats_window_fraction;
  if (records.empty()) return summary;

  const auto [begin, count] = stats_window_bounds(summary.total_epochs,
                                                  cfg.stats_window_fraction);
  RunSummary window = summarize(records.subspan(begin, count));
  summary.stats_begin = begin;
  summary.stats_count = count;
  summary.pair_frequency = window.pair_frequency;
  summary.delta_aa = window.delta_aa;
  summary.delta_revrev = window.delta_revrev;
  summary.delta_rr = window.delta_rr;
  summary.delta_max = window.delta_max;
  summary.reward_mean = window.reward_mean;
  summary.reward_stddev = window.reward_stddev;

  std::vector<double> rewards;
  rewards.reserve(records.size());
  for (const auto& r : records) rewards.push_back(r.reward);
  summary.moving_average = moving_average(rewards, cfg.moving_average_window);
  return summary;
}

}  // namespace revgame
