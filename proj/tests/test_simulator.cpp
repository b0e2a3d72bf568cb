#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "revgame/rewards.hpp"
#include "revgame/text.hpp"
#include "revgame/simulator.hpp"

using namespace revgame;

namespace {

ExperimentConfig tiny_config(RewardSystem system, long epochs, std::uint64_t seed,
                             double lr = 1e-3) {
  ExperimentConfig cfg;
  cfg.system = system;
  cfg.epochs = epochs;
  cfg.hidden_width = 8;
  cfg.residual_blocks = 1;
  cfg.learning_rate = lr;
  cfg.seed = seed;
  return cfg;
}

// Loss recomputed from raw logits; finite-difference oracle for the
// agent_loss gradient.
double loss_from_logits(const std::array<double, 3>& z, Decision action, Decision truth,
                        double reward, double lambda) {
  auto p = softmax3(z);
  const double lp_own = std::max(std::log(p[ordinal(action)]), kLogProbFloor);
  const double lp_true = std::max(std::log(p[ordinal(truth)]), kLogProbFloor);
  return -reward * lp_own + lambda * (-lp_true);
}

}  // namespace

TEST_CASE("current-system reward table") {
  const double expected[3][3] = {{1.0, 0.8, 0.8}, {0.8, 0.8, 0.8}, {0.8, 0.8, 1.0}};
  for (Decision a : all_decisions())
    for (Decision b : all_decisions())
      CHECK(reward_current(a, b, 0.2) == expected[ordinal(a)][ordinal(b)]);
  CHECK_THROWS_AS(reward_current(Decision::Accept, Decision::Accept, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(reward_current(Decision::Accept, Decision::Accept, -0.1),
                  std::invalid_argument);
}

TEST_CASE("proposed-system reward table") {
  const double expected[3][3] = {{1.0, 0.5, 0.2}, {0.5, 1.0, 0.5}, {0.2, 0.5, 1.0}};
  for (Decision a : all_decisions())
    for (Decision b : all_decisions())
      CHECK(reward_proposed(a, b) == expected[ordinal(a)][ordinal(b)]);
}

TEST_CASE("rewards are symmetric; revision agreement is discounted only currently") {
  for (Decision a : all_decisions())
    for (Decision b : all_decisions()) {
      CHECK(reward_current(a, b, 0.2) == reward_current(b, a, 0.2));
      CHECK(reward_proposed(a, b) == reward_proposed(b, a));
    }
  for (Decision d : all_decisions()) CHECK(reward_proposed(d, d) == 1.0);
  for (double dt : {0.05, 0.2, 0.7})
    CHECK(reward_current(Decision::Revision, Decision::Revision, dt) <
          reward_current(Decision::Accept, Decision::Accept, dt));
}

TEST_CASE("agent_loss closed-form values") {
  const std::array<double, 3> uniform{1.0 / 3, 1.0 / 3, 1.0 / 3};
  const double log3 = std::log(3.0);

  auto zero = agent_loss(0.0, Decision::Accept, std::log(1.0 / 3), uniform,
                         Decision::Revision, 0.0);
  CHECK(zero.loss == 0.0);
  for (double g : zero.logit_grad) CHECK(g == 0.0);

  auto policy_only = agent_loss(1.0, Decision::Accept, std::log(1.0 / 3), uniform,
                                Decision::Revision, 0.0);
  CHECK(policy_only.loss == Catch::Approx(log3).margin(1e-12));

  auto aux_only = agent_loss(0.0, Decision::Accept, std::log(1.0 / 3), uniform,
                             Decision::Revision, 0.05);
  CHECK(aux_only.loss == Catch::Approx(0.05 * log3).margin(1e-12));
  CHECK(aux_only.loss == Catch::Approx(0.054930614).margin(1e-7));

  CHECK_THROWS_AS(agent_loss(1.0, Decision::Accept, 0.0, uniform, Decision::Accept, -0.1),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      agent_loss(1.0, Decision::Accept, 0.0, {0.9, 0.9, 0.9}, Decision::Accept, 0.0),
      std::invalid_argument);
}

TEST_CASE("agent_loss gradient matches finite differences on the logits") {
  std::mt19937_64 rng(12);
  for (int rep = 0; rep < 100; ++rep) {
    std::array<double, 3> z{uniform_range(rng, -2, 2), uniform_range(rng, -2, 2),
                            uniform_range(rng, -2, 2)};
    const auto probs = softmax3(z);
    const Decision action = decision_from_ordinal(static_cast<int>(rng() % 3));
    const Decision truth = decision_from_ordinal(static_cast<int>(rng() % 3));
    const double reward = uniform_range(rng, 0.0, 1.0);
    const double lambda = uniform_range(rng, 0.0, 0.2);

    const auto out = agent_loss(reward, action, std::log(probs[ordinal(action)]), probs,
                                truth, lambda);
    CHECK(out.loss ==
          Catch::Approx(loss_from_logits(z, action, truth, reward, lambda)).margin(1e-12));

    const double h = 1e-6;
    for (int k = 0; k < 3; ++k) {
      auto up = z, down = z;
      up[k] += h;
      down[k] -= h;
      const double fd = (loss_from_logits(up, action, truth, reward, lambda) -
                         loss_from_logits(down, action, truth, reward, lambda)) /
                        (2 * h);
      const double scale = std::max({std::fabs(fd), std::fabs(out.logit_grad[k]), 1e-9});
      CHECK(std::fabs(out.logit_grad[k] - fd) / scale < 1e-6);
    }
  }
}

TEST_CASE("sample_paper respects the bias interval and threshold measure") {
  std::mt19937_64 rng(5);

  const QualityModel no_bias(0.66, 0.33, 0.0);
  for (int i = 0; i < 200; ++i) {
    auto p = sample_paper(no_bias, rng);
    CHECK(p.est1 == p.true_quality);
    CHECK(p.est2 == p.true_quality);
  }

  const QualityModel paper_model(0.66, 0.33, 0.05);
  long accept = 0, reject = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    auto p = sample_paper(paper_model, rng);
    CHECK(p.true_quality >= 0.0);
    CHECK(p.true_quality < 1.0);
    CHECK(std::fabs(p.bias1) <= 0.05);
    CHECK(std::fabs(p.bias2) <= 0.05);
    CHECK(p.est1 == p.true_quality + p.bias1);
    CHECK(p.est2 == p.true_quality + p.bias2);
    CHECK(p.true_decision == decide(p.true_quality, paper_model));
    accept += p.true_decision == Decision::Accept;
    reject += p.true_decision == Decision::Reject;
  }
  CHECK(static_cast<double>(accept) / n == Catch::Approx(0.34).margin(0.01));
  CHECK(static_cast<double>(reject) / n == Catch::Approx(0.33).margin(0.01));
}

TEST_CASE("summarize reproduces the published deviation arithmetic") {
  // Diagonal frequencies 31.40% / 10.60% / 37.20% over a 10000-record window.
  std::vector<EpochRecord> records;
  auto add = [&](Decision a, Decision b, int count) {
    EpochRecord r;
    r.decision1 = a;
    r.decision2 = b;
    r.reward = reward_current(a, b, 0.2);
    for (int i = 0; i < count; ++i) {
      r.epoch = static_cast<long>(records.size());
      records.push_back(r);
    }
  };
  add(Decision::Accept, Decision::Accept, 3140);
  add(Decision::Revision, Decision::Revision, 1060);
  add(Decision::Reject, Decision::Reject, 3720);
  add(Decision::Accept, Decision::Reject, 2080);

  RunSummary s = summarize(records);
  CHECK(s.pair_frequency[0][0] == Catch::Approx(0.3140).margin(1e-12));
  CHECK(s.delta_aa == Catch::Approx(std::fabs(0.3140 - 1.0 / 3)).margin(1e-12));
  CHECK(s.delta_revrev == Catch::Approx(0.227333333).margin(1e-9));
  CHECK(s.delta_rr == Catch::Approx(0.038666667).margin(1e-9));
  CHECK(s.delta_max == s.delta_revrev);

  // Two-decimal percent rendering used in reports.
  CHECK(text::fixed(100 * s.delta_aa, 2) == "1.93");
  CHECK(text::fixed(100 * s.delta_revrev, 2) == "22.73");
  CHECK(text::fixed(100 * s.delta_rr, 2) == "3.87");
}

TEST_CASE("summarize on the proposed-run frequencies") {
  std::vector<EpochRecord> records;
  auto add = [&](Decision a, Decision b, int count) {
    EpochRecord r;
    r.decision1 = a;
    r.decision2 = b;
    r.reward = reward_proposed(a, b);
    for (int i = 0; i < count; ++i) records.push_back(r);
  };
  add(Decision::Accept, Decision::Accept, 3100);
  add(Decision::Revision, Decision::Revision, 2820);
  add(Decision::Reject, Decision::Reject, 2560);
  add(Decision::Accept, Decision::Revision, 1520);

  RunSummary s = summarize(records);
  CHECK(text::fixed(100 * s.delta_aa, 2) == "2.33");
  CHECK(text::fixed(100 * s.delta_revrev, 2) == "5.13");
  CHECK(text::fixed(100 * s.delta_rr, 2) == "7.73");
  CHECK(s.delta_max == Catch::Approx(0.077333333).margin(1e-9));
}

TEST_CASE("summarize basics") {
  CHECK_THROWS_AS(summarize({}), std::invalid_argument);

  std::vector<EpochRecord> same(50);
  for (auto& r : same) r.reward = 0.8;
  RunSummary s = summarize(same);
  CHECK(s.reward_mean == Catch::Approx(0.8).margin(1e-12));
  CHECK(s.reward_stddev == Catch::Approx(0.0).margin(1e-12));

  // Frequency table matches a brute-force recount and sums to one.
  std::mt19937_64 rng(9);
  std::vector<EpochRecord> random(997);
  long counts[3][3] = {};
  for (auto& r : random) {
    r.decision1 = decision_from_ordinal(static_cast<int>(rng() % 3));
    r.decision2 = decision_from_ordinal(static_cast<int>(rng() % 3));
    r.reward = uniform01(rng);
    ++counts[ordinal(r.decision1)][ordinal(r.decision2)];
  }
  RunSummary rs = summarize(random);
  double total = 0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      CHECK(rs.pair_frequency[i][j] == Catch::Approx(counts[i][j] / 997.0).margin(1e-15));
      total += rs.pair_frequency[i][j];
    }
  CHECK(total == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("moving average matches a brute-force recompute") {
  std::mt19937_64 rng(4);
  std::vector<double> values(357);
  for (auto& v : values) v = uniform01(rng);

  auto ma = moving_average(values, 10);
  REQUIRE(ma.size() == values.size() - 9);
  for (std::size_t k = 0; k < ma.size(); k += 17) {
    double sum = 0;
    for (std::size_t i = k; i < k + 10; ++i) sum += values[i];
    CHECK(ma[k] == Catch::Approx(sum / 10).margin(1e-12));
  }

  CHECK(moving_average(std::vector<double>(5, 1.0), 10).empty());
  auto flat = moving_average(std::vector<double>(30, 0.8), 10);
  for (double v : flat) CHECK(v == Catch::Approx(0.8).margin(1e-15));
}

TEST_CASE("config validation") {
  ExperimentConfig cfg;
  CHECK_NOTHROW(cfg.validate());

  cfg.epochs = 50;  // below the window
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.epochs = 0;  // degenerate but allowed
  CHECK_NOTHROW(cfg.validate());
  cfg = ExperimentConfig{};
  cfg.time_discount = 1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ExperimentConfig{};
  cfg.stats_window_fraction = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = ExperimentConfig{};
  cfg.lambda_aux = -0.01;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("stats window placement") {
  CHECK(stats_window_bounds(100000, 0.2) == std::pair<long, long>{80000, 20000});
  CHECK(stats_window_bounds(10, 1.0) == std::pair<long, long>{0, 10});
  CHECK(stats_window_bounds(10, 0.001) == std::pair<long, long>{9, 1});
}

TEST_CASE("epochs=0 yields an empty summary and no records") {
  auto cfg = tiny_config(RewardSystem::Current, 0, 3);
  auto [a1, a2] = make_agents<float>(cfg);
  long sunk = 0;
  RunSummary s = run_experiment(cfg, a1, a2, [&](const EpochRecord&) { ++sunk; });
  CHECK(sunk == 0);
  CHECK(s.total_epochs == 0);
  CHECK(s.moving_average.empty());
  CHECK(s.stats_count == 0);
}

TEST_CASE("run_experiment validates inputs before running") {
  auto cfg = tiny_config(RewardSystem::Current, 300, 3);
  auto [a1, a2] = make_agents<float>(cfg);

  long sunk = 0;
  auto counting = [&](const EpochRecord&) { ++sunk; };

  auto bad_cfg = cfg;
  bad_cfg.stats_window_fraction = 2.0;
  CHECK_THROWS_AS(run_experiment(bad_cfg, a1, a2, counting), std::invalid_argument);
  CHECK(sunk == 0);

  auto other_cfg = tiny_config(RewardSystem::Current, 300, 3);
  other_cfg.hidden_width = 16;
  auto [b1, b2] = make_agents<float>(other_cfg);
  CHECK_THROWS_AS(run_experiment(cfg, b1, b2, counting), std::invalid_argument);
  CHECK(sunk == 0);

  CHECK_THROWS_AS(run_experiment(cfg, a1, a2, counting, 3), std::invalid_argument);
  CHECK_THROWS_AS(run_experiment(cfg, a1, a2, counting, 0), std::invalid_argument);
}

TEST_CASE("identical seeds reproduce the run exactly") {
  auto cfg = tiny_config(RewardSystem::Proposed, 400, 77);

  auto [a1, a2] = make_agents<float>(cfg);
  auto [r1, records1] = run_experiment_collect(cfg, a1, a2);

  auto [b1, b2] = make_agents<float>(cfg);
  auto [r2, records2] = run_experiment_collect(cfg, b1, b2);

  CHECK(records1 == records2);
  CHECK(r1.pair_frequency == r2.pair_frequency);
  CHECK(r1.reward_mean == r2.reward_mean);
  CHECK(r1.reward_stddev == r2.reward_stddev);
  CHECK(r1.moving_average == r2.moving_average);

  auto cfg2 = cfg;
  cfg2.seed = 78;
  auto [c1, c2] = make_agents<float>(cfg2);
  auto [r3, records3] = run_experiment_collect(cfg2, c1, c2);
  CHECK(records1 != records3);
}

TEST_CASE("two agent threads produce the identical run") {
  auto cfg = tiny_config(RewardSystem::Current, 500, 11);

  auto [a1, a2] = make_agents<float>(cfg);
  std::vector<EpochRecord> seq;
  run_experiment(cfg, a1, a2, [&](const EpochRecord& r) { seq.push_back(r); }, 1);

  auto [b1, b2] = make_agents<float>(cfg);
  std::vector<EpochRecord> par;
  run_experiment(cfg, b1, b2, [&](const EpochRecord& r) { par.push_back(r); }, 2);

  CHECK(seq == par);
  auto ta = a1.net.params().tensors();
  auto tb = b1.net.params().tensors();
  for (std::size_t i = 0; i < ta.size(); ++i) CHECK(*ta[i] == *tb[i]);
}

TEST_CASE("records carry consistent environment fields") {
  auto cfg = tiny_config(RewardSystem::Current, 300, 21);
  auto [a1, a2] = make_agents<float>(cfg);
  auto [summary, records] = run_experiment_collect(cfg, a1, a2);

  REQUIRE(records.size() == 300);
  for (std::size_t t = 0; t < records.size(); ++t) {
    const auto& r = records[t];
    CHECK(r.epoch == static_cast<long>(t));
    CHECK(r.est1 == r.true_quality + r.bias1);
    CHECK(r.est2 == r.true_quality + r.bias2);
    CHECK(r.true_decision == decide(r.true_quality, cfg.quality));
    CHECK(r.reward == reward_current(r.decision1, r.decision2, cfg.time_discount));
  }

  // Summary window statistics equal an independent recount of the tail.
  const auto [begin, count] = stats_window_bounds(300, cfg.stats_window_fraction);
  RunSummary recount = summarize(std::span(records).subspan(begin, count));
  CHECK(summary.pair_frequency == recount.pair_frequency);
  CHECK(summary.reward_mean == recount.reward_mean);
  CHECK(summary.reward_stddev == recount.reward_stddev);
}

TEST_CASE("training with an elevated learning rate improves the reward") {
  auto cfg = tiny_config(RewardSystem::Current, 4000, 1, 1e-3);
  cfg.hidden_width = 16;
  auto [a1, a2] = make_agents<float>(cfg);
  RunSummary s = run_experiment(cfg, a1, a2, [](const EpochRecord&) {});

  REQUIRE(s.moving_average.size() > 600);
  double early = 0, late = 0;
  for (int i = 0; i < 300; ++i) early += s.moving_average[i];
  for (int i = 0; i < 300; ++i) late += s.moving_average[s.moving_average.size() - 1 - i];
  early /= 300;
  late /= 300;
  CHECK(late > early + 0.02);
  CHECK(s.reward_mean > 0.85);
}
