#include <doctest.h>

#include <cmath>
#include <sstream>

#include "tvs/analysis.hpp"
#include "tvs/engine.hpp"
#include "tvs/forest.hpp"

using namespace tvs;

namespace {

EngineOptions base_options(int p, long horizon, std::uint64_t seed) {
  EngineOptions options;
  options.p = p;
  options.horizon = horizon;
  options.seed = seed;
  return options;
}

}  // namespace

TEST_CASE("zero-horizon run reports the prior state") {
  SetDependentBernoulli rule({0.5, 0.5, 0.5});
  RunRecord record = run_offline(base_options(3, 0, 1), rule);
  CHECK(record.iterations_executed == 0);
  CHECK(record.steps.empty());
  for (double pi : record.final_pi) CHECK(pi == 0.5);
  // Inclusive threshold at exactly 0.5: every arm is in the extracted model.
  CHECK(record.final_model == SuperArm({0, 1, 2}));
}

TEST_CASE("near-deterministic rewards recover the support") {
  const int p = 50;
  std::vector<double> base(p, 0.01);
  for (int i = 0; i < 5; ++i) base[i] = 0.99;
  SetDependentBernoulli rule(base);
  SuperArm truth({0, 1, 2, 3, 4});
  int exact = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RunRecord record = run_offline(base_options(p, 200, seed), rule);
    if (record.final_model == truth) ++exact;
  }
  CHECK(exact == 20);
}

TEST_CASE("recorded model always equals the extracted model of recorded pi") {
  SetDependentBernoulli rule({0.9, 0.6, 0.4, 0.2});
  EngineOptions options = base_options(4, 120, 7);
  RunRecord record = run_offline(options, rule);
  REQUIRE(record.snapshot_times.size() > 0);
  for (std::size_t s = 0; s < record.snapshot_times.size(); ++s) {
    long t = record.snapshot_times[s];
    std::vector<double> pi(4);
    for (int i = 0; i < 4; ++i)
      pi[i] = record.snapshot_a[s][i] /
              (record.snapshot_a[s][i] + record.snapshot_b[s][i]);
    CHECK(extract_model(pi, options.cost) == record.steps[t].model);
  }
}

TEST_CASE("identical configs give bit-identical records") {
  SetDependentBernoulli rule({0.8, 0.5, 0.3, 0.6, 0.1});
  EngineOptions options = base_options(5, 150, 99);
  RunRecord a = run_offline(options, rule);
  RunRecord b = run_offline(options, rule);
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t t = 0; t < a.steps.size(); ++t) {
    CHECK(a.steps[t].played == b.steps[t].played);
    CHECK(a.steps[t].rewards == b.steps[t].rewards);
    CHECK(a.steps[t].model == b.steps[t].model);
  }
  CHECK(a.final_pi == b.final_pi);
  CHECK(a.snapshot_a == b.snapshot_a);
}

TEST_CASE("extract_model examples") {
  CostParams golden = CostParams::golden();
  std::vector<double> pi{0.7, 0.49, 0.51};
  CHECK(extract_model(pi, golden) == SuperArm({0, 2}));
  std::vector<double> ties{0.5, 0.5};
  CHECK(extract_model(ties, golden) == SuperArm({0, 1}));
  std::vector<double> low{0.2, 0.1};
  CHECK(extract_model(low, CostParams::from_c(0.9)) == SuperArm({0}));
}

TEST_CASE("check_stabilized examples") {
  SuperArm a({0}), b({1});
  {
    std::vector<SuperArm> constant(150, a);
    CHECK(check_stabilized(constant, 100) == 0);
  }
  {
    std::vector<SuperArm> alternating;
    for (int t = 0; t < 200; ++t) alternating.push_back(t % 2 ? a : b);
    CHECK_FALSE(check_stabilized(alternating, 2).has_value());
  }
  {
    std::vector<SuperArm> changes;
    for (int t = 0; t < 37; ++t) changes.push_back(t % 2 ? a : b);
    for (int t = 37; t < 200; ++t) changes.push_back(a);
    auto hit = check_stabilized(changes, 100);
    REQUIRE(hit.has_value());
    CHECK(*hit == 37);
  }
  {
    std::vector<SuperArm> shorter(50, a);
    CHECK_FALSE(check_stabilized(shorter, 100).has_value());
  }
}

TEST_CASE("early stopping fires where check_stabilized says") {
  SetDependentBernoulli rule({0.99, 0.99, 0.01, 0.01, 0.01, 0.01});
  EngineOptions options = base_options(6, 500, 3);
  options.stop.enabled = true;
  options.stop.window = 50;
  RunRecord record = run_offline(options, rule);
  REQUIRE(record.converged_at.has_value());
  CHECK(record.stopped_early);
  CHECK(record.iterations_executed < 500);
  auto post_hoc = check_stabilized(record, 50);
  REQUIRE(post_hoc.has_value());
  CHECK(*post_hoc == *record.converged_at);
  // The run halts exactly when the window completes.
  CHECK(record.iterations_executed == *record.converged_at + 50);
}

TEST_CASE("runs shorter than the window never trigger the stop") {
  SetDependentBernoulli rule({0.99, 0.01});
  EngineOptions options = base_options(2, 30, 4);
  options.stop.enabled = true;
  options.stop.window = 100;
  RunRecord record = run_offline(options, rule);
  CHECK(record.iterations_executed == 30);
  CHECK_FALSE(record.converged_at.has_value());
  CHECK_FALSE(record.stopped_early);
}

TEST_CASE("single-batch online run equals one offline iteration seed for seed") {
  Rng data_rng(5);
  Dataset data = gen_friedman(64, 8, 1.0, false, data_rng);
  ForestRule offline_rule(ForestParams{}, ForestRule::Mode::offline);
  EngineOptions options = base_options(8, 1, 42);

  RunRecord offline = run_offline(options, offline_rule, &data);
  RunRecord online = run_online(options, offline_rule, data, data.n, 1);
  REQUIRE(offline.steps.size() == 1);
  REQUIRE(online.steps.size() == 1);
  CHECK(offline.steps[0].played == online.steps[0].played);
  CHECK(offline.steps[0].rewards == online.steps[0].rewards);
  CHECK(offline.final_pi == online.final_pi);
}

TEST_CASE("online and offline trajectories agree for data-free rules") {
  SetDependentBernoulli rule({0.9, 0.7, 0.2, 0.4, 0.6});
  Rng data_rng(6);
  Dataset data = gen_linear(40, 5, 1.0, data_rng);
  EngineOptions options = base_options(5, 20, 11);
  RunRecord offline = run_offline(options, rule);
  RunRecord online = run_online(options, rule, data, 2, 1);  // 20 batches
  REQUIRE(offline.steps.size() == online.steps.size());
  for (std::size_t t = 0; t < offline.steps.size(); ++t) {
    CHECK(offline.steps[t].played == online.steps[t].played);
    CHECK(offline.steps[t].rewards == online.steps[t].rewards);
  }
}

TEST_CASE("online rounds propagate the posterior and conserve counts") {
  Rng data_rng(7);
  Dataset data = gen_liang(200, 6, 0.5, data_rng);
  ForestRule rule(ForestParams{}, ForestRule::Mode::online);
  EngineOptions options = base_options(6, 0, 13);
  const int rounds = 2, batch = 10;  // 20 batches per round
  RunRecord record = run_online(options, rule, data, batch, rounds);
  CHECK(record.iterations_executed == rounds * (200 / batch));
  for (const ArmState& arm : record.final_state.arms) {
    CHECK(arm.a + arm.b - arm.a0 - arm.b0 ==
          doctest::Approx(static_cast<double>(arm.pulls)));
    CHECK(arm.pulls <= rounds * (200 / batch));
  }
}

TEST_CASE("empty super-arm still advances the iteration") {
  // All-zero rewards push every arm below threshold fast; with q_star the
  // oracle can then return an empty set, and the loop must carry on.
  SetDependentBernoulli rule(std::vector<double>(3, 0.0));
  EngineOptions options = base_options(3, 60, 17);
  RunRecord record = run_offline(options, rule);
  CHECK(record.iterations_executed == 60);
  bool saw_empty = false;
  for (const auto& step : record.steps) {
    if (step.played.empty()) {
      saw_empty = true;
      CHECK(step.rewards.empty());
    }
  }
  CHECK(saw_empty);
  CHECK(record.final_state.iteration == 60);
}

TEST_CASE("q_star caps the played set size") {
  SetDependentBernoulli rule(std::vector<double>(10, 0.9));
  EngineOptions options = base_options(10, 50, 19);
  options.q_star = 3;
  RunRecord record = run_offline(options, rule);
  for (const auto& step : record.steps) CHECK(step.played.size() <= 3);
}

TEST_CASE("first-iteration cap only affects the first iteration") {
  SetDependentBernoulli rule(std::vector<double>(20, 0.95));
  EngineOptions options = base_options(20, 30, 23);
  options.first_iter_cap = 2;
  RunRecord record = run_offline(options, rule);
  CHECK(record.steps[0].played.size() <= 2);
  bool grew = false;
  for (const auto& step : record.steps)
    if (step.played.size() > 2) grew = true;
  CHECK(grew);
}

TEST_CASE("played set converges on a validated instance (reduced)") {
  Rng build(29);
  SuperArm signals({0, 1, 2, 3, 4});
  SetDependentBernoulli rule = SetDependentBernoulli::strongly_identifiable(
      10, signals, 0.2, 0.03, build);
  REQUIRE(validate_strong_identifiability(rule, signals, 0.2).pass);
  int good_seeds = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    EngineOptions options = base_options(10, 2000, seed);
    RunRecord record = run_offline(options, rule);
    long hits = 0, window = 0;
    for (long t = record.iterations_executed * 4 / 5;
         t < record.iterations_executed; ++t) {
      ++window;
      if (record.steps[t].played == signals) ++hits;
    }
    if (static_cast<double>(hits) / window > 0.95) ++good_seeds;
  }
  CHECK(good_seeds >= 9);
}

TEST_CASE("trajectory csv has one row per recorded arm and iteration") {
  SetDependentBernoulli rule({0.9, 0.1});
  EngineOptions options = base_options(2, 10, 31);
  RunRecord record = run_offline(options, rule);
  std::stringstream out;
  write_trajectory_csv(record, out);
  std::string line;
  std::getline(out, line);
  CHECK(line == "t,arm,a,b,pi,in_S,reward");
  long rows = 0;
  while (std::getline(out, line)) ++rows;
  CHECK(rows == 2 * 10);
}

TEST_CASE("summary includes metrics when the truth is known") {
  SetDependentBernoulli rule({0.99, 0.99, 0.01});
  EngineOptions options = base_options(3, 150, 37);
  RunRecord record = run_offline(options, rule);
  SuperArm truth({0, 1});
  std::stringstream out;
  write_summary(record, &truth, out);
  std::string text = out.str();
  CHECK(text.find("final_model = 0,1") != std::string::npos);
  CHECK(text.find("hamming = 0") != std::string::npos);
  CHECK(text.find("power = 1") != std::string::npos);
}

TEST_CASE("pi snapshots thin once p*T exceeds the entry cap") {
  SetDependentBernoulli rule(std::vector<double>(50, 0.5));
  EngineOptions options = base_options(50, 400, 41);
  options.pi_entry_cap = 2000;  // p*T = 20000 -> thin every 10th iteration
  RunRecord record = run_offline(options, rule);
  CHECK(record.snapshot_times.size() == 40);
  CHECK(record.snapshot_times.back() == 399);  // final state always recorded
  for (std::size_t s = 1; s < record.snapshot_times.size(); ++s)
    CHECK(record.snapshot_times[s] - record.snapshot_times[s - 1] == 10);
  // Steps stay complete even when snapshots thin.
  CHECK(record.steps.size() == 400);
}
