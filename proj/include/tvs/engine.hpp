#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tvs/arms.hpp"
#include "tvs/datagen.hpp"
#include "tvs/feedback.hpp"
#include "tvs/rng.hpp"

namespace tvs {

struct StopRule {
  bool enabled = false;
  int window = 100;
};

// Configuration of one run. `horizon` is the number of iterations in offline
// mode; online runs take their horizon from the batch plan. `first_iter_cap`
// optionally caps how many arms the very first iteration may play (the prior
// makes that first super-arm roughly half of all arms otherwise).
struct EngineOptions {
  int p = 0;
  long horizon = 0;
  CostParams cost = CostParams::golden();
  double a0 = 1.0;
  double b0 = 1.0;
  std::optional<int> q_star;
  StopRule stop;
  std::uint64_t seed = 0;
  std::optional<int> first_iter_cap;
  long pi_entry_cap = 10'000'000;  // thin (a,b) snapshots past p*T entries
};

struct IterationRecord {
  SuperArm played;
  RewardVector rewards;
  SuperArm model;  // extract_model of the post-update posterior means
};

// Full trajectory of one run. Played sets, rewards and extracted models are
// kept for every iteration; (a, b) state snapshots are thinned once p*T
// exceeds the entry cap, with the final state always exact.
struct RunRecord {
  int p = 0;
  std::uint64_t seed = 0;
  long iterations_executed = 0;
  std::vector<IterationRecord> steps;
  std::vector<long> snapshot_times;  // 0-based iteration indices
  std::vector<std::vector<double>> snapshot_a;
  std::vector<std::vector<double>> snapshot_b;
  std::vector<double> per_step_regret;  // filled only when regret is known
  BanditState final_state;
  std::vector<double> final_pi;
  SuperArm final_model;
  std::optional<long> converged_at;  // 0-based start of the stable window
  bool stopped_early = false;
  double wall_seconds = 0.0;
  std::string feedback_diagnostics;
};

using RegretFn = std::function<double(const SuperArm&)>;

// Offline TVS: every iteration feeds the whole dataset (when present) to the
// feedback rule. `data` may be null for data-free synthetic rules.
RunRecord run_offline(const EngineOptions& options, const FeedbackRule& rule,
                      const Dataset* data = nullptr,
                      const RegretFn& regret_fn = {});

// Online TVS: one mini-batch per iteration, Beta posterior carried across
// batches and rounds; rounds beyond the first re-batch a bootstrap resample.
RunRecord run_online(const EngineOptions& options, const FeedbackRule& rule,
                     const Dataset& data, int batch_size, int rounds,
                     const RegretFn& regret_fn = {});

// Truncation of the posterior means at the inclusion threshold; with the
// golden-ratio cost this is the median probability model.
SuperArm extract_model(std::span<const double> pi, const CostParams& cost);

// First t (0-based) opening a window of `window` identical extracted models,
// or nullopt if the trajectory never stabilizes that long.
std::optional<long> check_stabilized(const std::vector<SuperArm>& models,
                                     int window);
std::optional<long> check_stabilized(const RunRecord& record, int window);

// Long-format trajectory: `t,arm,a,b,pi,in_S,reward`, one row per recorded
// iteration and arm; reward is blank for arms outside the played set.
void write_trajectory_csv(const RunRecord& record, std::ostream& out);

// Key=value run summary (final model, convergence, seed, timing, optional
// selection metrics against a known truth).
void write_summary(const RunRecord& record, const SuperArm* truth,
                   std::ostream& out);

}  // namespace tvs
