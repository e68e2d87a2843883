#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "tvs/rng.hpp"

namespace tvs {

// Cost schedule of the global reward sum(log(C + reward_i)). All logs are
// taken once at construction. With the golden-ratio cost the inclusion
// threshold is exactly 0.5 (the median probability model).
struct CostParams {
  double c = 0.0;          // C in (0,1)
  double gain = 0.0;       // log((C+1)/C), the per-unit-theta slope
  double penalty = 0.0;    // log(1/C), the cost of including an arm
  double threshold = 0.0;  // penalty / gain, the inclusion cutoff

  static CostParams from_c(double c);
  static CostParams golden();  // C = (sqrt(5)-1)/2 at full double precision
};

// One arm's Beta posterior counts. a and b start at the prior (a0, b0) and
// each pull increments exactly one of them by one.
struct ArmState {
  double a = 1.0;
  double b = 1.0;
  double a0 = 1.0;
  double b0 = 1.0;
  long pulls = 0;
  long successes = 0;

  static ArmState with_prior(double a0, double b0);
  double mean() const { return a / (a + b); }
};

// A played subset of {0..p-1}: sorted, duplicate-free, possibly empty.
class SuperArm {
 public:
  SuperArm() = default;
  explicit SuperArm(std::vector<int> members);  // sorts and dedups

  bool contains(int arm) const;
  int size() const { return static_cast<int>(members_.size()); }
  bool empty() const { return members_.empty(); }
  const std::vector<int>& members() const { return members_; }
  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }
  bool operator==(const SuperArm& o) const { return members_ == o.members_; }
  bool operator!=(const SuperArm& o) const { return members_ != o.members_; }

 private:
  std::vector<int> members_;
};

// Binary rewards for exactly the arms of one played subset.
struct RewardVector {
  std::vector<int> arms;       // sorted, mirrors the subset that was played
  std::vector<std::uint8_t> bits;

  int size() const { return static_cast<int>(arms.size()); }
  bool empty() const { return arms.empty(); }
  bool matches(const SuperArm& subset) const {
    return arms == subset.members();
  }
  bool operator==(const RewardVector& o) const {
    return arms == o.arms && bits == o.bits;
  }
};

// Full bandit state: p arms plus the iteration counter. One Choose/Reward/
// Update cycle advances the counter by one. `arm_costs`, when non-empty,
// gives each arm its own cost schedule (measurement-cost variant); otherwise
// `cost` is shared.
struct BanditState {
  std::vector<ArmState> arms;
  long iteration = 0;
  CostParams cost = CostParams::golden();
  std::vector<CostParams> arm_costs;

  static BanditState uniform_prior(int p, CostParams cost, double a0 = 1.0,
                                   double b0 = 1.0);
  int num_arms() const { return static_cast<int>(arms.size()); }
  const CostParams& cost_for(int arm) const {
    return arm_costs.empty() ? cost : arm_costs[arm];
  }
};

// Independent Beta(a_i, b_i) draws, one per arm, in arm order.
std::vector<double> sample_theta(const BanditState& state, Rng& rng);

// Maximizer of the expected global reward over all subsets: every arm whose
// theta passes the inclusion threshold (inclusive comparison, so ties at the
// threshold are in).
SuperArm oracle_unconstrained(std::span<const double> theta,
                              const CostParams& cost);
SuperArm oracle_unconstrained(std::span<const double> theta,
                              const BanditState& state);

// Maximizer over subsets of size at most q_star: the threshold-passing arms
// intersected with the top q_star arms by theta, ties broken by lower index.
SuperArm oracle_constrained(std::span<const double> theta,
                            const CostParams& cost, int q_star);

// R_C(S) = sum over played arms of log(C + reward). Throws if the reward
// vector is not indexed exactly by the subset.
double global_reward(const SuperArm& subset, const RewardVector& rewards,
                     const CostParams& cost);

// r_C(S, theta) = sum over S of [theta_i * gain - penalty].
double expected_reward(const SuperArm& subset, std::span<const double> theta,
                       const CostParams& cost);

// Same sum with set-dependent mean rewards theta_i(S).
double expected_reward_setdep(
    const SuperArm& subset,
    const std::function<double(int, const SuperArm&)>& theta_fn,
    const CostParams& cost);

// Posterior update: reward 1 bumps a, reward 0 bumps b; arms outside the
// subset are untouched; the iteration counter advances by one.
void update(BanditState& state, const SuperArm& subset,
            const RewardVector& rewards);

// pi_i = a_i / (a_i + b_i), the Beta means.
std::vector<double> inclusion_probabilities(const BanditState& state);

}  // namespace tvs
