#include "tvs/arms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tvs {

CostParams CostParams::from_c(double c) {
  if (!(c > 0.0) || !(c < 1.0))
    throw std::invalid_argument("CostParams: C must lie in (0,1)");
  CostParams out;
  out.c = c;
  out.gain = std::log((c + 1.0) / c);
  out.penalty = std::log(1.0 / c);
  out.threshold = out.penalty / out.gain;
  return out;
}

CostParams CostParams::golden() {
  return from_c((std::sqrt(5.0) - 1.0) / 2.0);
}

ArmState ArmState::with_prior(double a0, double b0) {
  if (!(a0 > 0.0) || !(b0 > 0.0))
    throw std::invalid_argument("ArmState: prior counts must be positive");
  ArmState out;
  out.a = out.a0 = a0;
  out.b = out.b0 = b0;
  return out;
}

SuperArm::SuperArm(std::vector<int> members) : members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  members_.erase(std::unique(members_.begin(), members_.end()),
                 members_.end());
  if (!members_.empty() && members_.front() < 0)
    throw std::invalid_argument("SuperArm: negative arm index");
}

bool SuperArm::contains(int arm) const {
  return std::binary_search(members_.begin(), members_.end(), arm);
}

BanditState BanditState::uniform_prior(int p, CostParams cost, double a0,
                                       double b0) {
  if (p <= 0) throw std::invalid_argument("BanditState: p must be positive");
  BanditState out;
  out.cost = cost;
  out.arms.assign(p, ArmState::with_prior(a0, b0));
  return out;
}

std::vector<double> sample_theta(const BanditState& state, Rng& rng) {
  std::vector<double> theta(state.arms.size());
  for (std::size_t i = 0; i < state.arms.size(); ++i)
    theta[i] = rng.beta(state.arms[i].a, state.arms[i].b);
  return theta;
}

SuperArm oracle_unconstrained(std::span<const double> theta,
                              const CostParams& cost) {
  std::vector<int> members;
  for (std::size_t i = 0; i < theta.size(); ++i)
    if (theta[i] >= cost.threshold) members.push_back(static_cast<int>(i));
  return SuperArm(std::move(members));
}

SuperArm oracle_unconstrained(std::span<const double> theta,
                              const BanditState& state) {
  if (state.arm_costs.empty()) return oracle_unconstrained(theta, state.cost);
  std::vector<int> members;
  for (std::size_t i = 0; i < theta.size(); ++i)
    if (theta[i] >= state.arm_costs[i].threshold)
      members.push_back(static_cast<int>(i));
  return SuperArm(std::move(members));
}

SuperArm oracle_constrained(std::span<const double> theta,
                            const CostParams& cost, int q_star) {
  if (q_star < 1)
    throw std::invalid_argument("oracle_constrained: q_star must be >= 1");
  std::vector<int> passing;
  for (std::size_t i = 0; i < theta.size(); ++i)
    if (theta[i] >= cost.threshold) passing.push_back(static_cast<int>(i));
  if (static_cast<int>(passing.size()) > q_star) {
    // Keep the q_star largest thetas; stable partial sort breaks theta ties
    // toward the lower arm index.
    std::stable_sort(passing.begin(), passing.end(),
                     [&](int l, int r) { return theta[l] > theta[r]; });
    passing.resize(q_star);
  }
  return SuperArm(std::move(passing));
}

double global_reward(const SuperArm& subset, const RewardVector& rewards,
                     const CostParams& cost) {
  if (!rewards.matches(subset))
    throw std::invalid_argument(
        "global_reward: rewards not indexed by the played subset");
  double total = 0.0;
  for (std::size_t k = 0; k < rewards.arms.size(); ++k)
    total += std::log(cost.c + static_cast<double>(rewards.bits[k]));
  return total;
}

double expected_reward(const SuperArm& subset, std::span<const double> theta,
                       const CostParams& cost) {
  double total = 0.0;
  for (int i : subset) total += theta[i] * cost.gain - cost.penalty;
  return total;
}

double expected_reward_setdep(
    const SuperArm& subset,
    const std::function<double(int, const SuperArm&)>& theta_fn,
    const CostParams& cost) {
  double total = 0.0;
  for (int i : subset) total += theta_fn(i, subset) * cost.gain - cost.penalty;
  return total;
}

void update(BanditState& state, const SuperArm& subset,
            const RewardVector& rewards) {
  if (!rewards.matches(subset))
    throw std::invalid_argument(
        "update: rewards not indexed by the played subset");
  for (std::size_t k = 0; k < rewards.arms.size(); ++k) {
    ArmState& arm = state.arms[rewards.arms[k]];
    arm.pulls += 1;
    if (rewards.bits[k]) {
      arm.a += 1.0;
      arm.successes += 1;
    } else {
      arm.b += 1.0;
    }
  }
  state.iteration += 1;
}

std::vector<double> inclusion_probabilities(const BanditState& state) {
  std::vector<double> pi(state.arms.size());
  for (std::size_t i = 0; i < state.arms.size(); ++i)
    pi[i] = state.arms[i].mean();
  return pi;
}

}  // namespace tvs
