#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "tvs/arms.hpp"

namespace tvs {

// Cumulative regret bookkeeping for one run against a known optimum.
struct RegretLedger {
  SuperArm s_star;
  double optimal_reward = 0.0;
  double delta_max = 0.0;  // max_S [r(S*) - r(S)], read as r(S*) - r(empty)
  std::vector<double> per_step;
  std::vector<double> cumulative;

  void append(double step_regret) {
    per_step.push_back(step_regret);
    cumulative.push_back(
        (cumulative.empty() ? 0.0 : cumulative.back()) + step_regret);
  }
};

// r(S*) - r(S_t) under set-dependent mean rewards. The caller guarantees
// S_star maximizes the expected reward.
double per_step_regret(
    const SuperArm& s_star, const SuperArm& s_t,
    const std::function<double(int, const SuperArm&)>& theta_fn,
    const CostParams& cost);

// The D-form of the same quantity, valid for independent arms at the
// golden-ratio cost: D * sum_i (2 theta_i - 1) [I(i in S*\S_t) - I(i in
// S_t\S*)] with D = log(1+C).
double per_step_regret_dform(const SuperArm& s_star, const SuperArm& s_t,
                             std::span<const double> theta,
                             const CostParams& cost);

// Exhaustive maximizer of the expected reward; feasible for small p.
SuperArm brute_force_optimum(
    int p, const std::function<double(int, const SuperArm&)>& theta_fn,
    const CostParams& cost);

// Regret bound for the known-q* oracle with gaps `deltas` (one per arm
// outside S*): sum (Delta_i - eps) log(T) / (Delta_i - 2 eps)^2
// + const_c * p / eps^4 + p^2. Requires Delta_i > 2 eps.
double bound_known_size(std::span<const double> deltas, double horizon,
                    double epsilon, double const_c, int p);

// Regret bound for independent rewards with unknown q*. `gap_map` supplies
// Delta_S for the subsets entering the eta_i maxima; each must satisfy
// Delta_S > 2 B (q*^2 + 2) eps with B = log((C+1)/C).
double bound_independent_arms(const std::vector<std::pair<SuperArm, double>>& gap_map,
                    int q_star, double epsilon, const CostParams& cost,
                    double const_c, double horizon, double delta_max, int p);

// Regret bound under strong identifiability:
// Delta_max [8 p log(T)/alpha^2 + c(alpha) q* + (2 + 4/alpha^2) p], where
// c(alpha) = Ctilde e^{-4a}/(1-e^{-a^2/2}) + (8/a^2)/(e^{2a}-1)
//            + e^{-1}/(1-e^{-a/8}) + ceil(8/a)(3+1/a)
// and Ctilde = C1 + C2 (1-2a)/(32a) for caller-supplied C1, C2 > 0.
double bound_identifiable(double alpha, int p, int q_star, double horizon,
                          double delta_max, double c1, double c2);
double identifiable_margin_constant(double alpha, double c1, double c2);

// Bernoulli Kullback-Leibler divergence d(a, b) with the conventions
// 0 ln 0 = 0 and d = +inf when b is degenerate and a differs.
double kl_divergence(double a, double b);

struct SelectionMetrics {
  double fdp = 0.0;
  double power = 0.0;
  long hamming = 0;
};

// FDP uses max(|selected|, 1) in the denominator; power is 1 when the truth
// is empty.
SelectionMetrics selection_metrics(const SuperArm& selected,
                                   const SuperArm& truth, int p);

}  // namespace tvs
