#include "tvs/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace tvs {

double per_step_regret(
    const SuperArm& s_star, const SuperArm& s_t,
    const std::function<double(int, const SuperArm&)>& theta_fn,
    const CostParams& cost) {
  return expected_reward_setdep(s_star, theta_fn, cost) -
         expected_reward_setdep(s_t, theta_fn, cost);
}

double per_step_regret_dform(const SuperArm& s_star, const SuperArm& s_t,
                             std::span<const double> theta,
                             const CostParams& cost) {
  const double d = std::log(1.0 + cost.c);
  double total = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    int arm = static_cast<int>(i);
    int indicator = 0;
    if (s_star.contains(arm) && !s_t.contains(arm)) indicator = 1;
    if (s_t.contains(arm) && !s_star.contains(arm)) indicator = -1;
    if (indicator != 0)
      total += (2.0 * theta[i] - 1.0) * static_cast<double>(indicator);
  }
  return d * total;
}

SuperArm brute_force_optimum(
    int p, const std::function<double(int, const SuperArm&)>& theta_fn,
    const CostParams& cost) {
  if (p > 24)
    throw std::invalid_argument("brute_force_optimum: p too large");
  SuperArm best;
  double best_reward = 0.0;  // empty set
  for (std::uint64_t mask = 1; mask < (1ULL << p); ++mask) {
    std::vector<int> members;
    for (int i = 0; i < p; ++i)
      if (mask & (1ULL << i)) members.push_back(i);
    SuperArm candidate(std::move(members));
    double reward = expected_reward_setdep(candidate, theta_fn, cost);
    if (reward > best_reward) {
      best_reward = reward;
      best = candidate;
    }
  }
  return best;
}

double bound_known_size(std::span<const double> deltas, double horizon,
                    double epsilon, double const_c, int p) {
  if (!(epsilon > 0.0))
    throw std::invalid_argument("bound_known_size: epsilon must be positive");
  double sum = 0.0;
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] > 2.0 * epsilon))
      throw std::invalid_argument(
          "bound_known_size: gap of arm " + std::to_string(i) +
          " violates Delta > 2*epsilon");
    double denom = deltas[i] - 2.0 * epsilon;
    sum += (deltas[i] - epsilon) * std::log(horizon) / (denom * denom);
  }
  return sum + const_c * p / std::pow(epsilon, 4.0) +
         static_cast<double>(p) * p;
}

double bound_independent_arms(const std::vector<std::pair<SuperArm, double>>& gap_map,
                    int q_star, double epsilon, const CostParams& cost,
                    double const_c, double horizon, double delta_max, int p) {
  if (!(epsilon > 0.0))
    throw std::invalid_argument("bound_independent_arms: epsilon must be positive");
  if (q_star < 1)
    throw std::invalid_argument("bound_independent_arms: q_star must be >= 1");
  const double b = cost.gain;
  const double shift =
      2.0 * b * (static_cast<double>(q_star) * q_star + 2.0) * epsilon;

  std::vector<double> eta(p, 0.0);
  for (const auto& [subset, gap] : gap_map) {
    if (!(gap > shift)) {
      std::string names;
      for (int i : subset) {
        if (!names.empty()) names += ',';
        names += std::to_string(i);
      }
      throw std::invalid_argument(
          "bound_independent_arms: subset {" + names +
          "} violates Delta_S > 2B(q*^2+2)*epsilon");
    }
    const double value = 8.0 * b * b * subset.size() / (gap - shift);
    for (int i : subset) eta[i] = std::max(eta[i], value);
  }
  double eta_sum = 0.0;
  for (double v : eta) eta_sum += v;

  const double eps2 = epsilon * epsilon;
  return std::log(horizon) * eta_sum +
         p * (static_cast<double>(p) * p / eps2 + 3.0) * delta_max +
         const_c * (8.0 * delta_max / eps2) *
             std::pow(4.0 / eps2 + 1.0, q_star) * std::log(q_star / eps2);
}

double identifiable_margin_constant(double alpha, double c1, double c2) {
  if (!(alpha > 0.0) || !(alpha < 0.5))
    throw std::invalid_argument("bound_identifiable: alpha must lie in (0, 1/2)");
  const double ctilde = c1 + c2 * (1.0 - 2.0 * alpha) / (32.0 * alpha);
  return ctilde * std::exp(-4.0 * alpha) /
             (1.0 - std::exp(-alpha * alpha / 2.0)) +
         (8.0 / (alpha * alpha)) / (std::exp(2.0 * alpha) - 1.0) +
         std::exp(-1.0) / (1.0 - std::exp(-alpha / 8.0)) +
         std::ceil(8.0 / alpha) * (3.0 + 1.0 / alpha);
}

double bound_identifiable(double alpha, int p, int q_star, double horizon,
                      double delta_max, double c1, double c2) {
  const double c_alpha = identifiable_margin_constant(alpha, c1, c2);
  return delta_max * (8.0 * p * std::log(horizon) / (alpha * alpha) +
                      c_alpha * q_star +
                      (2.0 + 4.0 / (alpha * alpha)) * p);
}

double kl_divergence(double a, double b) {
  if (a < 0.0 || a > 1.0 || b < 0.0 || b > 1.0)
    throw std::invalid_argument("kl_divergence: arguments must lie in [0,1]");
  if (a == b) return 0.0;
  if (b == 0.0 || b == 1.0) return std::numeric_limits<double>::infinity();
  double total = 0.0;
  if (a > 0.0) total += a * std::log(a / b);
  if (a < 1.0) total += (1.0 - a) * std::log((1.0 - a) / (1.0 - b));
  return total;
}

SelectionMetrics selection_metrics(const SuperArm& selected,
                                   const SuperArm& truth, int p) {
  for (int i : selected)
    if (i >= p) throw std::invalid_argument("selection_metrics: index >= p");
  for (int i : truth)
    if (i >= p) throw std::invalid_argument("selection_metrics: index >= p");

  long true_positives = 0, false_positives = 0;
  for (int i : selected) {
    if (truth.contains(i))
      ++true_positives;
    else
      ++false_positives;
  }
  const long false_negatives = truth.size() - true_positives;

  SelectionMetrics out;
  out.fdp = static_cast<double>(false_positives) /
            std::max<long>(selected.size(), 1);
  out.power = truth.empty() ? 1.0
                            : static_cast<double>(true_positives) /
                                  static_cast<double>(truth.size());
  out.hamming = false_positives + false_negatives;
  return out;
}

}  // namespace tvs
