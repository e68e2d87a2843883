#include "tvs/feedback.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace tvs {

namespace {

double clamp01(double v, double lo, double hi) {
  return std::min(hi, std::max(lo, v));
}

}  // namespace

SetDependentBernoulli::SetDependentBernoulli(std::vector<double> base)
    : base_(std::move(base)),
      lo_(base_.size(), 0.0),
      hi_(base_.size(), 1.0) {
  for (double v : base_)
    if (v < 0.0 || v > 1.0)
      throw std::invalid_argument("SetDependentBernoulli: base outside [0,1]");
}

SetDependentBernoulli::SetDependentBernoulli(std::vector<double> base,
                                             std::vector<double> interaction,
                                             std::vector<double> lo,
                                             std::vector<double> hi)
    : base_(std::move(base)),
      interaction_(std::move(interaction)),
      lo_(std::move(lo)),
      hi_(std::move(hi)) {
  const std::size_t p = base_.size();
  if (interaction_.size() != p * p || lo_.size() != p || hi_.size() != p)
    throw std::invalid_argument("SetDependentBernoulli: shape mismatch");
  for (std::size_t i = 0; i < p; ++i) {
    if (interaction_[i * p + i] != 0.0)
      throw std::invalid_argument(
          "SetDependentBernoulli: interaction diagonal must be zero");
    for (std::size_t j = 0; j < i; ++j)
      if (interaction_[i * p + j] != interaction_[j * p + i])
        throw std::invalid_argument(
            "SetDependentBernoulli: interaction must be symmetric");
    if (lo_[i] < 0.0 || hi_[i] > 1.0 || lo_[i] > hi_[i])
      throw std::invalid_argument(
          "SetDependentBernoulli: clamp bounds must satisfy 0<=lo<=hi<=1");
  }
}

SetDependentBernoulli SetDependentBernoulli::strongly_identifiable(
    int p, const SuperArm& signals, double alpha, double interaction_scale,
    Rng& rng) {
  if (!(alpha > 0.0) || !(alpha < 0.5))
    throw std::invalid_argument("strongly_identifiable: alpha in (0, 1/2)");
  const double pad = 0.5 * std::min(0.04, 0.5 - alpha);
  std::vector<double> base(p), lo(p), hi(p);
  std::vector<double> w(static_cast<std::size_t>(p) * p, 0.0);
  for (int i = 0; i < p; ++i) {
    if (signals.contains(i)) {
      lo[i] = 0.5 + alpha + pad;
      hi[i] = std::min(1.0, std::max(lo[i] + pad, 0.5 + alpha + 6.0 * pad));
    } else {
      hi[i] = 0.5 - alpha - pad;
      lo[i] = std::max(0.0, hi[i] - 6.0 * pad);
    }
    base[i] = 0.5 * (lo[i] + hi[i]);
  }
  // Signal-signal interactions are non-negative and signal-noise ones are
  // non-positive, so a signal's mean reward is maximal at the optimal set.
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      double mag = interaction_scale * rng.uniform();
      double val;
      bool si = signals.contains(i), sj = signals.contains(j);
      if (si && sj)
        val = mag;
      else if (si || sj)
        val = -mag;
      else
        val = rng.bernoulli(0.5) ? mag : -mag;
      w[static_cast<std::size_t>(i) * p + j] = val;
      w[static_cast<std::size_t>(j) * p + i] = val;
    }
  }
  return SetDependentBernoulli(std::move(base), std::move(w), std::move(lo),
                               std::move(hi));
}

double SetDependentBernoulli::theta(int i, const SuperArm& subset) const {
  if (interaction_.empty()) return base_[i];
  const std::size_t p = base_.size();
  double sum = base_[i];
  for (int j : subset)
    if (j != i) sum += interaction_[static_cast<std::size_t>(i) * p + j];
  return clamp01(sum, lo_[i], hi_[i]);
}

RewardVector SetDependentBernoulli::evaluate(const SuperArm& subset,
                                             const DataContext& /*data*/,
                                             Rng& rng) const {
  RewardVector out;
  out.arms = subset.members();
  out.bits.resize(out.arms.size());
  for (std::size_t k = 0; k < out.arms.size(); ++k)
    out.bits[k] = rng.bernoulli(theta(out.arms[k], subset)) ? 1 : 0;
  return out;
}

IdentifiabilityReport validate_strong_identifiability(
    const SetDependentBernoulli& rule, const SuperArm& signals, double alpha,
    long sample_budget, Rng* rng) {
  const int p = rule.dim();
  IdentifiabilityReport report;
  report.worst_margin = 1.0;

  auto consider = [&](int arm, double theta_val, bool is_signal) {
    double margin = is_signal ? theta_val - 0.5 : 0.5 - theta_val;
    if (margin < report.worst_margin) {
      report.worst_margin = margin;
      report.worst_arm = arm;
    }
  };

  const bool exhaustive = (p <= 20 && sample_budget == 0);
  report.exhaustive = exhaustive;
  if (!exhaustive && rng == nullptr)
    throw std::invalid_argument(
        "validate_strong_identifiability: sampled mode needs an rng");

  for (int i = 0; i < p; ++i) {
    const bool is_signal = signals.contains(i);
    const double at_star = rule.theta(i, signals);
    double max_theta = at_star;

    if (exhaustive) {
      std::vector<int> others;
      others.reserve(p - 1);
      for (int j = 0; j < p; ++j)
        if (j != i) others.push_back(j);
      const int m = static_cast<int>(others.size());
      // Gray-code walk over subsets of the other arms; each step toggles one
      // member of the running subset.
      std::vector<int> current{i};
      SuperArm subset(current);
      double theta_val = rule.theta(i, subset);
      consider(i, theta_val, is_signal);
      max_theta = std::max(max_theta, theta_val);
      std::vector<char> present(m, 0);
      ++report.subsets_checked;
      for (std::uint64_t k = 1; k < (1ULL << m); ++k) {
        int flip = std::countr_zero(k);
        present[flip] ^= 1;
        if (present[flip])
          current.push_back(others[flip]);
        else
          current.erase(
              std::find(current.begin(), current.end(), others[flip]));
        subset = SuperArm(current);
        theta_val = rule.theta(i, subset);
        consider(i, theta_val, is_signal);
        max_theta = std::max(max_theta, theta_val);
        ++report.subsets_checked;
      }
    } else {
      for (long s = 0; s < sample_budget; ++s) {
        std::vector<int> members{i};
        for (int j = 0; j < p; ++j)
          if (j != i && rng->bernoulli(0.5)) members.push_back(j);
        SuperArm subset(std::move(members));
        double theta_val = rule.theta(i, subset);
        consider(i, theta_val, is_signal);
        max_theta = std::max(max_theta, theta_val);
        ++report.subsets_checked;
      }
    }

    if (is_signal && max_theta > at_star + 1e-15)
      report.monotone_at_star = false;
  }

  report.pass = report.worst_margin > alpha && report.monotone_at_star;
  return report;
}

}  // namespace tvs
