#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "tvs/arms.hpp"
#include "tvs/datagen.hpp"
#include "tvs/rng.hpp"

namespace tvs {

// The data a feedback rule may look at: a dataset and the rows of the
// current batch (all rows in offline mode). Synthetic rules ignore it.
struct DataContext {
  const Dataset* data = nullptr;
  std::span<const int> rows;
};

// A feedback rule maps (played subset, data) to one binary relevance reward
// per played arm. Rules are immutable after construction; evaluate is
// reentrant given disjoint rng streams.
class FeedbackRule {
 public:
  virtual ~FeedbackRule() = default;
  virtual RewardVector evaluate(const SuperArm& subset,
                                const DataContext& data, Rng& rng) const = 0;
  // Free-form run-log note (e.g. non-converged solver count); empty if none.
  virtual std::string diagnostics() const { return {}; }
};

// Synthetic arms with mean rewards theta_i(S) = clamp(base_i +
// sum_{j in S, j != i} W_ij, lo_i, hi_i). With no interaction matrix this is
// the independent-arm model.
class SetDependentBernoulli final : public FeedbackRule {
 public:
  // Independent arms: theta_i(S) = base_i.
  explicit SetDependentBernoulli(std::vector<double> base);

  // Interacting arms. `interaction` is a p*p row-major symmetric matrix with
  // zero diagonal; `lo`/`hi` are the per-arm clamp bounds.
  SetDependentBernoulli(std::vector<double> base,
                        std::vector<double> interaction,
                        std::vector<double> lo, std::vector<double> hi);

  // Builds an instance whose signal arms satisfy theta_i(S) > 0.5 + alpha
  // and noise arms theta_i(S) < 0.5 - alpha for every S, by construction:
  // interaction signs are arranged so theta_i(S*) majorizes theta_i(S) for
  // signals, and the clamp bounds enforce the margins.
  static SetDependentBernoulli strongly_identifiable(int p,
                                                     const SuperArm& signals,
                                                     double alpha,
                                                     double interaction_scale,
                                                     Rng& rng);

  int dim() const { return static_cast<int>(base_.size()); }
  bool independent() const { return interaction_.empty(); }
  double theta(int i, const SuperArm& subset) const;

  RewardVector evaluate(const SuperArm& subset, const DataContext& data,
                        Rng& rng) const override;

 private:
  std::vector<double> base_;
  std::vector<double> interaction_;  // empty, or p*p row-major
  std::vector<double> lo_, hi_;
};

// Assumption-check result for a set-dependent instance. `worst_margin` is
// the smallest observed separation from 0.5 across all checked (arm, subset)
// pairs; `monotone_at_star` reports whether every signal's mean reward is
// maximal at the optimal set.
struct IdentifiabilityReport {
  bool pass = false;
  double worst_margin = 0.0;
  int worst_arm = -1;
  bool monotone_at_star = true;
  bool exhaustive = true;
  long subsets_checked = 0;
};

// Checks the strong-identifiability inequalities. For p <= 20 (or when
// sample_budget is zero) every subset containing each arm is enumerated;
// otherwise `sample_budget` random subsets per arm are drawn from *rng.
IdentifiabilityReport validate_strong_identifiability(
    const SetDependentBernoulli& rule, const SuperArm& signals, double alpha,
    long sample_budget = 0, Rng* rng = nullptr);

}  // namespace tvs
