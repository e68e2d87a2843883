#pragma once

#include <atomic>
#include <vector>

#include "tvs/feedback.hpp"

namespace tvs {

// `lambda < 0` selects the automatic choice 0.5 * lambda_max.
struct LassoOptions {
  double lambda = -1.0;
  bool bootstrap = true;
  double tol = 1e-7;
  int max_sweeps = 10000;
};

struct LassoFit {
  std::vector<double> beta;  // standardized scale, aligned with the subset
  bool converged = true;
  int sweeps = 0;
  double lambda_used = 0.0;
  double lambda_max = 0.0;
};

// Cyclic coordinate descent with soft thresholding on a design whose columns
// have been centered and scaled to unit 1/n-norm, with y centered. Stops when
// the largest coefficient change in a sweep drops below `tol`.
LassoFit lasso_coordinate_descent(std::vector<std::vector<double>> columns,
                                  std::vector<double> y, double lambda,
                                  double tol, int max_sweeps);

// Fits the lasso on the context rows restricted to the subset columns,
// standardizing in place; rows are bootstrap-resampled when enabled.
LassoFit lasso_fit(const DataContext& ctx, const SuperArm& subset,
                   const LassoOptions& options, Rng& rng);

// Support-indicator feedback: an arm is relevant when its lasso coefficient
// is nonzero. Stochasticity comes from the bootstrap resample.
class LassoRule final : public FeedbackRule {
 public:
  explicit LassoRule(LassoOptions options) : options_(options) {}

  RewardVector evaluate(const SuperArm& subset, const DataContext& data,
                        Rng& rng) const override;
  std::string diagnostics() const override;

 private:
  LassoOptions options_;
  mutable std::atomic<long> nonconverged_{0};
};

}  // namespace tvs
