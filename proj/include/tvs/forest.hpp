#pragma once

#include <vector>

#include "tvs/feedback.hpp"

namespace tvs {

// Randomized regression forest used as the relevance learner. `mtry <= 0`
// means ceil(sqrt(|subset|)). `importance_threshold` is the average number
// of splits per tree an arm needs for an online reward.
struct ForestParams {
  int num_trees = 10;
  int max_depth = 6;
  int min_leaf = 5;
  int mtry = 0;
  int split_candidates = 32;
  bool bootstrap = true;
  double importance_threshold = 1.0;
};

struct ForestNode {
  int feature = -1;       // global column id; -1 marks a leaf
  double threshold = 0.0;  // go left when x <= threshold
  int left = -1;
  int right = -1;
  double value = 0.0;      // leaf mean
};

struct ForestTree {
  std::vector<ForestNode> nodes;  // node 0 is the root
  double predict(const Dataset& data, int row) const;
};

struct ForestFit {
  std::vector<ForestTree> trees;
  std::vector<long> split_counts;  // aligned with the fitted subset
};

// Fits `num_trees` greedy variance-reduction trees on the context rows
// (bootstrap-resampled when enabled), splitting only on subset members.
// Node growth is randomized with a depth-decaying attempt probability, the
// forest analog of a Bayesian tree ensemble's depth-regularizing prior.
ForestFit forest_fit(const DataContext& ctx, const SuperArm& subset,
                     const ForestParams& params, Rng& rng);

// Feedback from forest split counts. Offline: an arm is relevant when it was
// split on at least once anywhere in a freshly fit forest. Online: when its
// average splits per tree reach the importance threshold.
class ForestRule final : public FeedbackRule {
 public:
  enum class Mode { offline, online };

  ForestRule(ForestParams params, Mode mode)
      : params_(params), mode_(mode) {}

  RewardVector evaluate(const SuperArm& subset, const DataContext& data,
                        Rng& rng) const override;

  const ForestParams& params() const { return params_; }
  Mode mode() const { return mode_; }

 private:
  ForestParams params_;
  Mode mode_;
};

}  // namespace tvs
