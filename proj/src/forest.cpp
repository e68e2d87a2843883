#include "tvs/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace tvs {

namespace {

struct SplitChoice {
  int feature_pos = -1;  // position within the subset
  double threshold = 0.0;
  double gain = 0.0;
  long left_count = 0;
};

// Builder state shared across one tree's recursion.
struct TreeBuilder {
  const Dataset& data;
  const std::vector<int>& features;  // global column ids
  const ForestParams& params;
  int mtry;
  Rng& rng;
  std::vector<int>& rows;            // workspace, partitioned in place
  std::vector<long>& split_counts;   // aligned with `features`
  ForestTree& tree;
  std::vector<std::pair<double, double>> scratch;  // (x, y) pairs
  std::vector<int> feature_picks;

  // Attempt probability 0.95/(1+d)^3. A greedy fitter keeps any split with
  // positive in-sample gain, so it needs a harsher depth decay than a
  // likelihood-weighted Bayesian ensemble to leave pure-noise arms unsplit.
  double growth_probability(int depth) const {
    double scale = (1.0 + depth) * (1.0 + depth) * (1.0 + depth);
    return 0.95 / scale;
  }

  // Greedy best split over `mtry` sampled features and quantile cut points.
  SplitChoice best_split(int begin, int end) {
    const long n = end - begin;
    double sum = 0.0, sumsq = 0.0;
    for (int k = begin; k < end; ++k) {
      double y = data.y[rows[k]];
      sum += y;
      sumsq += y * y;
    }
    const double sse_parent = sumsq - sum * sum / n;
    SplitChoice best;
    if (!(sse_parent > 0.0)) return best;

    // Sample mtry distinct feature positions (partial Fisher-Yates).
    feature_picks.resize(features.size());
    std::iota(feature_picks.begin(), feature_picks.end(), 0);
    const int take = std::min<int>(mtry, static_cast<int>(features.size()));
    for (int k = 0; k < take; ++k) {
      int j = k + static_cast<int>(rng.uniform_int(feature_picks.size() - k));
      std::swap(feature_picks[k], feature_picks[j]);
    }

    const int cands = params.split_candidates;
    for (int f = 0; f < take; ++f) {
      const int pos = feature_picks[f];
      const int col = features[pos];
      scratch.clear();
      for (int k = begin; k < end; ++k)
        scratch.emplace_back(data.xat(rows[k], col), data.y[rows[k]]);
      std::sort(scratch.begin(), scratch.end());
      // Prefix sums over the sorted order give every cut's SSE in O(1).
      double left_sum = 0.0, left_sumsq = 0.0;
      long cut = 0;
      for (int c = 1; c <= cands; ++c) {
        long target = static_cast<long>(
            static_cast<double>(c) * n / (cands + 1));
        if (target <= cut) continue;
        for (; cut < target; ++cut) {
          left_sum += scratch[cut].second;
          left_sumsq += scratch[cut].second * scratch[cut].second;
        }
        // Push the boundary past ties so the partition matches x <= thr.
        while (cut < n && scratch[cut].first == scratch[cut - 1].first) {
          left_sum += scratch[cut].second;
          left_sumsq += scratch[cut].second * scratch[cut].second;
          ++cut;
        }
        const long left_n = cut, right_n = n - cut;
        if (left_n < params.min_leaf || right_n < params.min_leaf) continue;
        const double right_sum = sum - left_sum;
        const double right_sumsq = sumsq - left_sumsq;
        const double sse =
            (left_sumsq - left_sum * left_sum / left_n) +
            (right_sumsq - right_sum * right_sum / right_n);
        const double gain = sse_parent - sse;
        if (gain > best.gain && gain > 1e-12 * sse_parent) {
          best.feature_pos = pos;
          best.threshold = scratch[cut - 1].first;
          best.gain = gain;
          best.left_count = left_n;
        }
      }
    }
    return best;
  }

  int build(int begin, int end, int depth) {
    const long n = end - begin;
    double sum = 0.0;
    for (int k = begin; k < end; ++k) sum += data.y[rows[k]];

    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({});
    tree.nodes[node_id].value = sum / n;

    if (depth >= params.max_depth || n < 2 * params.min_leaf) return node_id;
    if (rng.uniform() >= growth_probability(depth)) return node_id;

    SplitChoice choice = best_split(begin, end);
    if (choice.feature_pos < 0) return node_id;

    const int col = features[choice.feature_pos];
    auto mid_it = std::partition(
        rows.begin() + begin, rows.begin() + end,
        [&](int r) { return data.xat(r, col) <= choice.threshold; });
    const int mid = static_cast<int>(mid_it - rows.begin());

    split_counts[choice.feature_pos] += 1;
    tree.nodes[node_id].feature = col;
    tree.nodes[node_id].threshold = choice.threshold;
    tree.nodes[node_id].left = build(begin, mid, depth + 1);
    tree.nodes[node_id].right = build(mid, end, depth + 1);
    return node_id;
  }
};

}  // namespace

double ForestTree::predict(const Dataset& data, int row) const {
  int node = 0;
  while (nodes[node].feature >= 0)
    node = data.xat(row, nodes[node].feature) <= nodes[node].threshold
               ? nodes[node].left
               : nodes[node].right;
  return nodes[node].value;
}

ForestFit forest_fit(const DataContext& ctx, const SuperArm& subset,
                     const ForestParams& params, Rng& rng) {
  if (subset.empty())
    throw std::invalid_argument("forest_fit: subset must be non-empty");
  if (ctx.data == nullptr)
    throw std::invalid_argument("forest_fit: no dataset in context");
  const long n = static_cast<long>(ctx.rows.size());
  if (n < 2 * params.min_leaf)
    throw std::invalid_argument("forest_fit: needs at least 2*min_leaf rows");
  if (params.num_trees < 1)
    throw std::invalid_argument("forest_fit: num_trees must be >= 1");

  const std::vector<int>& features = subset.members();
  const int mtry =
      params.mtry > 0
          ? std::min<int>(params.mtry, subset.size())
          : static_cast<int>(
                std::ceil(std::sqrt(static_cast<double>(subset.size()))));

  ForestFit fit;
  fit.split_counts.assign(features.size(), 0);
  fit.trees.resize(params.num_trees);
  std::vector<int> rows(ctx.rows.begin(), ctx.rows.end());
  for (ForestTree& tree : fit.trees) {
    if (params.bootstrap) {
      for (long k = 0; k < n; ++k)
        rows[k] = ctx.rows[rng.uniform_int(n)];
    } else {
      std::copy(ctx.rows.begin(), ctx.rows.end(), rows.begin());
    }
    TreeBuilder builder{*ctx.data, features, params, mtry, rng, rows,
                        fit.split_counts, tree, {}, {}};
    builder.build(0, static_cast<int>(n), 0);
  }
  return fit;
}

RewardVector ForestRule::evaluate(const SuperArm& subset,
                                  const DataContext& data, Rng& rng) const {
  RewardVector out;
  out.arms = subset.members();
  out.bits.assign(out.arms.size(), 0);
  if (subset.empty()) return out;

  ForestFit fit = forest_fit(data, subset, params_, rng);
  for (std::size_t k = 0; k < out.arms.size(); ++k) {
    if (mode_ == Mode::offline) {
      out.bits[k] = fit.split_counts[k] >= 1 ? 1 : 0;
    } else {
      double avg = static_cast<double>(fit.split_counts[k]) /
                   static_cast<double>(params_.num_trees);
      out.bits[k] = avg >= params_.importance_threshold ? 1 : 0;
    }
  }
  return out;
}

}  // namespace tvs
