#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "tvs/datagen.hpp"
#include "tvs/forest.hpp"

using namespace tvs;

namespace {

Dataset linear_signal_dataset(int n, int p, double coef, double noise_sd,
                              Rng& rng) {
  Dataset data;
  data.n = n;
  data.p = p;
  data.x.resize(static_cast<std::size_t>(n) * p);
  data.y.resize(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) data.xat(i, j) = rng.uniform();
  for (int i = 0; i < n; ++i)
    data.y[i] = coef * data.xat(i, 1) + noise_sd * rng.normal();
  return data;
}

std::vector<int> all_rows(const Dataset& data) {
  std::vector<int> rows(data.n);
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

}  // namespace

TEST_CASE("constant response fits a forest of stumps") {
  Rng rng(1);
  Dataset data;
  data.n = 60;
  data.p = 3;
  data.x.resize(180);
  for (auto& v : data.x) v = rng.uniform();
  data.y.assign(60, 4.25);
  auto rows = all_rows(data);
  DataContext ctx{&data, rows};
  ForestFit fit = forest_fit(ctx, SuperArm({0, 1, 2}), ForestParams{}, rng);
  for (long count : fit.split_counts) CHECK(count == 0);
  for (const ForestTree& tree : fit.trees) {
    CHECK(tree.nodes.size() == 1);
    CHECK(tree.nodes[0].value == doctest::Approx(4.25));
  }
}

TEST_CASE("single depth-one tree makes at most one split") {
  Rng rng(2);
  Dataset data = linear_signal_dataset(100, 2, 10.0, 0.1, rng);
  auto rows = all_rows(data);
  DataContext ctx{&data, rows};
  ForestParams params;
  params.num_trees = 1;
  params.max_depth = 1;
  for (int k = 0; k < 20; ++k) {
    ForestFit fit = forest_fit(ctx, SuperArm({0, 1}), params, rng);
    long total = fit.split_counts[0] + fit.split_counts[1];
    CHECK(total <= 1);
  }
}

TEST_CASE("signal dominates noise in split counts") {
  Rng data_rng(3);
  Dataset data = linear_signal_dataset(500, 8, 10.0, 0.1, data_rng);
  auto rows = all_rows(data);
  DataContext ctx{&data, rows};
  SuperArm subset({1, 7});  // column 1 is the signal, 7 pure noise
  int signal_wins = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    ForestFit fit = forest_fit(ctx, subset, ForestParams{}, rng);
    if (fit.split_counts[0] > fit.split_counts[1]) ++signal_wins;
  }
  CHECK(signal_wins >= 95);
}

TEST_CASE("forest_fit validates its inputs") {
  Rng rng(4);
  Dataset data = linear_signal_dataset(12, 2, 1.0, 0.1, rng);
  auto rows = all_rows(data);
  DataContext ctx{&data, rows};
  CHECK_THROWS_AS(forest_fit(ctx, SuperArm{}, ForestParams{}, rng),
                  std::invalid_argument);
  ForestParams params;
  params.min_leaf = 10;  // 12 rows < 2*10
  CHECK_THROWS_AS(forest_fit(ctx, SuperArm({0}), params, rng),
                  std::invalid_argument);
}

TEST_CASE("offline rewards flag any split; zero counts give zero rewards") {
  Rng rng(5);
  Dataset data;
  data.n = 40;
  data.p = 2;
  data.x.resize(80);
  for (auto& v : data.x) v = rng.uniform();
  data.y.assign(40, 1.0);  // constant: no splits anywhere
  auto rows = all_rows(data);
  DataContext ctx{&data, rows};
  ForestRule rule(ForestParams{}, ForestRule::Mode::offline);
  RewardVector rv = rule.evaluate(SuperArm({0, 1}), ctx, rng);
  CHECK(rv.bits == std::vector<std::uint8_t>{0, 0});
}

TEST_CASE("online threshold zero rewards everything") {
  Rng rng(6);
  Dataset data = linear_signal_dataset(200, 4, 5.0, 0.5, rng);
  auto rows = all_rows(data);
  DataContext ctx{&data, rows};
  ForestParams params;
  params.importance_threshold = 0.0;
  ForestRule rule(params, ForestRule::Mode::online);
  RewardVector rv = rule.evaluate(SuperArm({0, 1, 2, 3}), ctx, rng);
  for (auto bit : rv.bits) CHECK(bit == 1);
}

TEST_CASE("friedman signals earn higher mean offline rewards than noise") {
  Rng data_rng(7);
  Dataset data = gen_friedman(300, 10, 1.0, false, data_rng);
  auto rows = all_rows(data);
  DataContext ctx{&data, rows};
  SuperArm subset({0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
  ForestRule rule(ForestParams{}, ForestRule::Mode::offline);
  std::vector<double> mean(10, 0.0);
  const int evals = 200;
  Rng rng(8);
  for (int k = 0; k < evals; ++k) {
    RewardVector rv = rule.evaluate(subset, ctx, rng);
    for (int j = 0; j < 10; ++j) mean[j] += rv.bits[j];
  }
  for (double& v : mean) v /= evals;
  double weakest_signal = *std::min_element(mean.begin(), mean.begin() + 5);
  double strongest_noise = *std::max_element(mean.begin() + 5, mean.end());
  INFO("signal means: ", mean[0], " ", mean[1], " ", mean[2], " ", mean[3],
       " ", mean[4]);
  INFO("noise max: ", strongest_noise);
  CHECK(weakest_signal > strongest_noise);
}

TEST_CASE("forest fit is deterministic given the rng stream") {
  Rng data_rng(9);
  Dataset data = linear_signal_dataset(150, 5, 3.0, 1.0, data_rng);
  auto rows = all_rows(data);
  DataContext ctx{&data, rows};
  Rng a(77), b(77);
  ForestFit left = forest_fit(ctx, SuperArm({0, 1, 2}), ForestParams{}, a);
  ForestFit right = forest_fit(ctx, SuperArm({0, 1, 2}), ForestParams{}, b);
  CHECK(left.split_counts == right.split_counts);
  REQUIRE(left.trees.size() == right.trees.size());
  for (std::size_t t = 0; t < left.trees.size(); ++t) {
    REQUIRE(left.trees[t].nodes.size() == right.trees[t].nodes.size());
    for (std::size_t k = 0; k < left.trees[t].nodes.size(); ++k) {
      CHECK(left.trees[t].nodes[k].feature == right.trees[t].nodes[k].feature);
      CHECK(left.trees[t].nodes[k].threshold ==
            right.trees[t].nodes[k].threshold);
    }
  }
}
