#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "tvs/datagen.hpp"

using namespace tvs;

namespace {

double column_covariance(const Dataset& data, int j, int k) {
  double mj = 0.0, mk = 0.0;
  for (int i = 0; i < data.n; ++i) {
    mj += data.xat(i, j);
    mk += data.xat(i, k);
  }
  mj /= data.n;
  mk /= data.n;
  double cov = 0.0;
  for (int i = 0; i < data.n; ++i)
    cov += (data.xat(i, j) - mj) * (data.xat(i, k) - mk);
  return cov / data.n;
}

double residual_variance(const Dataset& data,
                         double (*f0)(std::span<const double>)) {
  std::vector<double> row(data.p);
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < data.n; ++i) {
    for (int j = 0; j < data.p; ++j) row[j] = data.xat(i, j);
    double eps = data.y[i] - f0(row);
    sum += eps;
    sumsq += eps * eps;
  }
  double mean = sum / data.n;
  return sumsq / data.n - mean * mean;
}

}  // namespace

TEST_CASE("mean functions at pinned points") {
  std::vector<double> half(10, 0.5);
  CHECK(friedman_f0(half) == doctest::Approx(14.571067811865476).epsilon(1e-12));
  std::vector<double> zeros{0.0, 0.0, 0.5, 0.0, 0.0};
  CHECK(friedman_f0(zeros) == doctest::Approx(0.0));
  std::vector<double> ones{1, 1, 1, 1, 1, 0, 0};
  CHECK(linear_f0(ones) == doctest::Approx(3.0));
  CHECK(liang_f0(ones) == doctest::Approx(11.207354924039483).epsilon(1e-12));
  std::vector<double> liang_zero{7.0, 0.0, 0.0, -3.0, 0.0};
  CHECK(liang_f0(liang_zero) == doctest::Approx(0.0));
}

TEST_CASE("generators require p >= 5") {
  Rng rng(1);
  CHECK_THROWS_AS(gen_friedman(10, 4, 1.0, false, rng), std::invalid_argument);
  CHECK_THROWS_AS(gen_linear(10, 4, 1.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(gen_liang(10, 4, 1.0, rng), std::invalid_argument);
  CHECK_THROWS_AS(gen_forest(10, 3, 1.0, 10, rng), std::invalid_argument);
}

TEST_CASE("generators are reproducible from the seed") {
  Rng a(99), b(99);
  Dataset left = gen_friedman(50, 8, 1.0, true, a);
  Dataset right = gen_friedman(50, 8, 1.0, true, b);
  CHECK(left.x == right.x);
  CHECK(left.y == right.y);
}

TEST_CASE("linear setup has the AR(1) covariance") {
  Rng rng(7);
  Dataset data = gen_linear(100000, 6, 5.0, rng);
  CHECK(column_covariance(data, 0, 1) == doctest::Approx(0.9).epsilon(0.02));
  CHECK(column_covariance(data, 0, 2) == doctest::Approx(0.81).epsilon(0.02));
  CHECK(column_covariance(data, 0, 0) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("liang setup has inter-column correlation about one half") {
  Rng rng(8);
  Dataset data = gen_liang(100000, 6, 0.5, rng);
  double var = column_covariance(data, 1, 1);
  double cov = column_covariance(data, 1, 4);
  CHECK(cov / var == doctest::Approx(0.5).epsilon(0.03));
  CHECK(var == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("friedman correlated features keep uniform marginals") {
  Rng rng(9);
  Dataset data = gen_friedman(100000, 6, 1.0, true, rng);
  CHECK(column_covariance(data, 2, 2) == doctest::Approx(1.0 / 12).epsilon(0.03));
  double corr = column_covariance(data, 0, 3) /
                std::sqrt(column_covariance(data, 0, 0) *
                          column_covariance(data, 3, 3));
  // The copula shrinks the latent 0.3 slightly on the uniform scale.
  CHECK(corr > 0.2);
  CHECK(corr < 0.35);
}

TEST_CASE("noise variance is calibrated") {
  Rng rng(10);
  Dataset friedman = gen_friedman(100000, 5, 1.0, false, rng);
  CHECK(residual_variance(friedman, friedman_f0) ==
        doctest::Approx(1.0).epsilon(0.1));
  Dataset linear = gen_linear(100000, 5, 5.0, rng);
  CHECK(residual_variance(linear, linear_f0) ==
        doctest::Approx(5.0).epsilon(0.1));
  Dataset liang = gen_liang(100000, 5, 0.5, rng);
  CHECK(residual_variance(liang, liang_f0) ==
        doctest::Approx(0.5).epsilon(0.1));
}

TEST_CASE("forest setup mean is constant outside its support") {
  Rng rng(11);
  ForestSetup setup = make_forest_setup(500, 9, 0.5, 200, rng);
  std::vector<double> row(9);
  for (int i = 0; i < 50; ++i) {
    for (int j = 0; j < 9; ++j) row[j] = setup.data.xat(i, j);
    double before = setup.eval_f0(row);
    row[6] += 17.5;  // outside the support
    row[8] -= 3.0;
    CHECK(setup.eval_f0(row) == before);
  }
}

TEST_CASE("forest setup f0 variance is near one across seeds") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    ForestSetup setup = make_forest_setup(2000, 5, 0.5, 200, rng);
    std::vector<double> row(5);
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < setup.data.n; ++i) {
      for (int j = 0; j < 5; ++j) row[j] = setup.data.xat(i, j);
      double v = setup.eval_f0(row);
      sum += v;
      sumsq += v * v;
    }
    double mean = sum / setup.data.n;
    double var = sumsq / setup.data.n - mean * mean;
    CHECK(var >= 0.5);
    CHECK(var <= 2.0);
  }
}

TEST_CASE("forest setup with zero trees is pure noise") {
  Rng rng(12);
  ForestSetup setup = make_forest_setup(200, 5, 0.25, 0, rng);
  std::vector<double> row(5, 0.3);
  CHECK(setup.eval_f0(row) == 0.0);
  double sumsq = 0.0;
  for (double v : setup.data.y) sumsq += v * v;
  CHECK(sumsq / setup.data.n == doctest::Approx(0.25).epsilon(0.25));
}

TEST_CASE("make_batches partitions round one in order") {
  Rng rng(13);
  Dataset data;
  data.n = 10;
  data.p = 1;
  data.x.assign(10, 0.0);
  data.y.assign(10, 0.0);
  auto plans = make_batches(data, 5, 1, rng);
  REQUIRE(plans.size() == 1);
  CHECK(plans[0].num_batches == 2);
  CHECK(std::vector<int>(plans[0].batch(0).begin(), plans[0].batch(0).end()) ==
        std::vector<int>{0, 1, 2, 3, 4});
  CHECK(std::vector<int>(plans[0].batch(1).begin(), plans[0].batch(1).end()) ==
        std::vector<int>{5, 6, 7, 8, 9});
}

TEST_CASE("make_batches: five rounds of 20 batches on the liang preset dims") {
  Rng rng(14);
  Dataset data;
  data.n = 20000;
  data.p = 1;
  data.x.assign(20000, 0.0);
  data.y.assign(20000, 0.0);
  auto plans = make_batches(data, 1000, 5, rng);
  long total = 0;
  for (const auto& plan : plans) total += plan.num_batches;
  CHECK(total == 100);
  CHECK(plans[1].rows.size() == 20000);
}

TEST_CASE("make_batches validates the batch size") {
  Rng rng(15);
  Dataset data;
  data.n = 4;
  data.p = 1;
  data.x.assign(4, 0.0);
  data.y.assign(4, 0.0);
  CHECK_THROWS_AS(make_batches(data, 5, 1, rng), std::invalid_argument);
  CHECK_THROWS_AS(make_batches(data, 0, 1, rng), std::invalid_argument);
}

TEST_CASE("dataset csv round trip is bit exact") {
  Rng rng(16);
  Dataset data = gen_liang(40, 7, 0.5, rng);
  std::stringstream buffer;
  write_dataset_csv(data, buffer);
  Dataset back = read_dataset_csv(buffer);
  CHECK(back.n == data.n);
  CHECK(back.p == data.p);
  CHECK(back.sigma2 == data.sigma2);
  CHECK(back.setup_tag == data.setup_tag);
  CHECK(back.true_support == data.true_support);
  CHECK(back.x == data.x);
  CHECK(back.y == data.y);
}

TEST_CASE("permuting a column outside the support leaves f0 unchanged") {
  Rng rng(17);
  Dataset data = gen_friedman(200, 8, 1.0, false, rng);
  std::vector<double> row(8);
  for (int i = 0; i < data.n; ++i) {
    for (int j = 0; j < 8; ++j) row[j] = data.xat(i, j);
    double before = friedman_f0(row);
    std::swap(row[6], row[7]);
    row[5] = 1.0 - row[5];
    CHECK(friedman_f0(row) == before);
  }
}
