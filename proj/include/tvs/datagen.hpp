#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "tvs/arms.hpp"
#include "tvs/rng.hpp"

namespace tvs {

// Synthetic regression data. Features are stored column-major so that the
// tree and lasso fitters can walk one variable contiguously.
struct Dataset {
  int n = 0;
  int p = 0;
  std::vector<double> x;  // column-major: x[j * n + i]
  std::vector<double> y;
  SuperArm true_support;
  double sigma2 = 0.0;
  std::string setup_tag;

  double xat(int i, int j) const {
    return x[static_cast<std::size_t>(j) * n + i];
  }
  double& xat(int i, int j) {
    return x[static_cast<std::size_t>(j) * n + i];
  }
  std::span<const double> column(int j) const {
    return {x.data() + static_cast<std::size_t>(j) * n,
            static_cast<std::size_t>(n)};
  }
};

// Mean functions of the four benchmark setups, evaluated on one row.
double friedman_f0(std::span<const double> row);
double linear_f0(std::span<const double> row);
double liang_f0(std::span<const double> row);

// Friedman: iid Uniform(0,1) features (or a Gaussian copula with latent
// equicorrelation 0.3 when `correlated` is set), five signals.
Dataset gen_friedman(int n, int p, double sigma2, bool correlated, Rng& rng);

// Linear: AR(1) Gaussian features with lag correlation 0.9 and a five-term
// linear mean.
Dataset gen_linear(int n, int p, double sigma2, Rng& rng);

// Liang: x_ij = (e_i + z_ij)/2 with iid standard normal e, z, giving an
// inter-column correlation of about one half.
Dataset gen_liang(int n, int p, double sigma2, Rng& rng);

// One shallow random tree used by the forest setup's mean function.
struct GenTree {
  // Complete depth-2 binary tree: internal nodes 0..2, leaves 0..3.
  int split_var[3] = {0, 0, 0};
  double split_at[3] = {0.0, 0.0, 0.0};
  double leaf[4] = {0.0, 0.0, 0.0, 0.0};
  double eval(std::span<const double> row) const;
};

// The forest setup with its generating trees kept around so that f0 can be
// re-evaluated (e.g. to confirm it is constant outside the support).
struct ForestSetup {
  Dataset data;
  std::vector<GenTree> trees;
  double scale = 1.0;  // applied to the tree sum so Var(f0) is about one
  double eval_f0(std::span<const double> row) const;
};

ForestSetup make_forest_setup(int n, int p, double sigma2, int num_gen_trees,
                              Rng& rng);

// Forest: AR(1) Gaussian features with lag correlation 0.3 and a mean drawn
// as a sum of random shallow trees splitting only on the first five columns.
Dataset gen_forest(int n, int p, double sigma2, int num_gen_trees, Rng& rng);

// One pass over the data as disjoint mini-batches. Round one keeps the
// original row order; later rounds re-batch a bootstrap resample.
struct BatchPlan {
  int batch_size = 0;
  int num_batches = 0;
  int round = 1;
  std::vector<int> rows;

  std::span<const int> batch(int b) const {
    return {rows.data() + static_cast<std::size_t>(b) * batch_size,
            static_cast<std::size_t>(batch_size)};
  }
};

std::vector<BatchPlan> make_batches(const Dataset& data, int batch_size,
                                    int rounds, Rng& rng);

// CSV interchange format: a header line `n,p,sigma2,setup,support=...`
// followed by n rows of p features and y. Doubles are printed with 17
// significant digits so the round trip is bit exact.
void write_dataset_csv(const Dataset& data, std::ostream& out);
Dataset read_dataset_csv(std::istream& in);
void write_dataset_file(const Dataset& data, const std::string& path);
Dataset read_dataset_file(const std::string& path);

}  // namespace tvs
