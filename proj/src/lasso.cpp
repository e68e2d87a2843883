#include "tvs/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tvs {

namespace {

double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

}  // namespace

LassoFit lasso_coordinate_descent(std::vector<std::vector<double>> columns,
                                  std::vector<double> y, double lambda,
                                  double tol, int max_sweeps) {
  const std::size_t k = columns.size();
  const std::size_t n = y.size();
  LassoFit fit;
  fit.beta.assign(k, 0.0);
  fit.lambda_used = lambda;

  std::vector<double> residual = y;
  for (fit.sweeps = 0; fit.sweeps < max_sweeps; ++fit.sweeps) {
    double max_change = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      const std::vector<double>& col = columns[j];
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += col[i] * residual[i];
      // Columns have unit 1/n-norm, so the coordinate solution is a single
      // soft threshold.
      double updated = soft_threshold(fit.beta[j] + dot / n, lambda);
      double change = updated - fit.beta[j];
      if (change != 0.0) {
        for (std::size_t i = 0; i < n; ++i) residual[i] -= change * col[i];
        fit.beta[j] = updated;
      }
      max_change = std::max(max_change, std::abs(change));
    }
    if (max_change < tol) {
      ++fit.sweeps;
      return fit;
    }
  }
  fit.converged = false;
  return fit;
}

LassoFit lasso_fit(const DataContext& ctx, const SuperArm& subset,
                   const LassoOptions& options, Rng& rng) {
  if (subset.empty())
    throw std::invalid_argument("lasso_fit: subset must be non-empty");
  if (ctx.data == nullptr)
    throw std::invalid_argument("lasso_fit: no dataset in context");
  const long n = static_cast<long>(ctx.rows.size());
  if (n < 2) throw std::invalid_argument("lasso_fit: needs at least 2 rows");

  std::vector<int> rows(ctx.rows.begin(), ctx.rows.end());
  if (options.bootstrap)
    for (long i = 0; i < n; ++i) rows[i] = ctx.rows[rng.uniform_int(n)];

  // Center y and standardize each restricted column to unit 1/n-norm.
  // Constant columns stay zero and can never enter the support.
  std::vector<double> y(n);
  for (long i = 0; i < n; ++i) y[i] = ctx.data->y[rows[i]];
  double y_mean = 0.0;
  for (double v : y) y_mean += v;
  y_mean /= n;
  for (double& v : y) v -= y_mean;

  const std::vector<int>& cols = subset.members();
  std::vector<std::vector<double>> design(cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j) {
    std::vector<double>& col = design[j];
    col.resize(n);
    double mean = 0.0;
    for (long i = 0; i < n; ++i) {
      col[i] = ctx.data->xat(rows[i], cols[j]);
      mean += col[i];
    }
    mean /= n;
    double sumsq = 0.0;
    for (long i = 0; i < n; ++i) {
      col[i] -= mean;
      sumsq += col[i] * col[i];
    }
    if (sumsq > 0.0) {
      double scale = 1.0 / std::sqrt(sumsq / n);
      for (long i = 0; i < n; ++i) col[i] *= scale;
    } else {
      std::fill(col.begin(), col.end(), 0.0);
    }
  }

  double lambda_max = 0.0;
  for (const auto& col : design) {
    double dot = 0.0;
    for (long i = 0; i < n; ++i) dot += col[i] * y[i];
    lambda_max = std::max(lambda_max, std::abs(dot) / n);
  }
  const double lambda =
      options.lambda >= 0.0 ? options.lambda : 0.5 * lambda_max;

  LassoFit fit = lasso_coordinate_descent(std::move(design), std::move(y),
                                          lambda, options.tol,
                                          options.max_sweeps);
  fit.lambda_max = lambda_max;
  return fit;
}

RewardVector LassoRule::evaluate(const SuperArm& subset,
                                 const DataContext& data, Rng& rng) const {
  RewardVector out;
  out.arms = subset.members();
  out.bits.assign(out.arms.size(), 0);
  if (subset.empty()) return out;

  LassoFit fit = lasso_fit(data, subset, options_, rng);
  if (!fit.converged) nonconverged_.fetch_add(1, std::memory_order_relaxed);
  for (std::size_t k = 0; k < out.bits.size(); ++k)
    out.bits[k] = fit.beta[k] != 0.0 ? 1 : 0;
  return out;
}

std::string LassoRule::diagnostics() const {
  long count = nonconverged_.load(std::memory_order_relaxed);
  if (count == 0) return {};
  return "lasso fits at sweep cap without converging: " +
         std::to_string(count);
}

}  // namespace tvs
