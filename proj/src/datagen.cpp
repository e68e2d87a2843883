#include "tvs/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace tvs {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_p_at_least_five(int p, const char* setup) {
  if (p < 5)
    throw std::invalid_argument(std::string(setup) +
                                ": needs at least 5 predictors");
}

// Standard normal CDF, used by the Gaussian copula.
double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// Fills the feature matrix with rows drawn iid N(0, Sigma) where
// Sigma_jk = rho^|j-k|. The AR(1) structure allows sequential sampling.
void fill_ar1_gaussian(Dataset& data, double rho, Rng& rng) {
  const double resid = std::sqrt(1.0 - rho * rho);
  for (int i = 0; i < data.n; ++i) {
    double prev = rng.normal();
    data.xat(i, 0) = prev;
    for (int j = 1; j < data.p; ++j) {
      prev = rho * prev + resid * rng.normal();
      data.xat(i, j) = prev;
    }
  }
}

void add_noise(Dataset& data, const std::vector<double>& f0, Rng& rng) {
  const double sd = std::sqrt(data.sigma2);
  data.y.resize(data.n);
  for (int i = 0; i < data.n; ++i) data.y[i] = f0[i] + sd * rng.normal();
}

std::vector<double> row_of(const Dataset& data, int i) {
  std::vector<double> row(data.p);
  for (int j = 0; j < data.p; ++j) row[j] = data.xat(i, j);
  return row;
}

void format_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

double friedman_f0(std::span<const double> row) {
  return 10.0 * std::sin(kPi * row[0] * row[1]) +
         20.0 * (row[2] - 0.5) * (row[2] - 0.5) + 10.0 * row[3] + 5.0 * row[4];
}

double linear_f0(std::span<const double> row) {
  return row[0] + 2.0 * row[1] + 3.0 * row[2] - 2.0 * row[3] - row[4];
}

double liang_f0(std::span<const double> row) {
  return 10.0 * row[1] / (1.0 + row[0] * row[0]) +
         5.0 * std::sin(row[2] * row[3]) + 2.0 * row[4];
}

Dataset gen_friedman(int n, int p, double sigma2, bool correlated, Rng& rng) {
  require_p_at_least_five(p, "gen_friedman");
  Dataset data;
  data.n = n;
  data.p = p;
  data.sigma2 = sigma2;
  data.setup_tag = "friedman";
  data.true_support = SuperArm({0, 1, 2, 3, 4});
  data.x.resize(static_cast<std::size_t>(n) * p);

  if (!correlated) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < p; ++j) data.xat(i, j) = rng.uniform();
  } else {
    // Equicorrelated latent Gaussians (rho = 0.3) pushed through the normal
    // CDF to uniform marginals.
    const double rho = 0.3;
    const double w_shared = std::sqrt(rho);
    const double w_own = std::sqrt(1.0 - rho);
    for (int i = 0; i < n; ++i) {
      const double shared = rng.normal();
      for (int j = 0; j < p; ++j)
        data.xat(i, j) = normal_cdf(w_shared * shared + w_own * rng.normal());
    }
  }

  std::vector<double> f0(n);
  for (int i = 0; i < n; ++i) f0[i] = friedman_f0(row_of(data, i));
  add_noise(data, f0, rng);
  return data;
}

Dataset gen_linear(int n, int p, double sigma2, Rng& rng) {
  require_p_at_least_five(p, "gen_linear");
  Dataset data;
  data.n = n;
  data.p = p;
  data.sigma2 = sigma2;
  data.setup_tag = "linear";
  data.true_support = SuperArm({0, 1, 2, 3, 4});
  data.x.resize(static_cast<std::size_t>(n) * p);
  fill_ar1_gaussian(data, 0.9, rng);

  std::vector<double> f0(n);
  for (int i = 0; i < n; ++i) f0[i] = linear_f0(row_of(data, i));
  add_noise(data, f0, rng);
  return data;
}

Dataset gen_liang(int n, int p, double sigma2, Rng& rng) {
  require_p_at_least_five(p, "gen_liang");
  Dataset data;
  data.n = n;
  data.p = p;
  data.sigma2 = sigma2;
  data.setup_tag = "liang";
  data.true_support = SuperArm({0, 1, 2, 3, 4});
  data.x.resize(static_cast<std::size_t>(n) * p);
  for (int i = 0; i < n; ++i) {
    const double e = rng.normal();
    for (int j = 0; j < p; ++j) data.xat(i, j) = 0.5 * (e + rng.normal());
  }

  std::vector<double> f0(n);
  for (int i = 0; i < n; ++i) f0[i] = liang_f0(row_of(data, i));
  add_noise(data, f0, rng);
  return data;
}

double GenTree::eval(std::span<const double> row) const {
  int node = 0;  // 0 -> children 1,2; leaves indexed by path
  bool left0 = row[split_var[0]] <= split_at[0];
  node = left0 ? 1 : 2;
  bool left1 = row[split_var[node]] <= split_at[node];
  return leaf[2 * (node - 1) + (left1 ? 0 : 1)];
}

double ForestSetup::eval_f0(std::span<const double> row) const {
  double total = 0.0;
  for (const GenTree& t : trees) total += t.eval(row);
  return scale * total;
}

ForestSetup make_forest_setup(int n, int p, double sigma2, int num_gen_trees,
                              Rng& rng) {
  require_p_at_least_five(p, "gen_forest");
  if (num_gen_trees < 0)
    throw std::invalid_argument("gen_forest: num_gen_trees must be >= 0");
  ForestSetup setup;
  Dataset& data = setup.data;
  data.n = n;
  data.p = p;
  data.sigma2 = sigma2;
  data.setup_tag = "forest";
  data.true_support = SuperArm({0, 1, 2, 3, 4});
  data.x.resize(static_cast<std::size_t>(n) * p);
  fill_ar1_gaussian(data, 0.3, rng);

  // Shallow random trees: split variables from the support, thresholds at
  // random marginal quantiles, leaf values N(0, 1/num_gen_trees).
  const double leaf_sd =
      num_gen_trees > 0 ? 1.0 / std::sqrt(static_cast<double>(num_gen_trees))
                        : 0.0;
  std::vector<std::vector<double>> sorted_cols(5);
  for (int j = 0; j < 5; ++j) {
    sorted_cols[j].assign(data.column(j).begin(), data.column(j).end());
    std::sort(sorted_cols[j].begin(), sorted_cols[j].end());
  }
  auto quantile = [&](int j, double q) {
    const auto& col = sorted_cols[j];
    std::size_t idx = static_cast<std::size_t>(q * (col.size() - 1));
    return col[idx];
  };

  setup.trees.resize(num_gen_trees);
  for (GenTree& t : setup.trees) {
    for (int k = 0; k < 3; ++k) {
      t.split_var[k] = static_cast<int>(rng.uniform_int(5));
      t.split_at[k] = quantile(t.split_var[k], 0.1 + 0.8 * rng.uniform());
    }
    for (int k = 0; k < 4; ++k) t.leaf[k] = leaf_sd * rng.normal();
  }

  std::vector<double> f0(n, 0.0);
  if (num_gen_trees > 0) {
    for (int i = 0; i < n; ++i) {
      auto row = row_of(data, i);
      for (const GenTree& t : setup.trees) f0[i] += t.eval(row);
    }
    // Rescale so that the sample variance of f0 is one.
    double mean = std::accumulate(f0.begin(), f0.end(), 0.0) / n;
    double var = 0.0;
    for (double v : f0) var += (v - mean) * (v - mean);
    var /= n;
    setup.scale = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
    for (double& v : f0) v *= setup.scale;
  }
  add_noise(data, f0, rng);
  return setup;
}

Dataset gen_forest(int n, int p, double sigma2, int num_gen_trees, Rng& rng) {
  return make_forest_setup(n, p, sigma2, num_gen_trees, rng).data;
}

std::vector<BatchPlan> make_batches(const Dataset& data, int batch_size,
                                    int rounds, Rng& rng) {
  if (batch_size < 1 || batch_size > data.n)
    throw std::invalid_argument("make_batches: batch size must lie in [1, n]");
  if (rounds < 1)
    throw std::invalid_argument("make_batches: rounds must be >= 1");
  const int num_batches = data.n / batch_size;
  std::vector<BatchPlan> plans(rounds);
  for (int r = 0; r < rounds; ++r) {
    BatchPlan& plan = plans[r];
    plan.batch_size = batch_size;
    plan.num_batches = num_batches;
    plan.round = r + 1;
    plan.rows.resize(data.n);
    if (r == 0) {
      std::iota(plan.rows.begin(), plan.rows.end(), 0);
    } else {
      for (int i = 0; i < data.n; ++i)
        plan.rows[i] = static_cast<int>(rng.uniform_int(data.n));
    }
  }
  return plans;
}

void write_dataset_csv(const Dataset& data, std::ostream& out) {
  std::string line;
  line.reserve(64);
  line += std::to_string(data.n);
  line += ',';
  line += std::to_string(data.p);
  line += ',';
  format_double(line, data.sigma2);
  line += ',';
  line += data.setup_tag;
  line += ",support=";
  for (std::size_t k = 0; k < data.true_support.members().size(); ++k) {
    if (k) line += ',';
    line += std::to_string(data.true_support.members()[k]);
  }
  out << line << '\n';
  for (int i = 0; i < data.n; ++i) {
    line.clear();
    for (int j = 0; j < data.p; ++j) {
      format_double(line, data.xat(i, j));
      line += ',';
    }
    format_double(line, data.y[i]);
    out << line << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in) {
  std::string header;
  if (!std::getline(in, header))
    throw std::invalid_argument("read_dataset_csv: missing header");
  Dataset data;
  {
    std::size_t support_pos = header.find(",support=");
    if (support_pos == std::string::npos)
      throw std::invalid_argument("read_dataset_csv: malformed header");
    std::string head = header.substr(0, support_pos);
    std::string support = header.substr(support_pos + 9);
    std::istringstream hs(head);
    std::string field;
    std::getline(hs, field, ',');
    data.n = std::stoi(field);
    std::getline(hs, field, ',');
    data.p = std::stoi(field);
    std::getline(hs, field, ',');
    data.sigma2 = std::strtod(field.c_str(), nullptr);
    std::getline(hs, field, ',');
    data.setup_tag = field;
    std::vector<int> members;
    std::istringstream ss(support);
    while (std::getline(ss, field, ','))
      if (!field.empty()) members.push_back(std::stoi(field));
    data.true_support = SuperArm(std::move(members));
  }
  data.x.resize(static_cast<std::size_t>(data.n) * data.p);
  data.y.resize(data.n);
  std::string line;
  for (int i = 0; i < data.n; ++i) {
    if (!std::getline(in, line))
      throw std::invalid_argument("read_dataset_csv: truncated data rows");
    const char* ptr = line.c_str();
    char* end = nullptr;
    for (int j = 0; j < data.p; ++j) {
      data.xat(i, j) = std::strtod(ptr, &end);
      if (end == ptr || *end != ',')
        throw std::invalid_argument("read_dataset_csv: malformed row");
      ptr = end + 1;
    }
    data.y[i] = std::strtod(ptr, &end);
    if (end == ptr)
      throw std::invalid_argument("read_dataset_csv: malformed row");
  }
  return data;
}

void write_dataset_file(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot open for writing: " + path);
  write_dataset_csv(data, out);
}

Dataset read_dataset_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open dataset file: " + path);
  return read_dataset_csv(in);
}

}  // namespace tvs
