#include "tvs/cli.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "tvs/analysis.hpp"
#include "tvs/config.hpp"
#include "tvs/datagen.hpp"
#include "tvs/engine.hpp"
#include "tvs/forest.hpp"
#include "tvs/lasso.hpp"

namespace tvs {

namespace {

namespace fs = std::filesystem;

constexpr std::uint64_t kInstanceStream = 777;  // synthetic-instance builder

const std::set<std::string> kConfigKeys = {
    "mode",          "seed",           "horizon",
    "cost_c",        "prior_a",        "prior_b",
    "q_star",        "early_stop",     "stop_window",
    "first_iter_cap", "feedback",      "dataset",
    "bernoulli_p",   "bernoulli_signal_count",
    "bernoulli_theta_signal",          "bernoulli_theta_noise",
    "bernoulli_instance",              "bernoulli_alpha",
    "bernoulli_interaction_scale",
    "forest_trees",  "forest_max_depth", "forest_min_leaf",
    "forest_mtry",   "forest_split_candidates",
    "forest_bootstrap",                "forest_importance_threshold",
    "lasso_lambda",  "lasso_bootstrap",
    "batch_size",    "rounds"};

std::string format_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::istringstream in(text);
  std::string field;
  while (std::getline(in, field, ','))
    if (!field.empty()) out.push_back(std::stoi(field));
  return out;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw std::invalid_argument("cannot create output directory: " + dir);
}

std::string rep_name(const std::string& stem, int rep,
                     const std::string& ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "_rep%04d", rep);
  return stem + buf + ext;
}

// Runs `reps` independent replications over a fixed-size worker pool. Each
// replication gets seed derive_seed(master, rep), so the worker count never
// changes any result.
void run_replications(int reps, int workers, std::uint64_t master_seed,
                      const std::function<void(int, std::uint64_t)>& body) {
  if (reps < 1) throw std::invalid_argument("reps must be >= 1");
  workers = std::max(1, std::min(workers, reps));
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        int rep = next.fetch_add(1);
        if (rep >= reps) return;
        try {
          body(rep, derive_seed(master_seed, rep));
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

// Everything a run needs once the config file has been resolved.
struct ResolvedRun {
  EngineOptions options;
  std::unique_ptr<FeedbackRule> rule;
  std::unique_ptr<Dataset> data;         // null for synthetic-arm rules
  std::unique_ptr<SuperArm> truth;       // known support, when any
  const SetDependentBernoulli* bernoulli = nullptr;  // non-owning view
  int batch_size = 0;
  int rounds = 1;
  bool online = false;
};

ResolvedRun resolve_run(const KeyValueConfig& config, bool online,
                        std::optional<std::uint64_t> seed_override) {
  config.validate_keys(kConfigKeys);
  ResolvedRun run;
  run.online = online;

  const std::string mode = config.get_string("mode", online ? "online" : "offline");
  if (mode != (online ? "online" : "offline"))
    throw std::invalid_argument("config: mode '" + mode +
                                "' does not match the subcommand");

  run.options.cost = CostParams::from_c(
      config.get_double("cost_c", CostParams::golden().c));
  run.options.a0 = config.get_double("prior_a", 1.0);
  run.options.b0 = config.get_double("prior_b", 1.0);
  run.options.seed = seed_override
                         ? *seed_override
                         : static_cast<std::uint64_t>(config.get_long("seed", 0));
  run.options.horizon = config.get_long("horizon", 500);
  run.options.stop.enabled = config.get_flag("early_stop", true);
  run.options.stop.window = static_cast<int>(config.get_long("stop_window", 100));
  if (auto q = config.get_optional_long("q_star"))
    run.options.q_star = static_cast<int>(*q);
  if (auto cap = config.get_optional_long("first_iter_cap"))
    run.options.first_iter_cap = static_cast<int>(*cap);

  const std::string feedback = config.get_string("feedback", "");
  if (feedback.empty())
    throw std::invalid_argument("config: missing required key 'feedback'");

  if (feedback == "bernoulli") {
    const int p = static_cast<int>(config.get_long("bernoulli_p", 0));
    if (p <= 0)
      throw std::invalid_argument("config: bernoulli_p must be positive");
    const int signal_count =
        static_cast<int>(config.get_long("bernoulli_signal_count", 0));
    if (signal_count < 0 || signal_count > p)
      throw std::invalid_argument("config: bernoulli_signal_count out of range");
    std::vector<int> signal_ids(signal_count);
    for (int i = 0; i < signal_count; ++i) signal_ids[i] = i;
    SuperArm signals(std::move(signal_ids));

    const std::string instance =
        config.get_string("bernoulli_instance", "independent");
    std::unique_ptr<SetDependentBernoulli> rule;
    if (instance == "independent") {
      const double theta_signal =
          config.get_double("bernoulli_theta_signal", 0.7);
      const double theta_noise =
          config.get_double("bernoulli_theta_noise", 0.3);
      std::vector<double> base(p, theta_noise);
      for (int i : signals) base[i] = theta_signal;
      rule = std::make_unique<SetDependentBernoulli>(std::move(base));
    } else if (instance == "strongly-identifiable") {
      const double alpha = config.get_double("bernoulli_alpha", 0.2);
      const double scale =
          config.get_double("bernoulli_interaction_scale", 0.05);
      Rng instance_rng(derive_seed(run.options.seed, kInstanceStream));
      rule = std::make_unique<SetDependentBernoulli>(
          SetDependentBernoulli::strongly_identifiable(p, signals, alpha,
                                                       scale, instance_rng));
    } else {
      throw std::invalid_argument("config: unknown bernoulli_instance '" +
                                  instance + "'");
    }
    run.options.p = p;
    run.truth = std::make_unique<SuperArm>(signals);
    run.bernoulli = rule.get();
    run.rule = std::move(rule);
  } else if (feedback == "forest" || feedback == "lasso") {
    const std::string dataset_path = config.get_string("dataset", "");
    if (dataset_path.empty())
      throw std::invalid_argument("config: feedback '" + feedback +
                                  "' needs a dataset file");
    run.data = std::make_unique<Dataset>(read_dataset_file(dataset_path));
    run.options.p = run.data->p;
    if (!run.data->true_support.empty())
      run.truth = std::make_unique<SuperArm>(run.data->true_support);

    if (feedback == "forest") {
      ForestParams params;
      params.num_trees = static_cast<int>(config.get_long("forest_trees", 10));
      params.max_depth =
          static_cast<int>(config.get_long("forest_max_depth", 6));
      params.min_leaf =
          static_cast<int>(config.get_long("forest_min_leaf", 5));
      const std::string mtry = config.get_string("forest_mtry", "sqrt");
      params.mtry = mtry == "sqrt" ? 0 : std::stoi(mtry);
      params.split_candidates =
          static_cast<int>(config.get_long("forest_split_candidates", 32));
      params.bootstrap = config.get_flag("forest_bootstrap", true);
      params.importance_threshold =
          config.get_double("forest_importance_threshold", 1.0);
      run.rule = std::make_unique<ForestRule>(
          params, online ? ForestRule::Mode::online
                         : ForestRule::Mode::offline);
    } else {
      LassoOptions options;
      const std::string lambda = config.get_string("lasso_lambda", "auto");
      options.lambda = lambda == "auto" ? -1.0 : std::strtod(lambda.c_str(), nullptr);
      options.bootstrap = config.get_flag("lasso_bootstrap", true);
      run.rule = std::make_unique<LassoRule>(options);
    }
  } else {
    throw std::invalid_argument("config: unknown feedback '" + feedback +
                                "'");
  }

  if (online) {
    if (!run.data)
      throw std::invalid_argument("config: online mode needs a dataset");
    run.batch_size = static_cast<int>(config.get_long("batch_size", 0));
    if (run.batch_size <= 0)
      throw std::invalid_argument("config: online mode needs batch_size");
    run.rounds = static_cast<int>(config.get_long("rounds", 1));
  }
  return run;
}

// Echo of the effective configuration (defaults applied) so any output
// directory is self-reproducing.
void write_config_used(const KeyValueConfig& config, const ResolvedRun& run,
                       int reps, const std::string& dir) {
  KeyValueConfig used = config;
  used.set("mode", run.online ? "online" : "offline");
  used.set("seed", std::to_string(run.options.seed));
  used.set("horizon", std::to_string(run.options.horizon));
  used.set("cost_c", format_g17(run.options.cost.c));
  used.set("prior_a", format_g17(run.options.a0));
  used.set("prior_b", format_g17(run.options.b0));
  used.set("early_stop", run.options.stop.enabled ? "on" : "off");
  used.set("stop_window", std::to_string(run.options.stop.window));
  if (run.options.q_star) used.set("q_star", std::to_string(*run.options.q_star));
  if (run.online) {
    used.set("batch_size", std::to_string(run.batch_size));
    used.set("rounds", std::to_string(run.rounds));
  }
  used.set("replications", std::to_string(reps));
  std::ofstream out(fs::path(dir) / "config_used.txt");
  out << used.serialize();
}

int cmd_gen_data(const std::string& setup, long n, long p, double sigma2,
                 int gen_trees, bool correlated, std::uint64_t seed,
                 const std::string& out_path) {
  Rng rng(seed);
  Dataset data;
  if (setup == "friedman") {
    data = gen_friedman(static_cast<int>(n), static_cast<int>(p), sigma2,
                        correlated, rng);
  } else if (setup == "linear") {
    data = gen_linear(static_cast<int>(n), static_cast<int>(p), sigma2, rng);
  } else if (setup == "liang") {
    data = gen_liang(static_cast<int>(n), static_cast<int>(p), sigma2, rng);
  } else if (setup == "forest") {
    data = gen_forest(static_cast<int>(n), static_cast<int>(p), sigma2,
                      gen_trees, rng);
  } else {
    throw std::invalid_argument("unknown setup: " + setup);
  }
  write_dataset_file(data, out_path);
  std::cout << "wrote " << out_path << " (n=" << data.n << ", p=" << data.p
            << ", setup=" << data.setup_tag << ")\n";
  return 0;
}

int cmd_run(const KeyValueConfig& config, bool online,
            std::optional<std::uint64_t> seed_override,
            const std::string& out_dir, int reps, int workers,
            bool verbose) {
  ResolvedRun run = resolve_run(config, online, seed_override);
  ensure_dir(out_dir);
  write_config_used(config, run, reps, out_dir);

  run_replications(reps, workers, run.options.seed,
                   [&](int rep, std::uint64_t rep_seed) {
    EngineOptions options = run.options;
    options.seed = reps == 1 ? run.options.seed : rep_seed;
    RunRecord record;
    if (online)
      record = run_online(options, *run.rule, *run.data, run.batch_size,
                          run.rounds);
    else
      record = run_offline(options, *run.rule, run.data.get());

    std::ofstream traj(fs::path(out_dir) / rep_name("trajectory", rep, ".csv"));
    write_trajectory_csv(record, traj);
    std::ofstream summary(fs::path(out_dir) / rep_name("summary", rep, ".txt"));
    write_summary(record, run.truth.get(), summary);
    if (verbose)
      std::cerr << "rep " << rep << ": " << record.iterations_executed
                << " iterations, |model|=" << record.final_model.size()
                << "\n";
  });
  std::cout << "wrote " << reps << " run(s) to " << out_dir << "\n";
  return 0;
}

int cmd_regret_sim(const KeyValueConfig& config,
                   std::optional<std::uint64_t> seed_override,
                   const std::string& out_dir, int reps, int workers,
                   bool verbose) {
  ResolvedRun run = resolve_run(config, /*online=*/false, seed_override);
  if (run.bernoulli == nullptr)
    throw std::invalid_argument(
        "regret-sim needs a bernoulli feedback rule (known mean rewards)");
  run.options.stop.enabled = false;  // regret curves need the full horizon
  ensure_dir(out_dir);
  write_config_used(config, run, reps, out_dir);

  const SetDependentBernoulli& rule = *run.bernoulli;
  const CostParams& cost = run.options.cost;
  auto theta_fn = [&rule](int i, const SuperArm& s) { return rule.theta(i, s); };
  SuperArm s_star;
  if (run.options.p <= 20) {
    s_star = brute_force_optimum(run.options.p, theta_fn, cost);
  } else if (rule.independent()) {
    std::vector<double> base(run.options.p);
    for (int i = 0; i < run.options.p; ++i)
      base[i] = rule.theta(i, SuperArm({i}));
    s_star = oracle_unconstrained(base, cost);
  } else {
    s_star = *run.truth;  // optimal by construction of the instance
  }
  const double r_star = expected_reward_setdep(s_star, theta_fn, cost);
  RegretFn regret_fn = [&, r_star](const SuperArm& played) {
    return r_star - expected_reward_setdep(played, theta_fn, cost);
  };

  std::vector<std::vector<double>> curves(reps);
  run_replications(reps, workers, run.options.seed,
                   [&](int rep, std::uint64_t rep_seed) {
    EngineOptions options = run.options;
    options.seed = reps == 1 ? run.options.seed : rep_seed;
    RunRecord record = run_offline(options, rule, nullptr, regret_fn);
    std::vector<double> cumulative(record.per_step_regret.size());
    double total = 0.0;
    for (std::size_t t = 0; t < cumulative.size(); ++t) {
      total += record.per_step_regret[t];
      cumulative[t] = total;
    }
    curves[rep] = std::move(cumulative);
    std::ofstream out(fs::path(out_dir) / rep_name("regret", rep, ".csv"));
    out << "t,reg\n";
    for (std::size_t t = 0; t < curves[rep].size(); ++t)
      out << t << ',' << format_g17(curves[rep][t]) << '\n';
    if (verbose) std::cerr << "rep " << rep << " done\n";
  });

  const std::size_t horizon = curves.empty() ? 0 : curves[0].size();
  std::ofstream out(fs::path(out_dir) / "regret_mean.csv");
  out << "t,mean,stderr\n";
  for (std::size_t t = 0; t < horizon; ++t) {
    double mean = 0.0;
    for (int r = 0; r < reps; ++r) mean += curves[r][t];
    mean /= reps;
    double var = 0.0;
    for (int r = 0; r < reps; ++r)
      var += (curves[r][t] - mean) * (curves[r][t] - mean);
    double stderr_t = reps > 1 ? std::sqrt(var / (reps - 1) / reps) : 0.0;
    out << t << ',' << format_g17(mean) << ',' << format_g17(stderr_t)
        << '\n';
  }
  std::cout << "wrote " << reps << " regret curve(s) to " << out_dir << "\n";
  return 0;
}

int cmd_metrics(const std::string& selected_list, const std::string& truth_list,
                int p, const std::string& summary_path,
                const std::string& dataset_path) {
  SuperArm selected, truth;
  if (!summary_path.empty()) {
    KeyValueConfig summary = KeyValueConfig::parse_file(summary_path);
    selected = SuperArm(parse_int_list(summary.get_string("final_model", "")));
    if (p == 0) p = static_cast<int>(summary.get_long("p", 0));
  } else {
    selected = SuperArm(parse_int_list(selected_list));
  }
  if (!dataset_path.empty()) {
    Dataset data = read_dataset_file(dataset_path);
    truth = data.true_support;
    if (p == 0) p = data.p;
  } else {
    truth = SuperArm(parse_int_list(truth_list));
  }
  if (p == 0) throw std::invalid_argument("metrics: p is required");
  SelectionMetrics metrics = selection_metrics(selected, truth, p);
  std::cout << "fdp = " << format_g17(metrics.fdp) << "\n"
            << "power = " << format_g17(metrics.power) << "\n"
            << "hamming = " << metrics.hamming << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Thompson variable selection: runs, data generators, and "
               "regret diagnostics"};
  app.require_subcommand(1);

  const char* env_out = std::getenv("TVS_OUT_DIR");
  const std::string default_out = env_out ? env_out : "tvs_out";

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "generate a synthetic dataset");
  std::string setup = "friedman";
  long gd_n = -1, gd_p = -1;
  double gd_sigma2 = -1.0;
  int gd_trees = 200;
  bool gd_correlated = false;
  std::uint64_t gd_seed = 0;
  std::string gd_out = "data.csv";
  gen->add_option("--setup", setup,
                  "friedman | linear | liang | forest");
  gen->add_option("--n", gd_n, "rows (defaults to the setup's benchmark)");
  gen->add_option("--p", gd_p, "predictors");
  gen->add_option("--sigma2", gd_sigma2, "noise variance");
  gen->add_option("--gen-trees", gd_trees, "forest setup: generating trees");
  gen->add_flag("--correlated", gd_correlated,
                "friedman setup: equicorrelated features (rho 0.3)");
  gen->add_option("--seed", gd_seed, "rng seed");
  gen->add_option("--out", gd_out, "output csv path")->required();

  // shared run options
  struct RunArgs {
    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int reps = 1;
    int workers = 1;
    bool verbose = false;
  };
  auto add_run_options = [&](CLI::App* cmd, RunArgs& args) {
    cmd->add_option("--config", args.config_path, "run config file")
        ->required();
    cmd->add_option("--out", args.out_dir, "output directory")
        ->default_val(default_out);
    cmd->add_option("--seed", args.seed, "seed override (wins over config)");
    cmd->add_option("--reps", args.reps, "independent replications");
    cmd->add_option("--workers", args.workers, "parallel workers");
    cmd->add_flag("-v,--verbose", args.verbose, "progress to stderr");
  };

  auto* run_off = app.add_subcommand("run-offline", "offline TVS run");
  RunArgs off_args;
  add_run_options(run_off, off_args);

  auto* run_on = app.add_subcommand("run-online", "online (mini-batch) TVS run");
  RunArgs on_args;
  add_run_options(run_on, on_args);

  auto* regret = app.add_subcommand("regret-sim",
                                    "replicated regret curves on synthetic arms");
  RunArgs regret_args;
  add_run_options(regret, regret_args);

  // metrics
  auto* metrics = app.add_subcommand("metrics", "selection quality report");
  std::string m_selected, m_truth, m_summary, m_dataset;
  int m_p = 0;
  metrics->add_option("--selected", m_selected, "comma list of selected arms");
  metrics->add_option("--truth", m_truth, "comma list of true arms");
  metrics->add_option("--p", m_p, "number of arms");
  metrics->add_option("--summary", m_summary, "read selected model from a summary file");
  metrics->add_option("--dataset", m_dataset, "read truth from a dataset file");

  // bounds
  auto* bounds = app.add_subcommand("bounds", "evaluate the regret bounds");
  double b_alpha = 0.25, b_delta_max = 1.0, b_c1 = 1.0, b_c2 = 1.0;
  double b_epsilon = 0.0, b_const_c = 0.0;
  int b_p = 0, b_qstar = 1;
  double b_horizon = 0.0;
  std::string b_gap_deltas;
  bounds->add_option("--alpha", b_alpha, "identifiability margin");
  bounds->add_option("--p", b_p, "number of arms")->required();
  bounds->add_option("--q-star", b_qstar, "optimal model size");
  bounds->add_option("--horizon", b_horizon, "time horizon T")->required();
  bounds->add_option("--delta-max", b_delta_max, "maximal reward gap");
  bounds->add_option("--c1", b_c1, "constant C1");
  bounds->add_option("--c2", b_c2, "constant C2");
  bounds->add_option("--gaps", b_gap_deltas,
                     "comma list of per-arm gaps; also evaluates the "
                     "known-size bound");
  bounds->add_option("--epsilon", b_epsilon, "epsilon for the known-size bound");
  bounds->add_option("--const-c", b_const_c, "constant for the known-size bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  off_args.seed_set = run_off->count("--seed") > 0;
  on_args.seed_set = run_on->count("--seed") > 0;
  regret_args.seed_set = regret->count("--seed") > 0;

  try {
    if (gen->parsed()) {
      if (gd_n < 0 || gd_p < 0 || gd_sigma2 < 0) {
        // Benchmark dimensions from the setups' source experiments.
        if (setup == "friedman") {
          if (gd_n < 0) gd_n = 300;
          if (gd_p < 0) gd_p = 10000;
          if (gd_sigma2 < 0) gd_sigma2 = 1.0;
        } else if (setup == "linear") {
          if (gd_n < 0) gd_n = 300;
          if (gd_p < 0) gd_p = 1000;
          if (gd_sigma2 < 0) gd_sigma2 = 5.0;
        } else if (setup == "liang") {
          if (gd_n < 0) gd_n = 20000;
          if (gd_p < 0) gd_p = 1000;
          if (gd_sigma2 < 0) gd_sigma2 = 0.5;
        } else {
          if (gd_n < 0) gd_n = 300;
          if (gd_p < 0) gd_p = 1000;
          if (gd_sigma2 < 0) gd_sigma2 = 0.5;
        }
      }
      return cmd_gen_data(setup, gd_n, gd_p, gd_sigma2, gd_trees,
                          gd_correlated, gd_seed, gd_out);
    }
    if (run_off->parsed()) {
      KeyValueConfig config = KeyValueConfig::parse_file(off_args.config_path);
      return cmd_run(config, /*online=*/false,
                     off_args.seed_set ? std::optional(off_args.seed)
                                       : std::nullopt,
                     off_args.out_dir, off_args.reps, off_args.workers,
                     off_args.verbose);
    }
    if (run_on->parsed()) {
      KeyValueConfig config = KeyValueConfig::parse_file(on_args.config_path);
      return cmd_run(config, /*online=*/true,
                     on_args.seed_set ? std::optional(on_args.seed)
                                      : std::nullopt,
                     on_args.out_dir, on_args.reps, on_args.workers,
                     on_args.verbose);
    }
    if (regret->parsed()) {
      KeyValueConfig config =
          KeyValueConfig::parse_file(regret_args.config_path);
      return cmd_regret_sim(config,
                            regret_args.seed_set
                                ? std::optional(regret_args.seed)
                                : std::nullopt,
                            regret_args.out_dir, regret_args.reps,
                            regret_args.workers, regret_args.verbose);
    }
    if (metrics->parsed())
      return cmd_metrics(m_selected, m_truth, m_p, m_summary, m_dataset);
    if (bounds->parsed()) {
      double value = bound_identifiable(b_alpha, b_p, b_qstar, b_horizon,
                                    b_delta_max, b_c1, b_c2);
      std::cout << "identifiable_bound = " << format_g17(value) << "\n";
      if (!b_gap_deltas.empty()) {
        std::vector<double> deltas;
        std::istringstream in(b_gap_deltas);
        std::string field;
        while (std::getline(in, field, ','))
          if (!field.empty())
            deltas.push_back(std::strtod(field.c_str(), nullptr));
        double known = bound_known_size(deltas, b_horizon, b_epsilon,
                                        b_const_c, b_p);
        std::cout << "known_size_bound = " << format_g17(known) << "\n";
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace tvs
