#include "tvs/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "tvs/analysis.hpp"

namespace tvs {

namespace {

// Independent sub-streams of one run seed. The Choose/Reward/Update loop and
// the batch plan never share draws, so a single-batch online run consumes
// the loop stream exactly like one offline iteration.
constexpr std::uint64_t kLoopStream = 1;
constexpr std::uint64_t kBatchStream = 2;

struct LoopInputs {
  const EngineOptions& options;
  const FeedbackRule& rule;
  const std::vector<DataContext>& contexts;  // one per iteration
  const RegretFn& regret_fn;
};

RunRecord run_loop(const LoopInputs& in) {
  const EngineOptions& opt = in.options;
  if (opt.p <= 0) throw std::invalid_argument("run: p must be positive");
  if (opt.stop.window < 1)
    throw std::invalid_argument("run: stop window must be >= 1");
  const long total = static_cast<long>(in.contexts.size());

  const auto start = std::chrono::steady_clock::now();
  RunRecord record;
  record.p = opt.p;
  record.seed = opt.seed;

  BanditState state =
      BanditState::uniform_prior(opt.p, opt.cost, opt.a0, opt.b0);
  Rng rng(derive_seed(opt.seed, kLoopStream));

  const long thin = std::max<long>(
      1, (static_cast<long>(opt.p) * total + opt.pi_entry_cap - 1) /
             std::max<long>(opt.pi_entry_cap, 1));

  auto snapshot = [&](long t) {
    record.snapshot_times.push_back(t);
    std::vector<double> a(opt.p), b(opt.p);
    for (int i = 0; i < opt.p; ++i) {
      a[i] = state.arms[i].a;
      b[i] = state.arms[i].b;
    }
    record.snapshot_a.push_back(std::move(a));
    record.snapshot_b.push_back(std::move(b));
  };

  for (long t = 0; t < total; ++t) {
    std::vector<double> theta = sample_theta(state, rng);
    SuperArm played;
    if (t == 0 && opt.first_iter_cap)
      played = oracle_constrained(theta, opt.cost, *opt.first_iter_cap);
    else if (opt.q_star)
      played = oracle_constrained(theta, opt.cost, *opt.q_star);
    else
      played = oracle_unconstrained(theta, state);

    RewardVector rewards;
    if (!played.empty())
      rewards = in.rule.evaluate(played, in.contexts[t], rng);
    else
      rewards = RewardVector{};  // an empty super-arm still costs a turn

    update(state, played, rewards);
    std::vector<double> pi = inclusion_probabilities(state);
    SuperArm model = extract_model(pi, opt.cost);

    if (in.regret_fn) record.per_step_regret.push_back(in.regret_fn(played));
    record.steps.push_back(
        {std::move(played), std::move(rewards), std::move(model)});
    record.iterations_executed = t + 1;
    if ((t + 1) % thin == 0) snapshot(t);

    if (opt.stop.enabled && t + 1 >= opt.stop.window) {
      bool stable = true;
      const SuperArm& tail = record.steps.back().model;
      for (long k = t - opt.stop.window + 1; k < t && stable; ++k)
        stable = record.steps[k].model == tail;
      if (stable) {
        record.converged_at = t - opt.stop.window + 1;
        record.stopped_early = (t + 1 < total);
        break;
      }
    }
  }

  if (record.iterations_executed > 0 &&
      (record.snapshot_times.empty() ||
       record.snapshot_times.back() != record.iterations_executed - 1)) {
    snapshot(record.iterations_executed - 1);
  }

  record.final_state = std::move(state);
  record.final_pi = inclusion_probabilities(record.final_state);
  record.final_model = extract_model(record.final_pi, opt.cost);
  record.feedback_diagnostics = in.rule.diagnostics();
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return record;
}

void format_double(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

std::string join_members(const SuperArm& s) {
  std::string out;
  for (int i : s) {
    if (!out.empty()) out += ',';
    out += std::to_string(i);
  }
  return out;
}

}  // namespace

RunRecord run_offline(const EngineOptions& options, const FeedbackRule& rule,
                      const Dataset* data, const RegretFn& regret_fn) {
  EngineOptions opt = options;
  if (data != nullptr) {
    if (opt.p == 0) opt.p = data->p;
    if (opt.p != data->p)
      throw std::invalid_argument("run_offline: p does not match dataset");
  }
  if (opt.horizon < 0)
    throw std::invalid_argument("run_offline: horizon must be >= 0");

  std::vector<int> all_rows;
  DataContext ctx;
  if (data != nullptr) {
    all_rows.resize(data->n);
    std::iota(all_rows.begin(), all_rows.end(), 0);
    ctx = DataContext{data, all_rows};
  }
  std::vector<DataContext> contexts(static_cast<std::size_t>(opt.horizon),
                                    ctx);
  return run_loop({opt, rule, contexts, regret_fn});
}

RunRecord run_online(const EngineOptions& options, const FeedbackRule& rule,
                     const Dataset& data, int batch_size, int rounds,
                     const RegretFn& regret_fn) {
  EngineOptions opt = options;
  if (opt.p == 0) opt.p = data.p;
  if (opt.p != data.p)
    throw std::invalid_argument("run_online: p does not match dataset");

  Rng batch_rng(derive_seed(opt.seed, kBatchStream));
  std::vector<BatchPlan> plans =
      make_batches(data, batch_size, rounds, batch_rng);
  std::vector<DataContext> contexts;
  for (const BatchPlan& plan : plans)
    for (int b = 0; b < plan.num_batches; ++b)
      contexts.push_back(DataContext{&data, plan.batch(b)});
  return run_loop({opt, rule, contexts, regret_fn});
}

SuperArm extract_model(std::span<const double> pi, const CostParams& cost) {
  return oracle_unconstrained(pi, cost);
}

std::optional<long> check_stabilized(const std::vector<SuperArm>& models,
                                     int window) {
  if (window < 1)
    throw std::invalid_argument("check_stabilized: window must be >= 1");
  const long total = static_cast<long>(models.size());
  long run_start = 0;
  for (long t = 0; t < total; ++t) {
    if (t > 0 && !(models[t] == models[t - 1])) run_start = t;
    if (t - run_start + 1 >= window) return run_start;
  }
  return std::nullopt;
}

std::optional<long> check_stabilized(const RunRecord& record, int window) {
  std::vector<SuperArm> models;
  models.reserve(record.steps.size());
  for (const IterationRecord& step : record.steps) models.push_back(step.model);
  return check_stabilized(models, window);
}

void write_trajectory_csv(const RunRecord& record, std::ostream& out) {
  out << "t,arm,a,b,pi,in_S,reward\n";
  std::string line;
  for (std::size_t s = 0; s < record.snapshot_times.size(); ++s) {
    const long t = record.snapshot_times[s];
    const IterationRecord& step = record.steps[t];
    std::size_t reward_pos = 0;
    for (int arm = 0; arm < record.p; ++arm) {
      line.clear();
      line += std::to_string(t);
      line += ',';
      line += std::to_string(arm);
      line += ',';
      format_double(line, record.snapshot_a[s][arm]);
      line += ',';
      format_double(line, record.snapshot_b[s][arm]);
      line += ',';
      format_double(line, record.snapshot_a[s][arm] /
                              (record.snapshot_a[s][arm] +
                               record.snapshot_b[s][arm]));
      line += ',';
      const bool in_s = step.played.contains(arm);
      line += in_s ? '1' : '0';
      line += ',';
      if (in_s && reward_pos < step.rewards.arms.size() &&
          step.rewards.arms[reward_pos] == arm) {
        line += step.rewards.bits[reward_pos] ? '1' : '0';
      }
      while (reward_pos < step.rewards.arms.size() &&
             step.rewards.arms[reward_pos] <= arm)
        ++reward_pos;
      out << line << '\n';
    }
  }
}

void write_summary(const RunRecord& record, const SuperArm* truth,
                   std::ostream& out) {
  out << "p = " << record.p << '\n';
  out << "seed = " << record.seed << '\n';
  out << "iterations = " << record.iterations_executed << '\n';
  out << "stopped_early = " << (record.stopped_early ? "yes" : "no") << '\n';
  out << "converged_at = "
      << (record.converged_at ? std::to_string(*record.converged_at) : "none")
      << '\n';
  out << "final_model = " << join_members(record.final_model) << '\n';
  if (truth != nullptr) {
    SelectionMetrics metrics =
        selection_metrics(record.final_model, *truth, record.p);
    out << "truth = " << join_members(*truth) << '\n';
    out << "fdp = " << metrics.fdp << '\n';
    out << "power = " << metrics.power << '\n';
    out << "hamming = " << metrics.hamming << '\n';
  }
  out << "wall_seconds = " << record.wall_seconds << '\n';
  if (!record.feedback_diagnostics.empty())
    out << "feedback_diagnostics = " << record.feedback_diagnostics << '\n';
}

}  // namespace tvs
