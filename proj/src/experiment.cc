#include "lta/experiment.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "lta/dataset_io.h"
#include "lta/errors.h"
#include "lta/random.h"
#include "lta/training.h"

namespace lta {
namespace {

constexpr std::uint64_t kStreamSplit = 5;
constexpr std::uint64_t kStreamLtdFeedback = 6;
constexpr std::uint64_t kStreamLtaFeedback = 7;
constexpr std::uint64_t kStreamTrain = 40;
constexpr std::uint64_t kStreamMachine = 41;
constexpr std::uint64_t kStreamExpertAlone = 50;
constexpr int kConsensusResamples = 5;

const std::vector<std::string> kTasks{"toy_table", "scenario", "synth",
                                      "consensus"};

// Calls fn(i) for i in [0, count) on up to `jobs` threads.
template <typename Fn>
void parallel_for(std::size_t count, int jobs, Fn&& fn) {
  unsigned workers = jobs > 0 ? static_cast<unsigned>(jobs)
                              : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
  for (std::thread& t : pool) t.join();
}

TaskDataset toy_table_splits() {
  const TaskDataset rows = make_toy_table();
  TaskDataset ds = rows;
  ds.samples.clear();
  for (Split s : {Split::kTrain, Split::kCalibration, Split::kTest}) {
    for (LabeledSample row : rows.samples) {
      row.split = s;
      row.h.clear();
      ds.samples.push_back(std::move(row));
    }
  }
  ds.feedback_dim = 0;
  ds.feedback_mode = "none";
  return ds;
}

double weighted_test_accuracy(const TaskDataset& ds,
                              const std::vector<int>& predictions) {
  double correct = 0.0;
  double total = 0.0;
  std::size_t k = 0;
  for (const LabeledSample& s : ds.samples) {
    if (s.split != Split::kTest) continue;
    correct += s.weight * (predictions[k++] == s.y);
    total += s.weight;
  }
  return total > 0 ? correct / total : 0.0;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  return out + "]";
}

}  // namespace

void ExperimentConfig::validate() const {
  if (std::find(kTasks.begin(), kTasks.end(), task) == kTasks.end()) {
    throw ConfigError("task: unknown task '" + task + "'");
  }
  FeedbackMode mode;
  try {
    mode = parse_feedback(feedback);
  } catch (const ConfigError&) {
    throw ConfigError("feedback: unknown feedback mode '" + feedback + "'");
  }
  if (mode == FeedbackMode::kUnc && task != "consensus") {
    throw ConfigError("feedback: unc feedback needs the consensus task");
  }
  if (mode == FeedbackMode::kFeature && task == "consensus") {
    throw ConfigError("feedback: the consensus expert has no private features");
  }
  if (methods.empty()) throw ConfigError("methods: at least one method needed");
  for (const std::string& m : methods) {
    try {
      parse_method(m);
    } catch (const ConfigError&) {
      throw ConfigError("methods: unknown method '" + m + "'");
    }
  }
  if (seeds.empty()) throw ConfigError("seeds: at least one seed needed");
  if (deltas.empty()) throw ConfigError("delta: at least one value needed");
  for (double d : deltas) {
    if (!(d >= 0.0 && d <= 1.0)) {
      throw ConfigError("delta: values must lie in [0,1]");
    }
  }
  if (beta_grid.empty()) throw ConfigError("beta-grid: empty grid");
  for (std::size_t i = 0; i < beta_grid.size(); ++i) {
    if (!(beta_grid[i] >= 0.0 && beta_grid[i] <= 1.0) ||
        (i > 0 && !(beta_grid[i] > beta_grid[i - 1]))) {
      throw ConfigError("beta-grid: values must increase strictly within [0,1]");
    }
  }
  if (epochs < 0) throw ConfigError("epochs: must be >= 0");
  if (pretrain_epochs < 0 || pretrain_epochs > epochs) {
    throw ConfigError("pretrain-epochs: must lie in [0, epochs]");
  }
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("lr: must be > 0");
  if (batch_size < 1) throw ConfigError("batch-size: must be >= 1");
  if (hidden < 0) throw ConfigError("hidden: must be >= 0");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("alpha: must lie in (0,1]");
  try {
    parse_score_mode(score_mode);
  } catch (const ConfigError&) {
    throw ConfigError("score-mode: unknown mode '" + score_mode + "'");
  }
  if (injection != "concat" && injection != "film") {
    throw ConfigError("injection: expected concat or film");
  }
  if (expert_depth < 1) throw ConfigError("expert-depth: must be >= 1");
  if (jobs < 0) throw ConfigError("jobs: must be >= 0");
  if (n < 0) throw ConfigError("n: must be >= 0");
  scenario.validate();
  synth.validate();
  consensus.validate();
}

TrainPlan ExperimentConfig::plan_for(Method method, double delta,
                                     std::uint64_t seed) const {
  TrainPlan plan = TrainPlan::for_budget(method, epochs, pretrain_epochs);
  plan.sgd.learning_rate = lr;
  plan.sgd.batch_size = batch_size;
  plan.sgd.seed = derive_seed(seed, kStreamTrain);
  plan.cost.alpha = alpha;
  plan.cost.delta = delta;
  plan.hidden = hidden;
  plan.injection = parse_injection(injection);
  return plan;
}

TaskDataset make_task(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (cfg.task == "toy_table") return toy_table_splits();
  TaskDataset ds;
  if (cfg.task == "scenario") {
    ScenarioSpec spec = cfg.scenario;
    spec.seed = seed;
    if (cfg.n > 0) spec.n = cfg.n;
    ds = make_scenario(spec);
  } else if (cfg.task == "synth") {
    SynthSpec spec = cfg.synth;
    spec.seed = seed;
    if (cfg.n > 0) spec.n = cfg.n;
    ds = make_synth(spec);
  } else if (cfg.task == "consensus") {
    ConsensusSpec spec = cfg.consensus;
    spec.seed = seed;
    if (cfg.n > 0) spec.n = cfg.n;
    ds = make_consensus_task(spec).data;
  } else {
    throw ConfigError("task: unknown task '" + cfg.task + "'");
  }
  return split(std::move(ds), SplitRatios{}, derive_seed(seed, kStreamSplit));
}

double expert_accuracy(const TaskDataset& ds, const ExpertModel& expert,
                       std::uint64_t seed, int resamples) {
  const bool stochastic = expert.kind == ExpertModel::Kind::kBernoulliConsensus;
  const int draws = stochastic ? std::max(1, resamples) : 1;
  double sum = 0.0;
  for (int k = 0; k < draws; ++k) {
    Rng rng = make_rng(seed, kStreamExpertAlone + k);
    std::vector<int> preds;
    for (const LabeledSample& s : ds.samples) {
      if (s.split == Split::kTest) preds.push_back(expert_predict(expert, s, rng));
    }
    sum += weighted_test_accuracy(ds, preds);
  }
  return sum / draws;
}

SeedContext build_context(const ExperimentConfig& cfg, std::uint64_t seed,
                          bool with_baselines) {
  SeedContext ctx;
  ctx.seed = seed;
  const TaskDataset base = make_task(cfg, seed);
  if (cfg.task == "consensus") {
    ctx.expert = consensus_expert(base.num_conditions);
  } else if (parse_feedback(cfg.feedback) == FeedbackMode::kFeature) {
    ctx.expert = oracle_feature_expert(base, base.expert_features, cfg.expert_depth);
  } else {
    ctx.expert = fit_expert(base, base.expert_features, cfg.expert_depth);
  }

  ctx.ltd_data = base;
  materialize_feedback(ctx.ltd_data, ctx.expert, FeedbackMode::kLtd,
                       derive_seed(seed, kStreamLtdFeedback));
  const FeedbackMode mode = parse_feedback(cfg.feedback);
  if (mode == FeedbackMode::kLtd) {
    ctx.lta_data = ctx.ltd_data;
  } else {
    ctx.lta_data = base;
    materialize_feedback(ctx.lta_data, ctx.expert, mode,
                         derive_seed(seed, kStreamLtaFeedback));
  }

  if (!with_baselines) return ctx;
  ctx.expert_alone = expert_accuracy(base, ctx.expert, seed, kConsensusResamples);

  SgdConfig sgd;
  sgd.learning_rate = cfg.lr;
  sgd.batch_size = cfg.batch_size;
  sgd.epochs = cfg.epochs;
  sgd.seed = derive_seed(seed, kStreamMachine);
  const DenseNet machine = train_machine_classifier(base, cfg.hidden, sgd);
  std::vector<int> preds;
  for (const LabeledSample& s : base.samples) {
    if (s.split == Split::kTest) {
      preds.push_back(argmax(forward(machine, base.machine_input(s))));
    }
  }
  ctx.machine_alone = weighted_test_accuracy(base, preds);
  return ctx;
}

RunResult run_one(const ExperimentConfig& cfg, const SeedContext& ctx,
                  Method method, double delta) {
  const TaskDataset& ds = method == Method::kLtd ? ctx.ltd_data : ctx.lta_data;
  ModelBundle bundle = train(ds, cfg.plan_for(method, delta, ctx.seed));
  bundle.data_seed = ctx.seed;
  RunResult result;
  result.curve = evaluate(bundle, parse_score_mode(cfg.score_mode), ds,
                          cfg.beta_grid);
  result.curve.expert_alone = ctx.expert_alone;
  result.curve.machine_alone = ctx.machine_alone;
  if (cfg.save_bundles) result.bundle = std::move(bundle);
  return result;
}

SweepResult sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::size_t n_seeds = cfg.seeds.size();
  std::vector<std::optional<SeedContext>> contexts(n_seeds);
  std::vector<std::string> context_errors(n_seeds);
  parallel_for(n_seeds, cfg.jobs, [&](std::size_t i) {
    try {
      contexts[i] = build_context(cfg, cfg.seeds[i]);
    } catch (const std::exception& e) {
      context_errors[i] = e.what();
    }
  });

  struct Job {
    std::size_t seed_index;
    Method method;
    double delta;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < n_seeds; ++i) {
    for (const std::string& m : cfg.methods) {
      for (double d : cfg.deltas) jobs.push_back({i, parse_method(m), d});
    }
  }

  std::vector<std::optional<RunResult>> results(jobs.size());
  std::vector<std::string> errors(jobs.size());
  parallel_for(jobs.size(), cfg.jobs, [&](std::size_t j) {
    const Job& job = jobs[j];
    if (!contexts[job.seed_index]) {
      errors[j] = "task setup failed: " + context_errors[job.seed_index];
      return;
    }
    try {
      results[j] = run_one(cfg, *contexts[job.seed_index], job.method, job.delta);
    } catch (const std::exception& e) {
      errors[j] = e.what();
    }
  });

  SweepResult out;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    if (results[j]) {
      out.curves.push_back(std::move(results[j]->curve));
      if (results[j]->bundle) out.bundles.push_back(std::move(*results[j]->bundle));
    } else {
      out.failures.push_back({method_name(jobs[j].method),
                              cfg.seeds[jobs[j].seed_index], jobs[j].delta,
                              errors[j]});
    }
  }
  return out;
}

std::vector<AggregatePoint> aggregate(const std::vector<CoverageCurve>& curves) {
  // Keyed by first appearance so output order follows the sweep order.
  std::vector<std::tuple<std::string, double, double>> order;
  std::map<std::tuple<std::string, double, double>, std::vector<const CoveragePoint*>>
      groups;
  for (const CoverageCurve& c : curves) {
    for (const CoveragePoint& p : c.points) {
      auto key = std::make_tuple(c.method, c.delta, p.beta);
      auto [it, inserted] = groups.try_emplace(key);
      if (inserted) order.push_back(key);
      it->second.push_back(&p);
    }
  }
  std::vector<AggregatePoint> out;
  for (const auto& key : order) {
    const auto& pts = groups[key];
    AggregatePoint a;
    std::tie(a.method, a.delta, a.beta) = key;
    a.runs = static_cast<int>(pts.size());
    for (const CoveragePoint* p : pts) {
      a.mean_accuracy += p->system_accuracy;
      a.mean_ask_rate += p->ask_rate;
    }
    a.mean_accuracy /= a.runs;
    a.mean_ask_rate /= a.runs;
    if (a.runs > 1) {
      double ss = 0.0;
      for (const CoveragePoint* p : pts) {
        ss += (p->system_accuracy - a.mean_accuracy) *
              (p->system_accuracy - a.mean_accuracy);
      }
      a.std_accuracy = std::sqrt(ss / (a.runs - 1));
    }
    out.push_back(a);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const AggregatePoint& l, const AggregatePoint& r) {
                     return std::tie(l.method, l.delta, l.beta) <
                            std::tie(r.method, r.delta, r.beta);
                   });
  return out;
}

const AggregatePoint& find_point(const std::vector<AggregatePoint>& points,
                                 const std::string& method, double delta,
                                 double beta) {
  for (const AggregatePoint& p : points) {
    if (p.method == method && std::abs(p.delta - delta) < 1e-12 &&
        std::abs(p.beta - beta) < 1e-12) {
      return p;
    }
  }
  throw DataError("no aggregate for method " + method + " at beta " +
                  format_double(beta));
}

void write_results_csv(std::ostream& out,
                       const std::vector<CoverageCurve>& curves) {
  out << "method,seed,delta,beta,coverage,tau,ask_rate,system_accuracy,"
         "f_only_accuracy,g_accuracy,expert_alone,machine_alone\n";
  for (const CoverageCurve& c : curves) {
    for (const CoveragePoint& p : c.points) {
      out << c.method << ',' << c.seed << ',' << format_double(c.delta) << ','
          << format_double(p.beta) << ',' << format_double(p.coverage) << ','
          << format_double(p.tau) << ',' << format_double(p.ask_rate) << ','
          << format_double(p.system_accuracy) << ','
          << format_double(p.f_only_accuracy) << ','
          << format_double(p.g_accuracy) << ','
          << format_double(c.expert_alone) << ','
          << format_double(c.machine_alone) << '\n';
    }
  }
}

void write_manifest(std::ostream& out, const ExperimentConfig& cfg,
                    const SweepResult& result) {
  out << "# lta run manifest\n[run]\n";
  out << "task = " << cfg.task << '\n';
  out << "feedback = " << cfg.feedback << '\n';
  out << "methods = [";
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
    out << (i ? ", " : "") << cfg.methods[i];
  }
  out << "]\nseeds = [";
  for (std::size_t i = 0; i < cfg.seeds.size(); ++i) {
    out << (i ? ", " : "") << cfg.seeds[i];
  }
  out << "]\n";
  out << "delta = " << join_doubles(cfg.deltas) << '\n';
  out << "beta-grid = " << join_doubles(cfg.beta_grid) << '\n';
  out << "epochs = " << cfg.epochs << '\n';
  out << "pretrain-epochs = " << cfg.pretrain_epochs << '\n';
  out << "lr = " << format_double(cfg.lr) << '\n';
  out << "batch-size = " << cfg.batch_size << '\n';
  out << "hidden = " << cfg.hidden << '\n';
  out << "alpha = " << format_double(cfg.alpha) << '\n';
  out << "score-mode = " << cfg.score_mode << '\n';
  out << "injection = " << cfg.injection << '\n';
  out << "expert-depth = " << cfg.expert_depth << '\n';
  out << "n = " << cfg.n << '\n';
  out << "jobs = " << cfg.jobs << '\n';
  out << "out = " << cfg.out << '\n';
  out << "save-bundles = " << (cfg.save_bundles ? "true" : "false") << '\n';
  out << "scenario-sep = " << format_double(cfg.scenario.sep) << '\n';
  out << "scenario-noise = " << format_double(cfg.scenario.noise_sd) << '\n';
  out << "scenario-machine-shift = " << format_double(cfg.scenario.machine_shift)
      << '\n';
  out << "scenario-expert-shift = " << format_double(cfg.scenario.expert_shift)
      << '\n';
  out << "synth-sep = " << format_double(cfg.synth.sep) << '\n';
  out << "synth-noise = " << format_double(cfg.synth.noise_sd) << '\n';
  out << "conditions = " << cfg.consensus.n_conditions << '\n';
  out << "annotators = " << cfg.consensus.n_annotators << '\n';
  out << "condition-signal = " << format_double(cfg.consensus.condition_signal)
      << '\n';
  out << "prevalence = " << format_double(cfg.consensus.prevalence) << '\n';
  out << "sensitivity-min = " << format_double(cfg.consensus.sensitivity_min)
      << '\n';
  out << "false-report-max = " << format_double(cfg.consensus.false_report_max)
      << '\n';
  out << "annotator-bias = " << format_double(cfg.consensus.annotator_bias)
      << '\n';
  out << "\n# runs: " << result.curves.size() << " completed, "
      << result.failures.size() << " failed\n";
  for (const RunFailure& f : result.failures) {
    out << "# failed " << f.method << " seed=" << f.seed
        << " delta=" << format_double(f.delta) << ": " << f.message << '\n';
  }
}

std::string format_summary(const std::vector<AggregatePoint>& points) {
  std::ostringstream out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-10s %6s %6s %8s %17s %8s\n", "method",
                "delta", "beta", "coverage", "accuracy", "ask");
  out << line;
  for (const AggregatePoint& p : points) {
    std::snprintf(line, sizeof(line), "%-10s %6.2f %6.2f %8.2f %8.4f+-%-7.4f %8.4f\n",
                  p.method.c_str(), p.delta, p.beta, 1.0 - p.beta,
                  p.mean_accuracy, p.std_accuracy, p.mean_ask_rate);
    out << line;
  }
  return out.str();
}

}  // namespace lta
