#include "lta/experiment.h"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "lta/errors.h"

namespace lta {
namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  cfg.task = "synth";
  cfg.n = 400;
  cfg.epochs = 4;
  cfg.pretrain_epochs = 2;
  cfg.jobs = 2;
  return cfg;
}

std::string config_error(const ExperimentConfig& cfg) {
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

TEST(Config, ErrorsNameTheField) {
  ExperimentConfig cfg;
  cfg.task = "cifar";
  EXPECT_EQ(config_error(cfg).rfind("task:", 0), 0u);
  cfg = {};
  cfg.methods = {"ltd", "magic"};
  EXPECT_EQ(config_error(cfg).rfind("methods:", 0), 0u);
  cfg = {};
  cfg.feedback = "unc";
  EXPECT_EQ(config_error(cfg).rfind("feedback:", 0), 0u);
  cfg = {};
  cfg.beta_grid = {0.0, 0.5, 0.5};
  EXPECT_EQ(config_error(cfg).rfind("beta-grid:", 0), 0u);
  cfg = {};
  cfg.deltas = {1.5};
  EXPECT_EQ(config_error(cfg).rfind("delta:", 0), 0u);
  cfg = {};
  cfg.pretrain_epochs = 200;
  EXPECT_EQ(config_error(cfg).rfind("pretrain-epochs:", 0), 0u);
  EXPECT_EQ(config_error(ExperimentConfig{}), "");
}

TEST(Config, PlanFollowsBudget) {
  const ExperimentConfig cfg;
  const TrainPlan ltd = cfg.plan_for(Method::kLtd, 0.2, 0);
  EXPECT_EQ(ltd.total_epochs(), 150);
  EXPECT_EQ(ltd.main_epochs, 150);
  EXPECT_DOUBLE_EQ(ltd.cost.delta, 0.2);
  const TrainPlan joint = cfg.plan_for(Method::kLtaJoint, 0.0, 0);
  EXPECT_EQ(joint.pretrain_epochs, 50);
  EXPECT_EQ(joint.main_epochs, 100);
}

TEST(Task, SplitsAndFeedback) {
  ExperimentConfig cfg = small_config();
  const SeedContext ctx = build_context(cfg, 3, true);
  EXPECT_EQ(ctx.ltd_data.count(Split::kTrain), 280u);
  EXPECT_EQ(ctx.ltd_data.count(Split::kCalibration), 40u);
  EXPECT_EQ(ctx.ltd_data.count(Split::kTest), 80u);
  EXPECT_EQ(ctx.ltd_data.feedback_mode, "ltd");
  EXPECT_GT(ctx.expert_alone, 0.0);
  EXPECT_GT(ctx.machine_alone, 0.0);
}

TEST(Task, ConsensusUncFeedbackKeepsLtdForDeferral) {
  ExperimentConfig cfg = small_config();
  cfg.task = "consensus";
  cfg.feedback = "unc";
  const SeedContext ctx = build_context(cfg, 0, false);
  EXPECT_EQ(ctx.ltd_data.feedback_mode, "ltd");
  EXPECT_EQ(ctx.ltd_data.feedback_dim, 2);
  EXPECT_EQ(ctx.lta_data.feedback_mode, "unc");
  EXPECT_EQ(ctx.lta_data.feedback_dim, 4);
}

TEST(Task, ToyTableFillsEverySplit) {
  ExperimentConfig cfg;
  cfg.task = "toy_table";
  const TaskDataset ds = make_task(cfg, 0);
  EXPECT_EQ(ds.count(Split::kTrain), 4u);
  EXPECT_EQ(ds.count(Split::kCalibration), 4u);
  EXPECT_EQ(ds.count(Split::kTest), 4u);
}

TEST(Sweep, ThreeMethodsFiveSeedsGiveFifteenCurves) {
  const ExperimentConfig cfg = small_config();
  const SweepResult r = sweep(cfg);
  EXPECT_TRUE(r.failures.empty());
  ASSERT_EQ(r.curves.size(), 15u);
  std::set<std::pair<std::string, std::uint64_t>> keys;
  for (const CoverageCurve& c : r.curves) {
    keys.emplace(c.method, c.seed);
    EXPECT_EQ(c.points.size(), 11u);
  }
  EXPECT_EQ(keys.size(), 15u);
  EXPECT_EQ(r.curves[0].method, "ltd");
  EXPECT_EQ(r.curves[0].seed, 0u);
  EXPECT_EQ(r.curves[1].method, "lta_seq");
}

TEST(Sweep, ResultsDoNotDependOnThreadCount) {
  ExperimentConfig a = small_config();
  a.seeds = {0, 1};
  a.jobs = 1;
  ExperimentConfig b = a;
  b.jobs = 3;
  std::ostringstream oa;
  std::ostringstream ob;
  write_results_csv(oa, sweep(a).curves);
  write_results_csv(ob, sweep(b).curves);
  EXPECT_EQ(oa.str(), ob.str());
}

TEST(Sweep, DeltaGridMultipliesRuns) {
  ExperimentConfig cfg = small_config();
  cfg.methods = {"lta_seq"};
  cfg.seeds = {0};
  cfg.deltas = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  const SweepResult r = sweep(cfg);
  ASSERT_EQ(r.curves.size(), 6u);
  EXPECT_DOUBLE_EQ(r.curves[1].delta, 0.2);
}

TEST(Aggregate, ConstantRunsHaveZeroStd) {
  std::vector<CoverageCurve> curves;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    CoverageCurve c;
    c.method = "dummy";
    c.seed = seed;
    CoveragePoint p;
    p.beta = 0.3;
    p.system_accuracy = 0.625;
    p.ask_rate = 0.3;
    c.points.push_back(p);
    curves.push_back(c);
  }
  const std::vector<AggregatePoint> agg = aggregate(curves);
  ASSERT_EQ(agg.size(), 1u);
  EXPECT_EQ(agg[0].runs, 5);
  EXPECT_EQ(agg[0].mean_accuracy, 0.625);
  EXPECT_EQ(agg[0].std_accuracy, 0.0);
  EXPECT_EQ(find_point(agg, "dummy", 0.0, 0.3).runs, 5);
  EXPECT_THROW(find_point(agg, "dummy", 0.0, 0.4), DataError);
}

TEST(Aggregate, SampleStandardDeviation) {
  std::vector<CoverageCurve> curves;
  for (double acc : {0.5, 0.7}) {
    CoverageCurve c;
    c.method = "m";
    CoveragePoint p;
    p.system_accuracy = acc;
    c.points.push_back(p);
    curves.push_back(c);
  }
  EXPECT_NEAR(aggregate(curves)[0].std_accuracy, std::sqrt(0.02), 1e-15);
}

TEST(ResultsCsv, HeaderAndRowCount) {
  ExperimentConfig cfg = small_config();
  cfg.seeds = {0};
  const SweepResult r = sweep(cfg);
  std::ostringstream out;
  write_results_csv(out, r.curves);
  std::istringstream in(out.str());
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header,
            "method,seed,delta,beta,coverage,tau,ask_rate,system_accuracy,"
            "f_only_accuracy,g_accuracy,expert_alone,machine_alone");
  int rows = 0;
  for (std::string line; std::getline(in, line);) ++rows;
  EXPECT_EQ(rows, 3 * 11);
}

TEST(Manifest, ListsRunFlags) {
  ExperimentConfig cfg = small_config();
  cfg.deltas = {0.0, 0.2};
  std::ostringstream out;
  write_manifest(out, cfg, SweepResult{});
  const std::string text = out.str();
  EXPECT_NE(text.find("[run]"), std::string::npos);
  EXPECT_NE(text.find("task = synth"), std::string::npos);
  EXPECT_NE(text.find("methods = [ltd, lta_seq, lta_joint]"), std::string::npos);
  EXPECT_NE(text.find("pretrain-epochs = 2"), std::string::npos);
}

}  // namespace
}  // namespace lta
