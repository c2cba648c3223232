// lta: generate tasks, run LtD/LtA sweeps, re-evaluate bundles and print the
// oracle comparison.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.
// Values from --config (INI, one [section] per subcommand) are overridden by
// flags given on the command line.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "lta/dataset_io.h"
#include "lta/errors.h"
#include "lta/eval_harness.h"
#include "lta/experiment.h"
#include "lta/expert_sim.h"
#include "lta/oracle_demo.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw lta::ConfigError("out: cannot create directory '" + dir + "'");
  }
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw lta::ConfigError("out: cannot write '" + path.string() + "'");
  return out;
}

void add_task_options(CLI::App* cmd, lta::ExperimentConfig& cfg) {
  cmd->add_option("--task", cfg.task, "toy_table | scenario | synth | consensus");
  cmd->add_option("--n", cfg.n, "Sample count (0 keeps the task default)");
  cmd->add_option("--scenario-sep", cfg.scenario.sep, "Scenario centroid half-distance");
  cmd->add_option("--scenario-noise", cfg.scenario.noise_sd, "Scenario noise sd");
  cmd->add_option("--scenario-machine-shift", cfg.scenario.machine_shift,
                  "Extra separation on the machine axis");
  cmd->add_option("--scenario-expert-shift", cfg.scenario.expert_shift,
                  "Extra separation on the expert axis");
  cmd->add_option("--synth-sep", cfg.synth.sep, "Synth centroid half-distance");
  cmd->add_option("--synth-noise", cfg.synth.noise_sd, "Synth noise sd");
  cmd->add_option("--conditions", cfg.consensus.n_conditions,
                  "Consensus task: number of conditions");
  cmd->add_option("--annotators", cfg.consensus.n_annotators,
                  "Consensus task: annotators per sample");
  cmd->add_option("--condition-signal", cfg.consensus.condition_signal,
                  "Consensus task: feature strength per condition");
  cmd->add_option("--prevalence", cfg.consensus.prevalence,
                  "Consensus task: fraction of likely conditions");
  cmd->add_option("--sensitivity-min", cfg.consensus.sensitivity_min,
                  "Consensus task: lowest report rate of a present condition");
  cmd->add_option("--false-report-max", cfg.consensus.false_report_max,
                  "Consensus task: highest report rate of an absent condition");
  cmd->add_option("--annotator-bias", cfg.consensus.annotator_bias,
                  "Consensus task: shift of annotator report rates");
  cmd->add_option("--expert-depth", cfg.expert_depth, "Depth of tree experts");
}

int cmd_generate(lta::ExperimentConfig cfg, std::uint64_t seed) {
  cfg.validate();
  ensure_dir(cfg.out);
  const lta::SeedContext ctx = lta::build_context(cfg, seed, false);
  const std::string stem = cfg.task + "_seed" + std::to_string(seed);
  const fs::path data_path = fs::path(cfg.out) / (stem + ".csv");
  {
    std::ofstream out = open_out(data_path);
    lta::write_dataset(out, ctx.lta_data);
  }
  std::ofstream manifest = open_out(fs::path(cfg.out) / (stem + ".manifest.ini"));
  manifest << "# lta generate manifest\n[generate]\n"
           << "task = " << cfg.task << "\nseed = " << seed << "\nn = " << cfg.n
           << "\nfeedback = " << cfg.feedback << "\nout = " << cfg.out << '\n'
           << "rows = " << ctx.lta_data.size() << '\n';
  std::cout << "wrote " << data_path.string() << " (" << ctx.lta_data.size()
            << " rows)\n";
  return 0;
}

std::string delta_tag(double d) { return lta::format_double(d); }

int cmd_run(const lta::ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.out.empty()) throw lta::ConfigError("out: an output directory is required");
  ensure_dir(cfg.out);
  const lta::SweepResult result = lta::sweep(cfg);
  {
    std::ofstream csv = open_out(fs::path(cfg.out) / "results.csv");
    lta::write_results_csv(csv, result.curves);
  }
  {
    std::ofstream manifest = open_out(fs::path(cfg.out) / "manifest.ini");
    lta::write_manifest(manifest, cfg, result);
  }
  if (cfg.save_bundles) {
    const fs::path dir = fs::path(cfg.out) / "bundles";
    ensure_dir(dir.string());
    for (const lta::ModelBundle& b : result.bundles) {
      lta::save_bundle((dir / (std::string(lta::method_name(b.method)) + "_seed" +
                               std::to_string(b.data_seed) + "_delta" +
                               delta_tag(b.plan.cost.delta) + ".bundle"))
                           .string(),
                       b);
    }
    for (std::uint64_t seed : cfg.seeds) {
      const lta::SeedContext ctx = lta::build_context(cfg, seed, false);
      lta::save_dataset((dir / ("ltd_data_seed" + std::to_string(seed) + ".csv")).string(),
                        ctx.ltd_data);
      lta::save_dataset((dir / ("lta_data_seed" + std::to_string(seed) + ".csv")).string(),
                        ctx.lta_data);
    }
  }
  std::cout << lta::format_summary(lta::aggregate(result.curves));
  for (const lta::RunFailure& f : result.failures) {
    std::cerr << "run failed: method=" << f.method << " seed=" << f.seed
              << " delta=" << lta::format_double(f.delta) << ": " << f.message
              << '\n';
  }
  std::cout << result.curves.size() << " runs completed, " << result.failures.size()
            << " failed; results in " << cfg.out << '\n';
  return result.failures.empty() ? 0 : kExitRuntime;
}

int cmd_oracle_demo(const std::vector<std::uint64_t>& seeds, const std::string& out) {
  if (seeds.empty()) throw lta::ConfigError("seeds: at least one seed needed");
  const std::vector<lta::OracleRow> rows = lta::run_oracle_demo(seeds);
  std::cout << lta::format_oracle_table(rows);
  if (!out.empty()) {
    ensure_dir(out);
    std::ofstream csv = open_out(fs::path(out) / "oracle_demo.csv");
    lta::write_oracle_csv(csv, rows);
  }
  return 0;
}

int cmd_eval(const std::string& bundle_path, const std::string& data_path,
             const std::string& score_mode, const std::vector<double>& grid,
             const std::string& out) {
  if (bundle_path.empty()) throw lta::ConfigError("bundle: path required");
  if (data_path.empty()) throw lta::ConfigError("data: path required");
  const lta::ModelBundle bundle = lta::load_bundle(bundle_path);
  const lta::TaskDataset ds = lta::load_dataset(data_path);
  lta::ScoreMode mode;
  try {
    mode = lta::parse_score_mode(score_mode);
  } catch (const lta::ConfigError&) {
    throw lta::ConfigError("score-mode: unknown mode '" + score_mode + "'");
  }
  const lta::CoverageCurve curve = lta::evaluate(bundle, mode, ds, grid);
  if (out.empty()) {
    lta::write_results_csv(std::cout, {curve});
  } else {
    std::ofstream csv = open_out(out);
    lta::write_results_csv(csv, {curve});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learning to ask and learning to defer on synthetic tasks"};
  app.option_defaults()->always_capture_default();
  app.set_config("--config", "", "INI file; flags given on the command line win");
  app.require_subcommand(1);

  lta::ExperimentConfig gen_cfg;
  gen_cfg.out = ".";
  std::uint64_t gen_seed = 0;
  CLI::App* generate = app.add_subcommand("generate", "Write a task dataset");
  add_task_options(generate, gen_cfg);
  generate->add_option("--seed", gen_seed, "Dataset seed");
  generate->add_option("--feedback", gen_cfg.feedback,
                       "Feedback stored in the h columns: ltd | unc | feature");
  generate->add_option("--out", gen_cfg.out, "Output directory");

  lta::ExperimentConfig run_cfg;
  run_cfg.out = "results";
  CLI::App* run = app.add_subcommand("run", "Train and evaluate a sweep");
  add_task_options(run, run_cfg);
  run->add_option("--feedback", run_cfg.feedback, "ltd | unc | feature");
  run->add_option("--methods", run_cfg.methods, "ltd lta_seq lta_joint");
  run->add_option("--seeds", run_cfg.seeds, "Seeds, one run each");
  run->add_option("--delta", run_cfg.deltas, "Defer costs");
  run->add_option("--beta-grid", run_cfg.beta_grid, "Budgets to evaluate");
  run->add_option("--epochs", run_cfg.epochs, "Total epoch budget per method");
  run->add_option("--pretrain-epochs", run_cfg.pretrain_epochs,
                  "Pretraining epochs of the LtA methods");
  run->add_option("--lr", run_cfg.lr, "SGD learning rate");
  run->add_option("--batch-size", run_cfg.batch_size, "Mini-batch size");
  run->add_option("--hidden", run_cfg.hidden, "Hidden width (0 = linear)");
  run->add_option("--alpha", run_cfg.alpha, "Weight of the expert term");
  run->add_option("--score-mode", run_cfg.score_mode, "selector_logit | loss_gap");
  run->add_option("--injection", run_cfg.injection, "concat | film");
  run->add_option("--jobs", run_cfg.jobs, "Worker threads (0 = all cores)");
  run->add_flag("--save-bundles", run_cfg.save_bundles,
                "Also write trained bundles and their datasets");
  run->add_option("--out", run_cfg.out, "Output directory");

  std::vector<std::uint64_t> oracle_seeds{0, 1, 2, 3, 4};
  std::string oracle_out;
  CLI::App* oracle = app.add_subcommand(
      "oracle-demo", "Oracle LtD* vs LtA* on the 2-bit table and three scenarios");
  oracle->add_option("--seeds", oracle_seeds, "Scenario seeds");
  oracle->add_option("--out", oracle_out, "Directory for oracle_demo.csv");

  std::string bundle_path;
  std::string data_path;
  std::string eval_mode = "selector_logit";
  std::vector<double> eval_grid = lta::default_beta_grid();
  std::string eval_out;
  CLI::App* eval = app.add_subcommand("eval", "Re-evaluate a saved bundle");
  eval->add_option("--bundle", bundle_path, "Bundle file");
  eval->add_option("--data", data_path, "Dataset CSV with feedback");
  eval->add_option("--score-mode", eval_mode, "selector_logit | loss_gap");
  eval->add_option("--beta-grid", eval_grid, "Budgets to evaluate");
  eval->add_option("--out", eval_out, "CSV path (stdout when empty)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*generate) return cmd_generate(gen_cfg, gen_seed);
    if (*run) return cmd_run(run_cfg);
    if (*oracle) return cmd_oracle_demo(oracle_seeds, oracle_out);
    if (*eval) return cmd_eval(bundle_path, data_path, eval_mode, eval_grid, eval_out);
  } catch (const lta::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}
