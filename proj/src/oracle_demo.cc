#include "lta/oracle_demo.h"

#include <cmath>
#include <cstdio>
#include <map>
#include <ostream>
#include <sstream>

#include "lta/dataset_io.h"
#include "lta/nn_core.h"
#include "lta/random.h"
#include "lta/training.h"

namespace lta {
namespace {

constexpr std::uint64_t kStreamOracleSplit = 60;
constexpr std::uint64_t kStreamOracleFit = 61;

// p(y | x restricted to `features`) on a weighted table, per row.
std::vector<std::vector<double>> table_posteriors(const TaskDataset& ds,
                                                  const std::vector<int>& features) {
  std::map<std::vector<double>, std::vector<double>> mass;
  for (const LabeledSample& s : ds.samples) {
    auto& m = mass[gather(s.x, features)];
    m.resize(ds.num_classes, 0.0);
    m[s.y] += s.weight;
  }
  std::vector<std::vector<double>> out;
  for (const LabeledSample& s : ds.samples) {
    std::vector<double> p = mass[gather(s.x, features)];
    double total = 0.0;
    for (double v : p) total += v;
    for (double& v : p) v /= total;
    out.push_back(std::move(p));
  }
  return out;
}

// Accumulates the four accuracies from per-row predictive distributions.
struct Scores {
  double machine = 0.0;
  double expert = 0.0;
  double ltd = 0.0;
  double lta = 0.0;
  double weight = 0.0;

  void add(double w, int y, const std::vector<double>& pf,
           const std::vector<double>& pe, const std::vector<double>& pg) {
    machine += w * (argmax(pf) == y);
    expert += w * (argmax(pe) == y);
    ltd += w * std::max(pf[y], pe[y]);
    lta += w * std::max(pf[y], pg[y]);
    weight += w;
  }

  void append_to(OracleRow& row) const {
    row.machine.push_back(machine / weight);
    row.expert.push_back(expert / weight);
    row.ltd_star.push_back(ltd / weight);
    row.lta_star.push_back(lta / weight);
  }
};

void put(std::ostream& out, const std::vector<double>& v) {
  const MeanStd ms = mean_std(v);
  out << ',' << format_double(ms.mean) << ',' << format_double(ms.std);
}

}  // namespace

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd r;
  if (values.empty()) return r;
  for (double v : values) r.mean += v;
  r.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return r;
}

OracleRow toy_table_oracle() {
  const TaskDataset ds = make_toy_table();
  const auto pf = table_posteriors(ds, ds.machine_features);
  const auto pe = table_posteriors(ds, ds.expert_features);
  const auto pg = table_posteriors(ds, {0, 1});
  Scores sc;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    sc.add(ds.samples[i].weight, ds.samples[i].y, pf[i], pe[i], pg[i]);
  }
  OracleRow row;
  row.name = "toy_table";
  sc.append_to(row);
  return row;
}

std::vector<NamedScenario> default_scenarios() {
  ScenarioSpec balanced;
  balanced.sep = 1.0;
  balanced.noise_sd = 0.3;
  ScenarioSpec machine_strong;
  machine_strong.sep = 0.5;
  machine_strong.noise_sd = 0.5;
  machine_strong.machine_shift = 0.75;
  ScenarioSpec expert_strong = machine_strong;
  expert_strong.machine_shift = 0.0;
  expert_strong.expert_shift = 0.75;
  return {{"balanced", balanced},
          {"machine_strong", machine_strong},
          {"expert_strong", expert_strong}};
}

OracleRow scenario_oracle(const NamedScenario& scenario,
                          const std::vector<std::uint64_t>& seeds,
                          const LogisticFit& fit) {
  OracleRow row;
  row.name = scenario.name;
  for (std::uint64_t seed : seeds) {
    ScenarioSpec spec = scenario.spec;
    spec.seed = seed;
    const TaskDataset ds = split(make_scenario(spec), SplitRatios{0.6, 0.0, 0.4},
                                 derive_seed(seed, kStreamOracleSplit));
    SgdConfig sgd;
    sgd.learning_rate = fit.learning_rate;
    sgd.epochs = fit.epochs;
    sgd.batch_size = fit.batch_size;
    sgd.seed = derive_seed(seed, kStreamOracleFit);
    const std::vector<int> both{0, 1};
    const DenseNet f = train_feature_classifier(ds, ds.machine_features, 0, sgd);
    const DenseNet e = train_feature_classifier(ds, ds.expert_features, 0, sgd);
    const DenseNet g = train_feature_classifier(ds, both, 0, sgd);
    Scores sc;
    for (const LabeledSample& s : ds.samples) {
      if (s.split != Split::kTest) continue;
      sc.add(s.weight, s.y, softmax(forward(f, gather(s.x, ds.machine_features))),
             softmax(forward(e, gather(s.x, ds.expert_features))),
             softmax(forward(g, s.x)));
    }
    sc.append_to(row);
  }
  return row;
}

std::vector<OracleRow> run_oracle_demo(const std::vector<std::uint64_t>& seeds) {
  std::vector<OracleRow> rows{toy_table_oracle()};
  for (const NamedScenario& sc : default_scenarios()) {
    rows.push_back(scenario_oracle(sc, seeds));
  }
  return rows;
}

void write_oracle_csv(std::ostream& out, const std::vector<OracleRow>& rows) {
  out << "setting,runs,machine_mean,machine_std,expert_mean,expert_std,"
         "ltd_star_mean,ltd_star_std,lta_star_mean,lta_star_std\n";
  for (const OracleRow& r : rows) {
    out << r.name << ',' << r.machine.size();
    put(out, r.machine);
    put(out, r.expert);
    put(out, r.ltd_star);
    put(out, r.lta_star);
    out << '\n';
  }
}

std::string format_oracle_table(const std::vector<OracleRow>& rows) {
  std::ostringstream out;
  char line[200];
  std::snprintf(line, sizeof(line), "%-15s %4s %15s %15s %15s %15s\n", "setting",
                "runs", "machine", "expert", "LtD*", "LtA*");
  out << line;
  for (const OracleRow& r : rows) {
    const MeanStd m = mean_std(r.machine);
    const MeanStd e = mean_std(r.expert);
    const MeanStd d = mean_std(r.ltd_star);
    const MeanStd a = mean_std(r.lta_star);
    std::snprintf(line, sizeof(line),
                  "%-15s %4zu %7.3f+-%-6.3f %7.3f+-%-6.3f %7.3f+-%-6.3f "
                  "%7.3f+-%-6.3f\n",
                  r.name.c_str(), r.machine.size(), m.mean, m.std, e.mean, e.std,
                  d.mean, d.std, a.mean, a.std);
    out << line;
  }
  return out.str();
}

}  // namespace lta
