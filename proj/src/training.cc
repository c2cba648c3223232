#include "lta/training.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>

#include "lta/errors.h"
#include "lta/losses.h"
#include "lta/random.h"

namespace lta {
namespace {

constexpr std::uint64_t kStreamInitF = 10;
constexpr std::uint64_t kStreamInitG = 11;
constexpr std::uint64_t kStreamInitS = 12;
constexpr std::uint64_t kStreamShuffle = 13;

double sigmoid(double v) {
  if (v >= 0) return 1.0 / (1.0 + std::exp(-v));
  const double e = std::exp(v);
  return e / (1.0 + e);
}

// Training rows with their precomputed inputs.
struct TrainingView {
  std::vector<std::vector<double>> x;  // machine-visible features
  std::vector<std::vector<double>> h;
  std::vector<int> y;
  std::vector<double> w;

  std::size_t size() const { return y.size(); }
};

TrainingView training_view(const TaskDataset& ds) {
  TrainingView v;
  for (const LabeledSample& s : ds.samples) {
    if (s.split != Split::kTrain) continue;
    v.x.push_back(ds.machine_input(s));
    v.h.push_back(s.h);
    v.y.push_back(s.y);
    v.w.push_back(s.weight);
  }
  if (v.y.empty()) throw ConfigError("training split is empty");
  return v;
}

DenseNet make_head(int in_dim, int hidden, int out_dim, std::uint64_t seed) {
  if (hidden > 0) {
    const std::array<int, 3> dims{in_dim, hidden, out_dim};
    return DenseNet::create(dims, Activation::kRelu, seed);
  }
  const std::array<int, 2> dims{in_dim, out_dim};
  return DenseNet::create(dims, Activation::kIdentity, seed);
}

EnrichedNet make_enriched(const TaskDataset& ds, const TrainPlan& plan,
                          std::uint64_t seed) {
  const int x_dim = static_cast<int>(ds.machine_features.size());
  if (plan.injection == Injection::kFilm) {
    return EnrichedNet::film(x_dim, ds.feedback_dim, plan.hidden,
                             ds.num_classes, seed);
  }
  if (plan.injection == Injection::kPassthrough) {
    throw ConfigError("passthrough g cannot be trained");
  }
  return EnrichedNet::concat(x_dim, ds.feedback_dim, plan.hidden,
                             ds.num_classes, seed);
}

// Calls fn(batch_rows) for each shuffled mini-batch of one epoch.
template <typename Fn>
void for_each_batch(std::vector<std::size_t>& order, int batch_size, Rng& rng,
                    Fn&& fn) {
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end =
        std::min(order.size(), start + static_cast<std::size_t>(batch_size));
    fn(std::span<const std::size_t>(order.data() + start, end - start));
  }
}

void check_epoch_loss(double loss, const char* phase, int epoch) {
  if (!std::isfinite(loss)) {
    throw TrainingError(std::string(phase) + ": non-finite loss at epoch " +
                        std::to_string(epoch));
  }
}

double batch_weight(const TrainingView& v, std::span<const std::size_t> rows) {
  double total = 0.0;
  for (std::size_t r : rows) total += v.w[r];
  return total;
}

// Cross-entropy epochs on a plain network.
void fit_ce(DenseNet& net, const std::vector<std::vector<double>>& inputs,
            const TrainingView& v, int epochs, const SgdConfig& sgd, Rng& rng,
            std::vector<double>* losses, const char* phase) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  const double total_weight = std::accumulate(v.w.begin(), v.w.end(), 0.0);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    double epoch_loss = 0.0;
    for_each_batch(order, sgd.batch_size, rng, [&](auto rows) {
      Gradients acc = net.zero_gradients();
      for (std::size_t r : rows) {
        const ForwardCache cache = forward_cached(net, inputs[r]);
        const LossValue loss = ce_loss(cache.output(), v.y[r]);
        epoch_loss += v.w[r] * loss.value;
        std::vector<double> up = *loss.grad_f;
        for (double& u : up) u *= v.w[r];
        acc.add(backward(net, cache, up).grads);
      }
      acc.scale(1.0 / batch_weight(v, rows));
      sgd_step(net, acc, sgd);
    });
    epoch_loss /= total_weight;
    check_epoch_loss(epoch_loss, phase, epoch);
    if (losses) losses->push_back(epoch_loss);
  }
}

void fit_enriched_ce(EnrichedNet& g, const TrainingView& v, int epochs,
                     const SgdConfig& sgd, Rng& rng,
                     std::vector<double>* losses) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  const double total_weight = std::accumulate(v.w.begin(), v.w.end(), 0.0);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    double epoch_loss = 0.0;
    for_each_batch(order, sgd.batch_size, rng, [&](auto rows) {
      EnrichedGradients acc = g.zero_gradients();
      for (std::size_t r : rows) {
        const LossValue loss = ce_loss(g.logits(v.x[r], v.h[r]), v.y[r]);
        epoch_loss += v.w[r] * loss.value;
        std::vector<double> up = *loss.grad_f;
        for (double& u : up) u *= v.w[r];
        acc.add(g.backward(v.x[r], v.h[r], up));
      }
      acc.scale(1.0 / batch_weight(v, rows));
      g.sgd_step(acc, sgd);
    });
    epoch_loss /= total_weight;
    check_epoch_loss(epoch_loss, "enriched pretraining", epoch);
    if (losses) losses->push_back(epoch_loss);
  }
}

// f and s on the deferral mixture with per-row "expert" probability
// vectors; s = sigmoid(s~).
void fit_deferral(DenseNet& f, DenseNet& s,
                  const std::vector<std::vector<double>>& expert,
                  const TrainingView& v, int epochs, const SgdConfig& sgd,
                  const DeferCost& cost, Rng& rng,
                  std::vector<double>* losses) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  const double total_weight = std::accumulate(v.w.begin(), v.w.end(), 0.0);
  for (int epoch = 0; epoch < epochs; ++epoch) {
    double epoch_loss = 0.0;
    for_each_batch(order, sgd.batch_size, rng, [&](auto rows) {
      Gradients acc_f = f.zero_gradients();
      Gradients acc_s = s.zero_gradients();
      for (std::size_t r : rows) {
        const ForwardCache fc = forward_cached(f, v.x[r]);
        const ForwardCache sc = forward_cached(s, v.x[r]);
        const double prob = sigmoid(sc.output()[0]);
        const LossValue loss =
            ltd_ce_surrogate(fc.output(), prob, expert[r], v.y[r], cost);
        epoch_loss += v.w[r] * loss.value;
        std::vector<double> up_f = *loss.grad_f;
        for (double& u : up_f) u *= v.w[r];
        const std::array<double, 1> up_s{v.w[r] * *loss.grad_s * prob *
                                         (1.0 - prob)};
        acc_f.add(backward(f, fc, up_f).grads);
        acc_s.add(backward(s, sc, up_s).grads);
      }
      const double inv = 1.0 / batch_weight(v, rows);
      acc_f.scale(inv);
      acc_s.scale(inv);
      sgd_step(f, acc_f, sgd);
      sgd_step(s, acc_s, sgd);
    });
    epoch_loss /= total_weight;
    check_epoch_loss(epoch_loss, "deferral training", epoch);
    if (losses) losses->push_back(epoch_loss);
  }
}

void require_feedback(const TaskDataset& ds) {
  if (ds.feedback_dim < 1 || ds.feedback_mode == "none") {
    throw ConfigError("training requires materialized expert feedback");
  }
}

ModelBundle new_bundle(const TaskDataset& ds, const TrainPlan& plan) {
  plan.validate();
  ds.validate();
  ModelBundle b;
  b.method = plan.method;
  b.num_classes = ds.num_classes;
  b.plan = plan;
  b.train_seed = plan.sgd.seed;
  const int x_dim = static_cast<int>(ds.machine_features.size());
  b.f = make_head(x_dim, plan.hidden, ds.num_classes,
                  derive_seed(plan.sgd.seed, kStreamInitF));
  b.s = make_head(x_dim, plan.hidden, 1,
                  derive_seed(plan.sgd.seed, kStreamInitS));
  return b;
}

}  // namespace

const char* method_name(Method method) {
  switch (method) {
    case Method::kLtd:
      return "ltd";
    case Method::kLtaSeq:
      return "lta_seq";
    case Method::kLtaJoint:
      return "lta_joint";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "ltd") return Method::kLtd;
  if (name == "lta_seq") return Method::kLtaSeq;
  if (name == "lta_joint") return Method::kLtaJoint;
  throw ConfigError("unknown method '" + name + "'");
}

void TrainPlan::validate() const {
  if (pretrain_epochs < 0 || main_epochs < 0) {
    throw ConfigError("epochs must be >= 0");
  }
  if (hidden < 0) throw ConfigError("hidden width must be >= 0");
  sgd.validate();
  cost.validate();
}

int TrainPlan::total_epochs() const {
  return method == Method::kLtd ? main_epochs : pretrain_epochs + main_epochs;
}

TrainPlan TrainPlan::for_budget(Method method, int total_epochs,
                                int pretrain_epochs) {
  TrainPlan plan;
  plan.method = method;
  if (method == Method::kLtd) {
    plan.pretrain_epochs = 0;
    plan.main_epochs = total_epochs;
  } else {
    if (pretrain_epochs > total_epochs) {
      throw ConfigError("pretrain epochs exceed the total budget");
    }
    plan.pretrain_epochs = pretrain_epochs;
    plan.main_epochs = total_epochs - pretrain_epochs;
  }
  plan.sgd.epochs = total_epochs;
  return plan;
}

std::vector<double> ModelBundle::f_logits(const TaskDataset& ds,
                                          const LabeledSample& sample) const {
  return forward(f, ds.machine_input(sample));
}

std::vector<double> ModelBundle::g_logits(const TaskDataset& ds,
                                          const LabeledSample& sample) const {
  return g.logits(ds.machine_input(sample), sample.h);
}

double ModelBundle::s_logit(const TaskDataset& ds,
                            const LabeledSample& sample) const {
  return forward(s, ds.machine_input(sample))[0];
}

std::vector<double> gather(const std::vector<double>& x,
                           const std::vector<int>& features) {
  std::vector<double> out;
  out.reserve(features.size());
  for (int j : features) out.push_back(x.at(j));
  return out;
}

ModelBundle train_ltd(const TaskDataset& ds, const TrainPlan& plan,
                      TrainReport* report) {
  if (ds.feedback_mode != "ltd" || ds.feedback_dim != ds.num_classes) {
    throw ConfigError(
        "LtD training needs expert predictions (ltd feedback, one-hot of "
        "size K)");
  }
  ModelBundle b = new_bundle(ds, plan);
  b.g = EnrichedNet::passthrough(ds.num_classes);
  const TrainingView v = training_view(ds);
  Rng rng = make_rng(plan.sgd.seed, kStreamShuffle);
  TrainReport local;
  fit_deferral(b.f, b.s, v.h, v, plan.main_epochs, plan.sgd, plan.cost, rng,
               &local.main_loss);
  local.epochs_run = plan.main_epochs;
  if (report) *report = std::move(local);
  return b;
}

ModelBundle train_lta_seq(const TaskDataset& ds, const TrainPlan& plan,
                          TrainReport* report) {
  require_feedback(ds);
  ModelBundle b = new_bundle(ds, plan);
  b.g = make_enriched(ds, plan, derive_seed(plan.sgd.seed, kStreamInitG));
  const TrainingView v = training_view(ds);
  Rng rng = make_rng(plan.sgd.seed, kStreamShuffle);
  TrainReport local;
  fit_enriched_ce(b.g, v, plan.pretrain_epochs, plan.sgd, rng,
                  &local.pretrain_loss);

  std::vector<std::vector<double>> g_onehot(v.size());
  for (std::size_t r = 0; r < v.size(); ++r) {
    g_onehot[r].assign(ds.num_classes, 0.0);
    g_onehot[r][argmax(b.g.logits(v.x[r], v.h[r]))] = 1.0;
  }
  fit_deferral(b.f, b.s, g_onehot, v, plan.main_epochs, plan.sgd, plan.cost,
               rng, &local.main_loss);
  local.epochs_run = plan.pretrain_epochs + plan.main_epochs;
  if (report) *report = std::move(local);
  return b;
}

ModelBundle train_lta_joint(const TaskDataset& ds, const TrainPlan& plan,
                            TrainReport* report) {
  require_feedback(ds);
  ModelBundle b = new_bundle(ds, plan);
  b.g = make_enriched(ds, plan, derive_seed(plan.sgd.seed, kStreamInitG));
  const TrainingView v = training_view(ds);
  Rng rng = make_rng(plan.sgd.seed, kStreamShuffle);
  TrainReport local;
  fit_ce(b.f, v.x, v, plan.pretrain_epochs, plan.sgd, rng,
         &local.pretrain_loss, "standard pretraining");
  fit_enriched_ce(b.g, v, plan.pretrain_epochs, plan.sgd, rng,
                  &local.pretrain_loss);

  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  const double total_weight = std::accumulate(v.w.begin(), v.w.end(), 0.0);
  for (int epoch = 0; epoch < plan.main_epochs; ++epoch) {
    double epoch_loss = 0.0;
    for_each_batch(order, plan.sgd.batch_size, rng, [&](auto rows) {
      Gradients acc_f = b.f.zero_gradients();
      Gradients acc_s = b.s.zero_gradients();
      EnrichedGradients acc_g = b.g.zero_gradients();
      for (std::size_t r : rows) {
        const ForwardCache fc = forward_cached(b.f, v.x[r]);
        const ForwardCache sc = forward_cached(b.s, v.x[r]);
        const std::vector<double> gl = b.g.logits(v.x[r], v.h[r]);
        const LossValue loss = joint_surrogate(fc.output(), gl, sc.output()[0],
                                               v.y[r], plan.cost);
        const double w = v.w[r];
        epoch_loss += w * loss.value;
        std::vector<double> up_f = *loss.grad_f;
        for (double& u : up_f) u *= w;
        std::vector<double> up_g = *loss.grad_g;
        for (double& u : up_g) u *= w;
        const std::array<double, 1> up_s{w * *loss.grad_s};
        acc_f.add(backward(b.f, fc, up_f).grads);
        acc_s.add(backward(b.s, sc, up_s).grads);
        acc_g.add(b.g.backward(v.x[r], v.h[r], up_g));
      }
      const double inv = 1.0 / batch_weight(v, rows);
      acc_f.scale(inv);
      acc_s.scale(inv);
      acc_g.scale(inv);
      sgd_step(b.f, acc_f, plan.sgd);
      sgd_step(b.s, acc_s, plan.sgd);
      b.g.sgd_step(acc_g, plan.sgd);
    });
    epoch_loss /= total_weight;
    check_epoch_loss(epoch_loss, "joint training", epoch);
    local.main_loss.push_back(epoch_loss);
  }
  local.epochs_run = plan.pretrain_epochs + plan.main_epochs;
  if (report) *report = std::move(local);
  return b;
}

ModelBundle train(const TaskDataset& ds, const TrainPlan& plan,
                  TrainReport* report) {
  switch (plan.method) {
    case Method::kLtd:
      return train_ltd(ds, plan, report);
    case Method::kLtaSeq:
      return train_lta_seq(ds, plan, report);
    case Method::kLtaJoint:
      return train_lta_joint(ds, plan, report);
  }
  throw ConfigError("unknown method");
}

DenseNet train_feature_classifier(const TaskDataset& ds,
                                  const std::vector<int>& features, int hidden,
                                  const SgdConfig& sgd) {
  sgd.validate();
  TrainingView v;
  for (const LabeledSample& s : ds.samples) {
    if (s.split != Split::kTrain) continue;
    v.x.push_back(gather(s.x, features));
    v.y.push_back(s.y);
    v.w.push_back(s.weight);
  }
  if (v.y.empty()) throw ConfigError("training split is empty");
  DenseNet net = make_head(static_cast<int>(features.size()), hidden,
                           ds.num_classes, derive_seed(sgd.seed, kStreamInitF));
  Rng rng = make_rng(sgd.seed, kStreamShuffle);
  fit_ce(net, v.x, v, sgd.epochs, sgd, rng, nullptr, "classifier training");
  return net;
}

DenseNet train_machine_classifier(const TaskDataset& ds, int hidden,
                                  const SgdConfig& sgd) {
  return train_feature_classifier(ds, ds.machine_features, hidden, sgd);
}

}  // namespace lta
