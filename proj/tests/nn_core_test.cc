#include "lta/nn_core.h"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "lta/enriched_net.h"
#include "lta/errors.h"
#include "lta/losses.h"
#include "lta/random.h"
#include "test_util.h"

namespace lta {
namespace {

DenseNet single_layer(int in, int out, Activation act) {
  DenseLayer layer;
  layer.in_dim = in;
  layer.out_dim = out;
  layer.weights.assign(static_cast<std::size_t>(in) * out, 0.0);
  layer.bias.assign(out, 0.0);
  layer.activation = act;
  return DenseNet({layer});
}

std::vector<double> random_vector(Rng& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

TEST(Forward, IdentityLayerReturnsInput) {
  DenseNet net = single_layer(3, 3, Activation::kIdentity);
  for (int i = 0; i < 3; ++i) net.mutable_layers()[0].w(i, i) = 1.0;
  const std::vector<double> x{0.5, -2.0, 3.25};
  EXPECT_EQ(forward(net, x), x);
}

TEST(Forward, ZeroNetGivesZeroLogits) {
  const DenseNet net = single_layer(4, 2, Activation::kIdentity);
  EXPECT_EQ(forward(net, std::vector<double>{1, 2, 3, 4}),
            (std::vector<double>{0, 0}));
}

TEST(Forward, HandComputedTwoByTwo) {
  DenseNet net = single_layer(2, 2, Activation::kIdentity);
  DenseLayer& l = net.mutable_layers()[0];
  l.w(0, 0) = 1.0;
  l.w(0, 1) = 2.0;
  l.w(1, 0) = -1.0;
  l.w(1, 1) = 0.5;
  l.bias = {0.25, -1.0};
  // (1*3 + 2*4 + 0.25, -3 + 2 - 1)
  EXPECT_EQ(forward(net, std::vector<double>{3, 4}),
            (std::vector<double>{11.25, -2.0}));
}

TEST(Forward, WrongInputSizeIsDataError) {
  const DenseNet net = single_layer(2, 2, Activation::kIdentity);
  EXPECT_THROW(forward(net, std::vector<double>{1}), DataError);
}

TEST(Softmax, ClosedForms) {
  const std::vector<double> u = softmax(std::vector<double>{0, 0, 0, 0});
  for (double p : u) EXPECT_DOUBLE_EQ(p, 0.25);
  const std::vector<double> p =
      softmax(std::vector<double>{std::log(1.0), std::log(2.0), std::log(3.0)});
  EXPECT_NEAR(p[0], 1.0 / 6, 1e-15);
  EXPECT_NEAR(p[1], 2.0 / 6, 1e-15);
  EXPECT_NEAR(p[2], 3.0 / 6, 1e-15);
}

TEST(Softmax, LargeLogitsStayFinite) {
  const std::vector<double> p = softmax(std::vector<double>{1000, 999, -1000});
  EXPECT_TRUE(std::isfinite(p[0]));
  EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-15);
}

TEST(Backward, ZeroUpstreamGivesZeroGradients) {
  const std::vector<int> dims{3, 5, 2};
  const DenseNet net = DenseNet::create(dims, Activation::kRelu, 1);
  const BackwardResult r =
      backward(net, std::vector<double>{1, -1, 0.5}, std::vector<double>{0, 0});
  EXPECT_EQ(r.grads.max_abs(), 0.0);
}

TEST(Backward, MatchesFiniteDifferencesThroughCrossEntropy) {
  Rng rng(5);
  const std::vector<int> dims{4, 6, 5, 3};
  for (Activation act : {Activation::kTanh, Activation::kRelu}) {
    DenseNet net = DenseNet::create(dims, act, 2);
    std::vector<double> x = random_vector(rng, 4);
    while (testing::near_relu_kink(net, x)) x = random_vector(rng, 4);
    const int y = 1;
    const std::vector<double> z = forward(net, x);
    const BackwardResult r = backward(net, x, *ce_loss(z, y).grad_f);
    std::vector<double> analytic;
    testing::flatten(r.grads, analytic);
    std::vector<double*> params;
    testing::collect(net, params);
    const std::vector<double> numeric = testing::numeric_gradient(
        params, [&] { return ce_loss(forward(net, x), y).value; });
    EXPECT_LT(testing::relative_error(analytic, numeric), 1e-6)
        << activation_name(act);
  }
}

TEST(Backward, InputGradientMatchesFiniteDifferences) {
  Rng rng(6);
  const std::vector<int> dims{3, 4, 2};
  const DenseNet net = DenseNet::create(dims, Activation::kTanh, 3);
  std::vector<double> x = random_vector(rng, 3);
  const BackwardResult r =
      backward(net, x, *mae_loss(forward(net, x), 0).grad_f);
  std::vector<double*> inputs;
  for (double& v : x) inputs.push_back(&v);
  const std::vector<double> numeric = testing::numeric_gradient(
      inputs, [&] { return mae_loss(forward(net, x), 0).value; });
  EXPECT_LT(testing::relative_error(r.input_grad, numeric), 1e-6);
}

TEST(Enriched, ConcatAndFilmGradientsMatchFiniteDifferences) {
  Rng rng(8);
  for (Injection inj : {Injection::kConcat, Injection::kFilm}) {
    EnrichedNet g = inj == Injection::kConcat ? EnrichedNet::concat(3, 2, 5, 4, 1)
                                              : EnrichedNet::film(3, 2, 5, 4, 1);
    g.hidden_activation = Activation::kTanh;
    const std::vector<double> x = random_vector(rng, 3);
    const std::vector<double> h = random_vector(rng, 2);
    const int y = 2;
    const EnrichedGradients eg =
        g.backward(x, h, *mae_loss(g.logits(x, h), y).grad_f);
    std::vector<double> analytic;
    testing::flatten(eg, analytic);
    std::vector<double*> params;
    testing::collect(g, params);
    const std::vector<double> numeric = testing::numeric_gradient(
        params, [&] { return mae_loss(g.logits(x, h), y).value; });
    ASSERT_EQ(analytic.size(), numeric.size());
    EXPECT_LT(testing::relative_error(analytic, numeric), 1e-6)
        << injection_name(inj);
  }
}

TEST(Enriched, PassthroughReproducesOneHot) {
  const EnrichedNet g = EnrichedNet::passthrough(3);
  const std::vector<double> p =
      softmax(g.logits(std::vector<double>{}, std::vector<double>{0, 1, 0}));
  EXPECT_EQ(argmax(p), 1);
  EXPECT_NEAR(p[1], 1.0, 1e-9);
}

TEST(Sgd, StepArithmetic) {
  DenseNet net = single_layer(1, 1, Activation::kIdentity);
  net.mutable_layers()[0].weights = {1.0};
  Gradients g = net.zero_gradients();
  g.weights[0] = {2.0};
  SgdConfig cfg;
  cfg.learning_rate = 0.1;
  sgd_step(net, g, cfg);
  EXPECT_DOUBLE_EQ(net.layers()[0].weights[0], 0.8);
}

TEST(Sgd, ZeroLearningRateLeavesNetUnchanged) {
  const std::vector<int> dims{2, 3, 2};
  DenseNet net = DenseNet::create(dims, Activation::kRelu, 4);
  const DenseNet before = net;
  Gradients g = net.zero_gradients();
  for (auto& w : g.weights) std::fill(w.begin(), w.end(), 1.0);
  SgdConfig cfg;
  cfg.learning_rate = 0.0;
  sgd_step(net, g, cfg);
  EXPECT_EQ(net.layers()[0].weights, before.layers()[0].weights);
}

TEST(Sgd, ZeroGradientLeavesNetUnchanged) {
  const std::vector<int> dims{2, 3, 2};
  DenseNet net = DenseNet::create(dims, Activation::kRelu, 4);
  const DenseNet before = net;
  sgd_step(net, net.zero_gradients(), SgdConfig{});
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    EXPECT_EQ(net.layers()[l].weights, before.layers()[l].weights);
  }
}

TEST(Sgd, NonFiniteGradientIsTrainingError) {
  const std::vector<int> dims{2, 3, 2};
  DenseNet net = DenseNet::create(dims, Activation::kRelu, 4);
  Gradients g = net.zero_gradients();
  g.weights[1][0] = std::numeric_limits<double>::quiet_NaN();
  try {
    sgd_step(net, g, SgdConfig{});
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("layer 1"), std::string::npos);
  }
}

TEST(Create, SameSeedSameWeights) {
  const std::vector<int> dims{4, 8, 3};
  const DenseNet a = DenseNet::create(dims, Activation::kRelu, 11);
  const DenseNet b = DenseNet::create(dims, Activation::kRelu, 11);
  EXPECT_EQ(a.layers()[0].weights, b.layers()[0].weights);
  EXPECT_EQ(a.in_dim(), 4);
  EXPECT_EQ(a.out_dim(), 3);
}

}  // namespace
}  // namespace lta
