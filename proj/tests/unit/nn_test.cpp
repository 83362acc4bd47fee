// Copyright 2026 The nullspace-unlearn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "unsc/errors.hpp"
#include "unsc/nn.hpp"

namespace unsc {
namespace {

Network zero_net(std::size_t in, std::size_t k) {
  Network net = Network::initialize({LayerSpec::dense(in, k, Activation::kIdentity)}, k, 1);
  net.weights(0) = Matrix(k, in + 1, 0.0);
  return net;
}

// Perturbs the net so no ReLU pre-activation sits at a kink.
Network small_mlp(std::uint64_t seed) {
  return Network::initialize({LayerSpec::dense(3, 5), LayerSpec::dense(5, 4),
                              LayerSpec::dense(4, 3, Activation::kIdentity)},
                             3, seed);
}

Network small_cnn(std::uint64_t seed) {
  // 2x5x5 input -> conv 3 ch k3 s1 (3x3x3) -> conv 2 ch k2 s1 (2x2x2) -> dense 3.
  return Network::initialize({LayerSpec::conv(2, 3, 3, 1, 5, 5),
                              LayerSpec::conv(3, 2, 2, 1, 3, 3, Activation::kIdentity),
                              LayerSpec::dense(8, 3, Activation::kIdentity)},
                             3, seed);
}

Network with_random_bias(Network net, std::uint64_t seed) {
  Rng rng(seed);
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    Matrix& w = net.weights(l);
    for (std::size_t i = 0; i < w.rows(); ++i) w(i, w.cols() - 1) = 0.3 * rng.normal();
  }
  return net;
}

// Largest relative error between analytic and central-difference gradients.
double fd_error(const Network& net, const Matrix& x, const std::vector<int>& y) {
  const GradientSet g = loss_and_grads(net, x, y);
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t l = 0; l < net.num_layers(); ++l) {
    const Matrix& w = net.weights(l);
    for (std::size_t i = 0; i < w.rows(); ++i)
      for (std::size_t j = 0; j < w.cols(); ++j) {
        Network plus = net, minus = net;
        plus.weights(l)(i, j) += h;
        minus.weights(l)(i, j) -= h;
        const double fd = (loss_and_grads(plus, x, y).loss - loss_and_grads(minus, x, y).loss) / (2 * h);
        const double an = g.grads[l](i, j);
        const double err = std::abs(fd - an) / std::max(1.0, std::abs(fd) + std::abs(an));
        worst = std::max(worst, err);
      }
  }
  return worst;
}

TEST(Forward, ZeroWeightsGiveUniformSoftmaxAndLogK) {
  const Network net = zero_net(2, 4);
  const Matrix x = oracle::random_matrix(2, 8, 3);
  const Matrix p = softmax(forward(net, x).logits);
  for (double v : p.data()) EXPECT_DOUBLE_EQ(v, 0.25);
  const std::vector<int> y{0, 1, 2, 3, 0, 1, 2, 3};
  EXPECT_NEAR(loss_and_grads(net, x, y).loss, std::log(4.0), 1e-15);
}

TEST(Forward, RecordingIsObservationallyPure) {
  const Network net = small_mlp(2);
  const Matrix x = oracle::random_matrix(3, 6, 4);
  const ForwardResult a = forward(net, x, false), b = forward(net, x, true);
  EXPECT_FALSE(a.trace.has_value());
  ASSERT_TRUE(b.trace.has_value());
  EXPECT_EQ(a.logits, b.logits);
  ASSERT_EQ(b.trace->inputs.size(), 3u);
  for (std::size_t l = 0; l < 3; ++l) {
    const Matrix& r = b.trace->inputs[l];
    EXPECT_EQ(r.rows(), net.layers()[l].spec.weight_cols());
    for (std::size_t c = 0; c < r.cols(); ++c) EXPECT_EQ(r(r.rows() - 1, c), 1.0);
  }
}

TEST(Forward, TwoClassZeroWeightsIsSigmoidOfZero) {
  const Network net = zero_net(2, 2);
  const Matrix p = softmax(forward(net, Matrix{{1}, {2}}).logits);
  EXPECT_DOUBLE_EQ(p(1, 0), 0.5);
}

TEST(Forward, RejectsDimensionMismatch) {
  EXPECT_THROW(forward(small_mlp(1), Matrix(4, 2)), ValidationError);
}

TEST(Gradients, BinaryLogisticExample) {
  const GradientSet g = loss_and_grads(zero_net(2, 2), Matrix{{1}, {2}}, std::vector<int>{1});
  // Row of the true class: (sigma(0) - 1) * (x, 1).
  EXPECT_DOUBLE_EQ(g.grads[0](1, 0), -0.5);
  EXPECT_DOUBLE_EQ(g.grads[0](1, 1), -1.0);
  EXPECT_DOUBLE_EQ(g.grads[0](1, 2), -0.5);
  EXPECT_DOUBLE_EQ(g.grads[0](0, 0), 0.5);
}

TEST(Gradients, RejectsOutOfRangeLabels) {
  EXPECT_THROW(loss_and_grads(small_mlp(1), Matrix(3, 1), std::vector<int>{3}), ValidationError);
  EXPECT_THROW(loss_and_grads(small_mlp(1), Matrix(3, 1), std::vector<int>{-1}), ValidationError);
}

TEST(Gradients, DenseMatchesFiniteDifferences) {
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const Network net = with_random_bias(small_mlp(seed), seed + 10);
    const Matrix x = oracle::random_matrix(3, 5, seed + 20);
    EXPECT_LE(fd_error(net, x, {0, 1, 2, 1, 0}), 1e-6);
  }
}

TEST(Gradients, TwoLayerIdentityMatchesFiniteDifferences) {
  const Network net = with_random_bias(
      Network::initialize({LayerSpec::dense(4, 6, Activation::kIdentity),
                           LayerSpec::dense(6, 3, Activation::kIdentity)},
                          3, 5),
      6);
  EXPECT_LE(fd_error(net, oracle::random_matrix(4, 7, 7), {0, 1, 2, 2, 1, 0, 1}), 1e-6);
}

TEST(Gradients, ConvMatchesFiniteDifferences) {
  const Network net = with_random_bias(small_cnn(3), 4);
  EXPECT_LE(fd_error(net, oracle::random_matrix(50, 3, 5), {2, 0, 1}), 1e-6);
}

TEST(Gradients, StridedConvMatchesFiniteDifferences) {
  const Network net = with_random_bias(
      Network::initialize({LayerSpec::conv(1, 2, 2, 2, 4, 4),
                           LayerSpec::dense(8, 2, Activation::kIdentity)},
                          2, 8),
      9);
  EXPECT_LE(fd_error(net, oracle::random_matrix(16, 4, 10), {0, 1, 1, 0}), 1e-6);
}

TEST(Gradients, RowsLieInTheSpanOfRecordedInputs) {
  const Network net = with_random_bias(small_mlp(11), 12);
  const Matrix x = oracle::random_matrix(3, 4, 13);
  const ActivationTrace trace = *forward(net, x, true).trace;
  const GradientSet g = loss_and_grads(net, x, std::vector<int>{0, 2, 1, 1});
  for (std::size_t l = 0; l < net.num_layers(); ++l)
    for (std::size_t i = 0; i < g.grads[l].rows(); ++i) {
      const auto row = g.grads[l].row(i);
      EXPECT_LE(oracle::span_residual(trace.inputs[l], {row.begin(), row.end()}), 1e-8)
          << "layer " << l << " row " << i;
    }
}

TEST(Gradients, ReluMasksNonPositivePreActivations) {
  const Network net = small_mlp(14);
  const Matrix x = oracle::random_matrix(3, 1, 15);
  const ActivationTrace t = *forward(net, x, true).trace;
  const Matrix pre = matmul(net.weights(0), t.inputs[0]);
  const GradientSet g = loss_and_grads(net, x, std::vector<int>{1});
  for (std::size_t i = 0; i < pre.rows(); ++i) {
    double row_norm = 0.0;
    for (double v : g.grads[0].row(i)) row_norm += std::abs(v);
    if (pre(i, 0) <= 0.0) {
      EXPECT_EQ(row_norm, 0.0);
      EXPECT_EQ(t.inputs[1](i, 0), 0.0);
    } else {
      EXPECT_EQ(t.inputs[1](i, 0), pre(i, 0));
    }
  }
}

TEST(Trace, ReplayingLayerInputsReproducesTheNextLayer) {
  const Network net = with_random_bias(small_mlp(16), 17);
  const ActivationTrace t = *forward(net, oracle::random_matrix(3, 9, 18), true).trace;
  for (std::size_t l = 0; l + 1 < net.num_layers(); ++l) {
    const Matrix z = matmul(net.weights(l), t.inputs[l]);
    for (std::size_t i = 0; i < z.rows(); ++i)
      for (std::size_t c = 0; c < z.cols(); ++c)
        EXPECT_EQ(t.inputs[l + 1](i, c), std::max(z(i, c), 0.0));
  }
}

TEST(Patches, OneByOneKernelIsIdentityRearrangement) {
  const LayerSpec s = LayerSpec::conv(3, 1, 1, 1, 2, 2);
  const Matrix maps = oracle::random_matrix(12, 2, 1);
  const Matrix p = extract_patches(maps, s);
  ASSERT_EQ(p.rows(), 3u);
  ASSERT_EQ(p.cols(), 8u);
  for (std::size_t b = 0; b < 2; ++b)
    for (std::size_t pix = 0; pix < 4; ++pix)
      for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(p(c, b * 4 + pix), maps(c * 4 + pix, b));
}

TEST(Patches, TwoByTwoOnThreeByThreeGivesFourColumns) {
  const Matrix p = extract_patches(Matrix(9, 1, 1.0), LayerSpec::conv(1, 1, 2, 1, 3, 3));
  EXPECT_EQ(p.rows(), 4u);
  EXPECT_EQ(p.cols(), 4u);
}

TEST(Patches, KernelLargerThanInputIsRejected) {
  EXPECT_THROW(LayerSpec::conv(1, 1, 4, 1, 3, 3).validate(), ValidationError);
}

TEST(Patches, ConvForwardMatchesNaiveConvolution) {
  for (std::size_t stride : {1u, 2u}) {
    const LayerSpec spec = LayerSpec::conv(2, 3, 3, stride, 7, 6, Activation::kIdentity);
    const Network net =
        with_random_bias(Network::initialize({spec}, spec.output_dim(), 21), 22);
    const LayerSpec& s = net.layers()[0].spec;
    const Matrix maps = oracle::random_matrix(2 * 7 * 6, 3, 23);
    const ActivationTrace t = *forward(net, maps, true).trace;
    Matrix patches = t.inputs[0];
    EXPECT_EQ(patches.rows(), 2u * 3 * 3 + 1);
    const Matrix direct = oracle::naive_conv(maps, net.weights(0), 2, 7, 6, 3, stride);
    const Matrix via = matmul(net.weights(0), patches);  // OC x (B*OH*OW)
    const std::size_t area = s.out_height() * s.out_width();
    for (std::size_t b = 0; b < 3; ++b)
      for (std::size_t o = 0; o < 3; ++o)
        for (std::size_t a = 0; a < area; ++a)
          EXPECT_NEAR(via(o, b * area + a), direct(o * area + a, b), 1e-12);
  }
}

TEST(Patches, FoldIsTheAdjointOfExtract) {
  const LayerSpec s = LayerSpec::conv(2, 1, 3, 2, 7, 7);
  const Matrix x = oracle::random_matrix(98, 2, 30);
  const Matrix y = oracle::random_matrix(18, 2 * 9, 31);
  double lhs = 0.0, rhs = 0.0;
  const Matrix ex = extract_patches(x, s), fy = fold_patches(y, s, 2);
  for (std::size_t i = 0; i < ex.size(); ++i) lhs += ex.data()[i] * y.data()[i];
  for (std::size_t i = 0; i < x.size(); ++i) rhs += x.data()[i] * fy.data()[i];
  EXPECT_NEAR(lhs, rhs, 1e-10 * std::abs(lhs));
}

Dataset separable_set(std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds;
  ds.num_classes = 2;
  ds.features = Matrix(200, 2);
  for (std::size_t i = 0; i < 200; ++i) {
    const int y = i % 2;
    ds.features(i, 0) = rng.uniform(0.3, 2.0) * (y == 1 ? 1 : -1);
    ds.features(i, 1) = rng.uniform(-2.0, 2.0);
    ds.labels.push_back(y);
  }
  return ds;
}

TrainSchedule quick_schedule(std::size_t epochs) {
  TrainSchedule s;
  s.lr = 0.1;
  s.epochs = epochs;
  s.batch_size = 16;
  s.milestones = {};
  s.patience = 0;
  s.seed = 77;
  return s;
}

TEST(Train, ZeroEpochsReturnsTheInput) {
  const Network init = small_mlp(1);
  const Dataset ds = separable_set(1);
  Dataset three = ds;
  three.num_classes = 3;
  EXPECT_EQ(train(init, three, Dataset{}, quick_schedule(0)), init);
}

TEST(Train, SeparableToyReachesNinetyNinePercent) {
  const Dataset ds = separable_set(2);
  ASSERT_TRUE(oracle::perceptron_separable(ds.features, ds.labels, 1000));
  const Network init = Network::initialize(
      {LayerSpec::dense(2, 16), LayerSpec::dense(16, 2, Activation::kIdentity)}, 2, 3);
  const Network net = train(init, ds, Dataset{}, quick_schedule(200));
  EXPECT_GE(accuracy(net, ds), 0.99);
}

TEST(Train, SameSeedBitIdenticalWeights) {
  const Dataset ds = separable_set(4);
  const Network init = Network::initialize(
      {LayerSpec::dense(2, 8), LayerSpec::dense(8, 2, Activation::kIdentity)}, 2, 5);
  TrainSchedule s = quick_schedule(20);
  s.weight_decay = 1e-4;
  s.milestones = {10};
  EXPECT_EQ(train(init, ds, ds, s), train(init, ds, ds, s));
}

TEST(Train, ReturnsTheBestValidationEpoch) {
  const Dataset ds = separable_set(6);
  const Network init = Network::initialize(
      {LayerSpec::dense(2, 8), LayerSpec::dense(8, 2, Activation::kIdentity)}, 2, 7);
  TrainLog log;
  const Network net = train(init, ds, ds, quick_schedule(15), &log);
  ASSERT_EQ(log.val_accuracy.size(), 15u);
  const double best = *std::max_element(log.val_accuracy.begin(), log.val_accuracy.end());
  EXPECT_EQ(log.val_accuracy[log.best_epoch], best);
  for (std::size_t e = log.best_epoch + 1; e < 15; ++e) EXPECT_LT(log.val_accuracy[e], best);
  EXPECT_EQ(accuracy(net, ds), best);
}

TEST(Train, RejectsEmptyTrainingSetAndBadSchedules) {
  const Network init = small_mlp(1);
  Dataset empty;
  empty.num_classes = 3;
  empty.features = Matrix(0, 3);
  EXPECT_THROW(train(init, empty, empty, quick_schedule(1)), ValidationError);
  TrainSchedule bad = quick_schedule(1);
  bad.lr = 0.0;
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(Checkpoint, RoundTripIsBitExact) {
  const Network net = with_random_bias(small_cnn(40), 41);
  const auto path = std::filesystem::temp_directory_path() / "unsc_nn_test" / "net.ckpt.json";
  save_checkpoint(net, path, 40, R"({"role":"test"})");
  EXPECT_EQ(load_checkpoint(path), net);
  EXPECT_EQ(checkpoint_from_json(checkpoint_to_json(net, 40)), net);
  EXPECT_EQ(checkpoint_to_json(net, 40), checkpoint_to_json(load_checkpoint(path), 40));
}

TEST(Checkpoint, RejectsMalformedDocuments) {
  EXPECT_THROW(checkpoint_from_json("{"), ParseError);
  EXPECT_THROW(checkpoint_from_json(R"({"format_version":99})"), ParseError);
}

TEST(Network, RejectsLayersThatDoNotCompose) {
  EXPECT_THROW(Network::initialize({LayerSpec::dense(2, 3), LayerSpec::dense(4, 2)}, 2, 0),
               ValidationError);
  EXPECT_THROW(Network::initialize({LayerSpec::dense(2, 3)}, 4, 0), ValidationError);
}

}  // namespace
}  // namespace unsc
