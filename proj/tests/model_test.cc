// Copyright (c) 2026 The Prosodia Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "gtest/gtest.h"
#include "prosodia/common/error.h"
#include "prosodia/corpus/stats.h"
#include "prosodia/corpus/tokens.h"
#include "prosodia/model/autodiff.h"
#include "prosodia/model/config.h"
#include "prosodia/model/frontend.h"
#include "test_util.h"

namespace prosodia::model {
namespace {

using ad::Tape;
using ad::Var;

Matrix Random(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
  return testing::RandomMatrix(r, c, seed);
}

using Builder = std::function<Var(std::vector<Var>&)>;

// Largest |analytic - numeric| over the inputs, relative to the larger of the
// two gradient magnitudes in that input.
double OpGradError(const std::vector<Matrix>& inputs, const Builder& build) {
  Matrix target;
  auto loss_of = [&](const std::vector<Matrix>& in, std::vector<Matrix>* grads) {
    Tape tape;
    std::vector<Var> vars;
    for (const Matrix& m : in) vars.push_back(tape.Leaf(m));
    Var out = build(vars);
    if (target.size() == 0) target = Random(out.rows(), out.cols(), 99);
    std::vector<double> mask(std::size_t(out.rows()), 1.0);
    Var loss = ad::MaskedMse(out, target, mask);
    if (grads) {
      tape.Backward(loss);
      for (Var v : vars) grads->push_back(v.grad());
    }
    return loss.value()(0, 0);
  };
  std::vector<Matrix> analytic;
  loss_of(inputs, &analytic);
  double worst = 0.0;
  std::vector<Matrix> probe = inputs;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    Matrix numeric(inputs[i].rows(), inputs[i].cols());
    for (Eigen::Index j = 0; j < inputs[i].size(); ++j) {
      double x = inputs[i].data()[j];
      probe[i].data()[j] = x + 1e-5;
      double up = loss_of(probe, nullptr);
      probe[i].data()[j] = x - 1e-5;
      double down = loss_of(probe, nullptr);
      probe[i].data()[j] = x;
      numeric.data()[j] = (up - down) / 2e-5;
    }
    double scale = std::max({numeric.cwiseAbs().maxCoeff(),
                             analytic[i].cwiseAbs().maxCoeff(), 1e-6});
    worst = std::max(worst, (numeric - analytic[i]).cwiseAbs().maxCoeff() / scale);
  }
  return worst;
}

TEST(AutodiffTest, ElementwiseAndMatrixOps) {
  Matrix a = Random(3, 4, 1), b = Random(3, 4, 2), c = Random(4, 2, 3);
  Matrix row = Random(1, 4, 4);
  EXPECT_LT(OpGradError({a, c}, [](auto& v) { return ad::MatMul(v[0], v[1]); }), 1e-6);
  EXPECT_LT(OpGradError({a, b}, [](auto& v) { return ad::Add(v[0], v[1]); }), 1e-6);
  EXPECT_LT(OpGradError({a, b}, [](auto& v) { return ad::Sub(v[0], v[1]); }), 1e-6);
  EXPECT_LT(OpGradError({a, b}, [](auto& v) { return ad::Mul(v[0], v[1]); }), 1e-6);
  EXPECT_LT(OpGradError({a}, [](auto& v) { return ad::Scale(v[0], -2.5); }), 1e-6);
  EXPECT_LT(OpGradError({a, row}, [](auto& v) { return ad::AddRow(v[0], v[1]); }), 1e-6);
  EXPECT_LT(OpGradError({a}, [](auto& v) { return ad::Relu(v[0]); }), 1e-6);
  EXPECT_LT(OpGradError({a}, [](auto& v) { return ad::Transpose(v[0]); }), 1e-6);
}

TEST(AutodiffTest, NormalizationAndSoftmax) {
  Matrix x = Random(5, 6, 5), g = Random(1, 6, 6), b = Random(1, 6, 7);
  EXPECT_LT(OpGradError({x, g, b},
                        [](auto& v) { return ad::LayerNorm(v[0], v[1], v[2], 1e-6); }),
            1e-5);
  EXPECT_LT(OpGradError({x}, [](auto& v) { return ad::SoftmaxRows(v[0]); }), 1e-6);
}

TEST(AutodiffTest, IndexingOps) {
  Matrix table = Random(6, 3, 8), x = Random(4, 5, 9);
  std::vector<int> ids = {2, 0, 2, 5};
  std::vector<int> counts = {1, 0, 3, 2};
  EXPECT_LT(OpGradError({table}, [&](auto& v) { return ad::GatherRows(v[0], ids); }), 1e-6);
  EXPECT_LT(OpGradError({x}, [&](auto& v) { return ad::RepeatRows(v[0], counts); }), 1e-6);
  EXPECT_LT(OpGradError({x, table.topRows(4)},
                        [](auto& v) {
                          std::vector<Var> parts = {v[0], v[1]};
                          return ad::ConcatCols(parts);
                        }),
            1e-6);
  EXPECT_LT(OpGradError({x}, [](auto& v) { return ad::SliceCols(v[0], 1, 3); }), 1e-6);
}

TEST(AutodiffTest, DilatedConvolutionColumns) {
  Matrix x = Random(9, 3, 10), w = Random(9, 2, 11);
  for (int dilation : {1, 2, 4}) {
    EXPECT_LT(OpGradError({x, w},
                          [&](auto& v) {
                            return ad::MatMul(ad::Im2Col(v[0], 3, dilation), v[1]);
                          }),
              1e-6);
  }
}

TEST(AutodiffTest, DropoutAndScalarSum) {
  Matrix x = Random(4, 4, 12), y = Random(4, 4, 13);
  EXPECT_LT(OpGradError({x},
                        [](auto& v) {
                          std::mt19937_64 rng(5);
                          return ad::Dropout(v[0], 0.3, rng);
                        }),
            1e-6);
  EXPECT_LT(OpGradError({x, y},
                        [](auto& v) {
                          std::vector<double> mask = {1, 0, 1, 1};
                          Matrix t = Matrix::Zero(4, 4);
                          std::vector<Var> parts = {ad::MaskedMse(v[0], t, mask),
                                                    ad::MaskedMse(v[1], t, mask)};
                          return ad::SumScalars(parts);
                        }),
            1e-6);
}

TEST(AutodiffTest, ReusedNodeAccumulatesGradient) {
  Tape tape;
  Var x = tape.Leaf(Matrix::Constant(1, 1, 3.0));
  Var y = ad::Mul(x, x);
  std::vector<double> mask = {1.0};
  Var loss = ad::MaskedMse(y, Matrix::Zero(1, 1), mask);
  tape.Backward(loss);
  // loss = x^4, d/dx = 4 x^3.
  EXPECT_DOUBLE_EQ(x.grad()(0, 0), 108.0);
}

TEST(AutodiffTest, ShapeMismatchThrows) {
  Tape tape;
  Var a = tape.Leaf(Matrix::Zero(2, 3)), b = tape.Leaf(Matrix::Zero(2, 2));
  EXPECT_THROW(ad::MatMul(a, b), Error);
  EXPECT_THROW(ad::Add(a, b), Error);
  EXPECT_THROW(ad::Im2Col(a, 2, 1), Error);
}

// Impulse response of a chain of k=3 convolutions with dilations 1..32.
TEST(ModelTest, DecoderReceptiveFieldIs127Frames) {
  const std::vector<int> dilations = {1, 2, 4, 8, 16, 32};
  int expected = 1;
  for (int d : dilations) expected += 2 * d;
  ASSERT_EQ(expected, 127);
  Tape tape(false);
  Matrix impulse = Matrix::Zero(301, 1);
  impulse(150, 0) = 1.0;
  Var x = tape.Constant(impulse);
  Var w = tape.Constant(Matrix::Ones(3, 1));
  for (int d : dilations) x = ad::MatMul(ad::Im2Col(x, 3, d), w);
  int nonzero = 0;
  for (Eigen::Index t = 0; t < x.rows(); ++t) nonzero += x.value()(t, 0) != 0.0;
  EXPECT_EQ(nonzero, expected);
}

TEST(ModelTest, QuantizeBuckets) {
  QuantRange r{-2.0, 3.0};
  EXPECT_EQ(QuantizeBucket(0.5, r, 256), 128);
  EXPECT_EQ(QuantizeBucket(-2.0, r, 256), 0);
  EXPECT_EQ(QuantizeBucket(-9.0, r, 256), 0);
  EXPECT_EQ(QuantizeBucket(3.0, r, 256), 255);
  EXPECT_EQ(QuantizeBucket(99.0, r, 256), 255);
  EXPECT_EQ(QuantizeBucket(std::nan(""), r, 256), 0);
  int prev = 0;
  for (double v = -2.0; v < 3.0; v += 0.001) {
    int b = QuantizeBucket(v, r, 256);
    ASSERT_GE(b, prev);
    prev = b;
  }
}

TEST(ModelTest, PositionalEncodingValues) {
  Matrix pe = PositionalEncoding(4, 6);
  EXPECT_DOUBLE_EQ(pe(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(pe(0, 1), 1.0);
  EXPECT_NEAR(pe(3, 0), std::sin(3.0), 1e-12);
  EXPECT_NEAR(pe(3, 3), std::cos(3.0 / std::pow(10000.0, 2.0 / 6.0)), 1e-12);
}

// Counted by hand from the layer list, independently of the model code.
std::size_t ExpectedParameters(const ModelConfig& c) {
  auto linear = [](std::size_t in, std::size_t out) { return in * out + out; };
  const std::size_t d = c.embed_dim, p = c.predictor_filters, f = c.decoder_filters;
  std::size_t n = std::size_t(c.vocab_size) * d;
  std::size_t layer = 4 * linear(d, d) + 2 * d +
                      linear(c.encoder_conv_kernel * d, c.encoder_conv_filters) +
                      linear(c.encoder_conv_kernel * c.encoder_conv_filters, d) + 2 * d;
  n += c.encoder_layers * layer;
  auto predictor = [&](std::size_t in, std::size_t out) {
    return linear(c.predictor_kernel * in, p) + 2 * p +
           linear(c.predictor_kernel * p, p) + 2 * p + linear(p, out);
  };
  n += predictor(d, 5) + predictor(d + 1, 1) + predictor(d + 2, 1) + predictor(d + 1, 1);
  n += std::size_t(c.pitch_bins) * d + std::size_t(c.energy_bins) * d;
  n += linear(d + 1, d);
  n += linear(d, f);
  n += c.decoder_blocks * c.decoder_dilations.size() *
       (linear(c.decoder_kernel * f, f) + 2 * f);
  n += linear(f, c.n_mels);
  return n;
}

TEST(ModelTest, DeskParameterCountIsRecorded) {
  EXPECT_EQ(ParameterCount(DeskConfig()), 554136u);
  EXPECT_EQ(ExpectedParameters(DeskConfig()), 554136u);
  EXPECT_EQ(FrontEndModel(DeskConfig(), 1).params().ScalarCount(), 554136u);
}

TEST(ModelTest, ParameterCountFollowsConfig) {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    ModelConfig c = DeskConfig();
    c.attn_heads = 1 + int(rng() % 2);
    c.embed_dim = 4 * c.attn_heads * (1 + int(rng() % 4));
    c.encoder_layers = 1 + int(rng() % 3);
    c.encoder_conv_filters = 4 + int(rng() % 20);
    c.decoder_blocks = 1 + int(rng() % 2);
    c.decoder_filters = 4 + int(rng() % 20);
    c.predictor_filters = 4 + int(rng() % 20);
    c.pitch_bins = 8 + int(rng() % 40);
    EXPECT_EQ(ParameterCount(c), ExpectedParameters(c));
    EXPECT_EQ(FrontEndModel(c, trial).params().ScalarCount(), ExpectedParameters(c));
  }
}

TEST(ModelTest, ConfigJsonRoundTripAndValidation) {
  ModelConfig c = DeskConfig();
  c.pitch_range = {-1.5, 2.5};
  c.trained_steps = 42;
  EXPECT_EQ(ModelConfig::FromJson(c.ToJson()), c);
  EXPECT_EQ(ModelConfig::FromJson("{\"embed_dim\": 32}").embed_dim, 32);
  ModelConfig bad = DeskConfig();
  bad.attn_heads = 3;
  EXPECT_THROW(bad.Validate(), Error);
  bad = DeskConfig();
  bad.encoder_conv_kernel = 4;
  EXPECT_THROW(bad.Validate(), Error);
  EXPECT_THROW(ModelConfig::FromJson("{\"embed_dim\": \"wide\"}"), Error);
  EXPECT_NO_THROW(PaperScaleConfig().Validate());
}

using testing::RandomExample;

double EvalLoss(const FrontEndModel& m, const TrainExample& ex) {
  Tape tape;
  Binding b(m.params(), tape);
  return m.ForwardTrain(ex, b, nullptr).losses.total;
}

TEST(ModelTest, GradientCheckMicroConfig) {
  FrontEndModel m(testing::MicroConfig(), 3);
  double worst = 0.0;
  for (const testing::BlockError& b : testing::GradientCheck(m, testing::GradCheckExample(), 1e-4)) {
    EXPECT_LE(b.error, 1e-3) << b.name;
    worst = std::max(worst, b.error);
  }
  EXPECT_LE(worst, 1e-3);
}

TEST(ModelTest, TeacherForcedFramesEqualDurationSum) {
  FrontEndModel m(testing::MicroConfig(), 4);
  std::mt19937_64 rng(30);
  for (int trial = 0; trial < 1000; ++trial) {
    TrainExample ex = RandomExample(m.config(), 1 + int(rng() % 8), 1000 + trial);
    int sum = std::accumulate(ex.durations.begin(), ex.durations.end(), 0);
    Tape tape(false);
    Binding b(m.params(), tape);
    TrainForward f = m.ForwardTrain(ex, b, nullptr);
    ASSERT_EQ(f.output.mel.rows(), sum);
    ASSERT_TRUE(std::isfinite(f.losses.total));
  }
}

TEST(ModelTest, RepeatRowsLengthIsCountSum) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    int n = 1 + int(rng() % 20);
    std::vector<int> counts(static_cast<std::size_t>(n));
    for (int& c : counts) c = int(rng() % 15);
    Tape tape(false);
    Var out = ad::RepeatRows(tape.Constant(Random(n, 3, trial)), counts);
    ASSERT_EQ(out.rows(), std::accumulate(counts.begin(), counts.end(), 0));
  }
}

TEST(ModelTest, MismatchedTargetsAreRejected) {
  FrontEndModel m(testing::MicroConfig(), 4);
  TrainExample ex = RandomExample(m.config(), 4, 5);
  ex.mel = Random(ex.mel.rows() + 1, 80, 6);
  Tape tape;
  Binding b(m.params(), tape);
  EXPECT_THROW(m.ForwardTrain(ex, b, nullptr), Error);
}

TEST(ModelTest, ShapesHoldAcrossRandomConfigs) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 10; ++trial) {
    ModelConfig c = testing::MicroConfig();
    c.attn_heads = 1 + int(rng() % 2);
    c.embed_dim = 4 * c.attn_heads;
    c.encoder_layers = 1 + int(rng() % 2);
    c.decoder_blocks = 1 + int(rng() % 2);
    c.n_mels = 16 + int(rng() % 8);
    FrontEndModel m(c, trial);
    int n = 2 + int(rng() % 6);
    TrainExample ex = RandomExample(c, n, 50 + trial);
    Tape tape;
    Binding b(m.params(), tape);
    std::mt19937_64 drop(1);
    TrainForward f = m.ForwardTrain(ex, b, &drop);
    EXPECT_EQ(f.output.mel.cols(), c.n_mels);
    EXPECT_EQ(f.output.dur_pred.rows(), n);
    EXPECT_EQ(f.output.utt_pred.rows(), n);
    EXPECT_EQ(f.output.utt_pred.cols(), 5);
    std::vector<double> mask = ex.phone_mask;
    InferResult r = m.ForwardInfer(ex.token_ids, mask, corpus::MeanStd{1.5, 0.5});
    EXPECT_EQ(r.output.mel.rows(),
              std::accumulate(r.durations.begin(), r.durations.end(), 0));
    for (std::size_t i = 0; i < mask.size(); ++i) {
      EXPECT_EQ(r.durations[i] >= 1, mask[i] != 0.0);
    }
  }
}

TEST(ModelTest, InferenceIsDeterministicAndZeroBiasIsIdentity) {
  FrontEndModel m(DeskConfig(), 9);
  auto tokens = corpus::ParsePhoneString("hh ah # l ow m ih ng .");
  corpus::MeanStd dur{2.0, 0.3};
  InferResult a = m.ForwardInfer(tokens, dur);
  InferResult b = m.ForwardInfer(tokens, dur);
  InferControls zero;
  zero.phone_bias = Matrix::Zero(Eigen::Index(tokens.size()), 5);
  InferResult c = m.ForwardInfer(tokens, dur, zero);
  EXPECT_EQ(a.output.mel, b.output.mel);
  EXPECT_EQ(a.output.mel, c.output.mel);
  EXPECT_EQ(a.durations, c.durations);
  EXPECT_EQ(a.u_used, a.u_hat);
}

TEST(ModelTest, BiasShiftsUsedConditioning) {
  FrontEndModel m(DeskConfig(), 9);
  auto tokens = corpus::ParsePhoneString("hh ah # l ow .");
  InferControls controls;
  controls.bias[corpus::Feature::kDuration] = 0.7;
  InferResult r = m.ForwardInfer(tokens, corpus::MeanStd{2.0, 0.3}, controls);
  EXPECT_NEAR(r.u_used[corpus::Feature::kDuration],
              r.u_hat[corpus::Feature::kDuration] + 0.7, 1e-12);
  EXPECT_EQ(r.u_used[corpus::Feature::kPitch], r.u_hat[corpus::Feature::kPitch]);
}

TEST(ModelTest, CheckpointRoundTripPreservesOutputs) {
  FrontEndModel m(DeskConfig(), 11);
  m.mutable_config().trained_steps = 5;
  auto tokens = corpus::ParsePhoneString("s ih # t ow .");
  corpus::MeanStd dur{2.0, 0.3};
  std::string bytes = EncodeCheckpoint(m);
  FrontEndModel back = DecodeCheckpoint(bytes);
  EXPECT_EQ(back.config(), m.config());
  EXPECT_EQ(EncodeCheckpoint(back), bytes);
  EXPECT_EQ(back.ForwardInfer(tokens, dur).output.mel,
            m.ForwardInfer(tokens, dur).output.mel);

  testing::TempDir dir("ckpt");
  SaveCheckpoint(dir.path() / "m.pfe1", m);
  EXPECT_EQ(EncodeCheckpoint(LoadCheckpoint(dir.path() / "m.pfe1")), bytes);

  EXPECT_THROW(DecodeCheckpoint(bytes.substr(0, bytes.size() - 3)), Error);
  std::string wrong = bytes;
  wrong[0] = 'X';
  EXPECT_THROW(DecodeCheckpoint(wrong), Error);
}

TEST(ModelTest, FreshModelLossIsFiniteOnToyUtterances) {
  std::vector<corpus::Utterance> utts = testing::ToyUtterances(7, 0, 12);
  corpus::CorpusStats stats = corpus::FitCorpusStats(utts);
  FrontEndModel m(DeskConfig(), 12);
  for (const auto& u : utts) {
    TrainExample ex = MakeTrainExample(u, stats);
    EXPECT_TRUE(std::isfinite(EvalLoss(m, ex))) << u.id;
    EXPECT_EQ(ex.mel.rows(), u.n_frames());
  }
}

}  // namespace
}  // namespace prosodia::model
