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
#include <sstream>

#include "gtest/gtest.h"
#include "prosodia/common/binary_io.h"
#include "prosodia/common/error.h"
#include "prosodia/corpus/stats.h"
#include "prosodia/model/frontend.h"
#include "prosodia/training/trainer.h"
#include "test_util.h"

namespace prosodia::training {
namespace {

struct SmallData {
  std::vector<model::TrainExample> examples;
};

const SmallData& Small() {
  static const SmallData data = [] {
    SmallData d;
    std::vector<corpus::Utterance> utts = testing::ToyUtterances(7, 0, 12);
    corpus::CorpusStats stats = corpus::FitCorpusStats(utts);
    for (const auto& u : utts) d.examples.push_back(model::MakeTrainExample(u, stats));
    return d;
  }();
  return data;
}

TrainConfig Quick(long steps) {
  TrainConfig c;
  c.steps = steps;
  c.batch_size = 4;
  c.warmup_steps = 5;
  c.log_every = 5;
  c.checkpoint_every = 0;
  return c;
}

TEST(AdamTest, FirstStepMovesByLearningRate) {
  model::ParameterStore store;
  store.Add("x", Matrix::Constant(1, 1, 0.5));
  TrainConfig c;
  AdamState s = InitAdam(store);
  std::vector<Matrix> g = {Matrix::Constant(1, 1, 1.0)};
  AdamStep(&store, g, &s, c.learning_rate, c);
  // m_hat = 1, v_hat = 1 after bias correction: update = lr / (1 + eps),
  // then rounded to float.
  EXPECT_NEAR(0.5 - store.value(0)(0, 0), 1e-3, 1e-7);
  EXPECT_EQ(s.t, 1);
}

TEST(AdamTest, ConstantGradientKeepsStepNearLearningRate) {
  model::ParameterStore store;
  store.Add("x", Matrix::Constant(1, 1, 0.0));
  TrainConfig c;
  AdamState s = InitAdam(store);
  std::vector<Matrix> g = {Matrix::Constant(1, 1, -3.0)};
  for (int i = 0; i < 10; ++i) AdamStep(&store, g, &s, c.learning_rate, c);
  EXPECT_NEAR(store.value(0)(0, 0), 10 * 1e-3, 1e-6);
}

TEST(AdamTest, RejectsMismatchedGradients) {
  model::ParameterStore store;
  store.Add("x", Matrix::Zero(2, 2));
  TrainConfig c;
  AdamState s = InitAdam(store);
  std::vector<Matrix> g = {Matrix::Zero(2, 3)};
  EXPECT_THROW(AdamStep(&store, g, &s, 1e-3, c), Error);
}

TEST(ScheduleTest, LinearWarmupThenConstant) {
  TrainConfig c;
  EXPECT_DOUBLE_EQ(LearningRate(c, 1), 1e-3 / 200);
  EXPECT_DOUBLE_EQ(LearningRate(c, 100), 0.5e-3);
  EXPECT_DOUBLE_EQ(LearningRate(c, 200), 1e-3);
  EXPECT_DOUBLE_EQ(LearningRate(c, 1999), 1e-3);
  c.warmup_steps = 0;
  EXPECT_DOUBLE_EQ(LearningRate(c, 1), 1e-3);
}

TEST(ConfigTest, ZeroStepsIsAnError) {
  TrainConfig c;
  c.steps = 0;
  EXPECT_THROW(c.Validate(), Error);
  EXPECT_THROW(Train(Small().examples, model::DeskConfig(), c), Error);
  EXPECT_THROW(RunConfig::FromJson("{\"train\": {\"steps\": 0}}"), Error);
}

TEST(ConfigTest, RunConfigDefaultsAndOverrides) {
  RunConfig rc = RunConfig::FromJson(
      "{\"model\": {\"embed_dim\": 32}, \"train\": {\"steps\": 10, \"seed\": 3}}");
  EXPECT_EQ(rc.model.embed_dim, 32);
  EXPECT_EQ(rc.model.encoder_layers, model::DeskConfig().encoder_layers);
  EXPECT_EQ(rc.train.steps, 10);
  EXPECT_EQ(rc.train.seed, 3u);
  EXPECT_EQ(rc.train.batch_size, 8);
  EXPECT_THROW(RunConfig::FromJson("{\"train\": {\"lr\": 1}}"), Error);
  EXPECT_THROW(RunConfig::FromJson("[1,2]"), Error);
}

TEST(TrainTest, NonFiniteLossAborts) {
  std::vector<model::TrainExample> data = Small().examples;
  data[2].mel(0, 0) = std::nan("");
  TrainConfig c = Quick(10);
  c.batch_size = int(data.size());
  try {
    Train(data, testing::MicroConfig(), c);
    FAIL() << "expected an exception";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("non-finite l_mel at step 1"),
              std::string::npos)
        << e.what();
  }
}

TEST(TrainTest, RunsAreByteIdentical) {
  TrainResult a = Train(Small().examples, testing::MicroConfig(), Quick(12));
  TrainResult b = Train(Small().examples, testing::MicroConfig(), Quick(12));
  EXPECT_EQ(model::EncodeCheckpoint(a.model), model::EncodeCheckpoint(b.model));
  TrainConfig other = Quick(12);
  other.seed = 8;
  TrainResult c = Train(Small().examples, testing::MicroConfig(), other);
  EXPECT_NE(model::EncodeCheckpoint(a.model), model::EncodeCheckpoint(c.model));
}

TEST(TrainTest, LogCadenceAndOutputs) {
  testing::TempDir dir("train");
  TrainConfig c = Quick(12);
  c.checkpoint_every = 4;
  std::ostringstream progress;
  TrainResult r = Train(Small().examples, testing::MicroConfig(), c,
                        {dir.path(), &progress});
  std::vector<long> steps;
  for (const auto& row : r.log) {
    steps.push_back(row.step);
    EXPECT_TRUE(std::isfinite(row.losses.total));
    EXPECT_NEAR(row.losses.total,
                row.losses.mel + row.losses.duration + row.losses.pitch +
                    row.losses.energy + row.losses.utterance,
                1e-9);
  }
  EXPECT_EQ(steps, (std::vector<long>{1, 5, 10, 12}));
  EXPECT_EQ(r.model.config().trained_steps, 12);
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "checkpoint_4.pfe1"));
  EXPECT_TRUE(std::filesystem::exists(dir.path() / "checkpoint_8.pfe1"));
  EXPECT_FALSE(std::filesystem::exists(dir.path() / "checkpoint_12.pfe1"));
  EXPECT_EQ(ReadFileBytes(dir.path() / kModelFile), model::EncodeCheckpoint(r.model));
  std::string csv = ReadFileBytes(dir.path() / kTrainLogFile);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "step,total,l_mel,l_dur,l_pitch,l_energy,l_utt,seconds");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_NE(progress.str().find("step 12/12"), std::string::npos);
}

TEST(TrainTest, QuantRangesAreFittedFromData) {
  TrainResult r = Train(Small().examples, testing::MicroConfig(), Quick(1));
  double lo = 1e9, hi = -1e9;
  for (const auto& ex : Small().examples) {
    for (std::size_t i = 0; i < ex.phone_mask.size(); ++i) {
      if (ex.phone_mask[i] == 0.0) continue;
      lo = std::min(lo, ex.log_pitch(Eigen::Index(i), 0));
      hi = std::max(hi, ex.log_pitch(Eigen::Index(i), 0));
    }
  }
  EXPECT_EQ(r.model.config().pitch_range.lo, lo);
  EXPECT_EQ(r.model.config().pitch_range.hi, hi);
}

TEST(TrainTest, LossDecreasesOnSmallCorpus) {
  TrainConfig c = Quick(80);
  c.learning_rate = 3e-3;
  TrainResult r = Train(Small().examples, testing::MicroConfig(), c);
  ASSERT_GE(r.log.size(), 3u);
  EXPECT_LT(r.log.back().losses.total, 0.7 * r.log.front().losses.total);
}

TEST(TrainTest, BatchGradientIsDeterministic) {
  model::FrontEndModel m(testing::MicroConfig(), 2);
  const auto& data = Small().examples;
  model::LossValues la, lb;
  auto a = BatchGradient(m, data, {0, 3, 5}, 5, 3, &la);
  auto b = BatchGradient(m, data, {0, 3, 5}, 5, 3, &lb);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
  EXPECT_EQ(la.total, lb.total);
  auto c = BatchGradient(m, data, {0, 3, 5}, 5, 4, &lb);
  EXPECT_NE(a[0], c[0]);
}

}  // namespace
}  // namespace prosodia::training
