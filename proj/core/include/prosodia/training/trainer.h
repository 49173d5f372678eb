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

#ifndef PROSODIA_TRAINING_TRAINER_H_
#define PROSODIA_TRAINING_TRAINER_H_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "prosodia/corpus/stats.h"
#include "prosodia/model/frontend.h"

namespace prosodia::training {

struct TrainConfig {
  long steps = 2000;
  int batch_size = 8;
  double learning_rate = 1e-3;
  long warmup_steps = 200;
  std::uint64_t seed = 7;
  long checkpoint_every = 500;  // 0 disables intermediate checkpoints
  long log_every = 50;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double epsilon = 1e-9;

  void Validate() const;
};

// {"model": {...}, "train": {...}}; either part may be absent.
struct RunConfig {
  model::ModelConfig model = model::DeskConfig();
  TrainConfig train;

  static RunConfig FromJson(std::string_view json);
  static RunConfig Load(const std::filesystem::path& path);
};

// lr * min(step / warmup, 1), steps counted from 1.
double LearningRate(const TrainConfig& config, long step);

struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  long t = 0;
};

AdamState InitAdam(const model::ParameterStore& params);

// One bias-corrected Adam update with step size lr_t; parameters are then
// rounded to float precision.
void AdamStep(model::ParameterStore* params, const std::vector<Matrix>& grads,
              AdamState* state, double lr_t, const TrainConfig& config);

struct TrainLogRow {
  long step = 0;
  model::LossValues losses;
  double seconds = 0.0;
};

// step,total,l_mel,l_dur,l_pitch,l_energy,l_utt,seconds
std::string FormatTrainLog(const std::vector<TrainLogRow>& rows);

struct TrainResult {
  model::FrontEndModel model;
  std::vector<TrainLogRow> log;
};

struct TrainOptions {
  std::filesystem::path out_dir;  // empty: write nothing
  std::ostream* progress = nullptr;
};

// Fits the quantization ranges on `data`, initializes from the seed, and runs
// the loop. Throws naming the term and step if any loss goes non-finite.
TrainResult Train(const std::vector<model::TrainExample>& data,
                  model::ModelConfig model_config, const TrainConfig& config,
                  const TrainOptions& options = {});

// Mean gradient of the batch loss over `batch`, reduced in index order.
std::vector<Matrix> BatchGradient(const model::FrontEndModel& model,
                                  const std::vector<model::TrainExample>& data,
                                  const std::vector<std::size_t>& batch,
                                  std::uint64_t seed, long step,
                                  model::LossValues* mean_losses);

inline constexpr char kModelFile[] = "model.pfe1";
inline constexpr char kTrainLogFile[] = "train_log.csv";

}  // namespace prosodia::training

#endif  // PROSODIA_TRAINING_TRAINER_H_
