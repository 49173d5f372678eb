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

#include "prosodia/training/trainer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <string>

#include "json.hpp"
#include "prosodia/common/binary_io.h"
#include "prosodia/common/error.h"
#include "prosodia/common/parallel.h"

namespace prosodia::training {

using nlohmann::json;

namespace {

std::uint64_t Mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void CheckFinite(const model::LossValues& l, long step) {
  const std::pair<const char*, double> terms[] = {
      {"l_mel", l.mel},       {"l_dur", l.duration}, {"l_pitch", l.pitch},
      {"l_energy", l.energy}, {"l_utt", l.utterance}, {"total", l.total}};
  for (const auto& [name, v] : terms) {
    if (!std::isfinite(v)) {
      throw Error(std::string("non-finite ") + name + " at step " +
                  std::to_string(step));
    }
  }
}

model::QuantRange FitRange(const std::vector<model::TrainExample>& data,
                           Matrix model::TrainExample::*field) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (const auto& ex : data) {
    for (std::size_t i = 0; i < ex.phone_mask.size(); ++i) {
      if (ex.phone_mask[i] == 0.0) continue;
      double v = (ex.*field)(Eigen::Index(i), 0);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (!(hi > lo)) throw Error("training data has a constant phone target");
  return {lo, hi};
}

}  // namespace

void TrainConfig::Validate() const {
  if (steps < 1) throw Error("train config: steps must be >= 1");
  if (batch_size < 1) throw Error("train config: batch_size must be >= 1");
  if (!(learning_rate > 0.0)) {
    throw Error("train config: learning_rate must be positive");
  }
  if (warmup_steps < 0) throw Error("train config: warmup_steps must be >= 0");
  if (checkpoint_every < 0 || log_every < 1) {
    throw Error("train config: bad checkpoint/log cadence");
  }
  if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
    throw Error("train config: Adam betas must be in [0, 1)");
  }
}

RunConfig RunConfig::FromJson(std::string_view text) {
  RunConfig rc;
  try {
    json j = json::parse(text);
    auto require_keys = [](const json& obj, const std::set<std::string>& keys,
                           const std::string& where) {
      if (!obj.is_object()) throw Error("run config: " + where + " must be an object");
      for (const auto& item : obj.items()) {
        if (!keys.contains(item.key())) {
          throw Error("run config: unknown key '" + item.key() + "' in " + where);
        }
      }
    };
    require_keys(j, {"model", "train"}, "top level");
    if (j.contains("train")) {
      require_keys(j["train"],
                   {"steps", "batch_size", "learning_rate", "warmup_steps", "seed",
                    "checkpoint_every", "log_every", "beta1", "beta2", "epsilon"},
                   "train");
    }
    if (j.contains("model")) rc.model = model::ModelConfig::FromJson(j["model"].dump());
    if (j.contains("train")) {
      const json& t = j["train"];
      auto get = [&](const char* key, auto* out) {
        if (t.contains(key)) t.at(key).get_to(*out);
      };
      get("steps", &rc.train.steps);
      get("batch_size", &rc.train.batch_size);
      get("learning_rate", &rc.train.learning_rate);
      get("warmup_steps", &rc.train.warmup_steps);
      get("seed", &rc.train.seed);
      get("checkpoint_every", &rc.train.checkpoint_every);
      get("log_every", &rc.train.log_every);
      get("beta1", &rc.train.beta1);
      get("beta2", &rc.train.beta2);
      get("epsilon", &rc.train.epsilon);
    }
  } catch (const json::exception& e) {
    throw Error(std::string("run config: ") + e.what());
  }
  rc.train.Validate();
  return rc;
}

RunConfig RunConfig::Load(const std::filesystem::path& path) {
  return FromJson(ReadFileBytes(path));
}

double LearningRate(const TrainConfig& config, long step) {
  if (config.warmup_steps <= 0) return config.learning_rate;
  return config.learning_rate *
         std::min(double(step) / double(config.warmup_steps), 1.0);
}

AdamState InitAdam(const model::ParameterStore& params) {
  return {params.ZerosLike(), params.ZerosLike(), 0};
}

void AdamStep(model::ParameterStore* params, const std::vector<Matrix>& grads,
              AdamState* state, double lr_t, const TrainConfig& config) {
  if (int(grads.size()) != params->size() ||
      int(state->m.size()) != params->size()) {
    throw Error("Adam: gradient layout does not match the parameters");
  }
  ++state->t;
  const double b1 = config.beta1, b2 = config.beta2;
  const double c1 = 1.0 - std::pow(b1, double(state->t));
  const double c2 = 1.0 - std::pow(b2, double(state->t));
  for (int i = 0; i < params->size(); ++i) {
    const Matrix& g = grads[std::size_t(i)];
    Matrix& m = state->m[std::size_t(i)];
    Matrix& v = state->v[std::size_t(i)];
    if (g.rows() != m.rows() || g.cols() != m.cols()) {
      throw Error("Adam: gradient shape mismatch for " + params->name(i));
    }
    m = b1 * m + (1.0 - b1) * g;
    v = b2 * v + (1.0 - b2) * g.cwiseProduct(g);
    params->value(i).array() -=
        lr_t * (m.array() / c1) / ((v.array() / c2).sqrt() + config.epsilon);
  }
  params->RoundToFloat();
}

std::string FormatTrainLog(const std::vector<TrainLogRow>& rows) {
  std::string out = "step,total,l_mel,l_dur,l_pitch,l_energy,l_utt,seconds\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%ld,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.3f\n",
                  r.step, r.losses.total, r.losses.mel, r.losses.duration,
                  r.losses.pitch, r.losses.energy, r.losses.utterance,
                  r.seconds);
    out += buf;
  }
  return out;
}

std::vector<Matrix> BatchGradient(const model::FrontEndModel& model,
                                  const std::vector<model::TrainExample>& data,
                                  const std::vector<std::size_t>& batch,
                                  std::uint64_t seed, long step,
                                  model::LossValues* mean_losses) {
  const std::size_t b = batch.size();
  std::vector<std::vector<Matrix>> grads(b);
  std::vector<model::LossValues> losses(b);
  ParallelFor(b, [&](std::size_t k) {
    std::mt19937_64 rng(Mix(seed ^ Mix(std::uint64_t(step) * 1315423911ULL + k)));
    ad::Tape tape;
    model::Binding binding(model.params(), tape);
    model::TrainForward f = model.ForwardTrain(data[batch[k]], binding, &rng);
    tape.Backward(f.total);
    grads[k] = model.params().ZerosLike();
    binding.AccumulateGrads(&grads[k]);
    losses[k] = f.losses;
  });
  std::vector<Matrix> sum = std::move(grads[0]);
  model::LossValues mean = losses[0];
  for (std::size_t k = 1; k < b; ++k) {
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += grads[k][i];
    mean.mel += losses[k].mel;
    mean.duration += losses[k].duration;
    mean.pitch += losses[k].pitch;
    mean.energy += losses[k].energy;
    mean.utterance += losses[k].utterance;
    mean.total += losses[k].total;
  }
  const double inv = 1.0 / double(b);
  for (Matrix& g : sum) g *= inv;
  if (mean_losses) {
    *mean_losses = {mean.mel * inv,    mean.duration * inv,
                    mean.pitch * inv,  mean.energy * inv,
                    mean.utterance * inv, mean.total * inv};
  }
  return sum;
}

TrainResult Train(const std::vector<model::TrainExample>& data,
                  model::ModelConfig model_config, const TrainConfig& config,
                  const TrainOptions& options) {
  config.Validate();
  if (data.empty()) throw Error("training corpus is empty");
  model_config.pitch_range = FitRange(data, &model::TrainExample::log_pitch);
  model_config.energy_range = FitRange(data, &model::TrainExample::energy);
  model_config.trained_steps = 0;
  TrainResult result{model::FrontEndModel(model_config, Mix(config.seed)), {}};
  model::FrontEndModel& net = result.model;
  AdamState adam = InitAdam(net.params());
  if (!options.out_dir.empty()) std::filesystem::create_directories(options.out_dir);

  std::mt19937_64 shuffle_rng(Mix(config.seed + 1));
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::size_t cursor = order.size();
  const auto start = std::chrono::steady_clock::now();

  for (long step = 1; step <= config.steps; ++step) {
    std::vector<std::size_t> batch;
    while (int(batch.size()) < config.batch_size) {
      if (cursor == order.size()) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        cursor = 0;
      }
      batch.push_back(order[cursor++]);
    }
    model::LossValues losses;
    std::vector<Matrix> grads =
        BatchGradient(net, data, batch, config.seed, step, &losses);
    CheckFinite(losses, step);
    AdamStep(&net.params(), grads, &adam, LearningRate(config, step), config);
    net.mutable_config().trained_steps = step;

    if (step % config.log_every == 0 || step == 1 || step == config.steps) {
      double secs = std::chrono::duration<double>(
                        std::chrono::steady_clock::now() - start).count();
      result.log.push_back({step, losses, secs});
      if (options.progress) {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "step %ld/%ld  loss %.4f  (mel %.4f dur %.4f pitch %.4f "
                      "energy %.4f utt %.4f)  %.1fs\n",
                      step, config.steps, losses.total, losses.mel,
                      losses.duration, losses.pitch, losses.energy,
                      losses.utterance, secs);
        *options.progress << buf << std::flush;
      }
    }
    if (!options.out_dir.empty() && config.checkpoint_every > 0 &&
        step % config.checkpoint_every == 0 && step != config.steps) {
      model::SaveCheckpoint(
          options.out_dir / ("checkpoint_" + std::to_string(step) + ".pfe1"),
          net);
    }
  }
  if (!options.out_dir.empty()) {
    model::SaveCheckpoint(options.out_dir / kModelFile, net);
    WriteFileBytes(options.out_dir / kTrainLogFile, FormatTrainLog(result.log));
  }
  return result;
}

}  // namespace prosodia::training
