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

#ifndef PROSODIA_MODEL_FRONTEND_H_
#define PROSODIA_MODEL_FRONTEND_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "prosodia/common/matrix.h"
#include "prosodia/corpus/dataset.h"
#include "prosodia/corpus/prosody.h"
#include "prosodia/corpus/stats.h"
#include "prosodia/model/autodiff.h"
#include "prosodia/model/config.h"
#include "prosodia/model/parameters.h"

namespace prosodia::model {

// One utterance in model units. Per-token rows; non-phone tokens carry zero
// duration and are masked out of the phone-level losses.
struct TrainExample {
  std::vector<int> token_ids;
  std::vector<double> phone_mask;
  std::vector<int> durations;
  corpus::ProsodyVector utterance;  // normalized
  Matrix log_duration;              // L x 1, standardized
  Matrix log_pitch;                 // L x 1, standardized
  Matrix energy;                    // L x 1, standardized
  Matrix mel;                       // T x n_mels, standardized per bin
};

TrainExample MakeTrainExample(const corpus::Utterance& utt,
                              const corpus::CorpusStats& stats);

struct ForwardOutput {
  Matrix mel;          // T x n_mels, standardized
  Matrix dur_pred;     // L x 1, standardized log-frames
  Matrix pitch_pred;   // L x 1, standardized log-Hz
  Matrix energy_pred;  // L x 1, standardized dB
  Matrix utt_pred;     // L x 5, normalized
};

struct LossValues {
  double mel = 0.0;
  double duration = 0.0;
  double pitch = 0.0;
  double energy = 0.0;
  double utterance = 0.0;
  double total = 0.0;
};

struct TrainForward {
  ad::Var total;
  LossValues losses;
  ForwardOutput output;
};

struct InferControls {
  corpus::ProsodyVector bias;  // normalized offsets, unbounded
  Matrix phone_bias;           // L x 5 extra offsets, or empty
};

struct InferResult {
  ForwardOutput output;
  corpus::ProsodyVector u_hat;   // column means of utt_pred
  corpus::ProsodyVector u_used;  // u_hat + bias
  std::vector<int> durations;    // per token, frames
};

class FrontEndModel {
 public:
  // Fresh parameters: uniform +-1/sqrt(fan_in) weights, zero biases, unit
  // layer-norm gains, N(0, 0.01) embedding tables.
  FrontEndModel(const ModelConfig& config, std::uint64_t init_seed);
  // Parameter layout of `config`, values copied from `flat` (registration
  // order). Throws when the count does not match.
  FrontEndModel(const ModelConfig& config, std::span<const float> flat);

  const ModelConfig& config() const { return config_; }
  ModelConfig& mutable_config() { return config_; }
  const ParameterStore& params() const { return params_; }
  ParameterStore& params() { return params_; }

  // Teacher-forced graph. A null dropout_rng runs in eval mode.
  TrainForward ForwardTrain(const TrainExample& ex, Binding& binding,
                            std::mt19937_64* dropout_rng) const;

  InferResult ForwardInfer(std::span<const int> token_ids,
                           std::span<const double> phone_mask,
                           const corpus::MeanStd& log_duration,
                           const InferControls& controls = {}) const;
  InferResult ForwardInfer(const std::vector<corpus::PhoneToken>& tokens,
                           const corpus::MeanStd& log_duration,
                           const InferControls& controls = {}) const;

 private:
  struct Linear {
    int w = -1, b = -1;
  };
  struct Norm {
    int gamma = -1, beta = -1;
  };
  struct EncoderLayer {
    Linear q, k, v, o;
    Norm ln1;
    Linear conv1, conv2;
    Norm ln2;
  };
  struct Predictor {
    Linear conv1;
    Norm ln1;
    Linear conv2;
    Norm ln2;
    Linear out;
  };
  struct DecoderLayer {
    Linear conv;
    Norm ln;
    int dilation = 1;
  };

  void Build(std::mt19937_64* rng);
  Linear AddLinear(const std::string& name, int fan_in, int out,
                   std::mt19937_64* rng);
  Norm AddNorm(const std::string& name, int dim);
  int AddEmbedding(const std::string& name, int rows, int dim,
                   std::mt19937_64* rng);
  Predictor AddPredictor(const std::string& name, int in, int out,
                         std::mt19937_64* rng);

  ad::Var Encode(std::span<const int> ids, Binding& p,
                 std::mt19937_64* rng) const;
  ad::Var RunPredictor(const Predictor& pred, ad::Var x, Binding& p,
                       std::mt19937_64* rng) const;
  struct Heads {
    ad::Var utt, dur, pitch, energy;
  };
  Heads Predict(ad::Var h, const Matrix& cond, Binding& p,
                std::mt19937_64* rng) const;
  ad::Var Adapt(ad::Var h, const Matrix& cond, const Matrix& pitch,
                const Matrix& energy, Binding& p) const;
  ad::Var Decode(ad::Var h, std::span<const int> durations, Binding& p,
                 std::mt19937_64* rng) const;

  ModelConfig config_;
  ParameterStore params_;
  int embedding_ = -1;
  std::vector<EncoderLayer> encoder_;
  Predictor utt_, dur_, pitch_, energy_;
  int pitch_embedding_ = -1, energy_embedding_ = -1;
  Linear tilt_;
  Linear decoder_in_;
  std::vector<DecoderLayer> decoder_;
  Linear mel_out_;
};

// clamp(floor((v - lo) / (hi - lo) * bins), 0, bins - 1).
int QuantizeBucket(double v, const QuantRange& range, int bins);

// Sinusoidal encodings: row t, column 2i = sin(t / 10000^(2i/d)),
// column 2i+1 = cos of the same angle.
Matrix PositionalEncoding(int n, int dim);

// Number of scalars the layout of `config` holds.
std::size_t ParameterCount(const ModelConfig& config);

// 'PFE1', u32 config length, config JSON, u64 scalar count, then every
// parameter as little-endian float32 in registration order.
std::string EncodeCheckpoint(const FrontEndModel& model);
FrontEndModel DecodeCheckpoint(std::string_view bytes);
void SaveCheckpoint(const std::filesystem::path& path,
                    const FrontEndModel& model);
FrontEndModel LoadCheckpoint(const std::filesystem::path& path);

inline constexpr char kCheckpointMagic[] = "PFE1";

}  // namespace prosodia::model

#endif  // PROSODIA_MODEL_FRONTEND_H_
