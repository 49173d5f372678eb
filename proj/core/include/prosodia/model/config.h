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

#ifndef PROSODIA_MODEL_CONFIG_H_
#define PROSODIA_MODEL_CONFIG_H_

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace prosodia::model {

struct QuantRange {
  double lo = -3.0;
  double hi = 3.0;
  bool operator==(const QuantRange&) const = default;
};

struct LossWeights {
  double mel = 1.0;
  double duration = 1.0;
  double pitch = 1.0;
  double energy = 1.0;
  double utterance = 1.0;
  bool operator==(const LossWeights&) const = default;
};

struct ModelConfig {
  int vocab_size = 42;
  int embed_dim = 64;
  int encoder_layers = 2;
  int attn_heads = 2;
  int encoder_conv_kernel = 9;
  int encoder_conv_filters = 128;
  int decoder_blocks = 1;
  std::vector<int> decoder_dilations = {1, 2, 4, 8, 16, 32};
  int decoder_kernel = 3;
  int decoder_filters = 64;
  int predictor_kernel = 3;
  int predictor_filters = 64;
  double dropout = 0.2;
  double layernorm_eps = 1e-6;
  int n_mels = 80;
  int pitch_bins = 256;
  int energy_bins = 256;
  // Standardized-domain quantization ranges, fitted on the training corpus.
  QuantRange pitch_range;
  QuantRange energy_range;
  LossWeights loss_weights;
  long trained_steps = 0;

  // Throws prosodia::Error naming the first violated constraint.
  void Validate() const;

  std::string ToJson() const;
  static ModelConfig FromJson(std::string_view json);
  bool operator==(const ModelConfig&) const = default;
};

// Laptop-sized defaults.
ModelConfig DeskConfig();
// The full-size network: d = 256, 4 encoder layers, 1024 conv filters,
// 2 decoder blocks, 256 decoder and predictor filters.
ModelConfig PaperScaleConfig();

}  // namespace prosodia::model

#endif  // PROSODIA_MODEL_CONFIG_H_
