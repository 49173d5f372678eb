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

#include "prosodia/model/config.h"

#include <set>
#include <string>

#include "json.hpp"
#include "prosodia/common/error.h"

namespace prosodia::model {

using nlohmann::json;

namespace {

void Require(bool ok, const std::string& what) {
  if (!ok) throw Error("model config: " + what);
}

}  // namespace

void ModelConfig::Validate() const {
  Require(vocab_size >= 1, "vocab_size must be >= 1");
  Require(embed_dim >= 1, "embed_dim must be >= 1");
  Require(encoder_layers >= 1, "encoder_layers must be >= 1");
  Require(attn_heads >= 1, "attn_heads must be >= 1");
  Require(embed_dim % attn_heads == 0,
          "embed_dim must be divisible by attn_heads");
  Require(encoder_conv_kernel >= 1 && encoder_conv_kernel % 2 == 1,
          "encoder_conv_kernel must be odd");
  Require(encoder_conv_filters >= 1, "encoder_conv_filters must be >= 1");
  Require(decoder_blocks >= 1, "decoder_blocks must be >= 1");
  Require(!decoder_dilations.empty(), "decoder_dilations must be non-empty");
  for (int d : decoder_dilations) Require(d >= 1, "dilations must be >= 1");
  Require(decoder_kernel >= 1 && decoder_kernel % 2 == 1,
          "decoder_kernel must be odd");
  Require(decoder_filters >= 1, "decoder_filters must be >= 1");
  Require(predictor_kernel >= 1 && predictor_kernel % 2 == 1,
          "predictor_kernel must be odd");
  Require(predictor_filters >= 1, "predictor_filters must be >= 1");
  Require(dropout >= 0.0 && dropout < 1.0, "dropout must be in [0, 1)");
  Require(layernorm_eps > 0.0, "layernorm_eps must be positive");
  Require(n_mels >= 1, "n_mels must be >= 1");
  Require(pitch_bins >= 2 && energy_bins >= 2, "bins must be >= 2");
  Require(pitch_range.lo < pitch_range.hi, "pitch_range needs lo < hi");
  Require(energy_range.lo < energy_range.hi, "energy_range needs lo < hi");
  Require(trained_steps >= 0, "trained_steps must be >= 0");
}

std::string ModelConfig::ToJson() const {
  json j = {
      {"vocab_size", vocab_size},
      {"embed_dim", embed_dim},
      {"encoder_layers", encoder_layers},
      {"attn_heads", attn_heads},
      {"encoder_conv_kernel", encoder_conv_kernel},
      {"encoder_conv_filters", encoder_conv_filters},
      {"decoder_blocks", decoder_blocks},
      {"decoder_dilations", decoder_dilations},
      {"decoder_kernel", decoder_kernel},
      {"decoder_filters", decoder_filters},
      {"predictor_kernel", predictor_kernel},
      {"predictor_filters", predictor_filters},
      {"dropout", dropout},
      {"layernorm_eps", layernorm_eps},
      {"n_mels", n_mels},
      {"pitch_bins", pitch_bins},
      {"energy_bins", energy_bins},
      {"pitch_quant_range", {pitch_range.lo, pitch_range.hi}},
      {"energy_quant_range", {energy_range.lo, energy_range.hi}},
      {"loss_weights",
       {{"mel", loss_weights.mel},
        {"duration", loss_weights.duration},
        {"pitch", loss_weights.pitch},
        {"energy", loss_weights.energy},
        {"utterance", loss_weights.utterance}}},
      {"trained_steps", trained_steps},
  };
  return j.dump();
}

ModelConfig ModelConfig::FromJson(std::string_view text) {
  ModelConfig c;
  try {
    json j = json::parse(text);
    if (!j.is_object()) throw Error("model config: expected a JSON object");
    static const std::set<std::string> kKeys = {
        "vocab_size", "embed_dim", "encoder_layers", "attn_heads",
        "encoder_conv_kernel", "encoder_conv_filters", "decoder_blocks",
        "decoder_dilations", "decoder_kernel", "decoder_filters",
        "predictor_kernel", "predictor_filters", "dropout", "layernorm_eps",
        "n_mels", "pitch_bins", "energy_bins", "trained_steps",
        "pitch_quant_range", "energy_quant_range", "loss_weights"};
    for (const auto& item : j.items()) {
      if (!kKeys.contains(item.key())) {
        throw Error("model config: unknown key '" + item.key() + "'");
      }
    }
    // Absent keys keep their defaults, so a partial file is a valid override.
    auto get = [&](const char* key, auto* out) {
      if (j.contains(key)) j.at(key).get_to(*out);
    };
    get("vocab_size", &c.vocab_size);
    get("embed_dim", &c.embed_dim);
    get("encoder_layers", &c.encoder_layers);
    get("attn_heads", &c.attn_heads);
    get("encoder_conv_kernel", &c.encoder_conv_kernel);
    get("encoder_conv_filters", &c.encoder_conv_filters);
    get("decoder_blocks", &c.decoder_blocks);
    get("decoder_dilations", &c.decoder_dilations);
    get("decoder_kernel", &c.decoder_kernel);
    get("decoder_filters", &c.decoder_filters);
    get("predictor_kernel", &c.predictor_kernel);
    get("predictor_filters", &c.predictor_filters);
    get("dropout", &c.dropout);
    get("layernorm_eps", &c.layernorm_eps);
    get("n_mels", &c.n_mels);
    get("pitch_bins", &c.pitch_bins);
    get("energy_bins", &c.energy_bins);
    get("trained_steps", &c.trained_steps);
    if (j.contains("pitch_quant_range")) {
      auto r = j.at("pitch_quant_range").get<std::array<double, 2>>();
      c.pitch_range = {r[0], r[1]};
    }
    if (j.contains("energy_quant_range")) {
      auto r = j.at("energy_quant_range").get<std::array<double, 2>>();
      c.energy_range = {r[0], r[1]};
    }
    if (j.contains("loss_weights")) {
      const json& w = j.at("loss_weights");
      auto weight = [&](const char* key, double* out) {
        if (w.contains(key)) w.at(key).get_to(*out);
      };
      weight("mel", &c.loss_weights.mel);
      weight("duration", &c.loss_weights.duration);
      weight("pitch", &c.loss_weights.pitch);
      weight("energy", &c.loss_weights.energy);
      weight("utterance", &c.loss_weights.utterance);
    }
  } catch (const json::exception& e) {
    throw Error(std::string("model config: ") + e.what());
  }
  c.Validate();
  return c;
}

ModelConfig DeskConfig() { return ModelConfig{}; }

ModelConfig PaperScaleConfig() {
  ModelConfig c;
  c.embed_dim = 256;
  c.encoder_layers = 4;
  c.encoder_conv_filters = 1024;
  c.decoder_blocks = 2;
  c.decoder_filters = 256;
  c.predictor_filters = 256;
  return c;
}

}  // namespace prosodia::model
