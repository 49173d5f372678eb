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

#include "prosodia/service/api.h"

#include <chrono>
#include <cmath>

#include "json.hpp"
#include "prosodia/common/base64.h"
#include "prosodia/common/binary_io.h"
#include "prosodia/common/error.h"

namespace prosodia::service {

using corpus::Feature;
using nlohmann::json;

namespace {

// Physical-unit display of a raw feature value.
json Display(Feature f, double raw) {
  switch (f) {
    case Feature::kPitch: return {{"value", std::exp(raw)}, {"unit", "Hz"}};
    case Feature::kDuration: return {{"value", std::exp(raw)}, {"unit", "ms"}};
    case Feature::kEnergy: return {{"value", raw}, {"unit", "dB"}};
    case Feature::kPitchRange: return {{"value", raw}, {"unit", "log Hz"}};
    case Feature::kTilt: return {{"value", raw}, {"unit", ""}};
  }
  return {};
}

double Ms(std::chrono::steady_clock::duration d) {
  return std::chrono::duration<double, std::milli>(d).count();
}

}  // namespace

std::string ErrorBody(std::string_view field, std::string_view message) {
  return json{{"error", {{"field", field}, {"message", message}}}}.dump();
}

control::SynthesisRequest ParseSynthesisRequest(std::string_view body) {
  json j = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw RequestError("body", "body is not valid JSON");
  if (!j.is_object()) throw RequestError("body", "body must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "phones" && it.key() != "bias" &&
        it.key() != "emphasize_word" && it.key() != "want_audio") {
      throw RequestError(it.key(), "unknown field '" + it.key() + "'");
    }
  }
  control::SynthesisRequest req;
  if (!j.contains("phones")) throw RequestError("phones", "phones is required");
  const json& phones = j["phones"];
  std::string text;
  if (phones.is_string()) {
    text = phones.get<std::string>();
  } else if (phones.is_array()) {
    for (const json& p : phones) {
      if (!p.is_string()) {
        throw RequestError("phones", "phones array must hold strings");
      }
      text += p.get<std::string>() + " ";
    }
  } else {
    throw RequestError("phones", "phones must be a string or an array");
  }
  try {
    req.tokens = corpus::ParsePhoneString(text);
  } catch (const Error& e) {
    throw RequestError("phones", e.what());
  }
  if (req.tokens.empty()) throw RequestError("phones", "phones is empty");
  bool has_phone = false;
  for (const auto& t : req.tokens) has_phone = has_phone || t.is_phone();
  if (!has_phone) throw RequestError("phones", "phones holds no phone symbol");

  if (j.contains("bias") && !j["bias"].is_null()) {
    const json& b = j["bias"];
    if (!b.is_object()) throw RequestError("bias", "bias must be an object");
    corpus::ProsodyVector v;
    for (auto it = b.begin(); it != b.end(); ++it) {
      auto f = corpus::FeatureFromName(it.key());
      const std::string field = "bias." + it.key();
      if (!f) throw RequestError(field, "unknown bias feature");
      if (!it.value().is_number()) throw RequestError(field, "bias must be a number");
      double value = it.value().get<double>();
      if (!std::isfinite(value)) throw RequestError(field, "bias must be finite");
      v[*f] = value;
    }
    req.bias = {v[Feature::kPitch], v[Feature::kPitchRange],
                v[Feature::kDuration], v[Feature::kEnergy], v[Feature::kTilt]};
  }
  if (j.contains("emphasize_word") && !j["emphasize_word"].is_null()) {
    const json& w = j["emphasize_word"];
    if (!w.is_number_integer()) {
      throw RequestError("emphasize_word", "emphasize_word must be an integer");
    }
    long long index = w.get<long long>();
    auto words = corpus::WordPhonePositions(req.tokens);
    if (index < 0 || index >= (long long)words.size()) {
      throw RequestError("emphasize_word",
                         "word index " + std::to_string(index) +
                             " out of range (utterance has " +
                             std::to_string(words.size()) + " words)");
    }
    req.emphasis = control::EmphasisSpec{int(index)};
  }
  if (j.contains("want_audio") && !j["want_audio"].is_null()) {
    if (!j["want_audio"].is_boolean()) {
      throw RequestError("want_audio", "want_audio must be a boolean");
    }
    req.with_audio = j["want_audio"].get<bool>();
  }
  return req;
}

std::string EncodeSynthesisResponse(const control::SynthesisResult& result,
                                    const corpus::CorpusStats& stats,
                                    const std::optional<Timings>& timings) {
  json u_used = json::object(), u_hat = json::object();
  for (Feature f : corpus::kAllFeatures) {
    const std::string name(corpus::FeatureName(f));
    double raw = corpus::Denormalize(result.u_used[f], stats.norm[f]);
    u_used[name] = {{"normalized", result.u_used[f]},
                    {"denormalized", raw},
                    {"display", Display(f, raw)}};
    u_hat[name] = result.u_hat[f];
  }
  json phones = json::array();
  for (const auto& t : result.tokens) {
    if (t.is_phone()) phones.push_back(t.symbol);
  }
  json out = {
      {"phones", phones},
      {"u_used", u_used},
      {"u_hat", u_hat},
      {"durations_frames", result.durations},
      {"pitch_contour", result.pitch_hz},
      {"energy_contour", result.energy_db},
      {"mel", Base64Encode(EncodeMatrix(result.mel.frames, kMelMagic,
                                        BinaryPrecision::kFloat32))},
      {"mel_frames", result.mel.n_frames()},
      {"mel_bins", result.mel.n_mels()},
      {"frame_shift_ms", 1000.0 * result.mel.grid.frame_shift /
                             result.mel.sample_rate},
      {"audio_wav", result.audio ? json(Base64Encode(dsp::EncodeWav(*result.audio)))
                                 : json(nullptr)},
  };
  if (timings) {
    out["timings_ms"] = {{"synthesis", timings->synthesis_ms},
                         {"vocoder", timings->vocoder_ms}};
  }
  return out.dump();
}

std::string EncodeModelInfo(const control::Synthesizer& synth) {
  const corpus::CorpusStats& stats = synth.stats();
  json features = json::object();
  for (Feature f : corpus::kAllFeatures) {
    const std::string name(corpus::FeatureName(f));
    json endpoints = json::object();
    const std::pair<const char*, double> at[] = {
        {"minus1", -1.0}, {"zero", 0.0}, {"plus1", 1.0}};
    for (const auto& [key, y] : at) {
      double raw = corpus::Denormalize(y, stats.norm[f]);
      endpoints[key] = {{"denormalized", raw}, {"display", Display(f, raw)}};
    }
    features[name] = {{"median", stats.norm[f].median},
                      {"sigma", stats.norm[f].sigma},
                      {"endpoints", endpoints}};
  }
  json vocab = json::array();
  for (const auto& t : corpus::Vocabulary::Default().tokens()) vocab.push_back(t.symbol);
  json out = {{"config", json::parse(synth.model().config().ToJson())},
              {"parameter_count", synth.model().params().ScalarCount()},
              {"features", features},
              {"vocabulary", vocab},
              {"bias_range", {-3.0, 3.0}}};
  return out.dump();
}

void Api::Publish(std::shared_ptr<const control::Synthesizer> synth) {
  std::atomic_store(&synth_, std::move(synth));
}

std::shared_ptr<const control::Synthesizer> Api::Current() const {
  return std::atomic_load(&synth_);
}

bool Api::ready() const { return Current() != nullptr; }

HttpReply Api::Health() const {
  if (!ready()) return {503, "loading", "text/plain"};
  return {200, "ok", "text/plain"};
}

HttpReply Api::ModelInfo() const {
  auto synth = Current();
  if (!synth) return {503, ErrorBody("model", "model not ready")};
  return {200, EncodeModelInfo(*synth)};
}

HttpReply Api::Synthesize(std::string_view body) const {
  auto synth = Current();
  if (!synth) return {503, ErrorBody("model", "model not ready")};
  control::SynthesisRequest req;
  try {
    req = ParseSynthesisRequest(body);
  } catch (const RequestError& e) {
    return {400, ErrorBody(e.field(), e.what())};
  }
  try {
    auto t0 = std::chrono::steady_clock::now();
    bool with_audio = req.with_audio;
    req.with_audio = false;
    control::SynthesisResult result = synth->Synthesize(req);
    auto t1 = std::chrono::steady_clock::now();
    if (with_audio) {
      dsp::GriffinLimOptions gl;
      gl.n_iters = req.griffin_lim_iters;
      result.audio = dsp::GriffinLim(result.mel, synth->analysis().mel, gl);
    }
    auto t2 = std::chrono::steady_clock::now();
    return {200, EncodeSynthesisResponse(result, synth->stats(),
                                         Timings{Ms(t1 - t0), Ms(t2 - t1)})};
  } catch (const std::exception& e) {
    return {500, ErrorBody("", e.what())};
  }
}

}  // namespace prosodia::service
