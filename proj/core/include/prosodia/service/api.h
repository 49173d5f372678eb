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

#ifndef PROSODIA_SERVICE_API_H_
#define PROSODIA_SERVICE_API_H_

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "prosodia/control/synthesizer.h"

namespace prosodia::service {

struct HttpReply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

// Request validation failure; `field` names the offending JSON field.
class RequestError : public std::runtime_error {
 public:
  RequestError(std::string field, const std::string& message)
      : std::runtime_error(message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Parses a /synthesize body:
//   {"phones": "hh ah l ow . " | ["hh", ...],
//    "bias": {"pitch": 0, "pitch_range": 0, "duration": 0, "energy": 0,
//             "tilt": 0},
//    "emphasize_word": 1, "want_audio": false}
// Throws RequestError.
control::SynthesisRequest ParseSynthesisRequest(std::string_view body);

struct Timings {
  double synthesis_ms = 0.0;
  double vocoder_ms = 0.0;
};

// One schema shared by the HTTP service and `prosodia synth --json`. The Mel
// travels as base64 of the 'PMEL' float32 flat binary.
std::string EncodeSynthesisResponse(const control::SynthesisResult& result,
                                    const corpus::CorpusStats& stats,
                                    const std::optional<Timings>& timings);

std::string EncodeModelInfo(const control::Synthesizer& synth);

inline constexpr char kMelMagic[] = "PMEL";

// Request handling over an atomically published synthesizer. Until Publish()
// is called every model-backed route answers 503.
class Api {
 public:
  void Publish(std::shared_ptr<const control::Synthesizer> synth);
  bool ready() const;

  HttpReply Health() const;
  HttpReply ModelInfo() const;
  HttpReply Synthesize(std::string_view body) const;

 private:
  std::shared_ptr<const control::Synthesizer> Current() const;
  std::shared_ptr<const control::Synthesizer> synth_;
};

std::string ErrorBody(std::string_view field, std::string_view message);

}  // namespace prosodia::service

#endif  // PROSODIA_SERVICE_API_H_
