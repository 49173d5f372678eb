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

#ifndef PROSODIA_CONTROL_SYNTHESIZER_H_
#define PROSODIA_CONTROL_SYNTHESIZER_H_

#include <memory>
#include <optional>
#include <vector>

#include "prosodia/corpus/prosody.h"
#include "prosodia/corpus/stats.h"
#include "prosodia/corpus/tokens.h"
#include "prosodia/dsp/audio.h"
#include "prosodia/dsp/mel.h"
#include "prosodia/model/frontend.h"

namespace prosodia::control {

// Offsets in normalized units. Values outside [-1, 1] extrapolate.
struct BiasSpec {
  double pitch = 0.0;
  double pitch_range = 0.0;
  double duration = 0.0;
  double energy = 0.0;
  double tilt = 0.0;

  corpus::ProsodyVector ToVector() const;
  static BiasSpec Single(corpus::Feature f, double value);
};

struct EmphasisSpec {
  int word_index = 0;
  double pitch_range_bias = 0.5;
  double duration_bias = 0.5;
};

struct SynthesisRequest {
  std::vector<corpus::PhoneToken> tokens;
  BiasSpec bias;
  std::optional<EmphasisSpec> emphasis;
  bool with_audio = false;
  int griffin_lim_iters = 32;
};

// Per-phone arrays cover phone tokens only, in order.
struct SynthesisResult {
  std::vector<corpus::PhoneToken> tokens;
  dsp::MelSpectrogram mel;  // log-Mel power
  std::vector<int> durations;
  std::vector<double> pitch_hz;
  std::vector<double> energy_db;
  corpus::ProsodyVector u_hat;   // normalized
  corpus::ProsodyVector u_used;  // normalized, after bias
  std::optional<dsp::AudioClip> audio;
};

class Synthesizer {
 public:
  // Throws if the model was never trained or its Mel size disagrees with
  // the stats.
  Synthesizer(std::shared_ptr<const model::FrontEndModel> model,
              std::shared_ptr<const corpus::CorpusStats> stats,
              corpus::AnalysisConfig analysis = {});

  SynthesisResult Synthesize(const SynthesisRequest& request) const;

  const model::FrontEndModel& model() const { return *model_; }
  const corpus::CorpusStats& stats() const { return *stats_; }
  const corpus::AnalysisConfig& analysis() const { return analysis_; }

 private:
  std::shared_ptr<const model::FrontEndModel> model_;
  std::shared_ptr<const corpus::CorpusStats> stats_;
  corpus::AnalysisConfig analysis_;
};

// What is measured on an output (or on ground truth): per-phone durations
// and contours plus the Mel spectrogram.
struct ProsodyTrace {
  std::vector<int> durations;
  std::vector<double> log_pitch;
  std::vector<double> energy_db;
  dsp::MelSpectrogram mel;
};

ProsodyTrace TraceOf(const SynthesisResult& result);
// Ground-truth trace of a featurized utterance (imputed phone contours).
ProsodyTrace TraceOf(const corpus::Utterance& utt);

// Raw utterance features of a trace: duration from the frame counts, pitch
// and pitch range from the frame-expanded log-pitch contour, energy from the
// frame-expanded energy contour, tilt from the calibrated Mel proxy.
corpus::ProsodyVector MeasureProsody(const ProsodyTrace& trace,
                                     const corpus::CorpusStats& stats,
                                     const corpus::AnalysisConfig& analysis = {});

// MeasureProsody normalized without clipping.
corpus::ProsodyVector RealizedProsody(const SynthesisResult& result,
                                      const corpus::CorpusStats& stats,
                                      const corpus::AnalysisConfig& analysis = {});

}  // namespace prosodia::control

#endif  // PROSODIA_CONTROL_SYNTHESIZER_H_
