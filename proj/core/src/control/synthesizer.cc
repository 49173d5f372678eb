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

#include "prosodia/control/synthesizer.h"

#include <cmath>
#include <string>

#include "prosodia/common/error.h"

namespace prosodia::control {

using corpus::Feature;

corpus::ProsodyVector BiasSpec::ToVector() const {
  corpus::ProsodyVector v;
  v[Feature::kPitch] = pitch;
  v[Feature::kPitchRange] = pitch_range;
  v[Feature::kDuration] = duration;
  v[Feature::kEnergy] = energy;
  v[Feature::kTilt] = tilt;
  return v;
}

BiasSpec BiasSpec::Single(Feature f, double value) {
  BiasSpec b;
  switch (f) {
    case Feature::kPitch: b.pitch = value; break;
    case Feature::kPitchRange: b.pitch_range = value; break;
    case Feature::kDuration: b.duration = value; break;
    case Feature::kEnergy: b.energy = value; break;
    case Feature::kTilt: b.tilt = value; break;
  }
  return b;
}

Synthesizer::Synthesizer(std::shared_ptr<const model::FrontEndModel> model,
                         std::shared_ptr<const corpus::CorpusStats> stats,
                         corpus::AnalysisConfig analysis)
    : model_(std::move(model)),
      stats_(std::move(stats)),
      analysis_(analysis) {
  if (!model_ || !stats_) throw Error("synthesizer needs a model and stats");
  if (model_->config().trained_steps <= 0) throw Error("model is untrained");
  const std::size_t n_mels = std::size_t(model_->config().n_mels);
  if (stats_->mel_mean.size() != n_mels || stats_->mel_std.size() != n_mels) {
    throw Error("stats Mel size does not match the model");
  }
}

SynthesisResult Synthesizer::Synthesize(const SynthesisRequest& request) const {
  if (request.tokens.empty()) throw Error("no phones to synthesize");
  model::InferControls controls;
  controls.bias = request.bias.ToVector();
  const Eigen::Index n = Eigen::Index(request.tokens.size());
  if (request.emphasis) {
    const EmphasisSpec& e = *request.emphasis;
    auto words = corpus::WordPhonePositions(request.tokens);
    if (e.word_index < 0 || e.word_index >= int(words.size())) {
      throw Error("word index " + std::to_string(e.word_index) +
                  " out of range (utterance has " +
                  std::to_string(words.size()) + " words)");
    }
    controls.phone_bias = Matrix::Zero(n, corpus::kNumFeatures);
    for (int pos : words[std::size_t(e.word_index)]) {
      controls.phone_bias(pos, int(Feature::kPitchRange)) += e.pitch_range_bias;
      controls.phone_bias(pos, int(Feature::kDuration)) += e.duration_bias;
    }
  }
  model::InferResult r = model_->ForwardInfer(
      request.tokens, stats_->phone_log_duration, controls);

  SynthesisResult out;
  out.tokens = request.tokens;
  out.u_hat = r.u_hat;
  out.u_used = r.u_used;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!request.tokens[std::size_t(i)].is_phone()) continue;
    out.durations.push_back(r.durations[std::size_t(i)]);
    out.pitch_hz.push_back(std::exp(
        stats_->phone_log_pitch.Destandardize(r.output.pitch_pred(i, 0))));
    out.energy_db.push_back(
        stats_->phone_energy.Destandardize(r.output.energy_pred(i, 0)));
  }
  Matrix mel = r.output.mel;
  for (Eigen::Index m = 0; m < mel.cols(); ++m) {
    mel.col(m).array() = mel.col(m).array() * stats_->mel_std[std::size_t(m)] +
                         stats_->mel_mean[std::size_t(m)];
  }
  out.mel.frames = std::move(mel);
  out.mel.sample_rate = dsp::kDefaultSampleRate;
  out.mel.grid.frame_length = int(std::lround(
      analysis_.mel.grid.frame_length_ms * out.mel.sample_rate / 1000.0));
  out.mel.grid.frame_shift = int(std::lround(
      analysis_.mel.grid.frame_shift_ms * out.mel.sample_rate / 1000.0));
  out.mel.grid.n_frames = out.mel.n_frames();
  if (request.with_audio) {
    dsp::GriffinLimOptions gl;
    gl.n_iters = request.griffin_lim_iters;
    out.audio = dsp::GriffinLim(out.mel, analysis_.mel, gl);
  }
  return out;
}

ProsodyTrace TraceOf(const SynthesisResult& result) {
  ProsodyTrace t;
  t.durations = result.durations;
  for (double hz : result.pitch_hz) t.log_pitch.push_back(std::log(hz));
  t.energy_db = result.energy_db;
  t.mel = result.mel;
  return t;
}

ProsodyTrace TraceOf(const corpus::Utterance& utt) {
  corpus::PhoneTargets targets = corpus::ImputedPhoneTargets(utt);
  ProsodyTrace t;
  for (const auto& iv : utt.alignment) t.durations.push_back(iv.frames());
  t.log_pitch = targets.log_pitch;
  t.energy_db = targets.energy_db;
  t.mel = utt.mel;
  return t;
}

corpus::ProsodyVector MeasureProsody(const ProsodyTrace& trace,
                                     const corpus::CorpusStats& stats,
                                     const corpus::AnalysisConfig& analysis) {
  const std::size_t n = trace.durations.size();
  if (n == 0 || trace.log_pitch.size() != n || trace.energy_db.size() != n) {
    throw Error("prosody trace arrays are inconsistent");
  }
  std::vector<double> frame_pitch;
  double log_dur = 0.0, energy = 0.0;
  long frames = 0;
  for (std::size_t i = 0; i < n; ++i) {
    int d = trace.durations[i];
    if (d <= 0) throw Error("prosody trace has a phone with no frames");
    log_dur += std::log(d * analysis.frame_shift_ms());
    frame_pitch.insert(frame_pitch.end(), std::size_t(d), trace.log_pitch[i]);
    energy += d * trace.energy_db[i];
    frames += d;
  }
  double mean_pitch = 0.0;
  for (double p : frame_pitch) mean_pitch += p;
  corpus::ProsodyVector v;
  v[Feature::kPitch] = mean_pitch / double(frames);
  v[Feature::kPitchRange] = stats.CalibratedPitchRange(
      corpus::StepContourRange(trace.durations, trace.log_pitch));
  v[Feature::kDuration] = log_dur / double(n);
  v[Feature::kEnergy] = energy / double(frames);
  v[Feature::kTilt] =
      stats.CalibratedTilt(dsp::UtteranceMelTiltProxy(trace.mel, analysis.mel));
  return v;
}

corpus::ProsodyVector RealizedProsody(const SynthesisResult& result,
                                      const corpus::CorpusStats& stats,
                                      const corpus::AnalysisConfig& analysis) {
  return stats.norm.NormalizeUnclipped(
      MeasureProsody(TraceOf(result), stats, analysis));
}

}  // namespace prosodia::control
