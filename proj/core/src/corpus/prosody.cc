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

#include "prosodia/corpus/prosody.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "prosodia/common/error.h"

namespace prosodia::corpus {

namespace {

constexpr std::array<std::string_view, kNumFeatures> kFeatureNames = {
    "pitch", "pitch_range", "duration", "energy", "tilt"};

double Mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

double Median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::string_view FeatureName(Feature f) { return kFeatureNames[std::size_t(f)]; }

std::optional<Feature> FeatureFromName(std::string_view name) {
  for (Feature f : kAllFeatures) {
    if (FeatureName(f) == name) return f;
  }
  return std::nullopt;
}

PhoneProsody AggregatePhone(const dsp::PitchTrack& pitch,
                            const dsp::FrameFeatures& features,
                            const std::vector<PhoneInterval>& alignment) {
  if (pitch.size() != features.size()) {
    throw Error("aggregate: pitch and feature tracks differ in length");
  }
  PhoneProsody out;
  for (const auto& iv : alignment) {
    if (iv.start_frame < 0 || iv.end_frame > pitch.size() ||
        iv.end_frame <= iv.start_frame) {
      throw Error("aggregate: phone interval outside the frame grid");
    }
    double pitch_sum = 0.0, energy_sum = 0.0;
    int voiced = 0, loud = 0;
    for (int t = iv.start_frame; t < iv.end_frame; ++t) {
      if (pitch.voiced[t]) {
        pitch_sum += std::log(pitch.f0[t]);
        ++voiced;
      }
      if (features.energy_db[t]) {
        energy_sum += *features.energy_db[t];
        ++loud;
      }
    }
    out.duration_frames.push_back(iv.frames());
    out.log_pitch.push_back(voiced ? std::optional(pitch_sum / voiced)
                                   : std::nullopt);
    out.energy_db.push_back(loud ? std::optional(energy_sum / loud)
                                 : std::nullopt);
  }
  return out;
}

std::vector<double> ImputeMissing(
    const std::vector<std::optional<double>>& values) {
  std::vector<int> present;
  for (int i = 0; i < int(values.size()); ++i) {
    if (values[i]) present.push_back(i);
  }
  if (present.empty()) throw Error("impute: no values present");
  double mean = 0.0;
  for (int i : present) mean += *values[i];
  mean /= double(present.size());
  std::vector<double> out(values.size(), mean);
  for (std::size_t k = 0; k < present.size(); ++k) {
    int i = present[k];
    out[i] = *values[i];
    if (k + 1 < present.size()) {
      int j = present[k + 1];
      for (int g = i + 1; g < j; ++g) {
        double w = double(g - i) / double(j - i);
        out[g] = (1.0 - w) * *values[i] + w * *values[j];
      }
    }
  }
  return out;
}

double Quantile(std::vector<double> values, double q) {
  if (values.empty()) throw Error("quantile of an empty set");
  std::sort(values.begin(), values.end());
  double h = (double(values.size()) - 1.0) * std::clamp(q, 0.0, 1.0);
  auto lo = std::size_t(std::floor(h));
  auto hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - double(lo)) * (values[hi] - values[lo]);
}

double StepContourRange(std::span<const int> durations,
                        std::span<const double> log_pitch) {
  if (durations.size() != log_pitch.size() || durations.empty()) {
    throw Error("step contour: mismatched or empty inputs");
  }
  std::vector<double> frames;
  for (std::size_t i = 0; i < durations.size(); ++i) {
    frames.insert(frames.end(), std::size_t(std::max(durations[i], 0)), log_pitch[i]);
  }
  return Quantile(frames, 0.95) - Quantile(frames, 0.05);
}

ProsodyVector UtteranceProsody(const dsp::PitchTrack& pitch,
                               const dsp::FrameFeatures& features,
                               const PhoneProsody& phones,
                               double frame_shift_ms) {
  std::vector<double> log_f0;
  for (int t = 0; t < pitch.size(); ++t) {
    if (pitch.voiced[t]) log_f0.push_back(std::log(pitch.f0[t]));
  }
  if (log_f0.empty()) throw Error("unvoiced utterance");
  if (phones.size() == 0) throw Error("utterance has no phones");

  std::vector<double> log_dur;
  for (int d : phones.duration_frames) {
    log_dur.push_back(std::log(d * frame_shift_ms));
  }
  std::vector<double> energy, tilt;
  for (int t = 0; t < features.size(); ++t) {
    if (features.energy_db[t]) energy.push_back(*features.energy_db[t]);
    if (features.tilt[t]) tilt.push_back(*features.tilt[t]);
  }
  if (energy.empty()) throw Error("utterance is entirely silent");
  if (tilt.empty()) throw Error("unvoiced utterance");

  ProsodyVector v;
  v[Feature::kPitch] = Mean(log_f0);
  v[Feature::kPitchRange] = Quantile(log_f0, 0.95) - Quantile(log_f0, 0.05);
  v[Feature::kDuration] = Mean(log_dur);
  v[Feature::kEnergy] = Mean(energy);
  v[Feature::kTilt] = Mean(tilt);
  return v;
}

double NormalizeUnclipped(double value, const FeatureStats& stats) {
  return (value - stats.median) / (3.0 * stats.sigma);
}

double Normalize(double value, const FeatureStats& stats) {
  return std::clamp(NormalizeUnclipped(value, stats), -1.0, 1.0);
}

double Denormalize(double normalized, const FeatureStats& stats) {
  return stats.median + 3.0 * stats.sigma * normalized;
}

ProsodyVector NormStats::Normalize(const ProsodyVector& raw) const {
  ProsodyVector out;
  for (Feature f : kAllFeatures) out[f] = corpus::Normalize(raw[f], (*this)[f]);
  return out;
}

ProsodyVector NormStats::NormalizeUnclipped(const ProsodyVector& raw) const {
  ProsodyVector out;
  for (Feature f : kAllFeatures) {
    out[f] = corpus::NormalizeUnclipped(raw[f], (*this)[f]);
  }
  return out;
}

ProsodyVector NormStats::Denormalize(const ProsodyVector& normalized) const {
  ProsodyVector out;
  for (Feature f : kAllFeatures) {
    out[f] = corpus::Denormalize(normalized[f], (*this)[f]);
  }
  return out;
}

NormStats FitNormStats(std::span<const ProsodyVector> vectors) {
  if (vectors.size() < 2) throw Error("norm stats need at least 2 utterances");
  NormStats stats;
  for (Feature f : kAllFeatures) {
    std::vector<double> col;
    col.reserve(vectors.size());
    for (const auto& v : vectors) col.push_back(v[f]);
    // Sorted so the floating-point sums do not depend on input order.
    std::sort(col.begin(), col.end());
    double mean = Mean(col);
    double var = 0.0;
    for (double x : col) var += (x - mean) * (x - mean);
    var /= double(col.size());
    double sigma = std::sqrt(var);
    if (!(sigma > 0.0)) {
      throw Error("degenerate feature '" + std::string(FeatureName(f)) + "'");
    }
    stats[f] = {Median(col), sigma};
  }
  return stats;
}

}  // namespace prosodia::corpus
