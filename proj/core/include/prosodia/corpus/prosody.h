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

#ifndef PROSODIA_CORPUS_PROSODY_H_
#define PROSODIA_CORPUS_PROSODY_H_

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "prosodia/corpus/alignment.h"
#include "prosodia/dsp/features.h"
#include "prosodia/dsp/pitch.h"

namespace prosodia::corpus {

// The five utterance-wise features, in their fixed order.
enum class Feature { kPitch = 0, kPitchRange, kDuration, kEnergy, kTilt };
inline constexpr int kNumFeatures = 5;
inline constexpr std::array<Feature, kNumFeatures> kAllFeatures = {
    Feature::kPitch, Feature::kPitchRange, Feature::kDuration,
    Feature::kEnergy, Feature::kTilt};

// "pitch", "pitch_range", "duration", "energy", "tilt".
std::string_view FeatureName(Feature f);
std::optional<Feature> FeatureFromName(std::string_view name);

// pitch: mean log-Hz; pitch_range: log-Hz span; duration: mean log-ms;
// energy: dB; tilt: dimensionless. Either raw or normalized, depending on
// where it came from.
struct ProsodyVector {
  std::array<double, kNumFeatures> values{};

  double& operator[](Feature f) { return values[std::size_t(f)]; }
  double operator[](Feature f) const { return values[std::size_t(f)]; }
  bool operator==(const ProsodyVector&) const = default;
};

struct PhoneProsody {
  std::vector<int> duration_frames;
  std::vector<std::optional<double>> log_pitch;  // absent: no voiced frame
  std::vector<std::optional<double>> energy_db;  // absent: all frames silent

  int size() const { return int(duration_frames.size()); }
};

PhoneProsody AggregatePhone(const dsp::PitchTrack& pitch,
                            const dsp::FrameFeatures& features,
                            const std::vector<PhoneInterval>& alignment);

// Fills gaps by linear interpolation between the nearest present neighbours;
// gaps at either edge take the mean of present values. Throws if nothing is
// present.
std::vector<double> ImputeMissing(
    const std::vector<std::optional<double>>& values);

// Linear-interpolated sample quantile (Hyndman-Fan type 7); q in [0, 1].
double Quantile(std::vector<double> values, double q);

// q95 - q05 of a per-phone log-pitch contour held over each phone's frames.
double StepContourRange(std::span<const int> durations,
                        std::span<const double> log_pitch);

// Raw utterance features. Throws "unvoiced utterance" without voiced frames.
ProsodyVector UtteranceProsody(const dsp::PitchTrack& pitch,
                               const dsp::FrameFeatures& features,
                               const PhoneProsody& phones,
                               double frame_shift_ms = 10.0);

struct FeatureStats {
  double median = 0.0;
  double sigma = 1.0;
};

// Per-feature median and population standard deviation defining the map
// [M - 3 sigma, M + 3 sigma] -> [-1, 1].
struct NormStats {
  std::array<FeatureStats, kNumFeatures> features{};

  const FeatureStats& operator[](Feature f) const {
    return features[std::size_t(f)];
  }
  FeatureStats& operator[](Feature f) { return features[std::size_t(f)]; }

  ProsodyVector Normalize(const ProsodyVector& raw) const;
  ProsodyVector NormalizeUnclipped(const ProsodyVector& raw) const;
  ProsodyVector Denormalize(const ProsodyVector& normalized) const;
};

// clip((v - M) / (3 sigma), -1, 1).
double Normalize(double value, const FeatureStats& stats);
double NormalizeUnclipped(double value, const FeatureStats& stats);
// M + 3 sigma y; the exact inverse of Normalize on (-1, 1).
double Denormalize(double normalized, const FeatureStats& stats);

// Needs at least two vectors; throws "degenerate feature" when any feature
// is constant.
NormStats FitNormStats(std::span<const ProsodyVector> vectors);

}  // namespace prosodia::corpus

#endif  // PROSODIA_CORPUS_PROSODY_H_
