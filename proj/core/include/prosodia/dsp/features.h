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

#ifndef PROSODIA_DSP_FEATURES_H_
#define PROSODIA_DSP_FEATURES_H_

#include <optional>
#include <vector>

#include "prosodia/dsp/framing.h"
#include "prosodia/dsp/pitch.h"

namespace prosodia::dsp {

// A frame is silent when its level is more than this many dB below the
// loudest frame of the utterance, or when it is exactly zero.
inline constexpr double kSilenceRangeDb = 40.0;

struct FrameFeatures {
  std::vector<std::optional<double>> energy_db;  // absent on silent frames
  std::vector<std::optional<double>> tilt;       // absent off voiced frames
  std::vector<bool> silence;

  int size() const { return int(silence.size()); }
};

// 20 * log10(mean |x|) of a single frame, or nullopt when mean |x| is zero.
std::optional<double> FrameLevelDb(std::span<const double> frame);

std::vector<bool> DetectSilence(const Frames& frames,
                                double range_db = kSilenceRangeDb);

// Energy of every non-silent frame. A non-silent frame whose level is zero
// comes back absent, so callers never see -inf.
std::vector<std::optional<double>> FrameEnergy(
    const Frames& frames, const std::vector<bool>& silence);

// -r(1)/r(0) of a single frame: the first-order predictor coefficient
// a1 of 1 / (1 + a1 z^-1). nullopt when r(0) == 0.
std::optional<double> FrameTilt(std::span<const double> frame);

std::vector<std::optional<double>> SpectralTilt(
    const Frames& frames, const std::vector<bool>& voiced);

// Silence, energy, and tilt for one utterance. Frames with r(0) == 0 are
// also marked silent.
FrameFeatures AnalyzeFrames(const Frames& frames, const PitchTrack& pitch);

}  // namespace prosodia::dsp

#endif  // PROSODIA_DSP_FEATURES_H_
