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

#include "prosodia/dsp/features.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "prosodia/common/error.h"

namespace prosodia::dsp {

std::optional<double> FrameLevelDb(std::span<const double> frame) {
  double sum = 0.0;
  for (double v : frame) sum += std::abs(v);
  double mean = sum / double(frame.size());
  if (!(mean > 0.0)) return std::nullopt;
  return 20.0 * std::log10(mean);
}

std::vector<bool> DetectSilence(const Frames& frames, double range_db) {
  std::vector<std::optional<double>> level(static_cast<std::size_t>(frames.size()));
  double loudest = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < frames.size(); ++i) {
    level[i] = FrameLevelDb(frames[i]);
    if (level[i]) loudest = std::max(loudest, *level[i]);
  }
  std::vector<bool> silent(level.size(), true);
  for (std::size_t i = 0; i < level.size(); ++i) {
    silent[i] = !level[i] || *level[i] < loudest - range_db;
  }
  return silent;
}

std::vector<std::optional<double>> FrameEnergy(
    const Frames& frames, const std::vector<bool>& silence) {
  if (silence.size() != std::size_t(frames.size())) {
    throw Error("energy: silence mask length mismatch");
  }
  std::vector<std::optional<double>> out(silence.size());
  for (int i = 0; i < frames.size(); ++i) {
    if (!silence[i]) out[i] = FrameLevelDb(frames[i]);
  }
  return out;
}

std::optional<double> FrameTilt(std::span<const double> frame) {
  double r0 = 0.0;
  double r1 = 0.0;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    r0 += frame[i] * frame[i];
    if (i + 1 < frame.size()) r1 += frame[i] * frame[i + 1];
  }
  if (!(r0 > 0.0)) return std::nullopt;
  return std::clamp(-r1 / r0, -1.0, 1.0);
}

std::vector<std::optional<double>> SpectralTilt(
    const Frames& frames, const std::vector<bool>& voiced) {
  if (voiced.size() != std::size_t(frames.size())) {
    throw Error("tilt: voicing mask length mismatch");
  }
  std::vector<std::optional<double>> out(voiced.size());
  for (int i = 0; i < frames.size(); ++i) {
    if (voiced[i]) out[i] = FrameTilt(frames[i]);
  }
  return out;
}

FrameFeatures AnalyzeFrames(const Frames& frames, const PitchTrack& pitch) {
  if (pitch.size() != frames.size()) {
    throw Error("features: pitch track and frames disagree in length");
  }
  FrameFeatures f;
  f.silence = DetectSilence(frames);
  f.energy_db = FrameEnergy(frames, f.silence);
  f.tilt = SpectralTilt(frames, pitch.voiced);
  for (int i = 0; i < frames.size(); ++i) {
    if (!f.energy_db[i]) f.silence[i] = true;
    if (pitch.voiced[i] && !f.tilt[i]) {
      f.silence[i] = true;
      f.energy_db[i].reset();
    }
  }
  return f;
}

}  // namespace prosodia::dsp
