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

#ifndef PROSODIA_DSP_PITCH_H_
#define PROSODIA_DSP_PITCH_H_

#include <array>
#include <vector>

#include "prosodia/dsp/framing.h"

namespace prosodia::dsp {

// Search band in Hz. Valid when 20 <= f_min < f_max <= sample_rate / 4.
struct PitchBand {
  double f_min = 70.0;
  double f_max = 500.0;

  void Validate(int sample_rate) const;
};

// One estimator's opinion about one frame. hz == 0 means unvoiced.
struct PitchCandidate {
  double hz = 0.0;
  double confidence = 0.0;

  bool voiced() const { return hz > 0.0; }
};

using CandidateTrack = std::vector<PitchCandidate>;

// Normalized autocorrelation; picks the shortest lag whose peak is close to
// the best peak in the band, which suppresses sub-octave errors.
CandidateTrack EstimatePitchAcf(const Frames& frames, const PitchBand& band);

// Cumulative-mean-normalized difference function with an absolute threshold.
CandidateTrack EstimatePitchCmnd(const Frames& frames, const PitchBand& band);

// Real-cepstrum peak of the half-wave rectified frame. Rectification adds
// harmonics, so a single sinusoid still produces a rahmonic peak.
CandidateTrack EstimatePitchCepstral(const Frames& frames,
                                     const PitchBand& band);

// f0 > 0 exactly on voiced frames.
struct PitchTrack {
  std::vector<double> f0;
  std::vector<bool> voiced;

  int size() const { return int(f0.size()); }
  int voiced_count() const;
};

// Per-frame vote: voiced iff at least two estimators are voiced. A voiced
// candidate within 3% of twice (half) the median of the other voiced
// candidates is halved (doubled) before taking the median. With only two
// voiced candidates the more confident one is the reference.
PitchCandidate VoteFrame(const std::array<PitchCandidate, 3>& candidates);

// Throws prosodia::Error when track lengths differ.
PitchTrack VotePitch(const CandidateTrack& a, const CandidateTrack& b,
                     const CandidateTrack& c);

// Runs all three estimators and votes. Voted f0 is clamped to the band.
PitchTrack TrackPitch(const Frames& frames, const PitchBand& band = {});

}  // namespace prosodia::dsp

#endif  // PROSODIA_DSP_PITCH_H_
