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

#ifndef PROSODIA_DSP_MEL_H_
#define PROSODIA_DSP_MEL_H_

#include <functional>
#include <vector>

#include "prosodia/common/matrix.h"
#include "prosodia/dsp/audio.h"
#include "prosodia/dsp/framing.h"

namespace prosodia::dsp {

struct MelConfig {
  int n_mels = 80;
  double f_min = 0.0;
  double f_max = 12000.0;
  double preemphasis = 0.97;
  int n_fft = 1024;
  double power_floor = 1e-10;
  FrameGridParams grid;
};

// Log-Mel power, one row per frame.
struct MelSpectrogram {
  Matrix frames;  // n_frames x n_mels
  FrameGrid grid;
  int sample_rate = kDefaultSampleRate;

  int n_frames() const { return int(frames.rows()); }
  int n_mels() const { return int(frames.cols()); }
};

// Triangular HTK-scale filters, n_mels x (n_fft / 2 + 1).
Matrix MelFilterbank(const MelConfig& config, int sample_rate);

// log(max(|STFT|^2 filtered, floor)) of the pre-emphasized clip, Hann
// window of frame_length samples zero-padded to n_fft.
MelSpectrogram ComputeMel(const AudioClip& clip, const MelConfig& config = {});

struct GriffinLimOptions {
  int n_iters = 32;
  unsigned seed = 0;
  // Called after every iteration with the de-emphasized estimate.
  std::function<void(int iteration, const AudioClip& estimate)> on_iteration;
};

// Magnitude-only inversion: Mel power is deconvolved back onto FFT bins, then
// phases are re-estimated by alternating STFT/ISTFT projections. The output
// is de-emphasized and clamped to [-1, 1].
AudioClip GriffinLim(const MelSpectrogram& mel, const MelConfig& config = {},
                     const GriffinLimOptions& options = {});

// Per-frame estimate of -r(1)/r(0) of the signal before pre-emphasis,
// computed from the Mel spectrum through the Wiener-Khinchin relation.
std::vector<double> MelTiltProxy(const MelSpectrogram& mel,
                                 const MelConfig& config = {});

// Median of MelTiltProxy over frames within kSilenceRangeDb of the loudest.
double UtteranceMelTiltProxy(const MelSpectrogram& mel,
                             const MelConfig& config = {});

}  // namespace prosodia::dsp

#endif  // PROSODIA_DSP_MEL_H_
