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

#ifndef PROSODIA_DSP_FRAMING_H_
#define PROSODIA_DSP_FRAMING_H_

#include <cstddef>
#include <span>
#include <vector>

#include "prosodia/dsp/audio.h"

namespace prosodia::dsp {

struct FrameGridParams {
  double frame_length_ms = 25.0;
  double frame_shift_ms = 10.0;
};

// Frame layout in samples: n_frames = floor((N - L) / S) + 1.
struct FrameGrid {
  int frame_length = 0;
  int frame_shift = 0;
  int n_frames = 0;

  bool operator==(const FrameGrid&) const = default;
};

// Converts millisecond parameters to samples and applies the frame-count
// formula. Throws when N < L ("too short") or parameters are inconsistent.
FrameGrid MakeFrameGrid(std::size_t n_samples, int sample_rate,
                        const FrameGridParams& params = {});

// Number of samples needed for exactly `n_frames` frames.
std::size_t SamplesForFrames(int n_frames, int frame_length, int frame_shift);

// Overlapping frames copied out of a clip; frame i starts at i * shift.
class Frames {
 public:
  Frames(FrameGrid grid, int sample_rate, std::vector<double> data)
      : grid_(grid), sample_rate_(sample_rate), data_(std::move(data)) {}

  const FrameGrid& grid() const { return grid_; }
  int sample_rate() const { return sample_rate_; }
  int size() const { return grid_.n_frames; }
  int length() const { return grid_.frame_length; }

  std::span<const double> operator[](int i) const {
    return {data_.data() + std::size_t(i) * grid_.frame_length,
            std::size_t(grid_.frame_length)};
  }

 private:
  FrameGrid grid_;
  int sample_rate_;
  std::vector<double> data_;
};

Frames FrameSignal(const AudioClip& clip, const FrameGridParams& params = {});

// Frames built from explicit sample vectors, all of the same length. Mostly
// useful in tests and for single-frame analysis.
Frames FramesFromRows(const std::vector<std::vector<double>>& rows,
                      int sample_rate);

}  // namespace prosodia::dsp

#endif  // PROSODIA_DSP_FRAMING_H_
