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

#include "prosodia/dsp/framing.h"

#include <algorithm>
#include <cmath>

#include "prosodia/common/error.h"

namespace prosodia::dsp {

FrameGrid MakeFrameGrid(std::size_t n_samples, int sample_rate,
                        const FrameGridParams& params) {
  if (sample_rate <= 0) throw Error("framing: sample_rate must be positive");
  FrameGrid grid;
  grid.frame_length =
      static_cast<int>(std::lround(params.frame_length_ms * sample_rate / 1000));
  grid.frame_shift =
      static_cast<int>(std::lround(params.frame_shift_ms * sample_rate / 1000));
  if (grid.frame_shift <= 0 || grid.frame_length < grid.frame_shift) {
    throw Error("framing: require frame_length >= frame_shift > 0");
  }
  if (n_samples < std::size_t(grid.frame_length)) {
    throw Error("framing: clip too short for one frame");
  }
  grid.n_frames =
      int((n_samples - std::size_t(grid.frame_length)) / grid.frame_shift) + 1;
  return grid;
}

std::size_t SamplesForFrames(int n_frames, int frame_length, int frame_shift) {
  if (n_frames < 1) throw Error("framing: need at least one frame");
  return std::size_t(n_frames - 1) * frame_shift + frame_length;
}

Frames FrameSignal(const AudioClip& clip, const FrameGridParams& params) {
  FrameGrid grid = MakeFrameGrid(clip.size(), clip.sample_rate, params);
  std::vector<double> data(static_cast<std::size_t>(grid.n_frames) * grid.frame_length);
  for (int i = 0; i < grid.n_frames; ++i) {
    auto begin = clip.samples.begin() + std::ptrdiff_t(i) * grid.frame_shift;
    std::copy(begin, begin + grid.frame_length,
              data.begin() + std::ptrdiff_t(i) * grid.frame_length);
  }
  return Frames(grid, clip.sample_rate, std::move(data));
}

Frames FramesFromRows(const std::vector<std::vector<double>>& rows,
                      int sample_rate) {
  if (rows.empty()) throw Error("framing: no rows");
  const std::size_t len = rows.front().size();
  std::vector<double> data;
  data.reserve(rows.size() * len);
  for (const auto& r : rows) {
    if (r.size() != len) throw Error("framing: ragged rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  FrameGrid grid{int(len), int(len), int(rows.size())};
  return Frames(grid, sample_rate, std::move(data));
}

}  // namespace prosodia::dsp
