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

#ifndef PROSODIA_DSP_AUDIO_H_
#define PROSODIA_DSP_AUDIO_H_

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace prosodia::dsp {

inline constexpr int kDefaultSampleRate = 24000;

// Mono signal with samples in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = kDefaultSampleRate;

  std::size_t size() const { return samples.size(); }
  double seconds() const { return double(samples.size()) / sample_rate; }

  // Throws prosodia::Error when sample_rate <= 0, the clip is empty, or a
  // sample lies outside [-1, 1] (or is not finite).
  void Validate() const;
};

// 16-bit PCM mono RIFF/WAVE. Samples are clamped to [-1, 1] on write.
std::string EncodeWav(const AudioClip& clip);
AudioClip DecodeWav(std::string_view bytes);

void WriteWav(const std::filesystem::path& path, const AudioClip& clip);
AudioClip ReadWav(const std::filesystem::path& path);

}  // namespace prosodia::dsp

#endif  // PROSODIA_DSP_AUDIO_H_
