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

#include "prosodia/dsp/audio.h"

#include <algorithm>
#include <cmath>
#include <cstdint>

#include "prosodia/common/binary_io.h"
#include "prosodia/common/error.h"

namespace prosodia::dsp {

void AudioClip::Validate() const {
  if (sample_rate <= 0) throw Error("audio: sample_rate must be positive");
  if (samples.empty()) throw Error("audio: clip is empty");
  for (double s : samples) {
    if (!std::isfinite(s) || std::abs(s) > 1.0) {
      throw Error("audio: sample outside [-1, 1]");
    }
  }
}

std::string EncodeWav(const AudioClip& clip) {
  const auto n = static_cast<std::uint32_t>(clip.samples.size());
  const std::uint32_t data_bytes = n * 2;
  std::string out;
  out.reserve(44 + data_bytes);
  out += "RIFF";
  AppendU32(&out, 36 + data_bytes);
  out += "WAVE";
  out += "fmt ";
  AppendU32(&out, 16);
  AppendU16(&out, 1);  // PCM
  AppendU16(&out, 1);  // mono
  AppendU32(&out, std::uint32_t(clip.sample_rate));
  AppendU32(&out, std::uint32_t(clip.sample_rate) * 2);
  AppendU16(&out, 2);
  AppendU16(&out, 16);
  out += "data";
  AppendU32(&out, data_bytes);
  for (double s : clip.samples) {
    double c = std::clamp(s, -1.0, 1.0);
    auto q = static_cast<std::int16_t>(std::lround(c * 32767.0));
    AppendU16(&out, static_cast<std::uint16_t>(q));
  }
  return out;
}

AudioClip DecodeWav(std::string_view bytes) {
  if (bytes.size() < 12 || bytes.substr(0, 4) != "RIFF" ||
      bytes.substr(8, 4) != "WAVE") {
    throw Error("wav: not a RIFF/WAVE file");
  }
  AudioClip clip;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    std::string_view id = bytes.substr(pos, 4);
    std::uint32_t size = LoadU32(bytes, pos + 4);
    std::size_t body = pos + 8;
    if (body + size > bytes.size()) throw Error("wav: truncated chunk");
    if (id == "fmt ") {
      if (LoadU16(bytes, body) != 1) throw Error("wav: only PCM supported");
      if (LoadU16(bytes, body + 2) != 1) throw Error("wav: only mono supported");
      clip.sample_rate = int(LoadU32(bytes, body + 4));
      if (LoadU16(bytes, body + 14) != 16) {
        throw Error("wav: only 16-bit samples supported");
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) throw Error("wav: data chunk before fmt chunk");
      clip.samples.resize(size / 2);
      for (std::size_t i = 0; i < clip.samples.size(); ++i) {
        auto v = static_cast<std::int16_t>(LoadU16(bytes, body + 2 * i));
        clip.samples[i] = v / 32767.0;
      }
      return clip;
    }
    pos = body + size + (size & 1);
  }
  throw Error("wav: missing data chunk");
}

void WriteWav(const std::filesystem::path& path, const AudioClip& clip) {
  WriteFileBytes(path, EncodeWav(clip));
}

AudioClip ReadWav(const std::filesystem::path& path) {
  return DecodeWav(ReadFileBytes(path));
}

}  // namespace prosodia::dsp
