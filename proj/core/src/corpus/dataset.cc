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

#include "prosodia/corpus/dataset.h"

#include <fstream>

#include "json.hpp"
#include "prosodia/common/binary_io.h"
#include "prosodia/common/error.h"
#include "prosodia/common/parallel.h"
#include "prosodia/dsp/features.h"
#include "prosodia/dsp/framing.h"

namespace prosodia::corpus {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum CacheColumn { kF0 = 0, kEnergy, kEnergyValid, kTilt, kTiltValid, kMel0 };

void FinishUtterance(Utterance* utt, AlignedUtterance aligned,
                     const AnalysisConfig& config) {
  FitAlignmentToFrames(&aligned, utt->n_frames());
  utt->tokens = std::move(aligned.tokens);
  utt->alignment = std::move(aligned.alignment);
  utt->phone_prosody =
      AggregatePhone(utt->pitch, utt->frame_features, utt->alignment);
  utt->utt_prosody =
      UtteranceProsody(utt->pitch, utt->frame_features, utt->phone_prosody,
                       config.frame_shift_ms());
}

}  // namespace

Utterance Featurize(std::string id, const dsp::AudioClip& clip,
                    AlignedUtterance aligned, const AnalysisConfig& config) {
  clip.Validate();
  Utterance utt;
  utt.id = std::move(id);
  dsp::Frames frames = dsp::FrameSignal(clip, config.mel.grid);
  utt.pitch = dsp::TrackPitch(frames, config.band);
  utt.frame_features = dsp::AnalyzeFrames(frames, utt.pitch);
  utt.mel = dsp::ComputeMel(clip, config.mel);
  if (utt.mel.n_frames() != frames.size()) {
    throw Error("featurize: Mel and analysis grids disagree");
  }
  try {
    FinishUtterance(&utt, std::move(aligned), config);
  } catch (const Error& e) {
    throw Error(utt.id + ": " + e.what());
  }
  return utt;
}

PhoneTargets ImputedPhoneTargets(const Utterance& utt) {
  PhoneTargets t;
  for (int d : utt.phone_prosody.duration_frames) {
    t.log_duration.push_back(std::log(double(d)));
  }
  t.log_pitch = ImputeMissing(utt.phone_prosody.log_pitch);
  t.energy_db = ImputeMissing(utt.phone_prosody.energy_db);
  return t;
}

Matrix EncodeFrameCache(const Utterance& utt) {
  const int n = utt.n_frames();
  Matrix m = Matrix::Zero(n, kMel0 + utt.mel.n_mels());
  for (int t = 0; t < n; ++t) {
    m(t, kF0) = utt.pitch.voiced[t] ? utt.pitch.f0[t] : 0.0;
    if (utt.frame_features.energy_db[t]) {
      m(t, kEnergy) = *utt.frame_features.energy_db[t];
      m(t, kEnergyValid) = 1.0;
    }
    if (utt.frame_features.tilt[t]) {
      m(t, kTilt) = *utt.frame_features.tilt[t];
      m(t, kTiltValid) = 1.0;
    }
  }
  m.rightCols(utt.mel.n_mels()) = utt.mel.frames;
  return m;
}

Utterance DecodeFrameCache(std::string id, AlignedUtterance aligned,
                           const Matrix& cache, const AnalysisConfig& config) {
  if (cache.cols() != kMel0 + config.mel.n_mels) {
    throw Error(id + ": feature cache has the wrong column count");
  }
  Utterance utt;
  utt.id = std::move(id);
  const int n = int(cache.rows());
  utt.pitch.f0.assign(std::size_t(n), 0.0);
  utt.pitch.voiced.assign(std::size_t(n), false);
  utt.frame_features.energy_db.resize(std::size_t(n));
  utt.frame_features.tilt.resize(std::size_t(n));
  utt.frame_features.silence.assign(std::size_t(n), true);
  for (int t = 0; t < n; ++t) {
    if (cache(t, kF0) > 0.0) {
      utt.pitch.f0[t] = cache(t, kF0);
      utt.pitch.voiced[t] = true;
    }
    if (cache(t, kEnergyValid) > 0.5) {
      utt.frame_features.energy_db[t] = cache(t, kEnergy);
      utt.frame_features.silence[t] = false;
    }
    if (cache(t, kTiltValid) > 0.5) utt.frame_features.tilt[t] = cache(t, kTilt);
  }
  utt.mel.frames = cache.rightCols(config.mel.n_mels);
  utt.mel.sample_rate = dsp::kDefaultSampleRate;
  utt.mel.grid.frame_length = int(std::lround(
      config.mel.grid.frame_length_ms * utt.mel.sample_rate / 1000.0));
  utt.mel.grid.frame_shift = int(std::lround(
      config.mel.grid.frame_shift_ms * utt.mel.sample_rate / 1000.0));
  utt.mel.grid.n_frames = n;
  try {
    FinishUtterance(&utt, std::move(aligned), config);
  } catch (const Error& e) {
    throw Error(utt.id + ": " + e.what());
  }
  return utt;
}

std::vector<ManifestEntry> ReadManifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open manifest " + path.string());
  std::vector<ManifestEntry> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      json j = json::parse(line);
      ManifestEntry e;
      e.id = j.at("id").get<std::string>();
      e.wav = j.at("wav").get<std::string>();
      e.alignment = j.at("alignment").get<std::string>();
      if (j.contains("text")) e.text = j.at("text").get<std::string>();
      out.push_back(std::move(e));
    } catch (const json::exception& e) {
      throw ParseError(std::string("manifest: ") + e.what(), line_no);
    }
  }
  return out;
}

void WriteManifest(const fs::path& path,
                   const std::vector<ManifestEntry>& entries) {
  std::string text;
  for (const auto& e : entries) {
    json j = {{"id", e.id}, {"wav", e.wav}, {"alignment", e.alignment}};
    if (e.text) j["text"] = *e.text;
    text += j.dump() + "\n";
  }
  WriteFileBytes(path, text);
}

void FeaturizeCorpus(const fs::path& dir, const AnalysisConfig& config) {
  auto entries = ReadManifest(dir / kManifestFile);
  fs::create_directories(dir / kFeatureDir);
  ParallelFor(entries.size(), [&](std::size_t i) {
    const auto& e = entries[i];
    Utterance utt = Featurize(e.id, dsp::ReadWav(dir / e.wav),
                              ReadAlignmentFile(dir / e.alignment,
                                                config.frame_shift_ms()),
                              config);
    WriteMatrixFile(dir / kFeatureDir / (e.id + ".bin"), EncodeFrameCache(utt),
                    kFrameCacheMagic, BinaryPrecision::kFloat64);
  });
}

std::vector<Utterance> LoadCorpus(const fs::path& dir,
                                  const AnalysisConfig& config) {
  auto entries = ReadManifest(dir / kManifestFile);
  std::vector<Utterance> out(entries.size());
  ParallelFor(entries.size(), [&](std::size_t i) {
    const auto& e = entries[i];
    AlignedUtterance aligned =
        ReadAlignmentFile(dir / e.alignment, config.frame_shift_ms());
    fs::path cache = dir / kFeatureDir / (e.id + ".bin");
    if (fs::exists(cache)) {
      out[i] = DecodeFrameCache(e.id, std::move(aligned),
                                ReadMatrixFile(cache, kFrameCacheMagic), config);
    } else {
      out[i] = Featurize(e.id, dsp::ReadWav(dir / e.wav), std::move(aligned),
                         config);
    }
  });
  return out;
}

std::vector<std::vector<PhoneToken>> LoadCorpusTokens(const fs::path& dir) {
  std::vector<std::vector<PhoneToken>> out;
  for (const auto& e : ReadManifest(dir / kManifestFile)) {
    out.push_back(ReadAlignmentFile(dir / e.alignment).tokens);
  }
  return out;
}

}  // namespace prosodia::corpus
