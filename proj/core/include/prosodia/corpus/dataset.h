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

#ifndef PROSODIA_CORPUS_DATASET_H_
#define PROSODIA_CORPUS_DATASET_H_

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "prosodia/common/matrix.h"
#include "prosodia/corpus/alignment.h"
#include "prosodia/corpus/prosody.h"
#include "prosodia/dsp/audio.h"
#include "prosodia/dsp/mel.h"
#include "prosodia/dsp/pitch.h"

namespace prosodia::corpus {

struct AnalysisConfig {
  dsp::MelConfig mel;  // mel.grid is the analysis grid for every feature
  dsp::PitchBand band;

  double frame_shift_ms() const { return mel.grid.frame_shift_ms; }
};

// One fully featurized utterance. Invariants: alignment has one entry per
// phone token, and the alignment tiles exactly mel.n_frames() frames.
struct Utterance {
  std::string id;
  std::vector<PhoneToken> tokens;
  std::vector<PhoneInterval> alignment;
  dsp::PitchTrack pitch;
  dsp::FrameFeatures frame_features;
  PhoneProsody phone_prosody;
  ProsodyVector utt_prosody;  // raw
  dsp::MelSpectrogram mel;

  int n_frames() const { return mel.n_frames(); }
};

Utterance Featurize(std::string id, const dsp::AudioClip& clip,
                    AlignedUtterance aligned, const AnalysisConfig& config = {});

// Phone-level regression targets with unvoiced/silent gaps imputed, one
// entry per phone token.
struct PhoneTargets {
  std::vector<double> log_duration;  // log(frames)
  std::vector<double> log_pitch;     // log Hz
  std::vector<double> energy_db;
};
PhoneTargets ImputedPhoneTargets(const Utterance& utt);

// Frame-level analysis cache ('PFEA', float64). Columns: f0, energy,
// energy_valid, tilt, tilt_valid, then the Mel bins.
Matrix EncodeFrameCache(const Utterance& utt);
Utterance DecodeFrameCache(std::string id, AlignedUtterance aligned,
                           const Matrix& cache,
                           const AnalysisConfig& config = {});
inline constexpr char kFrameCacheMagic[] = "PFEA";

struct ManifestEntry {
  std::string id;
  std::string wav;        // relative to the corpus directory
  std::string alignment;  // relative to the corpus directory
  std::optional<std::string> text;
};

// JSON lines: {"id", "wav", "alignment", "text"?}.
std::vector<ManifestEntry> ReadManifest(const std::filesystem::path& path);
void WriteManifest(const std::filesystem::path& path,
                   const std::vector<ManifestEntry>& entries);

inline constexpr char kManifestFile[] = "manifest.jsonl";
inline constexpr char kFeatureDir[] = "features";

// Featurizes every manifest entry and writes features/<id>.bin.
void FeaturizeCorpus(const std::filesystem::path& dir,
                     const AnalysisConfig& config = {});

// Loads utterances in manifest order, using cached features when present.
std::vector<Utterance> LoadCorpus(const std::filesystem::path& dir,
                                  const AnalysisConfig& config = {});

// Token sequences only (no audio analysis), in manifest order.
std::vector<std::vector<PhoneToken>> LoadCorpusTokens(
    const std::filesystem::path& dir);

}  // namespace prosodia::corpus

#endif  // PROSODIA_CORPUS_DATASET_H_
