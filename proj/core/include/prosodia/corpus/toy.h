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

#ifndef PROSODIA_CORPUS_TOY_H_
#define PROSODIA_CORPUS_TOY_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "prosodia/corpus/alignment.h"
#include "prosodia/dsp/audio.h"

namespace prosodia::corpus {

// Generator-side prosody of one synthetic utterance. The analysis chain is
// expected to recover these: pitch_hz ~ exp(pitch), pitch_range ~ pitch
// range (log units), duration_ms ~ exp(duration), energy_db ~ energy, and
// tilt_pole ~ -tilt.
struct ToyTargets {
  double pitch_hz = 0.0;
  double pitch_range = 0.0;
  double duration_ms = 0.0;
  double energy_db = 0.0;
  double tilt_pole = 0.0;
};

struct ToyUtterance {
  std::string id;
  AlignedUtterance aligned;
  dsp::AudioClip audio;
  ToyTargets targets;
};

struct ToyCorpusOptions {
  int size = 200;
  std::uint64_t seed = 7;
};

// Utterance `index` of the corpus with the given seed. Phone sequences are
// random words over the phone inventory; each phone symbol has fixed
// intrinsic duration, accent, and level offsets, scaled per utterance by the
// sampled targets. Voiced phones are a pulse train plus a little noise
// through a one-pole filter; a handful of fricatives are white noise.
ToyUtterance RenderToyUtterance(std::uint64_t seed, int index);

// Throws unless size >= 10.
std::vector<ToyUtterance> SynthesizeToyCorpus(const ToyCorpusOptions& options);

// Writes manifest.jsonl, wav/, align/, and targets.jsonl under `out`.
void WriteToyCorpus(const std::vector<ToyUtterance>& corpus,
                    const std::filesystem::path& out);

void GenerateToyCorpus(const ToyCorpusOptions& options,
                       const std::filesystem::path& out);

std::vector<ToyTargets> ReadToyTargets(const std::filesystem::path& dir);

}  // namespace prosodia::corpus

#endif  // PROSODIA_CORPUS_TOY_H_
