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

#ifndef PROSODIA_CORPUS_ALIGNMENT_H_
#define PROSODIA_CORPUS_ALIGNMENT_H_

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

#include "prosodia/corpus/tokens.h"

namespace prosodia::corpus {

// [start_frame, end_frame) on the analysis frame grid.
struct PhoneInterval {
  int start_frame = 0;
  int end_frame = 0;

  int frames() const { return end_frame - start_frame; }
  bool operator==(const PhoneInterval&) const = default;
};

// Tokens plus one interval per phone-kind token.
struct AlignedUtterance {
  std::vector<PhoneToken> tokens;
  std::vector<PhoneInterval> alignment;

  int total_frames() const {
    return alignment.empty() ? 0 : alignment.back().end_frame;
  }
};

// One row per token: `symbol<TAB>start_ms<TAB>end_ms`. Word boundaries (`#`)
// and punctuation are zero-length rows. Leading, trailing, and repeated `#`
// rows collapse, so only interior boundaries survive. Millisecond times are
// rounded to the nearest frame; every phone keeps at least one frame.
// Throws ParseError (with the offending line) on unknown symbols, malformed
// rows, non-monotone times, or overlapping phone intervals.
AlignedUtterance ParseAlignment(std::istream& in, double frame_shift_ms = 10.0);
AlignedUtterance ReadAlignmentFile(const std::filesystem::path& path,
                                   double frame_shift_ms = 10.0);

// Inverse of ParseAlignment for frame-exact alignments.
std::string FormatAlignment(const AlignedUtterance& utt,
                            double frame_shift_ms = 10.0);

// Makes the alignment tile [0, n_frames): gaps are absorbed by the preceding
// phone (by the first phone for a leading gap) and the last phone is
// stretched or trimmed to end at n_frames. Throws if trimming would leave a
// phone with no frames.
void FitAlignmentToFrames(AlignedUtterance* utt, int n_frames);

}  // namespace prosodia::corpus

#endif  // PROSODIA_CORPUS_ALIGNMENT_H_
