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

#include "prosodia/corpus/alignment.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "prosodia/common/error.h"

namespace prosodia::corpus {

namespace {

std::vector<std::string> SplitTabs(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return fields;
}

double ParseMs(const std::string& field, int line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() ||
      !std::isfinite(v) || v < 0.0) {
    throw ParseError("bad time value '" + field + "'", line_no);
  }
  return v;
}

}  // namespace

AlignedUtterance ParseAlignment(std::istream& in, double frame_shift_ms) {
  if (!(frame_shift_ms > 0.0)) throw Error("alignment: frame shift must be > 0");
  AlignedUtterance out;
  std::string line;
  int line_no = 0;
  double prev_start = 0.0;
  double prev_phone_end = 0.0;
  int frame_cursor = 0;
  bool pending_boundary = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = SplitTabs(line);
    if (fields.size() != 3) {
      throw ParseError("expected 3 tab-separated fields", line_no);
    }
    auto token = Vocabulary::Default().Find(fields[0]);
    if (!token) throw ParseError("unknown symbol '" + fields[0] + "'", line_no);
    double start = ParseMs(fields[1], line_no);
    double end = ParseMs(fields[2], line_no);
    if (end < start) throw ParseError("end time before start time", line_no);
    if (start < prev_start) throw ParseError("non-monotone start time", line_no);
    prev_start = start;

    if (!token->is_phone()) {
      if (end != start) {
        throw ParseError("'" + token->symbol + "' rows must have start == end",
                         line_no);
      }
      if (token->kind == TokenKind::kWordBoundary) {
        pending_boundary = true;
      } else {
        out.tokens.push_back(*token);
      }
      continue;
    }
    if (end == start) throw ParseError("phone with zero duration", line_no);
    if (!out.alignment.empty() && start < prev_phone_end) {
      throw ParseError("overlapping phone interval", line_no);
    }
    prev_phone_end = end;
    if (pending_boundary && !out.alignment.empty()) {
      out.tokens.push_back(
          *Vocabulary::Default().Find(kWordBoundarySymbol));
    }
    pending_boundary = false;
    int s = std::max(int(std::lround(start / frame_shift_ms)), frame_cursor);
    int e = std::max(int(std::lround(end / frame_shift_ms)), s + 1);
    out.tokens.push_back(*token);
    out.alignment.push_back({s, e});
    frame_cursor = e;
  }
  if (out.alignment.empty()) throw ParseError("alignment has no phones", 0);
  return out;
}

AlignedUtterance ReadAlignmentFile(const std::filesystem::path& path,
                                   double frame_shift_ms) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open alignment " + path.string());
  try {
    return ParseAlignment(in, frame_shift_ms);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), e.line());
  }
}

std::string FormatAlignment(const AlignedUtterance& utt,
                            double frame_shift_ms) {
  std::ostringstream out;
  std::size_t phone = 0;
  double cursor_ms = 0.0;
  auto ms = [&](int frame) { return double(frame) * frame_shift_ms; };
  for (const auto& tok : utt.tokens) {
    if (tok.is_phone()) {
      const auto& iv = utt.alignment.at(phone++);
      out << tok.symbol << '\t' << ms(iv.start_frame) << '\t'
          << ms(iv.end_frame) << '\n';
      cursor_ms = ms(iv.end_frame);
    } else {
      out << tok.symbol << '\t' << cursor_ms << '\t' << cursor_ms << '\n';
    }
  }
  return out.str();
}

void FitAlignmentToFrames(AlignedUtterance* utt, int n_frames) {
  auto& al = utt->alignment;
  if (al.empty()) throw Error("alignment: no phones");
  al.front().start_frame = 0;
  for (std::size_t i = 0; i + 1 < al.size(); ++i) {
    al[i].end_frame = al[i + 1].start_frame;
  }
  al.back().end_frame = n_frames;
  for (const auto& iv : al) {
    if (iv.end_frame <= iv.start_frame) {
      throw Error("alignment: does not fit " + std::to_string(n_frames) +
                  " frames");
    }
  }
}

}  // namespace prosodia::corpus
