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

#include "prosodia/corpus/tokens.h"

#include <array>
#include <sstream>

#include "prosodia/common/error.h"

namespace prosodia::corpus {

namespace {

constexpr std::array<std::string_view, 39> kPhones = {
    "aa", "ae", "ah", "ao", "aw", "ay", "b",  "ch", "d",  "dh",
    "eh", "er", "ey", "f",  "g",  "hh", "ih", "iy", "jh", "k",
    "l",  "m",  "n",  "ng", "ow", "oy", "p",  "r",  "s",  "sh",
    "t",  "th", "uh", "uw", "v",  "w",  "y",  "z",  "zh"};

}  // namespace

Vocabulary::Vocabulary() {
  for (auto p : kPhones) {
    symbols_.push_back({std::string(p), TokenKind::kPhone, size()});
  }
  symbols_.push_back(
      {std::string(kWordBoundarySymbol), TokenKind::kWordBoundary, size()});
  symbols_.push_back({",", TokenKind::kPunctuation, size()});
  symbols_.push_back({".", TokenKind::kPunctuation, size()});
}

const Vocabulary& Vocabulary::Default() {
  static const Vocabulary vocab;
  return vocab;
}

std::optional<PhoneToken> Vocabulary::Find(std::string_view symbol) const {
  for (const auto& t : symbols_) {
    if (t.symbol == symbol) return t;
  }
  return std::nullopt;
}

std::vector<PhoneToken> Vocabulary::phones() const {
  std::vector<PhoneToken> out;
  for (const auto& t : symbols_) {
    if (t.is_phone()) out.push_back(t);
  }
  return out;
}

std::vector<PhoneToken> ParsePhoneString(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<PhoneToken> out;
  std::string sym;
  while (in >> sym) {
    auto tok = Vocabulary::Default().Find(sym);
    if (!tok) throw Error("unknown phone symbol '" + sym + "'");
    out.push_back(*tok);
  }
  return out;
}

std::string FormatPhoneString(const std::vector<PhoneToken>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty()) out += ' ';
    out += t.symbol;
  }
  return out;
}

std::vector<int> TokenIds(const std::vector<PhoneToken>& tokens) {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(t.id);
  return ids;
}

std::vector<int> PhonePositions(const std::vector<PhoneToken>& tokens) {
  std::vector<int> out;
  for (int i = 0; i < int(tokens.size()); ++i) {
    if (tokens[i].is_phone()) out.push_back(i);
  }
  return out;
}

std::vector<std::vector<int>> WordPhonePositions(
    const std::vector<PhoneToken>& tokens) {
  std::vector<std::vector<int>> words;
  std::vector<int> current;
  for (int i = 0; i < int(tokens.size()); ++i) {
    if (tokens[i].kind == TokenKind::kWordBoundary) {
      if (!current.empty()) words.push_back(std::move(current));
      current.clear();
    } else if (tokens[i].is_phone()) {
      current.push_back(i);
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

}  // namespace prosodia::corpus
