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

#ifndef PROSODIA_CORPUS_TOKENS_H_
#define PROSODIA_CORPUS_TOKENS_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace prosodia::corpus {

enum class TokenKind { kPhone, kPunctuation, kWordBoundary };

struct PhoneToken {
  std::string symbol;
  TokenKind kind = TokenKind::kPhone;
  int id = 0;

  bool is_phone() const { return kind == TokenKind::kPhone; }
  bool operator==(const PhoneToken&) const = default;
};

inline constexpr std::string_view kWordBoundarySymbol = "#";

// Closed symbol inventory: 39 ARPAbet phones, the word boundary `#`, and the
// punctuation marks `,` and `.`. Ids are dense and stable.
class Vocabulary {
 public:
  static const Vocabulary& Default();

  int size() const { return int(symbols_.size()); }
  std::optional<PhoneToken> Find(std::string_view symbol) const;
  const PhoneToken& At(int id) const { return symbols_.at(std::size_t(id)); }
  const std::vector<PhoneToken>& tokens() const { return symbols_; }
  std::vector<PhoneToken> phones() const;

 private:
  Vocabulary();
  std::vector<PhoneToken> symbols_;
};

// Whitespace-separated symbols, e.g. "hh ah l ow , # w er l d .".
// Throws prosodia::Error naming the first unknown symbol.
std::vector<PhoneToken> ParsePhoneString(std::string_view text);
std::string FormatPhoneString(const std::vector<PhoneToken>& tokens);

std::vector<int> TokenIds(const std::vector<PhoneToken>& tokens);

// Token indices of phone-kind tokens, in order.
std::vector<int> PhonePositions(const std::vector<PhoneToken>& tokens);

// Words are maximal runs of phones between `#` tokens; punctuation belongs
// to no word. Each entry lists token indices of that word's phones.
std::vector<std::vector<int>> WordPhonePositions(
    const std::vector<PhoneToken>& tokens);

}  // namespace prosodia::corpus

#endif  // PROSODIA_CORPUS_TOKENS_H_
