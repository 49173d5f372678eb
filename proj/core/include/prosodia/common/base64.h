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

#ifndef PROSODIA_COMMON_BASE64_H_
#define PROSODIA_COMMON_BASE64_H_

#include <string>
#include <string_view>

namespace prosodia {

std::string Base64Encode(std::string_view bytes);

// Throws prosodia::Error on characters outside the standard alphabet.
std::string Base64Decode(std::string_view text);

}  // namespace prosodia

#endif  // PROSODIA_COMMON_BASE64_H_
