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

#ifndef PROSODIA_COMMON_BINARY_IO_H_
#define PROSODIA_COMMON_BINARY_IO_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "prosodia/common/matrix.h"

namespace prosodia {

// Flat little-endian matrix container with a 16-byte header:
//   bytes 0..3   magic (4 ASCII chars)
//   bytes 4..7   uint32 version
//   bytes 8..11  uint32 rows
//   bytes 12..15 uint32 cols
// followed by rows*cols values, row-major. Version 1 stores float32,
// version 2 stores float64.
enum class BinaryPrecision : std::uint32_t { kFloat32 = 1, kFloat64 = 2 };

std::string EncodeMatrix(const Matrix& m, std::string_view magic,
                         BinaryPrecision precision);
Matrix DecodeMatrix(std::string_view bytes, std::string_view magic);

void WriteMatrixFile(const std::filesystem::path& path, const Matrix& m,
                     std::string_view magic, BinaryPrecision precision);
Matrix ReadMatrixFile(const std::filesystem::path& path,
                      std::string_view magic);

std::string ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path, std::string_view bytes);

// Little-endian scalar helpers shared by the WAV and checkpoint codecs.
void AppendU16(std::string* out, std::uint16_t v);
void AppendU32(std::string* out, std::uint32_t v);
void AppendU64(std::string* out, std::uint64_t v);
void AppendF32(std::string* out, float v);
std::uint16_t LoadU16(std::string_view bytes, std::size_t offset);
std::uint32_t LoadU32(std::string_view bytes, std::size_t offset);
std::uint64_t LoadU64(std::string_view bytes, std::size_t offset);
float LoadF32(std::string_view bytes, std::size_t offset);

}  // namespace prosodia

#endif  // PROSODIA_COMMON_BINARY_IO_H_
