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

#include "prosodia/common/binary_io.h"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "prosodia/common/error.h"

namespace prosodia {

static_assert(std::endian::native == std::endian::little,
              "binary codecs assume a little-endian host");

void AppendU16(std::string* out, std::uint16_t v) {
  out->append(reinterpret_cast<const char*>(&v), sizeof(v));
}
void AppendU32(std::string* out, std::uint32_t v) {
  out->append(reinterpret_cast<const char*>(&v), sizeof(v));
}
void AppendU64(std::string* out, std::uint64_t v) {
  out->append(reinterpret_cast<const char*>(&v), sizeof(v));
}
void AppendF32(std::string* out, float v) {
  out->append(reinterpret_cast<const char*>(&v), sizeof(v));
}

namespace {

template <typename T>
T Load(std::string_view bytes, std::size_t offset) {
  if (offset + sizeof(T) > bytes.size()) throw Error("truncated binary data");
  T v;
  std::memcpy(&v, bytes.data() + offset, sizeof(T));
  return v;
}

}  // namespace

std::uint16_t LoadU16(std::string_view b, std::size_t o) {
  return Load<std::uint16_t>(b, o);
}
std::uint32_t LoadU32(std::string_view b, std::size_t o) {
  return Load<std::uint32_t>(b, o);
}
std::uint64_t LoadU64(std::string_view b, std::size_t o) {
  return Load<std::uint64_t>(b, o);
}
float LoadF32(std::string_view b, std::size_t o) { return Load<float>(b, o); }

std::string EncodeMatrix(const Matrix& m, std::string_view magic,
                         BinaryPrecision precision) {
  if (magic.size() != 4) throw Error("binary magic must be 4 characters");
  std::string out(magic);
  AppendU32(&out, static_cast<std::uint32_t>(precision));
  AppendU32(&out, static_cast<std::uint32_t>(m.rows()));
  AppendU32(&out, static_cast<std::uint32_t>(m.cols()));
  const std::size_t n = static_cast<std::size_t>(m.size());
  if (precision == BinaryPrecision::kFloat32) {
    out.reserve(out.size() + n * 4);
    for (std::size_t i = 0; i < n; ++i) AppendF32(&out, float(m.data()[i]));
  } else {
    out.append(reinterpret_cast<const char*>(m.data()), n * sizeof(double));
  }
  return out;
}

Matrix DecodeMatrix(std::string_view bytes, std::string_view magic) {
  if (bytes.size() < 16 || bytes.substr(0, 4) != magic) {
    throw Error("bad binary header: expected magic '" + std::string(magic) +
                "'");
  }
  auto version = LoadU32(bytes, 4);
  auto rows = LoadU32(bytes, 8);
  auto cols = LoadU32(bytes, 12);
  std::size_t n = std::size_t(rows) * cols;
  Matrix m(rows, cols);
  if (version == std::uint32_t(BinaryPrecision::kFloat32)) {
    if (bytes.size() != 16 + n * 4) throw Error("binary payload size mismatch");
    for (std::size_t i = 0; i < n; ++i) m.data()[i] = LoadF32(bytes, 16 + 4 * i);
  } else if (version == std::uint32_t(BinaryPrecision::kFloat64)) {
    if (bytes.size() != 16 + n * 8) throw Error("binary payload size mismatch");
    std::memcpy(m.data(), bytes.data() + 16, n * sizeof(double));
  } else {
    throw Error("unsupported binary version " + std::to_string(version));
  }
  return m;
}

std::string ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void WriteFileBytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), std::streamsize(bytes.size()));
  if (!out) throw Error("write failed: " + path.string());
}

void WriteMatrixFile(const std::filesystem::path& path, const Matrix& m,
                     std::string_view magic, BinaryPrecision precision) {
  WriteFileBytes(path, EncodeMatrix(m, magic, precision));
}

Matrix ReadMatrixFile(const std::filesystem::path& path,
                      std::string_view magic) {
  return DecodeMatrix(ReadFileBytes(path), magic);
}

}  // namespace prosodia
