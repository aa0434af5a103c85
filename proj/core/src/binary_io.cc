// Copyright 2026 The s2e-coref Authors.
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

#include "coref/binary_io.h"

#include <zlib.h>

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "coref/errors.h"

namespace coref {
namespace {

static_assert(std::endian::native == std::endian::little,
              "binary formats assume a little-endian host");

template <class T>
void Append(std::string &out, T value) {
  char raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  out.append(raw, sizeof(T));
}

}  // namespace

std::uint32_t Crc32(std::string_view bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed large buffers in chunks.
  const char *p = bytes.data();
  std::size_t left = bytes.size();
  while (left > 0) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(left, 1u << 30));
    crc = crc32(crc, reinterpret_cast<const Bytef *>(p), chunk);
    p += chunk;
    left -= chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

void ByteWriter::PutBytes(std::string_view bytes) { bytes_.append(bytes); }
void ByteWriter::PutU16(std::uint16_t value) { Append(bytes_, value); }
void ByteWriter::PutU32(std::uint32_t value) { Append(bytes_, value); }
void ByteWriter::PutF32(float value) { Append(bytes_, value); }
void ByteWriter::PutF64(double value) { Append(bytes_, value); }
std::uint32_t ByteWriter::Crc() const { return Crc32(bytes_); }

std::string_view ByteReader::GetBytes(std::size_t count) {
  if (remaining() < count) {
    throw FormatError(FormatError::Kind::kTruncated,
                      "unexpected end of data at byte " + std::to_string(pos_));
  }
  std::string_view out = bytes_.substr(pos_, count);
  pos_ += count;
  return out;
}

template <class T>
static T Decode(std::string_view raw) {
  T value;
  std::memcpy(&value, raw.data(), sizeof(T));
  return value;
}

std::uint16_t ByteReader::GetU16() { return Decode<std::uint16_t>(GetBytes(2)); }
std::uint32_t ByteReader::GetU32() { return Decode<std::uint32_t>(GetBytes(4)); }
float ByteReader::GetF32() { return Decode<float>(GetBytes(4)); }
double ByteReader::GetF64() { return Decode<double>(GetBytes(8)); }

std::string ReadFileBytes(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(FormatError::Kind::kIo, "cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

void WriteFileBytes(const std::string &path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError(FormatError::Kind::kIo, "cannot create " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError(FormatError::Kind::kIo, "write failed: " + path);
}

}  // namespace coref
