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

#ifndef COREF_BINARY_IO_H_
#define COREF_BINARY_IO_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

namespace coref {

// Little-endian byte buffer writer with a running CRC-32 (IEEE/zlib).
class ByteWriter {
 public:
  void PutBytes(std::string_view bytes);
  void PutU16(std::uint16_t value);
  void PutU32(std::uint32_t value);
  void PutF32(float value);
  void PutF64(double value);

  const std::string &bytes() const { return bytes_; }
  // CRC-32 of everything written so far.
  std::uint32_t Crc() const;

 private:
  std::string bytes_;
};

// Reads little-endian values from a byte view; throws FormatError(kTruncated)
// when the input runs out.
class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view GetBytes(std::size_t count);
  std::uint16_t GetU16();
  std::uint32_t GetU32();
  float GetF32();
  double GetF64();

  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::uint32_t Crc32(std::string_view bytes);

// Whole-file helpers; throw FormatError(kIo) on failure.
std::string ReadFileBytes(const std::string &path);
void WriteFileBytes(const std::string &path, std::string_view bytes);

}  // namespace coref

#endif  // COREF_BINARY_IO_H_
