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

#ifndef COREF_EMBEDDING_IO_H_
#define COREF_EMBEDDING_IO_H_

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "coref/corpus.h"
#include "coref/tensor.h"

namespace coref {

// Per-token contextual vectors for one document: values is n x d.
struct EmbeddingMatrix {
  std::string doc_key;
  Matrix values;

  int n() const { return values.rows(); }
  int d() const { return values.cols(); }
};

// docemb layout, little-endian:
//   "DEMB" | u16 version=1 | u32 key length | key bytes | u32 n | u32 d |
//   n*d f32 row-major | u32 CRC-32
// The CRC covers every byte before it.
inline constexpr char kDocembMagic[] = "DEMB";
inline constexpr std::uint16_t kDocembVersion = 1;

// Returns the number of bytes written. Values are narrowed to 32 bits.
std::size_t WriteDocemb(const EmbeddingMatrix &m, std::ostream &out);
// Values are promoted to 64 bits. Throws FormatError.
EmbeddingMatrix ReadDocemb(std::istream &in);

std::string EncodeDocemb(const EmbeddingMatrix &m);
EmbeddingMatrix DecodeDocemb(std::string_view bytes);

// "<doc_key with every char outside [A-Za-z0-9._-] replaced by '_'>.docemb"
std::string DocembFileName(const std::string &doc_key);

void WriteDocembFile(const std::string &path, const EmbeddingMatrix &m);
EmbeddingMatrix ReadDocembFile(const std::string &path);

// Deterministic stand-in for an encoder. Row i depends only on the token
// texts in the window [i-2, i+2] (with distinct padding past either end),
// on d and on the seed. Values lie in [-1, 1]. Integer hashing only.
EmbeddingMatrix SyntheticEmbed(const Document &doc, int d, std::uint64_t seed);

}  // namespace coref

#endif  // COREF_EMBEDDING_IO_H_
