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

#include "coref/embedding_io.h"

#include <cmath>
#include <iterator>
#include <limits>
#include <sstream>

#include "coref/binary_io.h"
#include "coref/errors.h"

namespace coref {
namespace {

constexpr int kWindow = 2;

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t Fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Uniform in [-1, 1) from the top 53 bits.
double ToUnit(std::uint64_t h) {
  return 2.0 * (static_cast<double>(h >> 11) * 0x1.0p-53) - 1.0;
}

}  // namespace

std::string EncodeDocemb(const EmbeddingMatrix &m) {
  if (m.n() < 1 || m.d() < 1) {
    throw FormatError(FormatError::Kind::kInvalid,
                      "docemb requires n >= 1 and d >= 1");
  }
  if (!AllFinite(m.values.values())) {
    throw NumericError("docemb " + m.doc_key + ": non-finite value");
  }
  ByteWriter w;
  w.PutBytes(std::string_view(kDocembMagic, 4));
  w.PutU16(kDocembVersion);
  w.PutU32(static_cast<std::uint32_t>(m.doc_key.size()));
  w.PutBytes(m.doc_key);
  w.PutU32(static_cast<std::uint32_t>(m.n()));
  w.PutU32(static_cast<std::uint32_t>(m.d()));
  for (double v : m.values.values()) w.PutF32(static_cast<float>(v));
  const std::uint32_t crc = w.Crc();
  w.PutU32(crc);
  return w.bytes();
}

EmbeddingMatrix DecodeDocemb(std::string_view bytes) {
  using Kind = FormatError::Kind;
  ByteReader r(bytes);
  if (r.GetBytes(4) != std::string_view(kDocembMagic, 4)) {
    throw FormatError(Kind::kBadMagic, "not a docemb file (bad magic)");
  }
  const std::uint16_t version = r.GetU16();
  if (version != kDocembVersion) {
    throw FormatError(Kind::kUnsupportedVersion,
                      "unsupported docemb version " + std::to_string(version));
  }
  EmbeddingMatrix m;
  const std::uint32_t key_len = r.GetU32();
  m.doc_key = std::string(r.GetBytes(key_len));
  const std::uint32_t n = r.GetU32();
  const std::uint32_t d = r.GetU32();
  if (n == 0 || d == 0 || n > std::numeric_limits<int>::max() ||
      d > std::numeric_limits<int>::max()) {
    throw FormatError(Kind::kInvalid, "docemb has invalid shape " +
                                          std::to_string(n) + "x" +
                                          std::to_string(d));
  }
  const std::uint64_t payload = static_cast<std::uint64_t>(n) * d * 4;
  if (r.remaining() < payload + 4) {
    throw FormatError(Kind::kTruncated, "docemb payload truncated");
  }
  const std::size_t crc_at = r.position() + payload;
  const std::uint32_t expected = Crc32(bytes.substr(0, crc_at));
  m.values = Matrix(static_cast<int>(n), static_cast<int>(d));
  for (double &v : m.values.values()) v = static_cast<double>(r.GetF32());
  if (r.GetU32() != expected) {
    throw FormatError(Kind::kChecksum, "docemb checksum mismatch");
  }
  if (r.remaining() != 0) {
    throw FormatError(Kind::kInvalid, "trailing bytes after docemb checksum");
  }
  return m;
}

std::size_t WriteDocemb(const EmbeddingMatrix &m, std::ostream &out) {
  const std::string bytes = EncodeDocemb(m);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError(FormatError::Kind::kIo, "docemb write failed");
  return bytes.size();
}

EmbeddingMatrix ReadDocemb(std::istream &in) {
  const std::string bytes{std::istreambuf_iterator<char>(in),
                          std::istreambuf_iterator<char>()};
  return DecodeDocemb(bytes);
}

std::string DocembFileName(const std::string &doc_key) {
  std::string name = doc_key;
  for (char &c : name) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                      (c >= '0' && c <= '9') || c == '.' || c == '_' ||
                      c == '-';
    if (!keep) c = '_';
  }
  return name + ".docemb";
}

void WriteDocembFile(const std::string &path, const EmbeddingMatrix &m) {
  WriteFileBytes(path, EncodeDocemb(m));
}

EmbeddingMatrix ReadDocembFile(const std::string &path) {
  return DecodeDocemb(ReadFileBytes(path));
}

EmbeddingMatrix SyntheticEmbed(const Document &doc, int d, std::uint64_t seed) {
  if (d < 1) throw DomainError("SyntheticEmbed requires d >= 1");
  const int n = doc.size();
  std::vector<std::uint64_t> text_hash(n);
  for (int i = 0; i < n; ++i) text_hash[i] = Fnv1a(doc.tokens[i].text);

  EmbeddingMatrix m;
  m.doc_key = doc.doc_key;
  m.values = Matrix(n, d);
  const std::uint64_t seed_hash = SplitMix64(seed);
  for (int i = 0; i < n; ++i) {
    auto row = m.values.row(i);
    for (int offset = -kWindow; offset <= kWindow; ++offset) {
      const int p = i + offset;
      // Padding past either end is keyed by its distance to the boundary.
      const std::uint64_t context =
          p < 0 ? SplitMix64(0x5a5a0000ULL + static_cast<std::uint64_t>(-p))
          : p >= n
              ? SplitMix64(0xa5a50000ULL + static_cast<std::uint64_t>(p - n))
              : text_hash[p];
      const std::uint64_t base = SplitMix64(
          SplitMix64(seed_hash ^ context) ^
          static_cast<std::uint64_t>(offset + kWindow + 1));
      // Centre token weighted 4, neighbours 1; total weight 8 keeps values in
      // [-1, 1] and every operation exact up to one rounding per add.
      const double weight = offset == 0 ? 4.0 : 1.0;
      for (int j = 0; j < d; ++j) {
        row[j] += weight * ToUnit(SplitMix64(base ^ static_cast<std::uint64_t>(j)));
      }
    }
    for (int j = 0; j < d; ++j) row[j] /= 8.0;
  }
  return m;
}

}  // namespace coref
