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

#ifndef COREF_CORPUS_H_
#define COREF_CORPUS_H_

#include <compare>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace coref {

// Inclusive token span [start, end]. Canonical order is lexicographic on
// (start, end).
struct Span {
  int start = 0;
  int end = 0;

  int length() const { return end - start + 1; }
  bool Contains(const Span &other) const {
    return start <= other.start && other.end <= end;
  }
  bool Intersects(const Span &other) const {
    return start <= other.end && other.start <= end;
  }

  auto operator<=>(const Span &) const = default;
};

std::string ToString(const Span &span);

struct Token {
  int index = 0;
  std::string text;
  std::optional<std::string> speaker;
  // Inserted speaker-metadata token; never part of a mention.
  bool synthetic = false;
  // Sentence number within the document part (CoNLL blank-line breaks).
  int sentence = 0;
};

using Cluster = std::vector<Span>;

// OntoNotes genre ids, keyed by the two-letter doc id prefix.
inline constexpr int kNumGenres = 8;
inline constexpr int kOtherGenre = 7;
int GenreId(std::string_view name);
std::string GenreName(int id);
int GenreFromDocId(std::string_view doc_id);

struct Document {
  std::string doc_key;
  int part = 0;
  std::vector<Token> tokens;
  int genre = kOtherGenre;
  std::vector<Cluster> gold_clusters;

  int size() const { return static_cast<int>(tokens.size()); }
  bool HasSyntheticTokens() const;
};

// A partition of mentions into entity clusters. Spans inside each cluster are
// sorted canonically and clusters are ordered by their first span.
class ClusterSet {
 public:
  ClusterSet() = default;
  // Throws DomainError if clusters overlap or any has fewer than 2 spans.
  explicit ClusterSet(std::vector<Cluster> clusters);

  const std::vector<Cluster> &clusters() const { return clusters_; }
  int size() const { return static_cast<int>(clusters_.size()); }
  bool empty() const { return clusters_.empty(); }
  std::vector<Span> Mentions() const;

  bool operator==(const ClusterSet &) const = default;

 private:
  std::vector<Cluster> clusters_;
};

// Sorts spans within clusters, removes duplicate spans and orders clusters by
// their smallest span.
std::vector<Cluster> Canonicalize(std::vector<Cluster> clusters);

// All spans with length <= max_length in canonical order.
// Count is sum_{i<n} min(max_length, n - i).
std::vector<Span> EnumerateSpans(int num_tokens, int max_length);
long long CountSpans(int num_tokens, int max_length);

// Position of `span` in EnumerateSpans(num_tokens, max_length). Throws
// DomainError when the span is out of range or longer than max_length.
long long SpanOrderIndex(const Span &span, int num_tokens, int max_length);

struct Violation {
  enum class Severity { kWarning, kError };
  Severity severity = Severity::kError;
  std::string message;
};

// Empty iff every document invariant holds.
std::vector<Violation> ValidateDocument(const Document &doc);
bool HasErrors(const std::vector<Violation> &violations);

}  // namespace coref

#endif  // COREF_CORPUS_H_
