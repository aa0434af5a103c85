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

#include "coref/corpus.h"

#include <algorithm>
#include <array>
#include <map>

#include "coref/errors.h"

namespace coref {
namespace {

constexpr std::array<std::string_view, kNumGenres - 1> kGenres = {
    "bc", "bn", "mz", "nw", "pt", "tc", "wb"};

}  // namespace

std::string ToString(const Span &span) {
  return "(" + std::to_string(span.start) + "," + std::to_string(span.end) +
         ")";
}

int GenreId(std::string_view name) {
  for (std::size_t i = 0; i < kGenres.size(); ++i) {
    if (kGenres[i] == name) return static_cast<int>(i);
  }
  return kOtherGenre;
}

std::string GenreName(int id) {
  if (id >= 0 && id < static_cast<int>(kGenres.size())) {
    return std::string(kGenres[id]);
  }
  return "other";
}

int GenreFromDocId(std::string_view doc_id) {
  return GenreId(doc_id.substr(0, 2));
}

bool Document::HasSyntheticTokens() const {
  return std::any_of(tokens.begin(), tokens.end(),
                     [](const Token &t) { return t.synthetic; });
}

std::vector<Cluster> Canonicalize(std::vector<Cluster> clusters) {
  for (auto &cluster : clusters) {
    std::sort(cluster.begin(), cluster.end());
    cluster.erase(std::unique(cluster.begin(), cluster.end()), cluster.end());
  }
  clusters.erase(std::remove_if(clusters.begin(), clusters.end(),
                                [](const Cluster &c) { return c.empty(); }),
                 clusters.end());
  std::sort(clusters.begin(), clusters.end(),
            [](const Cluster &a, const Cluster &b) { return a[0] < b[0]; });
  return clusters;
}

ClusterSet::ClusterSet(std::vector<Cluster> clusters)
    : clusters_(Canonicalize(std::move(clusters))) {
  std::map<Span, int> owner;
  for (std::size_t c = 0; c < clusters_.size(); ++c) {
    if (clusters_[c].size() < 2) {
      throw DomainError("cluster " + std::to_string(c) + " has fewer than 2 "
                        "mentions");
    }
    for (const Span &span : clusters_[c]) {
      if (!owner.emplace(span, static_cast<int>(c)).second) {
        throw DomainError("span " + ToString(span) +
                          " appears in more than one cluster");
      }
    }
  }
}

std::vector<Span> ClusterSet::Mentions() const {
  std::vector<Span> mentions;
  for (const auto &cluster : clusters_) {
    mentions.insert(mentions.end(), cluster.begin(), cluster.end());
  }
  std::sort(mentions.begin(), mentions.end());
  return mentions;
}

long long CountSpans(int num_tokens, int max_length) {
  long long count = 0;
  for (int i = 0; i < num_tokens; ++i) count += std::min(max_length, num_tokens - i);
  return count;
}

std::vector<Span> EnumerateSpans(int num_tokens, int max_length) {
  if (num_tokens < 1 || max_length < 1) {
    throw DomainError("EnumerateSpans requires num_tokens >= 1 and "
                      "max_length >= 1");
  }
  std::vector<Span> spans;
  spans.reserve(static_cast<std::size_t>(CountSpans(num_tokens, max_length)));
  for (int start = 0; start < num_tokens; ++start) {
    const int last = std::min(num_tokens - 1, start + max_length - 1);
    for (int end = start; end <= last; ++end) spans.push_back({start, end});
  }
  return spans;
}

long long SpanOrderIndex(const Span &span, int num_tokens, int max_length) {
  if (span.start < 0 || span.end >= num_tokens || span.start > span.end ||
      span.length() > max_length) {
    throw DomainError("span " + ToString(span) + " outside the domain for n=" +
                      std::to_string(num_tokens) +
                      ", max_length=" + std::to_string(max_length));
  }
  // Starts 0..full-1 contribute max_length spans each; later starts are
  // clipped by the document end.
  const long long full =
      std::min<long long>(span.start, std::max(0, num_tokens - max_length + 1));
  long long index = full * max_length;
  for (long long i = full; i < span.start; ++i) index += num_tokens - i;
  return index + (span.end - span.start);
}

std::vector<Violation> ValidateDocument(const Document &doc) {
  using Severity = Violation::Severity;
  std::vector<Violation> report;
  const int n = doc.size();
  for (int i = 0; i < n; ++i) {
    if (doc.tokens[i].index != i) {
      report.push_back({Severity::kError,
                        "token " + std::to_string(i) + " has index " +
                            std::to_string(doc.tokens[i].index)});
    }
  }
  std::map<Span, int> owner;
  for (std::size_t c = 0; c < doc.gold_clusters.size(); ++c) {
    const Cluster &cluster = doc.gold_clusters[c];
    const std::string where = "cluster " + std::to_string(c);
    if (cluster.size() < 2) {
      report.push_back({Severity::kWarning, where + ": fewer than 2 mentions"});
    }
    for (const Span &span : cluster) {
      const std::string at = where + " span " + ToString(span);
      if (span.start > span.end) {
        report.push_back({Severity::kError, at + ": start > end"});
        continue;
      }
      if (span.start < 0 || span.end >= n) {
        report.push_back({Severity::kError, at + ": out of range"});
        continue;
      }
      for (int t = span.start; t <= span.end; ++t) {
        if (doc.tokens[t].synthetic) {
          report.push_back({Severity::kError, at + ": contains synthetic token " +
                                                  std::to_string(t)});
          break;
        }
      }
      auto [it, inserted] = owner.emplace(span, static_cast<int>(c));
      if (!inserted) {
        report.push_back(
            {Severity::kError,
             it->second == static_cast<int>(c)
                 ? at + ": duplicate span in cluster"
                 : at + ": overlapping clusters (also in cluster " +
                       std::to_string(it->second) + ")"});
      }
    }
  }
  return report;
}

bool HasErrors(const std::vector<Violation> &violations) {
  return std::any_of(violations.begin(), violations.end(), [](const auto &v) {
    return v.severity == Violation::Severity::kError;
  });
}

}  // namespace coref
