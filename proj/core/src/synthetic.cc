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

#include "coref/synthetic.h"

#include "coref/errors.h"

namespace coref {
namespace {

constexpr const char *kFiller[] = {"the", "a",    "of",   "and",  "to",
                                   "in",  "said", "was",  "that", "with",
                                   "for", "on",   "were", "by",   "after"};
constexpr const char *kSpeakers[] = {"Ann Lee", "Bo", "Carla Diaz Ruiz"};

bool Crosses(const Span &a, const Span &b) {
  return a.Intersects(b) && !a.Contains(b) && !b.Contains(a);
}

}  // namespace

Document RandomDocument(Rng &rng, const SyntheticDocOptions &options,
                        const std::string &doc_key) {
  if (options.min_tokens < 1 || options.min_tokens > options.max_tokens ||
      options.min_clusters < 0 || options.min_clusters > options.max_clusters ||
      options.min_mentions < 2 || options.min_mentions > options.max_mentions ||
      options.max_mention_length < 1) {
    throw DomainError("inconsistent synthetic document options");
  }
  Document doc;
  doc.doc_key = doc_key;
  doc.genre = GenreFromDocId(doc_key);
  const int n = rng.Int(options.min_tokens, options.max_tokens);
  int sentence = 0;
  int speaker = 0;
  for (int i = 0; i < n; ++i) {
    if (i > 0 && rng.Unit() < 0.12) {
      ++sentence;
      if (rng.Unit() < options.speaker_change_rate) speaker = (speaker + 1) % 3;
    }
    Token t;
    t.index = i;
    t.text = kFiller[rng.Below(std::size(kFiller))];
    t.sentence = sentence;
    if (options.speaker_change_rate > 0.0) t.speaker = kSpeakers[speaker];
    doc.tokens.push_back(std::move(t));
  }

  const int num_clusters = rng.Int(options.min_clusters, options.max_clusters);
  std::vector<Span> taken;
  std::vector<Cluster> clusters(num_clusters);
  for (int c = 0; c < num_clusters; ++c) {
    const int want = rng.Int(options.min_mentions, options.max_mentions);
    for (int attempt = 0;
         static_cast<int>(clusters[c].size()) < want && attempt < 200;
         ++attempt) {
      Span span;
      if (!taken.empty() && rng.Unit() < options.nesting_rate) {
        const Span outer = taken[rng.Below(taken.size())];
        span.start = rng.Int(outer.start, outer.end);
        span.end = rng.Int(span.start, outer.end);
      } else {
        const int len = rng.Int(1, std::min(options.max_mention_length, n));
        span.start = rng.Int(0, n - len);
        span.end = span.start + len - 1;
      }
      // Mentions stay inside one speaker turn.
      bool ok = doc.tokens[span.start].speaker == doc.tokens[span.end].speaker;
      for (const Span &other : taken) {
        if (other == span || Crosses(other, span)) {
          ok = false;
          break;
        }
      }
      // Nested spans must belong to different clusters.
      for (const Span &mine : clusters[c]) {
        if (mine.Intersects(span)) ok = false;
      }
      if (!ok) continue;
      taken.push_back(span);
      clusters[c].push_back(span);
    }
    if (static_cast<int>(clusters[c].size()) < options.min_mentions) {
      throw DomainError("could not place " + std::to_string(want) +
                        " mentions in a " + std::to_string(n) +
                        "-token document");
    }
  }
  // Mention words make clusters visible to a context-window embedder.
  for (int c = 0; c < num_clusters; ++c) {
    for (const Span &span : clusters[c]) {
      doc.tokens[span.end].text = "entity" + std::to_string(c);
      if (span.length() > 1) doc.tokens[span.start].text = "the";
    }
  }
  doc.gold_clusters = ClusterSet(std::move(clusters)).clusters();
  return doc;
}

std::vector<Document> SyntheticCorpus(int count, std::uint64_t seed,
                                      const SyntheticDocOptions &options) {
  Rng rng(seed);
  std::vector<Document> docs;
  for (int i = 0; i < count; ++i) {
    docs.push_back(RandomDocument(rng, options, "nw/synthetic_" + std::to_string(i)));
  }
  return docs;
}

}  // namespace coref
