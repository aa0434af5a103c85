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

#ifndef COREF_SYNTHETIC_H_
#define COREF_SYNTHETIC_H_

#include <cstdint>
#include <string>
#include <vector>

#include "coref/corpus.h"
#include "coref/random.h"

namespace coref {

// Shape of randomly generated annotated documents.
struct SyntheticDocOptions {
  int min_tokens = 20;
  int max_tokens = 40;
  int min_clusters = 2;
  int max_clusters = 3;
  int min_mentions = 2;  // per cluster
  int max_mentions = 3;
  int max_mention_length = 3;
  // Probability that a mention is placed inside an earlier mention of a
  // different cluster (nesting) instead of on free tokens.
  double nesting_rate = 0.0;
  // When positive, tokens carry speaker labels that change with roughly this
  // probability at each sentence break. Mentions never span a speaker change.
  double speaker_change_rate = 0.0;
};

// A document whose gold clusters satisfy the ClusterSet invariants: clusters
// are disjoint, each has at least two mentions, and spans either nest or do
// not intersect. Throws DomainError when the options cannot be met.
Document RandomDocument(Rng &rng, const SyntheticDocOptions &options,
                        const std::string &doc_key);

// `count` documents keyed "nw/synthetic_<i>", drawn from one generator seeded
// with `seed`.
std::vector<Document> SyntheticCorpus(int count, std::uint64_t seed,
                                      const SyntheticDocOptions &options = {});

}  // namespace coref

#endif  // COREF_SYNTHETIC_H_
