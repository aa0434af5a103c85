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

#ifndef COREF_INFERENCE_H_
#define COREF_INFERENCE_H_

#include <span>
#include <vector>

#include "coref/corpus.h"
#include "coref/s2e_head.h"
#include "coref/tensor.h"

namespace coref {

struct InferenceConfig {
  double lambda = 0.4;       // fraction of tokens kept as mention candidates
  int max_span_length = 30;  // l
};

// k = max(1, floor(lambda * n)), capped by the number of valid spans.
int NumCandidates(double lambda, int num_tokens, int available);

// Spans of length <= max_length that contain no synthetic token, canonical
// order.
std::vector<Span> MentionableSpans(const Document &doc, int max_length);

// Retained mention candidates in canonical order.
struct CandidateSet {
  std::vector<Span> spans;
  Vector mention_scores;  // parallel to spans

  int k() const { return static_cast<int>(spans.size()); }
  // Position of `span` in spans, or -1.
  int IndexOf(const Span &span) const;
};

// Top-k spans by score (ties: earlier canonical span wins), re-sorted into
// canonical order. No overlap filtering. Throws DomainError on an empty
// input or lambda outside (0, 1].
CandidateSet PruneMentions(std::span<const Span> spans,
                           std::span<const double> scores, double lambda,
                           int num_tokens);

// Retained spans strictly before q in canonical order.
std::vector<Span> CandidateAntecedents(const Span &q,
                                       const CandidateSet &candidates);

// P(a = c | q) over the null antecedent and the preceding candidates.
struct AntecedentDistribution {
  Span query;
  std::vector<Span> candidates;
  // probabilities[0] is the null antecedent; probabilities[i + 1] belongs to
  // candidates[i].
  std::vector<double> probabilities;
};

// Softmax over {0 (null)} u scores, shifted by the maximum. `out` has
// scores.size() + 1 entries.
void SoftmaxWithNull(std::span<const double> scores, std::span<double> out);

AntecedentDistribution ComputeAntecedentDistribution(
    const Span &q, std::span<const Span> candidates,
    std::span<const double> scores);

inline constexpr int kNullAntecedent = -1;

// Union-find over query -> antecedent links (kNullAntecedent links are
// ignored); clusters with at least two spans are returned.
// links[q] indexes into spans and must be < q.
ClusterSet DecodeClusters(std::span<const Span> spans,
                          std::span<const int> links);

// Forward pass of the start-to-end head over one document.
struct S2eForward {
  CandidateSet candidates;
  // Row q, column c < q: f_a(c, q). Other entries are zero.
  Matrix antecedent_scores;
  // Row q: column 0 is P(null | q), column c + 1 is P(c | q) for c < q;
  // remaining columns are zero.
  Matrix probabilities;

  // Argmax antecedent per query (kNullAntecedent for null); ties go to the
  // null antecedent, then to the earlier candidate.
  std::vector<int> BestAntecedents() const;
};

// Mention scoring over all spans, pruning, and antecedent scoring over the
// retained candidates. m^s/m^e are released before antecedent scoring and
// a^s/a^e are only formed for the candidates' boundary tokens.
S2eForward ForwardS2e(const Document &doc, const Matrix &x,
                      const S2eParams &params, const InferenceConfig &config);

// Forward pass with a fixed candidate list (canonical order).
S2eForward ForwardS2eWithCandidates(const Matrix &x, const S2eParams &params,
                                    std::span<const Span> candidates);

ClusterSet Predict(const Document &doc, const Matrix &x,
                   const S2eParams &params, const InferenceConfig &config);

}  // namespace coref

#endif  // COREF_INFERENCE_H_
