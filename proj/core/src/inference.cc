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

#include "coref/inference.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "coref/errors.h"

namespace coref {
namespace {

int Find(std::vector<int> &parent, int x) {
  while (parent[x] != x) {
    parent[x] = parent[parent[x]];
    x = parent[x];
  }
  return x;
}

// Fills antecedent scores and probabilities for `forward.candidates`, whose
// mention scores are already set.
void ScoreAntecedents(const Matrix &x, const S2eParams &params,
                      S2eForward &forward) {
  const CandidateSet &cands = forward.candidates;
  const int k = cands.k();
  std::vector<int> starts(k), ends(k);
  for (int i = 0; i < k; ++i) {
    starts[i] = cands.spans[i].start;
    ends[i] = cands.spans[i].end;
  }
  {
    const Matrix start_rows =
        ProjectGatheredRows(x, starts, params.antecedent_start_proj);
    const Matrix end_rows =
        ProjectGatheredRows(x, ends, params.antecedent_end_proj);
    forward.antecedent_scores = AntecedentScoresBatch(start_rows, end_rows, params);
  }
  forward.probabilities = Matrix(k, k + 1);
  for (int q = 0; q < k; ++q) {
    auto row = forward.probabilities.row(q);
    // Logits go into columns 1..q, then the row is normalized in place.
    for (int c = 0; c < q; ++c) {
      row[c + 1] = cands.mention_scores[c] + cands.mention_scores[q] +
                   forward.antecedent_scores(q, c);
    }
    SoftmaxWithNull(row.subspan(1, q), row.first(q + 1));
  }
}

}  // namespace

int NumCandidates(double lambda, int num_tokens, int available) {
  // The epsilon absorbs representation error in products like 0.29 * 100.
  const int k = std::max(
      1, static_cast<int>(std::floor(lambda * num_tokens + 1e-9)));
  return std::min(k, available);
}

std::vector<Span> MentionableSpans(const Document &doc, int max_length) {
  std::vector<Span> spans = EnumerateSpans(doc.size(), max_length);
  if (!doc.HasSyntheticTokens()) return spans;
  std::vector<int> synthetic_before(doc.size() + 1, 0);
  for (int i = 0; i < doc.size(); ++i) {
    synthetic_before[i + 1] =
        synthetic_before[i] + (doc.tokens[i].synthetic ? 1 : 0);
  }
  std::erase_if(spans, [&](const Span &s) {
    return synthetic_before[s.end + 1] != synthetic_before[s.start];
  });
  return spans;
}

int CandidateSet::IndexOf(const Span &span) const {
  auto it = std::lower_bound(spans.begin(), spans.end(), span);
  if (it == spans.end() || *it != span) return -1;
  return static_cast<int>(it - spans.begin());
}

CandidateSet PruneMentions(std::span<const Span> spans,
                           std::span<const double> scores, double lambda,
                           int num_tokens) {
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw DomainError("lambda must lie in (0, 1]");
  }
  if (spans.size() != scores.size()) {
    throw DimensionError("PruneMentions: spans and scores differ in length");
  }
  if (spans.empty()) throw DomainError("empty candidate set");
  const int k = NumCandidates(lambda, num_tokens, static_cast<int>(spans.size()));

  std::vector<int> order(spans.size());
  std::iota(order.begin(), order.end(), 0);
  // Ties resolve to the earlier canonical span.
  std::partial_sort(order.begin(), order.begin() + k, order.end(),
                    [&](int a, int b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return spans[a] < spans[b];
                    });
  order.resize(k);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return spans[a] < spans[b]; });

  CandidateSet out;
  out.spans.reserve(k);
  out.mention_scores = Vector(k);
  for (int i = 0; i < k; ++i) {
    out.spans.push_back(spans[order[i]]);
    out.mention_scores[i] = scores[order[i]];
  }
  return out;
}

std::vector<Span> CandidateAntecedents(const Span &q,
                                       const CandidateSet &candidates) {
  auto end = std::lower_bound(candidates.spans.begin(), candidates.spans.end(), q);
  return {candidates.spans.begin(), end};
}

void SoftmaxWithNull(std::span<const double> scores, std::span<double> out) {
  if (out.size() != scores.size() + 1) {
    throw DimensionError("SoftmaxWithNull: output must have one extra slot");
  }
  double top = 0.0;  // the null antecedent's score
  for (double s : scores) top = std::max(top, s);
  // Walk backwards so that `out` may alias `scores` shifted by one slot.
  double total = 0.0;
  for (std::size_t i = scores.size(); i > 0; --i) {
    total += (out[i] = std::exp(scores[i - 1] - top));
  }
  total += (out[0] = std::exp(-top));
  for (double &p : out) p /= total;
}

AntecedentDistribution ComputeAntecedentDistribution(
    const Span &q, std::span<const Span> candidates,
    std::span<const double> scores) {
  if (candidates.size() != scores.size()) {
    throw DimensionError("one score per candidate antecedent required");
  }
  if (!AllFinite(scores)) throw NumericError("non-finite antecedent score");
  AntecedentDistribution dist;
  dist.query = q;
  dist.candidates.assign(candidates.begin(), candidates.end());
  dist.probabilities.resize(scores.size() + 1);
  SoftmaxWithNull(scores, dist.probabilities);
  return dist;
}

ClusterSet DecodeClusters(std::span<const Span> spans,
                          std::span<const int> links) {
  if (spans.size() != links.size()) {
    throw DimensionError("DecodeClusters: one link per span required");
  }
  const int k = static_cast<int>(spans.size());
  std::vector<int> parent(k);
  std::iota(parent.begin(), parent.end(), 0);
  std::vector<bool> linked(k, false);
  for (int q = 0; q < k; ++q) {
    const int a = links[q];
    if (a == kNullAntecedent) continue;
    if (a < 0 || a >= q) {
      throw DomainError("link from " + std::to_string(q) + " to " +
                        std::to_string(a) + " does not point backwards");
    }
    linked[q] = linked[a] = true;
    const int ra = Find(parent, a), rq = Find(parent, q);
    if (ra != rq) parent[std::max(ra, rq)] = std::min(ra, rq);
  }
  std::map<int, Cluster> by_root;
  for (int i = 0; i < k; ++i) {
    if (linked[i]) by_root[Find(parent, i)].push_back(spans[i]);
  }
  std::vector<Cluster> clusters;
  for (auto &[root, cluster] : by_root) clusters.push_back(std::move(cluster));
  return ClusterSet(std::move(clusters));
}

std::vector<int> S2eForward::BestAntecedents() const {
  const int k = candidates.k();
  std::vector<int> links(k, kNullAntecedent);
  for (int q = 0; q < k; ++q) {
    auto row = probabilities.row(q);
    int best = 0;
    for (int col = 1; col <= q; ++col) {
      if (row[col] > row[best]) best = col;
    }
    links[q] = best == 0 ? kNullAntecedent : best - 1;
  }
  return links;
}

S2eForward ForwardS2e(const Document &doc, const Matrix &x,
                      const S2eParams &params, const InferenceConfig &config) {
  if (x.rows() != doc.size()) {
    throw DimensionError("embeddings have " + std::to_string(x.rows()) +
                         " rows, document has " + std::to_string(doc.size()) +
                         " tokens");
  }
  if (config.max_span_length < 1) {
    throw DomainError("max_span_length must be >= 1");
  }
  S2eForward forward;
  {
    MentionScoreTable table =
        MentionScoresStreaming(x, config.max_span_length, params);
    if (doc.HasSyntheticTokens()) {
      // Compact in place: spans touching a synthetic token are never
      // mentions.
      std::vector<int> synthetic_before(doc.size() + 1, 0);
      for (int i = 0; i < doc.size(); ++i) {
        synthetic_before[i + 1] =
            synthetic_before[i] + (doc.tokens[i].synthetic ? 1 : 0);
      }
      std::size_t kept = 0;
      for (std::size_t i = 0; i < table.spans.size(); ++i) {
        const Span &s = table.spans[i];
        if (synthetic_before[s.end + 1] != synthetic_before[s.start]) continue;
        table.spans[kept] = s;
        table.scores[kept] = table.scores[i];
        ++kept;
      }
      table.spans.resize(kept);
      table.scores.resize(kept);
    }
    forward.candidates =
        PruneMentions(table.spans, table.scores, config.lambda, doc.size());
  }
  ScoreAntecedents(x, params, forward);
  return forward;
}

S2eForward ForwardS2eWithCandidates(const Matrix &x, const S2eParams &params,
                                    std::span<const Span> candidates) {
  const int k = static_cast<int>(candidates.size());
  S2eForward forward;
  forward.candidates.spans.assign(candidates.begin(), candidates.end());
  forward.candidates.mention_scores = Vector(k);
  std::vector<int> starts(k), ends(k);
  for (int i = 0; i < k; ++i) {
    const Span &s = candidates[i];
    if (s.start < 0 || s.start > s.end || s.end >= x.rows()) {
      throw DomainError("candidate " + ToString(s) + " out of range");
    }
    if (i > 0 && !(candidates[i - 1] < s)) {
      throw DomainError("candidates must be in strictly increasing order");
    }
    starts[i] = s.start;
    ends[i] = s.end;
  }
  const Matrix ms = ProjectGatheredRows(x, starts, params.mention_start_proj);
  const Matrix me = ProjectGatheredRows(x, ends, params.mention_end_proj);
  for (int i = 0; i < k; ++i) {
    forward.candidates.mention_scores[i] =
        Dot(params.mention_start_weight.values(), ms.row(i)) +
        Dot(params.mention_end_weight.values(), me.row(i)) +
        Bilinear(ms.row(i), params.mention_bilinear, me.row(i));
  }
  ScoreAntecedents(x, params, forward);
  return forward;
}

ClusterSet Predict(const Document &doc, const Matrix &x,
                   const S2eParams &params, const InferenceConfig &config) {
  const S2eForward forward = ForwardS2e(doc, x, params, config);
  return DecodeClusters(forward.candidates.spans, forward.BestAntecedents());
}

}  // namespace coref
