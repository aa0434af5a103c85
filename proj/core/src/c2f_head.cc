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

#include "coref/c2f_head.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "coref/binary_io.h"
#include "coref/errors.h"
#include "coref/inference.h"
#include "coref/random.h"

namespace coref {
namespace {

constexpr std::uint16_t kCheckpointVersion = 1;

double ReluLayer(const Matrix &hidden, const Matrix &out,
                 std::span<const double> input, Vector &scratch) {
  MatVec(hidden, input, scratch);
  double score = 0.0;
  for (int i = 0; i < hidden.rows(); ++i) {
    score += out(i, 0) * std::max(0.0, scratch[i]);
  }
  return score;
}

}  // namespace

C2fParams C2fParams::Zeros(const C2fConfig &config) {
  if (config.input_dim < 1 || config.feature_dim < 1 || config.num_genres < 1) {
    throw DimensionError("C2fConfig requires positive dimensions");
  }
  C2fParams p;
  p.config = config;
  const int d = config.input_dim, f = config.feature_dim, h = config.hidden();
  p.pool_weight = Matrix(d, 1);
  p.length_embedding = Matrix(kNumDistanceBuckets, f);
  p.mention_hidden = Matrix(h, config.span_dim());
  p.mention_out = Matrix(h, 1);
  p.distance_embedding = Matrix(kNumDistanceBuckets, f);
  p.speaker_embedding = Matrix(2, f);
  p.genre_embedding = Matrix(config.num_genres, f);
  p.antecedent_hidden = Matrix(h, config.pair_dim());
  p.antecedent_out = Matrix(h, 1);
  p.coarse_bilinear = Matrix(config.span_dim(), config.span_dim());
  return p;
}

const std::array<const char *, C2fParams::kNumTensors> &
C2fParams::TensorNames() {
  static const std::array<const char *, kNumTensors> names = {
      "w_alpha", "phi_len", "W_m",   "v_m",   "phi_dist",
      "phi_spk", "phi_genre", "W_a", "v_a",   "W_c"};
  return names;
}

std::array<Matrix *, C2fParams::kNumTensors> C2fParams::Tensors() {
  return {&pool_weight,        &length_embedding,  &mention_hidden,
          &mention_out,        &distance_embedding, &speaker_embedding,
          &genre_embedding,    &antecedent_hidden,  &antecedent_out,
          &coarse_bilinear};
}

std::array<const Matrix *, C2fParams::kNumTensors> C2fParams::Tensors() const {
  return {&pool_weight,        &length_embedding,  &mention_hidden,
          &mention_out,        &distance_embedding, &speaker_embedding,
          &genre_embedding,    &antecedent_hidden,  &antecedent_out,
          &coarse_bilinear};
}

void C2fParams::Validate() const {
  const C2fParams shape = Zeros(config);
  const auto expected = shape.Tensors();
  const auto actual = Tensors();
  for (int t = 0; t < kNumTensors; ++t) {
    CheckShape(*actual[t], expected[t]->rows(), expected[t]->cols(),
               TensorNames()[t]);
    if (!AllFinite(actual[t]->values())) {
      throw NumericError(std::string("non-finite entry in ") + TensorNames()[t]);
    }
  }
}

C2fParams InitC2fParams(const C2fConfig &config, std::uint64_t seed) {
  C2fParams p = C2fParams::Zeros(config);
  Rng rng(seed);
  for (Matrix *m : p.Tensors()) {
    const double limit = std::sqrt(6.0 / (m->rows() + m->cols()));
    for (double &v : m->values()) v = rng.Uniform(-limit, limit);
  }
  return p;
}

Vector PoolingWeights(const Matrix &x, const Span &span,
                      const Matrix &pool_weight) {
  if (span.start < 0 || span.start > span.end || span.end >= x.rows()) {
    throw DomainError("pooling span " + ToString(span) + " out of range");
  }
  Vector weights(span.length());
  double top = -INFINITY;
  for (int i = 0; i < span.length(); ++i) {
    weights[i] = Dot(pool_weight.values(), x.row(span.start + i));
    top = std::max(top, weights[i]);
  }
  double total = 0.0;
  for (double &w : weights) total += (w = std::exp(w - top));
  for (double &w : weights) w /= total;
  return weights;
}

Vector SelfAttentivePool(const Matrix &x, const Span &span,
                         const Matrix &pool_weight) {
  const Vector weights = PoolingWeights(x, span, pool_weight);
  Vector pooled(x.cols());
  for (int i = 0; i < span.length(); ++i) {
    auto row = x.row(span.start + i);
    for (int j = 0; j < x.cols(); ++j) pooled[j] += weights[i] * row[j];
  }
  return pooled;
}

int DistanceBucket(int gap) {
  if (gap < 0) throw DomainError("negative distance");
  if (gap <= 1) return 0;
  if (gap <= 4) return gap - 1;
  // 5-7 -> 4, 8-15 -> 5, 16-31 -> 6, 32-63 -> 7, 64+ -> 8
  const int bucket = static_cast<int>(std::floor(std::log2(gap))) + 2;
  return std::min(bucket, kNumDistanceBuckets - 1);
}

int LengthBucket(int length) { return DistanceBucket(length); }

void SpanRepresentation(const Matrix &x, const Span &span,
                        const C2fParams &params, std::span<double> out) {
  const int d = x.cols();
  if (d != params.config.input_dim) {
    throw DimensionError("c2f head expects width " +
                         std::to_string(params.config.input_dim));
  }
  auto start = x.row(span.start);
  auto end = x.row(span.end);
  std::copy(start.begin(), start.end(), out.begin());
  std::copy(end.begin(), end.end(), out.begin() + d);
  const Vector pooled = SelfAttentivePool(x, span, params.pool_weight);
  std::copy(pooled.begin(), pooled.end(), out.begin() + 2 * d);
  auto length = params.length_embedding.row(LengthBucket(span.length()));
  std::copy(length.begin(), length.end(), out.begin() + 3 * d);
}

Vector SpanRepresentation(const Matrix &x, const Span &span,
                          const C2fParams &params) {
  Vector out(params.config.span_dim());
  SpanRepresentation(x, span, params, out);
  return out;
}

double C2fMentionScore(std::span<const double> span_rep,
                       const C2fParams &params) {
  Vector scratch(params.config.hidden());
  return ReluLayer(params.mention_hidden, params.mention_out, span_rep,
                   scratch);
}

void PairRepresentation(std::span<const double> antecedent,
                        std::span<const double> query,
                        const PairFeatures &features, const C2fParams &params,
                        std::span<double> out) {
  const int s = params.config.span_dim();
  const int f = params.config.feature_dim;
  for (int i = 0; i < s; ++i) {
    out[i] = antecedent[i];
    out[s + i] = query[i];
    out[2 * s + i] = antecedent[i] * query[i];
  }
  auto dist = params.distance_embedding.row(features.distance_bucket);
  auto spk = params.speaker_embedding.row(features.same_speaker ? 1 : 0);
  auto genre = params.genre_embedding.row(
      std::clamp(features.genre, 0, params.config.num_genres - 1));
  std::copy(dist.begin(), dist.end(), out.begin() + 3 * s);
  std::copy(spk.begin(), spk.end(), out.begin() + 3 * s + f);
  std::copy(genre.begin(), genre.end(), out.begin() + 3 * s + 2 * f);
}

Vector PairRepresentation(std::span<const double> antecedent,
                          std::span<const double> query,
                          const PairFeatures &features,
                          const C2fParams &params) {
  Vector out(params.config.pair_dim());
  PairRepresentation(antecedent, query, features, params, out);
  return out;
}

double C2fAntecedentScore(std::span<const double> pair_rep,
                          const C2fParams &params) {
  Vector scratch(params.config.hidden());
  return ReluLayer(params.antecedent_hidden, params.antecedent_out, pair_rep,
                   scratch);
}

std::vector<ScoredAntecedent> CoarsePrune(const Matrix &span_reps,
                                          std::span<const double> mention_scores,
                                          int q, int max_antecedents,
                                          const C2fParams &params) {
  if (max_antecedents < 1) throw DomainError("CoarsePrune requires K >= 1");
  Vector projected(params.config.span_dim());  // W_c v_q
  MatVec(params.coarse_bilinear, span_reps.row(q), projected);
  std::vector<ScoredAntecedent> scored;
  scored.reserve(q);
  for (int c = 0; c < q; ++c) {
    scored.push_back({c, mention_scores[c] + mention_scores[q] +
                             Dot(span_reps.row(c), projected)});
  }
  const auto keep = std::min<std::size_t>(scored.size(), max_antecedents);
  std::stable_sort(scored.begin(), scored.end(),
                   [](const ScoredAntecedent &a, const ScoredAntecedent &b) {
                     return a.coarse_score > b.coarse_score;
                   });
  scored.resize(keep);
  std::sort(scored.begin(), scored.end(),
            [](const auto &a, const auto &b) { return a.index < b.index; });
  return scored;
}

std::vector<Span> C2fOverlapFilter(std::span<const Span> ranked, int limit) {
  std::vector<Span> accepted;
  for (const Span &span : ranked) {
    if (limit >= 0 && static_cast<int>(accepted.size()) >= limit) break;
    const bool crosses =
        std::any_of(accepted.begin(), accepted.end(), [&](const Span &a) {
          return a.Intersects(span) && !a.Contains(span) && !span.Contains(a);
        });
    if (!crosses) accepted.push_back(span);
  }
  return accepted;
}

bool SameSpeaker(const Document &doc, const Span &a, const Span &b) {
  return doc.tokens[a.start].speaker == doc.tokens[b.start].speaker;
}

C2fScores ScoreDocumentC2f(const Document &doc, const Matrix &x,
                           const C2fParams &params, const C2fRunConfig &run) {
  const int n = x.rows();
  if (n != doc.size()) {
    throw DimensionError("embeddings have " + std::to_string(n) +
                         " rows, document has " + std::to_string(doc.size()) +
                         " tokens");
  }
  const int span_dim = params.config.span_dim();

  // Every span under the length mask, represented explicitly.
  std::vector<Span> spans = MentionableSpans(doc, run.max_span_length);
  if (spans.empty()) throw DomainError("empty candidate set");
  Vector all_scores(spans.size());
  {
    Matrix all_reps(static_cast<int>(spans.size()), span_dim);
    for (std::size_t i = 0; i < spans.size(); ++i) {
      SpanRepresentation(x, spans[i], params, all_reps.row(static_cast<int>(i)));
    }
    Vector scratch(params.config.hidden());
    for (std::size_t i = 0; i < spans.size(); ++i) {
      all_scores[i] = ReluLayer(params.mention_hidden, params.mention_out,
                                all_reps.row(static_cast<int>(i)), scratch);
    }
  }

  // Rank, then keep the top lambda*n while avoiding crossing spans.
  std::vector<int> order(spans.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return all_scores[a] > all_scores[b];
  });
  std::vector<Span> ranked;
  ranked.reserve(order.size());
  for (int i : order) ranked.push_back(spans[i]);
  const int target =
      NumCandidates(run.lambda, n, static_cast<int>(spans.size()));
  C2fScores result;
  result.candidates = C2fOverlapFilter(ranked, target);
  std::sort(result.candidates.begin(), result.candidates.end());
  const int k = static_cast<int>(result.candidates.size());

  result.mention_scores = Vector(k);
  Matrix reps(k, span_dim);
  for (int i = 0; i < k; ++i) {
    const auto pos = std::lower_bound(spans.begin(), spans.end(),
                                      result.candidates[i]) - spans.begin();
    result.mention_scores[i] = all_scores[pos];
    SpanRepresentation(x, result.candidates[i], params, reps.row(i));
  }
  Vector().swap(all_scores);

  const int max_k = std::max(0, k - 1);
  const int K = run.max_antecedents <= 0 ? max_k
                                         : std::min(run.max_antecedents, max_k);
  result.antecedents.resize(k);
  for (int q = 1; q < k && K > 0; ++q) {
    result.antecedents[q] = CoarsePrune(reps, result.mention_scores, q, K, params);
  }

  // The explicit k x K pair buffer; slots without an antecedent stay zero.
  Matrix pairs(k * K, params.config.pair_dim());
  result.pair_buffer_floats = static_cast<std::int64_t>(pairs.size());
  for (int q = 0; q < k; ++q) {
    for (std::size_t r = 0; r < result.antecedents[q].size(); ++r) {
      const int c = result.antecedents[q][r].index;
      const PairFeatures features{DistanceBucket(q - c),
                                  SameSpeaker(doc, result.candidates[c],
                                              result.candidates[q]),
                                  doc.genre};
      PairRepresentation(reps.row(c), reps.row(q), features, params,
                         pairs.row(q * K + static_cast<int>(r)));
    }
  }
  Vector scratch(params.config.hidden());
  for (int q = 0; q < k; ++q) {
    for (std::size_t r = 0; r < result.antecedents[q].size(); ++r) {
      auto &a = result.antecedents[q][r];
      a.coarse_score += ReluLayer(params.antecedent_hidden,
                                  params.antecedent_out,
                                  pairs.row(q * K + static_cast<int>(r)),
                                  scratch);
    }
  }
  return result;
}

std::string EncodeC2fParams(const C2fParams &params) {
  params.Validate();
  ByteWriter w;
  w.PutBytes(std::string_view(kC2fCheckpointMagic, 4));
  w.PutU16(kCheckpointVersion);
  w.PutU32(static_cast<std::uint32_t>(params.config.input_dim));
  w.PutU32(static_cast<std::uint32_t>(params.config.feature_dim));
  w.PutU32(static_cast<std::uint32_t>(params.config.hidden()));
  w.PutU32(static_cast<std::uint32_t>(params.config.num_genres));
  for (const Matrix *m : params.Tensors()) {
    for (double v : m->values()) w.PutF64(v);
  }
  const std::uint32_t crc = w.Crc();
  w.PutU32(crc);
  return w.bytes();
}

C2fParams DecodeC2fParams(std::string_view bytes) {
  using Kind = FormatError::Kind;
  ByteReader r(bytes);
  if (r.GetBytes(4) != std::string_view(kC2fCheckpointMagic, 4)) {
    throw FormatError(Kind::kBadMagic, "not a C2FP checkpoint");
  }
  const std::uint16_t version = r.GetU16();
  if (version != kCheckpointVersion) {
    throw FormatError(Kind::kUnsupportedVersion,
                      "unsupported C2FP version " + std::to_string(version));
  }
  C2fConfig config;
  config.input_dim = static_cast<int>(r.GetU32());
  config.feature_dim = static_cast<int>(r.GetU32());
  config.hidden_dim = static_cast<int>(r.GetU32());
  config.num_genres = static_cast<int>(r.GetU32());
  if (config.input_dim < 1 || config.feature_dim < 1 || config.hidden_dim < 1 ||
      config.num_genres < 1 || config.input_dim > (1 << 16) ||
      config.hidden_dim > (1 << 16) || config.feature_dim > (1 << 16) ||
      config.num_genres > (1 << 16)) {
    throw FormatError(Kind::kInvalid, "invalid C2FP dimensions");
  }
  C2fParams params = C2fParams::Zeros(config);
  std::size_t values = 0;
  for (const Matrix *m : params.Tensors()) values += m->size();
  if (r.remaining() < values * 8 + 4) {
    throw FormatError(Kind::kTruncated, "C2FP checkpoint truncated");
  }
  for (Matrix *m : params.Tensors()) {
    for (double &v : m->values()) v = r.GetF64();
  }
  const std::uint32_t expected = Crc32(bytes.substr(0, r.position()));
  if (r.GetU32() != expected) {
    throw FormatError(Kind::kChecksum, "C2FP checksum mismatch");
  }
  params.Validate();
  return params;
}

}  // namespace coref
