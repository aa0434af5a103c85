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

#ifndef COREF_C2F_HEAD_H_
#define COREF_C2F_HEAD_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "coref/corpus.h"
#include "coref/tensor.h"

namespace coref {

// Coarse-to-fine baseline head. Spans are represented explicitly as
//   v_q = [x[q_s]; x[q_e]; pool(x[q_s..q_e]); phi_len(q)]
// and span pairs as
//   v_(c,q) = [v_c; v_q; v_c * v_q; phi_dist; phi_speaker; phi_genre].
// Kept for memory and runtime comparison with the start-to-end head.
struct C2fConfig {
  int input_dim = 0;     // d
  int feature_dim = 4;   // d_f
  int hidden_dim = 0;    // 0 means input_dim
  int num_genres = kNumGenres;

  int span_dim() const { return 3 * input_dim + feature_dim; }
  int pair_dim() const { return 3 * span_dim() + 3 * feature_dim; }
  int hidden() const { return hidden_dim > 0 ? hidden_dim : input_dim; }
};

inline constexpr int kNumDistanceBuckets = 9;

struct C2fParams {
  C2fConfig config;
  Matrix pool_weight;         // w_alpha, d x 1
  Matrix length_embedding;    // buckets x d_f
  Matrix mention_hidden;      // W_m, hidden x span_dim
  Matrix mention_out;         // v_m, hidden x 1
  Matrix distance_embedding;  // buckets x d_f
  Matrix speaker_embedding;   // 2 x d_f (0 = different, 1 = same)
  Matrix genre_embedding;     // genres x d_f
  Matrix antecedent_hidden;   // W_a, hidden x pair_dim
  Matrix antecedent_out;      // v_a, hidden x 1
  Matrix coarse_bilinear;     // W_c, span_dim x span_dim

  static constexpr int kNumTensors = 10;
  static C2fParams Zeros(const C2fConfig &config);
  static const std::array<const char *, kNumTensors> &TensorNames();
  std::array<Matrix *, kNumTensors> Tensors();
  std::array<const Matrix *, kNumTensors> Tensors() const;
  void Validate() const;
};

C2fParams InitC2fParams(const C2fConfig &config, std::uint64_t seed);

// Softmax(w_alpha . x_i)-weighted average of the span's rows of x.
Vector SelfAttentivePool(const Matrix &x, const Span &span,
                         const Matrix &pool_weight);
// The pooling weights themselves; they sum to 1.
Vector PoolingWeights(const Matrix &x, const Span &span,
                      const Matrix &pool_weight);

// Bucket ids: {0,1}:0, 2:1, 3:2, 4:3, 5-7:4, 8-15:5, 16-31:6, 32-63:7, 64+:8.
int DistanceBucket(int gap);
// Span length uses the same buckets.
int LengthBucket(int length);

// Writes v_q into `out` (span_dim wide).
void SpanRepresentation(const Matrix &x, const Span &span,
                        const C2fParams &params, std::span<double> out);
Vector SpanRepresentation(const Matrix &x, const Span &span,
                          const C2fParams &params);

// v_m . ReLU(W_m v_q)
double C2fMentionScore(std::span<const double> span_rep,
                       const C2fParams &params);

struct PairFeatures {
  int distance_bucket = 0;
  bool same_speaker = false;
  int genre = kOtherGenre;
};

// Writes v_(c,q) into `out` (pair_dim wide).
void PairRepresentation(std::span<const double> antecedent,
                        std::span<const double> query,
                        const PairFeatures &features, const C2fParams &params,
                        std::span<double> out);
Vector PairRepresentation(std::span<const double> antecedent,
                          std::span<const double> query,
                          const PairFeatures &features,
                          const C2fParams &params);

// v_a . ReLU(W_a v_(c,q))
double C2fAntecedentScore(std::span<const double> pair_rep,
                          const C2fParams &params);

struct ScoredAntecedent {
  int index = 0;  // position in the candidate list
  double coarse_score = 0.0;
};

// Top-K preceding candidates of query `q` by f_m(c) + f_m(q) + v_c W_c v_q;
// ties go to the earlier candidate. Result is ordered by candidate index.
// `span_reps` rows follow candidate order.
std::vector<ScoredAntecedent> CoarsePrune(const Matrix &span_reps,
                                          std::span<const double> mention_scores,
                                          int q, int max_antecedents,
                                          const C2fParams &params);

// Greedy acceptance in rank order, rejecting spans that cross an accepted
// span (intersect without nesting). Stops after `limit` acceptances when
// limit >= 0.
std::vector<Span> C2fOverlapFilter(std::span<const Span> ranked, int limit = -1);

// Speaker of a span from the original (non-inserted) labels: the label of
// its first token.
bool SameSpeaker(const Document &doc, const Span &a, const Span &b);

struct C2fScores {
  std::vector<Span> candidates;           // canonical order
  Vector mention_scores;                  // parallel to candidates
  // antecedents[q] lists retained antecedents of candidate q with their
  // final scores f(c, q) = f_m(c) + f_m(q) + f_a(c, q) + coarse.
  std::vector<std::vector<ScoredAntecedent>> antecedents;
  std::int64_t pair_buffer_floats = 0;
};

struct C2fRunConfig {
  double lambda = 0.4;
  int max_span_length = 30;
  // 0 means k - 1 (no coarse pruning).
  int max_antecedents = 50;
};

// Full c2f scoring of one document: every span's representation, mention
// pruning with overlap avoidance, coarse pruning and the explicit pair buffer
// of k x K pair representations.
C2fScores ScoreDocumentC2f(const Document &doc, const Matrix &x,
                           const C2fParams &params, const C2fRunConfig &run);

inline constexpr char kC2fCheckpointMagic[] = "C2FP";
std::string EncodeC2fParams(const C2fParams &params);
C2fParams DecodeC2fParams(std::string_view bytes);

}  // namespace coref

#endif  // COREF_C2F_HEAD_H_
