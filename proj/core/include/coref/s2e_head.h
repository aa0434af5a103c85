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

#ifndef COREF_S2E_HEAD_H_
#define COREF_S2E_HEAD_H_

#include <array>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "coref/corpus.h"
#include "coref/tensor.h"

namespace coref {

// Start-to-end scoring head. Mention and antecedent scores are computed from
// the GeLU-projected start/end token representations only; no per-span or
// per-pair vectors are ever built.
//
//   m^s = GeLU(W_m^s x)   m^e = GeLU(W_m^e x)
//   a^s = GeLU(W_a^s x)   a^e = GeLU(W_a^e x)
//   f_m(q)   = v_s . m^s[q_s] + v_e . m^e[q_e] + m^s[q_s]^T B_m m^e[q_e]
//   f_a(c,q) = a^s[c_s]^T B_ss a^s[q_s] + a^s[c_s]^T B_se a^e[q_e]
//            + a^e[c_e]^T B_es a^s[q_s] + a^e[c_e]^T B_ee a^e[q_e]
struct S2eParams {
  int input_dim = 0;  // d
  int head_dim = 0;   // d'

  Matrix mention_start_proj;     // W_m^s, d' x d
  Matrix mention_end_proj;       // W_m^e, d' x d
  Matrix mention_start_weight;   // v_s, d' x 1
  Matrix mention_end_weight;     // v_e, d' x 1
  Matrix mention_bilinear;       // B_m, d' x d'
  Matrix antecedent_start_proj;  // W_a^s, d' x d
  Matrix antecedent_end_proj;    // W_a^e, d' x d
  Matrix start_start;            // B_a^ss, d' x d'
  Matrix start_end;              // B_a^se
  Matrix end_start;              // B_a^es
  Matrix end_end;                // B_a^ee

  static constexpr int kNumTensors = 11;

  // All-zero parameters of the given shape.
  static S2eParams Zeros(int input_dim, int head_dim);

  // Tensor names in checkpoint order.
  static const std::array<const char *, kNumTensors> &TensorNames();
  std::array<Matrix *, kNumTensors> Tensors();
  std::array<const Matrix *, kNumTensors> Tensors() const;

  std::size_t NumValues() const;
  // Throws DimensionError / NumericError when an invariant is broken.
  void Validate() const;

  bool operator==(const S2eParams &) const = default;
};

// Glorot-uniform initialization from a seeded generator.
S2eParams InitS2eParams(int input_dim, int head_dim, std::uint64_t seed);

// x Phi(x) with the exact error function.
double Gelu(double x);
// d/dx GeLU(x) = Phi(x) + x phi(x).
double GeluDerivative(double x);

// Boundary representations of every token, each n x d'.
struct BoundaryReps {
  Matrix mention_start;     // m^s
  Matrix mention_end;       // m^e
  Matrix antecedent_start;  // a^s
  Matrix antecedent_end;    // a^e
};

// Rows are GeLU(W x_i). Throws DimensionError when x.cols() != W.cols().
Matrix ProjectRows(const Matrix &x, const Matrix &proj);
// Same, restricted to the listed rows of x (output row r uses x row rows[r]).
Matrix ProjectGatheredRows(const Matrix &x, std::span<const int> rows,
                           const Matrix &proj);

BoundaryReps ProjectBoundaries(const Matrix &x, const S2eParams &params);

double MentionScore(const BoundaryReps &reps, const Span &q,
                    const S2eParams &params);

// Scores for EnumerateSpans(n, max_length), in that order.
struct MentionScoreTable {
  std::vector<Span> spans;
  Vector scores;
};

// Start-side terms v_s.m^s and B_m-products are formed once per start token
// and end-side terms once per end token; work is O(n d'^2 + n l d').
MentionScoreTable MentionScoresAll(const Matrix &mention_start,
                                   const Matrix &mention_end, int max_length,
                                   const S2eParams &params);
MentionScoreTable MentionScoresAll(const BoundaryReps &reps, int max_length,
                                   const S2eParams &params);

// Same table computed straight from the embeddings. m^s is formed one row at
// a time and m^e through a ring of l rows, so besides the table itself only
// O(l d') floats are live.
MentionScoreTable MentionScoresStreaming(const Matrix &x, int max_length,
                                         const S2eParams &params);

double AntecedentScoreFactored(const BoundaryReps &reps, const Span &c,
                               const Span &q, const S2eParams &params);

// Reference form: [a^s[c_s]; a^e[c_e]]^T B_a [a^s[q_s]; a^e[q_e]] with B_a the
// 2d' x 2d' block matrix [[B_ss, B_se], [B_es, B_ee]].
double AntecedentScoreConcat(const BoundaryReps &reps, const Span &c,
                             const Span &q, const S2eParams &params);

// Block matrix B_a assembled from the four factors.
Matrix ConcatenatedAntecedentBilinear(const S2eParams &params);

// k x k matrix whose entry (j, i), i < j, is f_a(candidates[i],
// candidates[j]): row = query, column = antecedent. Entries with i >= j are
// zero and carry no meaning.
//
// `start_rows`/`end_rows` are the gathered a^s/a^e rows of the candidates
// (k x d'). The result is the sum of four k x k products, one per factor.
Matrix AntecedentScoresBatch(const Matrix &start_rows, const Matrix &end_rows,
                             const S2eParams &params);
Matrix AntecedentScoresBatch(const BoundaryReps &reps,
                             std::span<const Span> candidates,
                             const S2eParams &params);

// f(c, q): f_m(c) + f_m(q) + f_a(c, q) for a real antecedent, 0 for the null
// antecedent (nullopt). Throws DomainError unless c precedes q.
double FullScore(const std::optional<Span> &c, const Span &q,
                 double mention_c, double mention_q, double antecedent);

// Checkpoint: "S2EP" | u16 version=1 | u32 d | u32 d' | tensors in
// TensorNames() order as f64 row-major | u32 CRC-32 of all preceding bytes.
inline constexpr char kS2eCheckpointMagic[] = "S2EP";
std::string EncodeS2eParams(const S2eParams &params);
S2eParams DecodeS2eParams(std::string_view bytes);
void SaveS2eParams(const std::string &path, const S2eParams &params);
S2eParams LoadS2eParams(const std::string &path);

}  // namespace coref

#endif  // COREF_S2E_HEAD_H_
