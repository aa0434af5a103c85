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

#include "coref/s2e_head.h"

#include <cmath>
#include <numbers>

#include "coref/binary_io.h"
#include "coref/errors.h"
#include "coref/random.h"

namespace coref {
namespace {

constexpr std::uint16_t kCheckpointVersion = 1;

void GlorotFill(Matrix &m, int fan_in, int fan_out, Rng &rng) {
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (double &v : m.values()) v = rng.Uniform(-limit, limit);
}

void CheckSpan(const Span &span, int n, const char *what) {
  if (span.start < 0 || span.start > span.end || span.end >= n) {
    throw DomainError(std::string(what) + " span " + ToString(span) +
                      " invalid for " + std::to_string(n) + " tokens");
  }
}

}  // namespace

S2eParams S2eParams::Zeros(int input_dim, int head_dim) {
  if (input_dim < 1 || head_dim < 1) {
    throw DimensionError("S2eParams requires positive dimensions");
  }
  S2eParams p;
  p.input_dim = input_dim;
  p.head_dim = head_dim;
  p.mention_start_proj = Matrix(head_dim, input_dim);
  p.mention_end_proj = Matrix(head_dim, input_dim);
  p.mention_start_weight = Matrix(head_dim, 1);
  p.mention_end_weight = Matrix(head_dim, 1);
  p.mention_bilinear = Matrix(head_dim, head_dim);
  p.antecedent_start_proj = Matrix(head_dim, input_dim);
  p.antecedent_end_proj = Matrix(head_dim, input_dim);
  p.start_start = Matrix(head_dim, head_dim);
  p.start_end = Matrix(head_dim, head_dim);
  p.end_start = Matrix(head_dim, head_dim);
  p.end_end = Matrix(head_dim, head_dim);
  return p;
}

const std::array<const char *, S2eParams::kNumTensors> &
S2eParams::TensorNames() {
  static const std::array<const char *, kNumTensors> names = {
      "W_m^s", "W_m^e", "v_s",    "v_e",    "B_m",   "W_a^s",
      "W_a^e", "B_a^ss", "B_a^se", "B_a^es", "B_a^ee"};
  return names;
}

std::array<Matrix *, S2eParams::kNumTensors> S2eParams::Tensors() {
  return {&mention_start_proj,    &mention_end_proj,    &mention_start_weight,
          &mention_end_weight,    &mention_bilinear,    &antecedent_start_proj,
          &antecedent_end_proj,   &start_start,         &start_end,
          &end_start,             &end_end};
}

std::array<const Matrix *, S2eParams::kNumTensors> S2eParams::Tensors() const {
  return {&mention_start_proj,    &mention_end_proj,    &mention_start_weight,
          &mention_end_weight,    &mention_bilinear,    &antecedent_start_proj,
          &antecedent_end_proj,   &start_start,         &start_end,
          &end_start,             &end_end};
}

std::size_t S2eParams::NumValues() const {
  std::size_t total = 0;
  for (const Matrix *m : Tensors()) total += m->size();
  return total;
}

void S2eParams::Validate() const {
  const int d = input_dim, h = head_dim;
  CheckShape(mention_start_proj, h, d, "W_m^s");
  CheckShape(mention_end_proj, h, d, "W_m^e");
  CheckShape(mention_start_weight, h, 1, "v_s");
  CheckShape(mention_end_weight, h, 1, "v_e");
  CheckShape(mention_bilinear, h, h, "B_m");
  CheckShape(antecedent_start_proj, h, d, "W_a^s");
  CheckShape(antecedent_end_proj, h, d, "W_a^e");
  CheckShape(start_start, h, h, "B_a^ss");
  CheckShape(start_end, h, h, "B_a^se");
  CheckShape(end_start, h, h, "B_a^es");
  CheckShape(end_end, h, h, "B_a^ee");
  const auto tensors = Tensors();
  for (int t = 0; t < kNumTensors; ++t) {
    if (!AllFinite(tensors[t]->values())) {
      throw NumericError(std::string("non-finite entry in ") +
                         TensorNames()[t]);
    }
  }
}

S2eParams InitS2eParams(int input_dim, int head_dim, std::uint64_t seed) {
  S2eParams p = S2eParams::Zeros(input_dim, head_dim);
  Rng rng(seed);
  for (Matrix *m : p.Tensors()) GlorotFill(*m, m->cols(), m->rows(), rng);
  return p;
}

double Gelu(double x) { return 0.5 * x * std::erfc(-x * std::numbers::sqrt2 / 2); }

double GeluDerivative(double x) {
  const double cdf = 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2);
  const double pdf = std::exp(-0.5 * x * x) * std::numbers::inv_sqrtpi /
                     std::numbers::sqrt2;
  return cdf + x * pdf;
}

Matrix ProjectRows(const Matrix &x, const Matrix &proj) {
  if (x.cols() != proj.cols()) {
    throw DimensionError("projection expects width " +
                         std::to_string(proj.cols()) + ", embeddings have " +
                         std::to_string(x.cols()));
  }
  Matrix out = MatMulTransB(x, proj);
  for (double &v : out.values()) v = Gelu(v);
  return out;
}

Matrix ProjectGatheredRows(const Matrix &x, std::span<const int> rows,
                           const Matrix &proj) {
  if (x.cols() != proj.cols()) {
    throw DimensionError("projection expects width " +
                         std::to_string(proj.cols()) + ", embeddings have " +
                         std::to_string(x.cols()));
  }
  Matrix out(static_cast<int>(rows.size()), proj.rows());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    auto xr = x.row(rows[r]);
    auto o = out.row(static_cast<int>(r));
    for (int j = 0; j < proj.rows(); ++j) o[j] = Gelu(Dot(proj.row(j), xr));
  }
  return out;
}

BoundaryReps ProjectBoundaries(const Matrix &x, const S2eParams &params) {
  return {ProjectRows(x, params.mention_start_proj),
          ProjectRows(x, params.mention_end_proj),
          ProjectRows(x, params.antecedent_start_proj),
          ProjectRows(x, params.antecedent_end_proj)};
}

double MentionScore(const BoundaryReps &reps, const Span &q,
                    const S2eParams &params) {
  CheckSpan(q, reps.mention_start.rows(), "mention");
  auto ms = reps.mention_start.row(q.start);
  auto me = reps.mention_end.row(q.end);
  return Dot(params.mention_start_weight.values(), ms) +
         Dot(params.mention_end_weight.values(), me) +
         Bilinear(ms, params.mention_bilinear, me);
}

MentionScoreTable MentionScoresAll(const Matrix &mention_start,
                                   const Matrix &mention_end, int max_length,
                                   const S2eParams &params) {
  const int n = mention_start.rows();
  MentionScoreTable table;
  table.spans = EnumerateSpans(n, max_length);
  table.scores = Vector(table.spans.size());

  Vector end_term(n);
  for (int j = 0; j < n; ++j) {
    end_term[j] = Dot(params.mention_end_weight.values(), mention_end.row(j));
  }
  Vector left(params.head_dim);  // B_m^T m^s[i]
  std::size_t pos = 0;
  for (int i = 0; i < n; ++i) {
    auto ms = mention_start.row(i);
    const double start_term = Dot(params.mention_start_weight.values(), ms);
    MatTVec(params.mention_bilinear, ms, left);
    const int last = std::min(n - 1, i + max_length - 1);
    for (int j = i; j <= last; ++j) {
      table.scores[pos++] =
          start_term + end_term[j] + Dot(left, mention_end.row(j));
    }
  }
  return table;
}

MentionScoreTable MentionScoresStreaming(const Matrix &x, int max_length,
                                         const S2eParams &params) {
  CheckShape(params.mention_start_proj, params.head_dim, x.cols(), "W_m^s");
  CheckShape(params.mention_end_proj, params.head_dim, x.cols(), "W_m^e");
  const int n = x.rows();
  MentionScoreTable table;
  table.spans = EnumerateSpans(n, max_length);
  table.scores = Vector(table.spans.size());

  // m^e rows live in a ring of `window` slots; row j sits in slot j % window
  // and is overwritten only once no remaining start can reach it.
  const int window = std::min(n, max_length);
  Matrix end_ring(window, params.head_dim);
  Vector end_term(window);
  Vector start_rep(params.head_dim), left(params.head_dim);
  int projected = 0;  // m^e rows computed so far
  std::size_t pos = 0;
  for (int i = 0; i < n; ++i) {
    const int last = std::min(n - 1, i + max_length - 1);
    for (; projected <= last; ++projected) {
      auto row = end_ring.row(projected % window);
      MatVec(params.mention_end_proj, x.row(projected), row);
      for (double &v : row) v = Gelu(v);
      end_term[projected % window] =
          Dot(params.mention_end_weight.values(), row);
    }
    MatVec(params.mention_start_proj, x.row(i), start_rep);
    for (double &v : start_rep) v = Gelu(v);
    const double start_term =
        Dot(params.mention_start_weight.values(), start_rep);
    MatTVec(params.mention_bilinear, start_rep, left);
    for (int j = i; j <= last; ++j) {
      table.scores[pos++] = start_term + end_term[j % window] +
                            Dot(left, end_ring.row(j % window));
    }
  }
  return table;
}

MentionScoreTable MentionScoresAll(const BoundaryReps &reps, int max_length,
                                   const S2eParams &params) {
  return MentionScoresAll(reps.mention_start, reps.mention_end, max_length,
                          params);
}

double AntecedentScoreFactored(const BoundaryReps &reps, const Span &c,
                               const Span &q, const S2eParams &params) {
  const int n = reps.antecedent_start.rows();
  CheckSpan(c, n, "antecedent");
  CheckSpan(q, n, "query");
  auto cs = reps.antecedent_start.row(c.start);
  auto ce = reps.antecedent_end.row(c.end);
  auto qs = reps.antecedent_start.row(q.start);
  auto qe = reps.antecedent_end.row(q.end);
  return Bilinear(cs, params.start_start, qs) +
         Bilinear(cs, params.start_end, qe) +
         Bilinear(ce, params.end_start, qs) + Bilinear(ce, params.end_end, qe);
}

Matrix ConcatenatedAntecedentBilinear(const S2eParams &params) {
  const int h = params.head_dim;
  Matrix block(2 * h, 2 * h);
  for (int i = 0; i < h; ++i) {
    for (int j = 0; j < h; ++j) {
      block(i, j) = params.start_start(i, j);
      block(i, h + j) = params.start_end(i, j);
      block(h + i, j) = params.end_start(i, j);
      block(h + i, h + j) = params.end_end(i, j);
    }
  }
  return block;
}

double AntecedentScoreConcat(const BoundaryReps &reps, const Span &c,
                             const Span &q, const S2eParams &params) {
  const int n = reps.antecedent_start.rows();
  CheckSpan(c, n, "antecedent");
  CheckSpan(q, n, "query");
  const int h = params.head_dim;
  Vector left(2 * h), right(2 * h);
  for (int i = 0; i < h; ++i) {
    left[i] = reps.antecedent_start(c.start, i);
    left[h + i] = reps.antecedent_end(c.end, i);
    right[i] = reps.antecedent_start(q.start, i);
    right[h + i] = reps.antecedent_end(q.end, i);
  }
  return Bilinear(left, ConcatenatedAntecedentBilinear(params), right);
}

Matrix AntecedentScoresBatch(const Matrix &start_rows, const Matrix &end_rows,
                             const S2eParams &params) {
  const int k = start_rows.rows();
  CheckShape(start_rows, k, params.head_dim, "antecedent start rows");
  CheckShape(end_rows, k, params.head_dim, "antecedent end rows");
  Matrix scores(k, k);
  // (query rows, bilinear factor, antecedent rows)
  const struct {
    const Matrix &query;
    const Matrix &factor;
    const Matrix &antecedent;
  } terms[] = {{start_rows, params.start_start, start_rows},
               {end_rows, params.start_end, start_rows},
               {start_rows, params.end_start, end_rows},
               {end_rows, params.end_end, end_rows}};
  for (const auto &term : terms) {
    // Row q of query * B^T is B a[q]; its dot with a[c] is a[c]^T B a[q].
    // The product is accumulated straight into the lower triangle, so no
    // second k x k buffer is formed.
    const Matrix projected = MatMulTransB(term.query, term.factor);
    for (int q = 1; q < k; ++q) {
      auto row = scores.row(q);
      auto left = projected.row(q);
      for (int c = 0; c < q; ++c) row[c] += Dot(left, term.antecedent.row(c));
    }
  }
  return scores;
}

Matrix AntecedentScoresBatch(const BoundaryReps &reps,
                             std::span<const Span> candidates,
                             const S2eParams &params) {
  const int k = static_cast<int>(candidates.size());
  Matrix start_rows(k, params.head_dim), end_rows(k, params.head_dim);
  for (int i = 0; i < k; ++i) {
    CheckSpan(candidates[i], reps.antecedent_start.rows(), "candidate");
    if (i > 0 && !(candidates[i - 1] < candidates[i])) {
      throw DomainError("candidates must be in strictly increasing order");
    }
    auto s = reps.antecedent_start.row(candidates[i].start);
    auto e = reps.antecedent_end.row(candidates[i].end);
    std::copy(s.begin(), s.end(), start_rows.row(i).begin());
    std::copy(e.begin(), e.end(), end_rows.row(i).begin());
  }
  return AntecedentScoresBatch(start_rows, end_rows, params);
}

double FullScore(const std::optional<Span> &c, const Span &q,
                 double mention_c, double mention_q, double antecedent) {
  if (!c) return 0.0;
  if (!(*c < q)) {
    throw DomainError("antecedent " + ToString(*c) + " does not precede " +
                      ToString(q));
  }
  return mention_c + mention_q + antecedent;
}

std::string EncodeS2eParams(const S2eParams &params) {
  params.Validate();
  ByteWriter w;
  w.PutBytes(std::string_view(kS2eCheckpointMagic, 4));
  w.PutU16(kCheckpointVersion);
  w.PutU32(static_cast<std::uint32_t>(params.input_dim));
  w.PutU32(static_cast<std::uint32_t>(params.head_dim));
  for (const Matrix *m : params.Tensors()) {
    for (double v : m->values()) w.PutF64(v);
  }
  const std::uint32_t crc = w.Crc();
  w.PutU32(crc);
  return w.bytes();
}

S2eParams DecodeS2eParams(std::string_view bytes) {
  using Kind = FormatError::Kind;
  ByteReader r(bytes);
  if (r.GetBytes(4) != std::string_view(kS2eCheckpointMagic, 4)) {
    throw FormatError(Kind::kBadMagic, "not an S2EP checkpoint");
  }
  const std::uint16_t version = r.GetU16();
  if (version != kCheckpointVersion) {
    throw FormatError(Kind::kUnsupportedVersion,
                      "unsupported S2EP version " + std::to_string(version));
  }
  const std::uint32_t d = r.GetU32();
  const std::uint32_t h = r.GetU32();
  if (d == 0 || h == 0 || d > (1u << 20) || h > (1u << 20)) {
    throw FormatError(Kind::kInvalid, "invalid S2EP dimensions");
  }
  S2eParams params = S2eParams::Zeros(static_cast<int>(d), static_cast<int>(h));
  if (r.remaining() < params.NumValues() * 8 + 4) {
    throw FormatError(Kind::kTruncated, "S2EP checkpoint truncated");
  }
  for (Matrix *m : params.Tensors()) {
    for (double &v : m->values()) v = r.GetF64();
  }
  const std::uint32_t expected = Crc32(bytes.substr(0, r.position()));
  if (r.GetU32() != expected) {
    throw FormatError(Kind::kChecksum, "S2EP checksum mismatch");
  }
  params.Validate();
  return params;
}

void SaveS2eParams(const std::string &path, const S2eParams &params) {
  WriteFileBytes(path, EncodeS2eParams(params));
}

S2eParams LoadS2eParams(const std::string &path) {
  return DecodeS2eParams(ReadFileBytes(path));
}

}  // namespace coref
