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

#include <gtest/gtest.h>

#include <cmath>

#include "coref/c2f_head.h"
#include "coref/errors.h"
#include "coref/random.h"
#include "test_util.h"

namespace coref {
namespace {

using testing::RandomMatrix;

C2fParams RandomC2fParams(Rng &rng, const C2fConfig &config) {
  C2fParams p = C2fParams::Zeros(config);
  for (Matrix *t : p.Tensors()) {
    for (double &v : t->values()) v = rng.Uniform(-0.5, 0.5);
  }
  return p;
}

// v . ReLU(W u), written out element by element.
double ReluOracle(const Matrix &w, const Matrix &v, std::span<const double> u) {
  double acc = 0.0;
  for (int i = 0; i < w.rows(); ++i) {
    double h = 0.0;
    for (int j = 0; j < w.cols(); ++j) h += w(i, j) * u[j];
    acc += v(i, 0) * (h > 0.0 ? h : 0.0);
  }
  return acc;
}

std::vector<double> PoolOracle(const Matrix &x, const Span &s, const Matrix &w) {
  std::vector<long double> logits;
  for (int t = s.start; t <= s.end; ++t) {
    long double z = 0;
    for (int j = 0; j < x.cols(); ++j) z += static_cast<long double>(w(j, 0)) * x(t, j);
    logits.push_back(z);
  }
  long double total = 0;
  for (long double z : logits) total += std::exp(z);
  std::vector<double> out(x.cols());
  for (int j = 0; j < x.cols(); ++j) {
    long double acc = 0;
    for (int t = s.start; t <= s.end; ++t) {
      acc += std::exp(logits[t - s.start]) / total * x(t, j);
    }
    out[j] = static_cast<double>(acc);
  }
  return out;
}

TEST(PoolTest, SingleTokenIsTheRow) {
  Rng rng(1);
  const Matrix x = RandomMatrix(rng, 4, 3);
  const Vector pooled = SelfAttentivePool(x, {2, 2}, RandomMatrix(rng, 3, 1));
  for (int j = 0; j < 3; ++j) EXPECT_EQ(pooled[j], x(2, j));
}

TEST(PoolTest, ZeroWeightsAverage) {
  Rng rng(2);
  const Matrix x = RandomMatrix(rng, 5, 3);
  const Vector pooled = SelfAttentivePool(x, {1, 4}, Matrix(3, 1));
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(pooled[j], (x(1, j) + x(2, j) + x(3, j) + x(4, j)) / 4, 1e-15);
  }
}

TEST(PoolTest, RandomMatchesSoftmaxOracle) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = RandomMatrix(rng, 6, 4, 2.0);
    const Matrix w = RandomMatrix(rng, 4, 1, 2.0);
    const Span s{rng.Int(0, 3), 0};
    const Span span{s.start, s.start + 2};
    const Vector pooled = SelfAttentivePool(x, span, w);
    const auto oracle = PoolOracle(x, span, w);
    for (int j = 0; j < 4; ++j) EXPECT_NEAR(pooled[j], oracle[j], 1e-12);
    double total = 0.0;
    for (double v : PoolingWeights(x, span, w)) total += v;
    EXPECT_NEAR(total, 1.0, 1e-15);
  }
}

TEST(SpanRepresentationTest, WidthAndLayout) {
  Rng rng(4);
  const C2fConfig config{2, 1};
  EXPECT_EQ(config.span_dim(), 7);
  const C2fParams p = RandomC2fParams(rng, config);
  const Matrix x = RandomMatrix(rng, 6, 2);
  const Span span{1, 3};
  const Vector rep = SpanRepresentation(x, span, p);
  ASSERT_EQ(rep.size(), 7u);
  const auto pooled = PoolOracle(x, span, p.pool_weight);
  for (int j = 0; j < 2; ++j) {
    EXPECT_EQ(rep[j], x(1, j));
    EXPECT_EQ(rep[2 + j], x(3, j));
    EXPECT_NEAR(rep[4 + j], pooled[j], 1e-12);
  }
  EXPECT_EQ(rep[6], p.length_embedding(LengthBucket(3), 0));
}

TEST(SpanRepresentationTest, EqualLengthsShareLengthFeature) {
  Rng rng(5);
  const C2fConfig config{3, 4};
  const C2fParams p = RandomC2fParams(rng, config);
  const Matrix x = RandomMatrix(rng, 8, 3);
  const Vector a = SpanRepresentation(x, {0, 2}, p);
  const Vector b = SpanRepresentation(x, {4, 6}, p);
  for (int j = 9; j < 13; ++j) EXPECT_EQ(a[j], b[j]);
}

TEST(MentionScoreTest, ZeroHiddenWeights) {
  Rng rng(6);
  C2fParams p = RandomC2fParams(rng, {3, 2});
  p.mention_hidden.Fill(0.0);
  const Vector rep = SpanRepresentation(RandomMatrix(rng, 4, 3), {0, 1}, p);
  EXPECT_EQ(C2fMentionScore(rep, p), 0.0);
}

TEST(MentionScoreTest, DeadRelu) {
  Rng rng(7);
  C2fParams p = RandomC2fParams(rng, {3, 2});
  p.mention_hidden.Fill(-1.0);
  const std::vector<double> rep(p.config.span_dim(), 1.0);
  EXPECT_EQ(C2fMentionScore(rep, p), 0.0);
}

TEST(MentionScoreTest, RandomMatchesOracle) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const C2fParams p = RandomC2fParams(rng, {4, 3, 5});
    const Vector rep = SpanRepresentation(RandomMatrix(rng, 5, 4), {1, 3}, p);
    EXPECT_NEAR(C2fMentionScore(rep, p),
                ReluOracle(p.mention_hidden, p.mention_out, rep), 1e-12);
  }
}

TEST(BucketTest, DistanceBuckets) {
  EXPECT_EQ(DistanceBucket(0), 0);
  EXPECT_EQ(DistanceBucket(1), 0);
  EXPECT_EQ(DistanceBucket(10), 5);
  EXPECT_EQ(DistanceBucket(1000), 8);
  // Table from the header comment.
  const std::vector<std::pair<int, int>> edges = {
      {2, 1}, {3, 2}, {4, 3}, {5, 4}, {7, 4}, {8, 5}, {15, 5},
      {16, 6}, {31, 6}, {32, 7}, {63, 7}, {64, 8}};
  for (auto [gap, bucket] : edges) EXPECT_EQ(DistanceBucket(gap), bucket) << gap;
  EXPECT_THROW(DistanceBucket(-1), DomainError);
}

TEST(PairRepresentationTest, LayoutAndWidth) {
  Rng rng(9);
  const C2fConfig config{2, 3};
  EXPECT_EQ(config.pair_dim(), 3 * config.span_dim() + 9);
  const C2fParams p = RandomC2fParams(rng, config);
  const auto c = testing::RandomVector(rng, config.span_dim());
  const auto q = testing::RandomVector(rng, config.span_dim());
  const PairFeatures features{5, true, 2};
  const Vector pair = PairRepresentation(c, q, features, p);
  const int s = config.span_dim();
  ASSERT_EQ(static_cast<int>(pair.size()), config.pair_dim());
  for (int i = 0; i < s; ++i) {
    EXPECT_EQ(pair[i], c[i]);
    EXPECT_EQ(pair[s + i], q[i]);
    EXPECT_EQ(pair[2 * s + i], c[i] * q[i]);
  }
  for (int f = 0; f < 3; ++f) {
    EXPECT_EQ(pair[3 * s + f], p.distance_embedding(5, f));
    EXPECT_EQ(pair[3 * s + 3 + f], p.speaker_embedding(1, f));
    EXPECT_EQ(pair[3 * s + 6 + f], p.genre_embedding(2, f));
  }
}

TEST(PairRepresentationTest, ZeroAntecedentZeroesProduct) {
  Rng rng(10);
  const C2fParams p = RandomC2fParams(rng, {2, 1});
  const std::vector<double> c(p.config.span_dim(), 0.0);
  const auto q = testing::RandomVector(rng, p.config.span_dim());
  const Vector pair = PairRepresentation(c, q, {}, p);
  const int s = p.config.span_dim();
  for (int i = 0; i < s; ++i) EXPECT_EQ(pair[2 * s + i], 0.0);
}

TEST(AntecedentScoreTest, MirrorsMentionScorer) {
  Rng rng(11);
  C2fParams p = RandomC2fParams(rng, {3, 2, 4});
  const auto pair = testing::RandomVector(rng, p.config.pair_dim());
  EXPECT_NEAR(C2fAntecedentScore(pair, p),
              ReluOracle(p.antecedent_hidden, p.antecedent_out, pair), 1e-12);
  p.antecedent_hidden.Fill(0.0);
  EXPECT_EQ(C2fAntecedentScore(pair, p), 0.0);
  p.antecedent_hidden.Fill(-1.0);
  EXPECT_EQ(C2fAntecedentScore(std::vector<double>(p.config.pair_dim(), 1.0), p), 0.0);
}

// Span reps chosen so that v_c W_c v_q is a plain dot product (W_c = I).
C2fParams IdentityCoarse(int span_dim_input) {
  C2fParams p = C2fParams::Zeros({span_dim_input, 1});
  for (int i = 0; i < p.config.span_dim(); ++i) p.coarse_bilinear(i, i) = 1.0;
  return p;
}

TEST(CoarsePruneTest, KeepsAllWhenKIsLarge) {
  const C2fParams p = IdentityCoarse(1);
  Rng rng(12);
  const Matrix reps = RandomMatrix(rng, 5, p.config.span_dim());
  const std::vector<double> scores(5, 0.0);
  const auto kept = CoarsePrune(reps, scores, 4, 10, p);
  ASSERT_EQ(kept.size(), 4u);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(kept[i].index, i);
}

TEST(CoarsePruneTest, ArgmaxAndTies) {
  const C2fParams p = IdentityCoarse(1);
  Matrix reps(3, p.config.span_dim());
  const std::vector<double> scores = {0.2, 0.1, 0.0};
  auto kept = CoarsePrune(reps, scores, 2, 1, p);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].index, 0);
  EXPECT_DOUBLE_EQ(kept[0].coarse_score, 0.2);
  kept = CoarsePrune(reps, std::vector<double>{0.1, 0.2, 0.0}, 2, 1, p);
  EXPECT_EQ(kept[0].index, 1);
  kept = CoarsePrune(reps, std::vector<double>{0.5, 0.5, 0.0}, 2, 1, p);
  EXPECT_EQ(kept[0].index, 0);
}

TEST(OverlapFilterTest, Examples) {
  const std::vector<Span> disjoint = {{0, 1}, {3, 3}, {5, 7}};
  EXPECT_EQ(C2fOverlapFilter(disjoint), disjoint);
  EXPECT_EQ(C2fOverlapFilter(std::vector<Span>{{0, 2}, {1, 3}}),
            (std::vector<Span>{{0, 2}}));
  EXPECT_EQ(C2fOverlapFilter(std::vector<Span>{{0, 2}, {1, 1}}),
            (std::vector<Span>{{0, 2}, {1, 1}}));
  EXPECT_EQ(C2fOverlapFilter(std::vector<Span>{{1, 1}, {0, 2}, {2, 4}}),
            (std::vector<Span>{{1, 1}, {0, 2}}));
  EXPECT_EQ(C2fOverlapFilter(disjoint, 2).size(), 2u);
}

TEST(OverlapFilterTest, AcceptedSetNeverCrosses) {
  Rng rng(13);
  for (int trial = 0; trial < 100; ++trial) {
    auto spans = EnumerateSpans(15, 4);
    rng.Shuffle(spans);
    const auto accepted = C2fOverlapFilter(spans);
    for (const Span &a : accepted) {
      for (const Span &b : accepted) {
        if (a.Intersects(b)) {
          ASSERT_TRUE(a.Contains(b) || b.Contains(a));
        }
      }
    }
  }
}

TEST(ScoreDocumentTest, PairBufferMatchesClosedForm) {
  Rng rng(14);
  const C2fConfig config{6, 4};
  const C2fParams p = InitC2fParams(config, 3);
  const Document doc = testing::PlainDocument(30);
  const Matrix x = RandomMatrix(rng, 30, 6);
  for (int K : {0, 1, 5}) {
    const C2fScores s = ScoreDocumentC2f(doc, x, p, {0.4, 5, K});
    const int k = static_cast<int>(s.candidates.size());
    EXPECT_EQ(k, 12);
    const int effective = K == 0 ? k - 1 : std::min(K, k - 1);
    EXPECT_EQ(s.pair_buffer_floats,
              static_cast<std::int64_t>(k) * effective * config.pair_dim());
    for (int q = 0; q < k; ++q) {
      EXPECT_EQ(static_cast<int>(s.antecedents[q].size()), std::min(q, effective));
      for (const auto &a : s.antecedents[q]) EXPECT_LT(a.index, q);
    }
    EXPECT_TRUE(std::is_sorted(s.candidates.begin(), s.candidates.end()));
  }
}

TEST(ScoreDocumentTest, FinalScoreDecomposes) {
  Rng rng(15);
  const C2fConfig config{4, 2};
  const C2fParams p = RandomC2fParams(rng, config);
  Document doc = testing::PlainDocument(10, "bc/doc");
  for (int i = 0; i < 10; ++i) doc.tokens[i].speaker = i < 5 ? "A" : "B";
  const Matrix x = RandomMatrix(rng, 10, 4);
  const C2fScores s = ScoreDocumentC2f(doc, x, p, {0.5, 3, 0});
  const int k = static_cast<int>(s.candidates.size());
  for (int q = 1; q < k; ++q) {
    const Vector vq = SpanRepresentation(x, s.candidates[q], p);
    for (const auto &a : s.antecedents[q]) {
      const Vector vc = SpanRepresentation(x, s.candidates[a.index], p);
      const PairFeatures features{DistanceBucket(q - a.index),
                                  SameSpeaker(doc, s.candidates[a.index], s.candidates[q]),
                                  doc.genre};
      double coarse = 0.0;
      for (int i = 0; i < config.span_dim(); ++i) {
        for (int j = 0; j < config.span_dim(); ++j) {
          coarse += vc[i] * p.coarse_bilinear(i, j) * vq[j];
        }
      }
      const double expected =
          s.mention_scores[a.index] + s.mention_scores[q] + coarse +
          ReluOracle(p.antecedent_hidden, p.antecedent_out,
                     PairRepresentation(vc, vq, features, p));
      EXPECT_NEAR(a.coarse_score, expected, 1e-10);
    }
  }
}

TEST(ScoreDocumentTest, DimensionMismatch) {
  const C2fParams p = InitC2fParams({4, 2}, 1);
  EXPECT_THROW(ScoreDocumentC2f(testing::PlainDocument(5), Matrix(4, 4), p, {}),
               DimensionError);
}

TEST(CheckpointTest, RoundTrip) {
  const C2fParams p = InitC2fParams({5, 3, 7}, 11);
  const std::string bytes = EncodeC2fParams(p);
  const C2fParams back = DecodeC2fParams(bytes);
  EXPECT_EQ(back.config.span_dim(), p.config.span_dim());
  EXPECT_EQ(EncodeC2fParams(back), bytes);
}

}  // namespace
}  // namespace coref
