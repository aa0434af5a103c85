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
#include <numeric>
#include <set>

#include "coref/conll_io.h"
#include "coref/errors.h"
#include "coref/inference.h"
#include "coref/random.h"
#include "coref/synthetic.h"
#include "test_util.h"

namespace coref {
namespace {

using testing::RandomMatrix;

TEST(NumCandidatesTest, FloorWithMinimumOne) {
  EXPECT_EQ(NumCandidates(0.4, 10, 100), 4);
  EXPECT_EQ(NumCandidates(0.4, 2, 100), 1);
  EXPECT_EQ(NumCandidates(0.3, 10, 100), 3);
  EXPECT_EQ(NumCandidates(1.0, 10, 6), 6);
}

TEST(PruneMentionsTest, TopScoresInCanonicalOrder) {
  const std::vector<Span> spans = {{0, 0}, {0, 1}, {1, 1}};
  const std::vector<double> scores = {0.5, 0.2, 0.9};
  const CandidateSet c = PruneMentions(spans, scores, 1.0, 2);
  EXPECT_EQ(c.spans, (std::vector<Span>{{0, 0}, {1, 1}}));
  EXPECT_EQ(c.mention_scores, (Vector{0.5, 0.9}));
  EXPECT_EQ(c.IndexOf({1, 1}), 1);
  EXPECT_EQ(c.IndexOf({0, 1}), -1);
}

TEST(PruneMentionsTest, TieGoesToEarlierSpan) {
  const std::vector<Span> spans = {{0, 0}, {0, 1}, {1, 1}, {2, 2}};
  const std::vector<double> scores = {0.1, 0.5, 0.5, 0.9};
  const CandidateSet c = PruneMentions(spans, scores, 0.5, 4);
  EXPECT_EQ(c.spans, (std::vector<Span>{{0, 1}, {2, 2}}));
}

TEST(PruneMentionsTest, Errors) {
  EXPECT_THROW(PruneMentions({}, {}, 0.4, 3), DomainError);
  const std::vector<Span> spans = {{0, 0}};
  const std::vector<double> scores = {1.0};
  EXPECT_THROW(PruneMentions(spans, scores, 0.0, 1), DomainError);
  EXPECT_THROW(PruneMentions(spans, scores, 1.5, 1), DomainError);
}

TEST(PruneMentionsTest, MatchesStableSortOracle) {
  Rng rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = rng.Int(1, 40);
    const auto spans = EnumerateSpans(n, rng.Int(1, 6));
    const auto scores = testing::TiedScores(rng, spans.size());
    const double lambda = rng.Uniform(0.05, 1.0);
    const CandidateSet c = PruneMentions(spans, scores, lambda, n);
    ASSERT_EQ(c.spans, testing::PruneOracle(spans, scores, c.k()));
    ASSERT_EQ(c.k(), std::max(1, static_cast<int>(std::floor(lambda * n + 1e-9))));
  }
}

TEST(MentionableSpansTest, SkipsSyntheticTokens) {
  Document doc = testing::PlainDocument(5);
  doc.tokens[2].synthetic = true;
  for (const Span &s : MentionableSpans(doc, 3)) {
    EXPECT_FALSE(s.start <= 2 && 2 <= s.end) << ToString(s);
  }
  EXPECT_EQ(MentionableSpans(doc, 3).size(), 6u);
}

TEST(CandidateAntecedentsTest, Examples) {
  CandidateSet c;
  c.spans = {{0, 0}, {1, 2}, {1, 3}, {4, 4}};
  EXPECT_TRUE(CandidateAntecedents({0, 0}, c).empty());
  EXPECT_EQ(CandidateAntecedents({4, 4}, c).size(), 3u);
  EXPECT_EQ(CandidateAntecedents({1, 3}, c), (std::vector<Span>{{0, 0}, {1, 2}}));
}

TEST(SoftmaxTest, NoCandidates) {
  const auto d = ComputeAntecedentDistribution({0, 0}, {}, {});
  ASSERT_EQ(d.probabilities.size(), 1u);
  EXPECT_EQ(d.probabilities[0], 1.0);
}

TEST(SoftmaxTest, OneZeroLogit) {
  const std::vector<Span> c = {{0, 0}};
  const std::vector<double> s = {0.0};
  const auto d = ComputeAntecedentDistribution({1, 1}, c, s);
  EXPECT_EQ(d.probabilities, (std::vector<double>{0.5, 0.5}));
}

TEST(SoftmaxTest, MatchesLongDoubleOracle) {
  Rng rng(22);
  for (int trial = 0; trial < 500; ++trial) {
    const auto scores = testing::RandomVector(rng, rng.Int(0, 30), rng.Uniform(0.1, 80.0));
    std::vector<double> out(scores.size() + 1);
    SoftmaxWithNull(scores, out);
    long double top = 0;
    for (double s : scores) top = std::max<long double>(top, s);
    long double total = std::exp(-top);
    for (double s : scores) total += std::exp(static_cast<long double>(s) - top);
    double sum = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
      const long double logit = i == 0 ? 0.0L : scores[i - 1];
      const double oracle = static_cast<double>(std::exp(logit - top) / total);
      EXPECT_NEAR(out[i], oracle, 1e-15);
      EXPECT_GT(out[i], -1.0);
      sum += out[i];
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(SoftmaxTest, ExtremeLogitsStayFinite) {
  const std::vector<double> scores = {1e4, -1e4, 700.0};
  std::vector<double> out(4);
  SoftmaxWithNull(scores, out);
  EXPECT_EQ(out[1], 1.0);
  for (double p : out) EXPECT_TRUE(std::isfinite(p));
  const std::vector<double> bad = {std::nan("")};
  EXPECT_THROW(ComputeAntecedentDistribution({1, 1}, std::vector<Span>{{0, 0}}, bad),
               NumericError);
}

TEST(SoftmaxTest, ShiftRaisesEveryRealCandidate) {
  Rng rng(23);
  for (int trial = 0; trial < 200; ++trial) {
    auto scores = testing::RandomVector(rng, rng.Int(1, 10), 3.0);
    std::vector<double> base(scores.size() + 1), shifted(scores.size() + 1);
    SoftmaxWithNull(scores, base);
    const double t = rng.Uniform(0.01, 2.0);
    for (double &s : scores) s += t;
    SoftmaxWithNull(scores, shifted);
    EXPECT_LT(shifted[0], base[0]);
    for (std::size_t i = 1; i < base.size(); ++i) EXPECT_GT(shifted[i], base[i]);
  }
}

const std::vector<Span> kThree = {{0, 0}, {1, 1}, {2, 2}};

TEST(DecodeTest, Chain) {
  const std::vector<int> links = {kNullAntecedent, 0, 1};
  EXPECT_EQ(DecodeClusters(kThree, links), ClusterSet({kThree}));
}

TEST(DecodeTest, AllNull) {
  const std::vector<int> links(3, kNullAntecedent);
  EXPECT_TRUE(DecodeClusters(kThree, links).empty());
}

TEST(DecodeTest, SharedAntecedent) {
  const std::vector<int> links = {kNullAntecedent, 0, 0};
  EXPECT_EQ(DecodeClusters(kThree, links), ClusterSet({kThree}));
}

TEST(DecodeTest, ForwardLinkRejected) {
  const std::vector<int> links = {1, kNullAntecedent, kNullAntecedent};
  EXPECT_THROW(DecodeClusters(kThree, links), DomainError);
}

// Partition by repeated set merging, visiting the links in `order`.
std::set<std::set<Span>> MergeOracle(const std::vector<Span> &spans,
                                     const std::vector<int> &links,
                                     const std::vector<int> &order) {
  std::vector<std::set<Span>> groups;
  auto group_of = [&](const Span &s) -> int {
    for (std::size_t g = 0; g < groups.size(); ++g) {
      if (groups[g].count(s)) return static_cast<int>(g);
    }
    groups.push_back({s});
    return static_cast<int>(groups.size()) - 1;
  };
  for (int q : order) {
    if (links[q] == kNullAntecedent) continue;
    const int a = group_of(spans[links[q]]);
    const int b = group_of(spans[q]);
    if (a == b) continue;
    groups[a].insert(groups[b].begin(), groups[b].end());
    groups.erase(groups.begin() + b);
  }
  return {groups.begin(), groups.end()};
}

TEST(DecodeTest, ValidPartitionIndependentOfQueryOrder) {
  Rng rng(24);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = rng.Int(1, 12);
    const auto spans = EnumerateSpans(n, 3);
    std::vector<int> links(spans.size());
    for (std::size_t q = 0; q < spans.size(); ++q) {
      const int choice = rng.Int(-1, static_cast<int>(q) - 1);
      links[q] = rng.Unit() < 0.5 ? kNullAntecedent : choice;
    }
    const ClusterSet decoded = DecodeClusters(spans, links);
    std::set<Span> seen;
    std::set<std::set<Span>> got;
    for (const Cluster &c : decoded.clusters()) {
      for (const Span &s : c) ASSERT_TRUE(seen.insert(s).second);
      got.insert({c.begin(), c.end()});
    }
    std::vector<int> order(spans.size());
    std::iota(order.begin(), order.end(), 0);
    rng.Shuffle(order);
    EXPECT_EQ(got, MergeOracle(spans, links, order));
  }
}

TEST(ForwardTest, ConsistentWithComponents) {
  Rng rng(25);
  const S2eParams p = testing::RandomS2eParams(rng, 6, 4);
  const Document doc = testing::PlainDocument(15);
  const Matrix x = RandomMatrix(rng, 15, 6);
  const InferenceConfig config{0.4, 4};
  const S2eForward f = ForwardS2e(doc, x, p, config);
  const BoundaryReps reps = ProjectBoundaries(x, p);
  const MentionScoreTable table = MentionScoresAll(reps, 4, p);
  const CandidateSet expected = PruneMentions(table.spans, table.scores, 0.4, 15);
  ASSERT_EQ(f.candidates.spans, expected.spans);
  const int k = f.candidates.k();
  EXPECT_EQ(k, 6);
  for (int q = 0; q < k; ++q) {
    EXPECT_NEAR(f.candidates.mention_scores[q], expected.mention_scores[q], 1e-12);
    std::vector<double> logits;
    for (int c = 0; c < q; ++c) {
      logits.push_back(FullScore(f.candidates.spans[c], f.candidates.spans[q],
                                 expected.mention_scores[c], expected.mention_scores[q],
                                 AntecedentScoreFactored(reps, f.candidates.spans[c],
                                                         f.candidates.spans[q], p)));
    }
    std::vector<double> probs(q + 1);
    SoftmaxWithNull(logits, probs);
    double sum = 0.0;
    for (int col = 0; col < k + 1 && col < f.probabilities.cols(); ++col) {
      const double want = col <= q ? probs[col] : 0.0;
      EXPECT_NEAR(f.probabilities(q, col), want, 1e-12);
      sum += f.probabilities(q, col);
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
}

TEST(ForwardTest, BestAntecedentTieRules) {
  S2eForward f;
  f.candidates.spans = {{0, 0}, {1, 1}, {2, 2}};
  f.probabilities = Matrix(3, 4);
  f.probabilities(0, 0) = 1.0;
  f.probabilities(1, 0) = 0.5;
  f.probabilities(1, 1) = 0.5;  // tie with null
  f.probabilities(2, 0) = 0.2;
  f.probabilities(2, 1) = 0.4;
  f.probabilities(2, 2) = 0.4;  // tie between candidates
  EXPECT_EQ(f.BestAntecedents(), (std::vector<int>{kNullAntecedent, kNullAntecedent, 0}));
}

TEST(ForwardTest, SyntheticTokensNeverPredicted) {
  Rng rng(26);
  SyntheticDocOptions options;
  options.speaker_change_rate = 0.5;
  for (int trial = 0; trial < 20; ++trial) {
    const Document doc = InsertSpeakers(RandomDocument(rng, options, "tc/s"));
    const Matrix x = RandomMatrix(rng, doc.size(), 5);
    const S2eParams p = testing::RandomS2eParams(rng, 5, 3, 1.0);
    const S2eForward f = ForwardS2e(doc, x, p, {1.0, 5});
    for (const Span &s : f.candidates.spans) {
      for (int t = s.start; t <= s.end; ++t) ASSERT_FALSE(doc.tokens[t].synthetic);
    }
    const ClusterSet predicted = Predict(doc, x, p, {1.0, 5});
    EXPECT_NO_THROW(WritePredictions(doc, predicted, TextFormat::kConll));
  }
}

TEST(ForwardTest, DimensionMismatch) {
  EXPECT_THROW(ForwardS2e(testing::PlainDocument(4), Matrix(3, 2),
                          S2eParams::Zeros(2, 2), {}),
               DimensionError);
}

TEST(OracleDecodeTest, ReproducesGold) {
  Rng rng(27);
  SyntheticDocOptions options;
  options.nesting_rate = 0.3;
  for (int trial = 0; trial < 50; ++trial) {
    const Document doc = RandomDocument(rng, options, "tc/o" + std::to_string(trial));
    EXPECT_EQ(testing::OracleDecode(doc, rng), ClusterSet(doc.gold_clusters));
  }
}

}  // namespace
}  // namespace coref
