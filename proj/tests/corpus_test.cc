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

#include <algorithm>
#include <set>

#include "coref/corpus.h"
#include "coref/errors.h"
#include "test_util.h"

namespace coref {
namespace {

using testing::PlainDocument;

// Every (s, e) with e - s + 1 <= max_length, by nested loops over the full
// square and a filter, sorted lexicographically.
std::vector<Span> BruteForceSpans(int n, int max_length) {
  std::vector<Span> out;
  for (int s = 0; s < n; ++s) {
    for (int e = 0; e < n; ++e) {
      if (e >= s && e - s + 1 <= max_length) out.push_back({s, e});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

TEST(EnumerateSpansTest, SingleToken) {
  EXPECT_EQ(EnumerateSpans(1, 1), (std::vector<Span>{{0, 0}}));
}

TEST(EnumerateSpansTest, ThreeTokensLengthTwo) {
  EXPECT_EQ(EnumerateSpans(3, 2),
            (std::vector<Span>{{0, 0}, {0, 1}, {1, 1}, {1, 2}, {2, 2}}));
}

TEST(EnumerateSpansTest, MaxLengthClippedByDocument) {
  EXPECT_EQ(EnumerateSpans(2, 5), (std::vector<Span>{{0, 0}, {0, 1}, {1, 1}}));
}

TEST(EnumerateSpansTest, MatchesBruteForceAndCount) {
  for (int n = 1; n <= 50; ++n) {
    for (int l = 1; l <= 10; ++l) {
      const auto spans = EnumerateSpans(n, l);
      ASSERT_EQ(spans, BruteForceSpans(n, l)) << "n=" << n << " l=" << l;
      ASSERT_EQ(CountSpans(n, l), static_cast<long long>(spans.size()));
      ASSERT_TRUE(std::adjacent_find(spans.begin(), spans.end(),
                                     [](const Span &a, const Span &b) {
                                       return !(a < b);
                                     }) == spans.end());
    }
  }
}

TEST(EnumerateSpansTest, RejectsEmptyDocument) {
  EXPECT_THROW(EnumerateSpans(0, 3), DomainError);
  EXPECT_THROW(EnumerateSpans(3, 0), DomainError);
}

TEST(SpanOrderIndexTest, Examples) {
  EXPECT_EQ(SpanOrderIndex({0, 0}, 3, 2), 0);
  EXPECT_EQ(SpanOrderIndex({1, 2}, 3, 2), 3);
  EXPECT_EQ(SpanOrderIndex({2, 2}, 3, 2), 4);
}

TEST(SpanOrderIndexTest, InverseOfEnumeration) {
  for (int n = 1; n <= 30; ++n) {
    for (int l = 1; l <= 8; ++l) {
      const auto spans = EnumerateSpans(n, l);
      for (std::size_t i = 0; i < spans.size(); ++i) {
        ASSERT_EQ(SpanOrderIndex(spans[i], n, l), static_cast<long long>(i));
      }
    }
  }
}

TEST(SpanOrderIndexTest, OutOfDomain) {
  EXPECT_THROW(SpanOrderIndex({0, 2}, 3, 2), DomainError);
  EXPECT_THROW(SpanOrderIndex({2, 3}, 3, 2), DomainError);
  EXPECT_THROW(SpanOrderIndex({-1, 0}, 3, 2), DomainError);
  EXPECT_THROW(SpanOrderIndex({2, 1}, 3, 2), DomainError);
}

bool HasMessage(const std::vector<Violation> &report, const std::string &text) {
  return std::any_of(report.begin(), report.end(), [&](const Violation &v) {
    return v.message.find(text) != std::string::npos;
  });
}

TEST(ValidateDocumentTest, WellFormed) {
  Document doc = PlainDocument(6);
  doc.gold_clusters = {{{0, 0}, {3, 4}}, {{1, 2}, {5, 5}}};
  EXPECT_TRUE(ValidateDocument(doc).empty());
}

TEST(ValidateDocumentTest, StartAfterEnd) {
  Document doc = PlainDocument(8);
  doc.gold_clusters = {{{5, 3}, {0, 0}}};
  const auto report = ValidateDocument(doc);
  EXPECT_TRUE(HasErrors(report));
  EXPECT_TRUE(HasMessage(report, "start > end"));
}

TEST(ValidateDocumentTest, SpanInTwoClusters) {
  Document doc = PlainDocument(8);
  doc.gold_clusters = {{{0, 0}, {2, 2}}, {{2, 2}, {4, 4}}};
  const auto report = ValidateDocument(doc);
  EXPECT_TRUE(HasErrors(report));
  EXPECT_TRUE(HasMessage(report, "overlapping clusters"));
}

TEST(ValidateDocumentTest, SyntheticTokenInsideMention) {
  Document doc = PlainDocument(4);
  doc.tokens[1].synthetic = true;
  doc.gold_clusters = {{{0, 1}, {3, 3}}};
  EXPECT_TRUE(HasMessage(ValidateDocument(doc), "synthetic"));
}

TEST(ValidateDocumentTest, SingletonIsOnlyAWarning) {
  Document doc = PlainDocument(4);
  doc.gold_clusters = {{{0, 1}}};
  const auto report = ValidateDocument(doc);
  ASSERT_EQ(report.size(), 1u);
  EXPECT_FALSE(HasErrors(report));
}

TEST(ClusterSetTest, CanonicalOrdering) {
  const ClusterSet set({{{5, 5}, {1, 1}}, {{0, 2}, {7, 7}}});
  ASSERT_EQ(set.size(), 2);
  EXPECT_EQ(set.clusters()[0], (Cluster{{0, 2}, {7, 7}}));
  EXPECT_EQ(set.clusters()[1], (Cluster{{1, 1}, {5, 5}}));
  EXPECT_EQ(set.Mentions().size(), 4u);
}

TEST(ClusterSetTest, RejectsInvalidPartitions) {
  EXPECT_THROW(ClusterSet({{{0, 0}}}), DomainError);
  EXPECT_THROW(ClusterSet({{{0, 0}, {1, 1}}, {{1, 1}, {2, 2}}}), DomainError);
}

TEST(GenreTest, DocIdPrefix) {
  EXPECT_EQ(GenreName(GenreFromDocId("bc/cctv/00/cctv_0000")), "bc");
  EXPECT_EQ(GenreName(GenreFromDocId("nw/wsj/00/wsj_0001")), "nw");
  EXPECT_EQ(GenreFromDocId("zz/unknown"), kOtherGenre);
}

}  // namespace
}  // namespace coref
