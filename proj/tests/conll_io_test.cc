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

#include <sstream>

#include "coref/conll_io.h"
#include "coref/errors.h"
#include "coref/log.h"
#include "coref/random.h"
#include "coref/synthetic.h"
#include "test_util.h"

namespace coref {
namespace {

std::string ConllText(const std::vector<std::string> &words,
                      const std::vector<std::string> &tags,
                      const std::vector<std::string> &speakers = {}) {
  std::ostringstream out;
  out << "#begin document (nw/test); part 000\n";
  for (std::size_t i = 0; i < words.size(); ++i) {
    out << "nw/test 0 " << i << " " << words[i] << " NN * - - - "
        << (speakers.empty() ? "-" : speakers[i]) << " * " << tags[i] << "\n";
  }
  out << "\n#end document\n";
  return out.str();
}

std::vector<Document> Parse(const std::string &text) {
  std::istringstream in(text);
  return ParseConll(in);
}

std::vector<Document> ParseJson(const std::string &text) {
  std::istringstream in(text);
  return ParseJsonlines(in);
}

TEST(ParseConllTest, SingletonIsDroppedWithWarning) {
  ScopedWarningCapture capture;
  const auto docs = Parse(ConllText({"a", "b", "c"}, {"(0", "0)", "-"}));
  ASSERT_EQ(docs.size(), 1u);
  EXPECT_TRUE(docs[0].gold_clusters.empty());
  EXPECT_EQ(capture.warnings().size(), 1u);
}

TEST(ParseConllTest, TwoSingleTokenMentions) {
  const auto docs = Parse(ConllText({"a", "b", "c"}, {"(0)", "-", "(0)"}));
  ASSERT_EQ(docs.size(), 1u);
  EXPECT_EQ(docs[0].doc_key, "nw/test");
  EXPECT_EQ(docs[0].size(), 3);
  ASSERT_EQ(docs[0].gold_clusters.size(), 1u);
  EXPECT_EQ(docs[0].gold_clusters[0], (Cluster{{0, 0}, {2, 2}}));
}

TEST(ParseConllTest, UnclosedMentionIsAnError) {
  EXPECT_THROW(Parse(ConllText({"a", "b", "c"}, {"(0", "-", "-"})),
               ParseError);
}

TEST(ParseConllTest, MissingEndDocument) {
  const std::string text = "#begin document (nw/x); part 000\n"
                           "nw/x 0 0 a NN * - - - - * -\n";
  try {
    Parse(text);
    FAIL() << "expected ParseError";
  } catch (const ParseError &e) {
    EXPECT_GT(e.line(), 0);
  }
}

TEST(ParseConllTest, NestedAndPipedTags) {
  const auto docs =
      Parse(ConllText({"a", "b", "c", "d"}, {"(0|(1)", "0)", "(1)", "(0)"}));
  ASSERT_EQ(docs[0].gold_clusters.size(), 2u);
  EXPECT_EQ(docs[0].gold_clusters[0], (Cluster{{0, 0}, {2, 2}}));
  EXPECT_EQ(docs[0].gold_clusters[1], (Cluster{{0, 1}, {3, 3}}));
}

TEST(ParseJsonlinesTest, MinimalLine) {
  const auto docs = ParseJson(R"({"doc_key": "bc/x", "tokens": ["a", "b"]})");
  ASSERT_EQ(docs.size(), 1u);
  EXPECT_EQ(docs[0].size(), 2);
  EXPECT_TRUE(docs[0].gold_clusters.empty());
  EXPECT_EQ(GenreName(docs[0].genre), "bc");
}

TEST(ParseJsonlinesTest, OneCluster) {
  const auto docs = ParseJson(
      R"({"doc_key": "d", "tokens": ["a","b","c","d"], "clusters": [[[0,1],[3,3]]]})");
  ASSERT_EQ(docs[0].gold_clusters.size(), 1u);
  EXPECT_EQ(docs[0].gold_clusters[0], (Cluster{{0, 1}, {3, 3}}));
}

TEST(ParseJsonlinesTest, SpeakerLengthMismatch) {
  try {
    ParseJson("\n" R"({"doc_key": "d", "tokens": ["a","b"], "speakers": ["x"]})");
    FAIL() << "expected SchemaError";
  } catch (const SchemaError &e) {
    EXPECT_EQ(e.field(), "speakers");
    EXPECT_EQ(e.line(), 2);
  }
}

TEST(ParseJsonlinesTest, SchemaViolationsNameTheField) {
  auto field_of = [](const std::string &line) {
    try {
      ParseJson(line);
    } catch (const SchemaError &e) {
      return e.field();
    }
    return std::string("<none>");
  };
  EXPECT_EQ(field_of(R"({"tokens": ["a"]})"), "doc_key");
  EXPECT_EQ(field_of(R"({"doc_key": "d"})"), "tokens");
  EXPECT_EQ(field_of(R"({"doc_key": "d", "tokens": ["a"], "clusters": [[[0, 5], [0, 0]]]})"),
            "clusters");
  EXPECT_EQ(field_of(R"({"doc_key": "d", "tokens": ["a"], "synthetic": [1]})"),
            "synthetic");
  EXPECT_THROW(ParseJson("{not json"), ParseError);
}

Document SpeakerDoc(std::vector<std::string> words,
                    std::vector<std::string> speakers) {
  Document doc = testing::PlainDocument(static_cast<int>(words.size()));
  for (std::size_t i = 0; i < words.size(); ++i) {
    doc.tokens[i].text = words[i];
    doc.tokens[i].speaker = speakers[i];
  }
  return doc;
}

std::vector<std::string> Texts(const Document &doc) {
  std::vector<std::string> out;
  for (const Token &t : doc.tokens) out.push_back(t.text);
  return out;
}

TEST(InsertSpeakersTest, SingleSpeaker) {
  Document doc = SpeakerDoc({"A-said", "hello"}, {"X", "X"});
  doc.gold_clusters = {{{0, 0}, {1, 1}}};
  const Document out = InsertSpeakers(doc);
  EXPECT_EQ(Texts(out), (std::vector<std::string>{"X", ":", "A-said", "hello"}));
  EXPECT_TRUE(out.tokens[0].synthetic);
  EXPECT_TRUE(out.tokens[1].synthetic);
  EXPECT_FALSE(out.tokens[2].synthetic);
  EXPECT_EQ(out.gold_clusters[0], (Cluster{{2, 2}, {3, 3}}));
  for (int i = 0; i < out.size(); ++i) EXPECT_EQ(out.tokens[i].index, i);
}

TEST(InsertSpeakersTest, SpeakerChange) {
  const Document out = InsertSpeakers(SpeakerDoc({"a", "b"}, {"X", "Y"}));
  EXPECT_EQ(Texts(out),
            (std::vector<std::string>{"X", ":", "a", "Y", ":", "b"}));
  EXPECT_EQ(OriginalTokenIndex(out), (std::vector<int>{-1, -1, 0, -1, -1, 1}));
}

TEST(InsertSpeakersTest, NoSpeakersUnchanged) {
  Document doc = testing::PlainDocument(5);
  doc.gold_clusters = {{{0, 1}, {3, 4}}};
  const Document out = InsertSpeakers(doc);
  EXPECT_EQ(Texts(out), Texts(doc));
  EXPECT_EQ(out.gold_clusters, doc.gold_clusters);
}

TEST(InsertSpeakersTest, PropertiesOnRandomDocuments) {
  Rng rng(5);
  SyntheticDocOptions options;
  options.speaker_change_rate = 0.3;
  options.nesting_rate = 0.3;
  for (int trial = 0; trial < 100; ++trial) {
    const Document doc = RandomDocument(rng, options, "tc/doc" + std::to_string(trial));
    ScopedWarningCapture quiet;
    const Document once = InsertSpeakers(doc);
    const Document twice = InsertSpeakers(once);
    ASSERT_EQ(Texts(once), Texts(twice));
    ASSERT_EQ(once.gold_clusters, twice.gold_clusters);
    EXPECT_EQ(Texts(StripSyntheticTokens(once)), Texts(doc));
    EXPECT_FALSE(HasErrors(ValidateDocument(once)));
    ASSERT_EQ(once.gold_clusters.size(), doc.gold_clusters.size());
    // Mention texts survive the remapping.
    for (std::size_t c = 0; c < doc.gold_clusters.size(); ++c) {
      for (std::size_t m = 0; m < doc.gold_clusters[c].size(); ++m) {
        const Span a = doc.gold_clusters[c][m];
        const Span b = once.gold_clusters[c][m];
        ASSERT_EQ(a.length(), b.length());
        for (int t = 0; t < a.length(); ++t) {
          EXPECT_EQ(doc.tokens[a.start + t].text, once.tokens[b.start + t].text);
        }
      }
    }
  }
}

TEST(WritePredictionsTest, EmptyClusterSet) {
  const Document doc = testing::PlainDocument(3, "nw/test");
  const std::string text = WritePredictions(doc, ClusterSet(), TextFormat::kConll);
  const auto back = Parse(text);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_TRUE(back[0].gold_clusters.empty());
  EXPECT_EQ(text.find('('), text.find("(nw/test)"));
}

TEST(WritePredictionsTest, TagsForSingleTokenMentions) {
  const Document doc = testing::PlainDocument(3, "nw/test");
  const std::string text =
      WritePredictions(doc, ClusterSet({{{0, 0}, {2, 2}}}), TextFormat::kConll);
  std::vector<std::string> tags;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    tags.push_back(line.substr(line.find_last_of(" \t") + 1));
  }
  EXPECT_EQ(tags, (std::vector<std::string>{"(0)", "-", "(0)"}));
}

TEST(WritePredictionsTest, NestedSpansRoundTrip) {
  const Document doc = testing::PlainDocument(4, "nw/test");
  const ClusterSet pred({{{0, 2}, {1, 1}}});
  for (TextFormat format : {TextFormat::kConll, TextFormat::kJsonlines}) {
    std::istringstream in(WritePredictions(doc, pred, format));
    const auto back = ReadDocuments(in, format);
    ASSERT_EQ(back.size(), 1u);
    EXPECT_EQ(ClusterSet(back[0].gold_clusters), pred);
  }
}

TEST(WritePredictionsTest, MapsPastSyntheticTokens) {
  Document doc = InsertSpeakers(SpeakerDoc({"a", "b", "c"}, {"X", "X", "X"}));
  // Tokens are [X, :, a, b, c]; the prediction covers a and c.
  const std::string text =
      WritePredictions(doc, ClusterSet({{{2, 2}, {4, 4}}}), TextFormat::kJsonlines);
  const auto back = ParseJson(text);
  EXPECT_EQ(Texts(back[0]), (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(back[0].gold_clusters[0], (Cluster{{0, 0}, {2, 2}}));
  EXPECT_THROW(WritePredictions(doc, ClusterSet({{{0, 0}, {3, 3}}}),
                                TextFormat::kConll),
               std::logic_error);
}

TEST(RoundTripTest, RandomConfigurationsBothFormats) {
  Rng rng(2024);
  SyntheticDocOptions options;
  options.nesting_rate = 0.4;
  options.speaker_change_rate = 0.2;
  options.max_clusters = 4;
  options.max_mentions = 4;
  for (int trial = 0; trial < 200; ++trial) {
    const Document doc = RandomDocument(rng, options, "wb/rt_" + std::to_string(trial));
    for (TextFormat format : {TextFormat::kConll, TextFormat::kJsonlines}) {
      const std::string text = WriteDocument(doc, format);
      std::istringstream in(text);
      const auto back = ReadDocuments(in, format);
      ASSERT_EQ(back.size(), 1u);
      ASSERT_EQ(Texts(back[0]), Texts(doc));
      ASSERT_EQ(back[0].gold_clusters, doc.gold_clusters) << text;
      ASSERT_EQ(WriteDocument(back[0], format), text);
    }
  }
}

TEST(RoundTripTest, SyntheticFlagSurvivesJsonlines) {
  const Document doc = InsertSpeakers(SpeakerDoc({"a", "b"}, {"X", "Y"}));
  const auto back = ParseJson(WriteDocument(doc, TextFormat::kJsonlines));
  ASSERT_EQ(back[0].size(), doc.size());
  for (int i = 0; i < doc.size(); ++i) {
    EXPECT_EQ(back[0].tokens[i].synthetic, doc.tokens[i].synthetic);
  }
}

TEST(FormatTest, NamesAndExtensions) {
  EXPECT_EQ(ParseTextFormat("conll"), TextFormat::kConll);
  EXPECT_EQ(ParseTextFormat("jsonlines"), TextFormat::kJsonlines);
  EXPECT_EQ(FormatFromPath("a/b.jsonl"), TextFormat::kJsonlines);
  EXPECT_EQ(FormatFromPath("a/b.v4_gold_conll"), TextFormat::kConll);
}

}  // namespace
}  // namespace coref
