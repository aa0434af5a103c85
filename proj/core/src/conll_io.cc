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

#include "coref/conll_io.h"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "coref/errors.h"
#include "coref/log.h"

namespace coref {
namespace {

using json = nlohmann::json;

constexpr int kMinConllColumns = 12;
constexpr int kSpeakerColumn = 9;

std::vector<std::string> SplitWhitespace(const std::string &line) {
  std::istringstream in(line);
  std::vector<std::string> fields;
  for (std::string field; in >> field;) fields.push_back(field);
  return fields;
}

std::optional<std::string> SpeakerLabel(const std::string &raw) {
  if (raw.empty() || raw == "-") return std::nullopt;
  return raw;
}

std::string NoSpaces(std::string text) {
  if (text.empty()) return "-";
  for (char &c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) c = '_';
  }
  return text;
}

std::vector<Cluster> DropSingletons(std::map<int, Cluster> by_id,
                                    const std::string &doc_key) {
  std::vector<Cluster> clusters;
  for (auto &[id, cluster] : by_id) {
    std::sort(cluster.begin(), cluster.end());
    cluster.erase(std::unique(cluster.begin(), cluster.end()), cluster.end());
    if (cluster.size() < 2) {
      Warn(doc_key + ": dropping singleton cluster " + std::to_string(id));
      continue;
    }
    clusters.push_back(std::move(cluster));
  }
  return Canonicalize(std::move(clusters));
}

// Incremental state for one "#begin document" block.
class ConllDocumentBuilder {
 public:
  ConllDocumentBuilder(std::string doc_id, int part, int begin_line)
      : begin_line_(begin_line) {
    doc_.doc_key = std::move(doc_id);
    doc_.part = part;
    doc_.genre = GenreFromDocId(doc_.doc_key);
  }

  void SentenceBreak() {
    if (!doc_.tokens.empty() && doc_.tokens.back().sentence == sentence_) {
      ++sentence_;
    }
  }

  void AddToken(const std::vector<std::string> &cols, int line_no) {
    Token token;
    token.index = doc_.size();
    token.text = cols[3];
    token.speaker = SpeakerLabel(cols[kSpeakerColumn]);
    token.sentence = sentence_;
    doc_.tokens.push_back(std::move(token));
    ApplyTags(cols.back(), line_no);
  }

  Document Finish(int line_no) {
    for (const auto &[id, opens] : open_) {
      if (!opens.empty()) {
        throw ParseError("cluster " + std::to_string(id) +
                             " opened at line " +
                             std::to_string(opens.back().second) +
                             " is never closed",
                         line_no);
      }
    }
    if (doc_.tokens.empty()) {
      throw ParseError("document opened at line " +
                           std::to_string(begin_line_) + " has no tokens",
                       line_no);
    }
    doc_.gold_clusters = DropSingletons(std::move(clusters_), doc_.doc_key);
    return std::move(doc_);
  }

 private:
  static int ParseId(const std::string &digits, int line_no) {
    if (digits.empty() ||
        !std::all_of(digits.begin(), digits.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      throw ParseError("bad cluster id '" + digits + "'", line_no);
    }
    return std::stoi(digits);
  }

  void ApplyTags(const std::string &column, int line_no) {
    if (column == "-") return;
    const int pos = doc_.size() - 1;
    std::vector<int> closes, singles, opens;
    std::size_t begin = 0;
    while (begin <= column.size()) {
      std::size_t bar = column.find('|', begin);
      if (bar == std::string::npos) bar = column.size();
      const std::string item = column.substr(begin, bar - begin);
      begin = bar + 1;
      const bool lead = !item.empty() && item.front() == '(';
      const bool trail = !item.empty() && item.back() == ')';
      if (lead && trail && item.size() >= 3) {
        singles.push_back(ParseId(item.substr(1, item.size() - 2), line_no));
      } else if (lead && !trail) {
        opens.push_back(ParseId(item.substr(1), line_no));
      } else if (trail && !lead) {
        closes.push_back(ParseId(item.substr(0, item.size() - 1), line_no));
      } else {
        throw ParseError("bad coreference tag '" + item + "'", line_no);
      }
    }
    // Closes first: a span ending here started before any span opening here.
    for (int id : closes) {
      auto it = open_.find(id);
      if (it == open_.end() || it->second.empty()) {
        throw ParseError("cluster " + std::to_string(id) +
                             " closed but never opened",
                         line_no);
      }
      clusters_[id].push_back({it->second.back().first, pos});
      it->second.pop_back();
    }
    for (int id : singles) clusters_[id].push_back({pos, pos});
    for (int id : opens) open_[id].push_back({pos, line_no});
  }

  Document doc_;
  int begin_line_;
  int sentence_ = 0;
  std::map<int, Cluster> clusters_;
  // Per cluster id: stack of (start token, line) for unclosed spans.
  std::map<int, std::vector<std::pair<int, int>>> open_;
};

void CheckSpanField(const json &pair, int n, int line_no) {
  if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() ||
      !pair[1].is_number_integer()) {
    throw SchemaError("clusters", line_no, "spans must be [start, end] pairs");
  }
  const auto s = pair[0].get<long long>();
  const auto e = pair[1].get<long long>();
  if (s > e) {
    throw SchemaError("clusters", line_no,
                      "span [" + std::to_string(s) + ", " + std::to_string(e) +
                          "]: start > end");
  }
  if (s < 0 || e >= n) {
    throw SchemaError("clusters", line_no,
                      "span [" + std::to_string(s) + ", " + std::to_string(e) +
                          "] out of range for " + std::to_string(n) + " tokens");
  }
}

Document ParseJsonDocument(const std::string &line, int line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error &e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
  }
  if (!obj.is_object()) throw SchemaError("<root>", line_no, "not an object");

  Document doc;
  if (!obj.contains("doc_key") || !obj["doc_key"].is_string()) {
    throw SchemaError("doc_key", line_no, "missing or not a string");
  }
  doc.doc_key = obj["doc_key"].get<std::string>();

  if (!obj.contains("tokens") || !obj["tokens"].is_array()) {
    throw SchemaError("tokens", line_no, "missing or not an array");
  }
  const json &tokens = obj["tokens"];
  if (tokens.empty()) throw SchemaError("tokens", line_no, "empty document");
  const int n = static_cast<int>(tokens.size());
  for (int i = 0; i < n; ++i) {
    if (!tokens[i].is_string()) {
      throw SchemaError("tokens", line_no,
                        "token " + std::to_string(i) + " is not a string");
    }
    doc.tokens.push_back({i, tokens[i].get<std::string>(), std::nullopt});
  }

  if (obj.contains("speakers")) {
    const json &speakers = obj["speakers"];
    if (!speakers.is_array()) {
      throw SchemaError("speakers", line_no, "not an array");
    }
    if (static_cast<int>(speakers.size()) != n) {
      throw SchemaError("speakers", line_no,
                        "length " + std::to_string(speakers.size()) +
                            " does not match " + std::to_string(n) + " tokens");
    }
    for (int i = 0; i < n; ++i) {
      if (!speakers[i].is_string()) {
        throw SchemaError("speakers", line_no,
                          "entry " + std::to_string(i) + " is not a string");
      }
      doc.tokens[i].speaker = SpeakerLabel(speakers[i].get<std::string>());
    }
  }

  if (obj.contains("synthetic")) {
    const json &synthetic = obj["synthetic"];
    if (!synthetic.is_array() || static_cast<int>(synthetic.size()) != n) {
      throw SchemaError("synthetic", line_no,
                        "must be a boolean array parallel to tokens");
    }
    for (int i = 0; i < n; ++i) {
      if (!synthetic[i].is_boolean()) {
        throw SchemaError("synthetic", line_no,
                          "entry " + std::to_string(i) + " is not a boolean");
      }
      doc.tokens[i].synthetic = synthetic[i].get<bool>();
    }
  }

  if (obj.contains("genre")) {
    if (!obj["genre"].is_string()) {
      throw SchemaError("genre", line_no, "not a string");
    }
    doc.genre = GenreId(obj["genre"].get<std::string>());
  } else {
    doc.genre = GenreFromDocId(doc.doc_key);
  }

  std::map<int, Cluster> by_id;
  if (obj.contains("clusters")) {
    const json &clusters = obj["clusters"];
    if (!clusters.is_array()) {
      throw SchemaError("clusters", line_no, "not an array");
    }
    for (std::size_t c = 0; c < clusters.size(); ++c) {
      if (!clusters[c].is_array()) {
        throw SchemaError("clusters", line_no, "cluster is not an array");
      }
      Cluster &cluster = by_id[static_cast<int>(c)];
      for (const json &pair : clusters[c]) {
        CheckSpanField(pair, n, line_no);
        cluster.push_back({pair[0].get<int>(), pair[1].get<int>()});
      }
    }
  }
  doc.gold_clusters = DropSingletons(std::move(by_id), doc.doc_key);
  for (const Violation &v : ValidateDocument(doc)) {
    if (v.severity == Violation::Severity::kError) {
      throw SchemaError("clusters", line_no, v.message);
    }
  }
  return doc;
}

// Remaps clusters through `index_map`; spans that would start or end on a
// dropped position (-1) are reported through `on_bad`.
template <class OnBad>
std::vector<Cluster> RemapClusters(const std::vector<Cluster> &clusters,
                                   const std::vector<int> &index_map,
                                   OnBad on_bad) {
  std::vector<Cluster> out;
  for (const Cluster &cluster : clusters) {
    Cluster mapped;
    for (const Span &span : cluster) {
      const int s = index_map[span.start];
      const int e = index_map[span.end];
      if (s < 0 || e < 0) {
        on_bad(span);
        continue;
      }
      mapped.push_back({s, e});
    }
    out.push_back(std::move(mapped));
  }
  return out;
}

std::string ConllTags(int pos, const std::vector<std::vector<int>> &starts,
                      const std::vector<std::vector<int>> &ends,
                      const std::vector<std::vector<int>> &singles) {
  std::string tags;
  auto add = [&tags](const std::string &item) {
    if (!tags.empty()) tags += '|';
    tags += item;
  };
  for (int id : ends[pos]) add(std::to_string(id) + ")");
  for (int id : singles[pos]) add("(" + std::to_string(id) + ")");
  for (int id : starts[pos]) add("(" + std::to_string(id));
  return tags.empty() ? "-" : tags;
}

std::string WriteConll(const Document &doc,
                       const std::vector<Cluster> &clusters) {
  const int n = doc.size();
  std::vector<std::vector<int>> starts(n), ends(n), singles(n);
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const int id = static_cast<int>(c);
    for (const Span &span : clusters[c]) {
      if (span.start == span.end) {
        singles[span.start].push_back(id);
      } else {
        starts[span.start].push_back(id);
        ends[span.end].push_back(id);
      }
    }
  }
  char part[16];
  std::snprintf(part, sizeof(part), "%03d", doc.part);
  const std::string doc_id = NoSpaces(doc.doc_key);
  std::ostringstream out;
  out << "#begin document (" << doc_id << "); part " << part << "\n";
  int word = 0;
  for (int i = 0; i < n; ++i) {
    const Token &t = doc.tokens[i];
    if (i > 0 && t.sentence != doc.tokens[i - 1].sentence) {
      out << "\n";
      word = 0;
    }
    out << doc_id << "\t" << doc.part << "\t" << word++ << "\t"
        << NoSpaces(t.text) << "\t-\t-\t-\t-\t-\t"
        << (t.speaker ? NoSpaces(*t.speaker) : "-") << "\t*\t"
        << ConllTags(i, starts, ends, singles) << "\n";
  }
  out << "\n#end document\n";
  return out.str();
}

std::string WriteJsonline(const Document &doc,
                          const std::vector<Cluster> &clusters) {
  json obj;
  obj["doc_key"] = doc.doc_key;
  json tokens = json::array();
  json speakers = json::array();
  for (const Token &t : doc.tokens) {
    tokens.push_back(t.text);
    speakers.push_back(t.speaker.value_or("-"));
  }
  obj["tokens"] = std::move(tokens);
  obj["speakers"] = std::move(speakers);
  if (doc.HasSyntheticTokens()) {
    json synthetic = json::array();
    for (const Token &t : doc.tokens) synthetic.push_back(t.synthetic);
    obj["synthetic"] = std::move(synthetic);
  }
  obj["genre"] = GenreName(doc.genre);
  json cs = json::array();
  for (const Cluster &cluster : clusters) {
    json c = json::array();
    for (const Span &span : cluster) c.push_back({span.start, span.end});
    cs.push_back(std::move(c));
  }
  obj["clusters"] = std::move(cs);
  return obj.dump() + "\n";
}

std::string Write(const Document &doc, const std::vector<Cluster> &clusters,
                  TextFormat format) {
  return format == TextFormat::kConll ? WriteConll(doc, clusters)
                                      : WriteJsonline(doc, clusters);
}

}  // namespace

std::vector<Document> ParseConll(std::istream &in) {
  static const std::regex kBegin(R"(^#begin document \((.*)\);\s*part\s+(\d+)\s*$)");
  std::vector<Document> docs;
  std::optional<ConllDocumentBuilder> current;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("#begin document", 0) == 0) {
      if (current) {
        throw ParseError("#begin document inside an open document", line_no);
      }
      std::smatch m;
      if (!std::regex_match(line, m, kBegin)) {
        throw ParseError("malformed #begin document line", line_no);
      }
      current.emplace(m[1].str(), std::stoi(m[2].str()), line_no);
      continue;
    }
    if (line.rfind("#end document", 0) == 0) {
      if (!current) {
        throw ParseError("#end document without #begin document", line_no);
      }
      docs.push_back(current->Finish(line_no));
      current.reset();
      continue;
    }
    const auto cols = SplitWhitespace(line);
    if (cols.empty()) {
      if (current) current->SentenceBreak();
      continue;
    }
    if (!current) {
      throw ParseError("token line outside #begin/#end document", line_no);
    }
    if (static_cast<int>(cols.size()) < kMinConllColumns) {
      throw ParseError("expected at least " + std::to_string(kMinConllColumns) +
                           " columns, found " + std::to_string(cols.size()),
                       line_no);
    }
    current->AddToken(cols, line_no);
  }
  if (current) throw ParseError("missing #end document", line_no);
  return docs;
}

std::vector<Document> ParseJsonlines(std::istream &in) {
  std::vector<Document> docs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    docs.push_back(ParseJsonDocument(line, line_no));
  }
  return docs;
}

std::vector<int> OriginalTokenIndex(const Document &doc) {
  std::vector<int> map(doc.tokens.size(), -1);
  int next = 0;
  for (std::size_t i = 0; i < doc.tokens.size(); ++i) {
    if (!doc.tokens[i].synthetic) map[i] = next++;
  }
  return map;
}

Document StripSyntheticTokens(const Document &doc) {
  if (!doc.HasSyntheticTokens()) return doc;
  const std::vector<int> map = OriginalTokenIndex(doc);
  Document out = doc;
  out.tokens.clear();
  for (const Token &t : doc.tokens) {
    if (t.synthetic) continue;
    Token copy = t;
    copy.index = static_cast<int>(out.tokens.size());
    out.tokens.push_back(std::move(copy));
  }
  out.gold_clusters =
      RemapClusters(doc.gold_clusters, map, [&doc](const Span &span) {
        throw std::logic_error(doc.doc_key + ": gold span " + ToString(span) +
                               " touches a synthetic token");
      });
  return out;
}

Document InsertSpeakers(const Document &doc) {
  Document base = StripSyntheticTokens(doc);
  const bool any_speaker =
      std::any_of(base.tokens.begin(), base.tokens.end(),
                  [](const Token &t) { return t.speaker.has_value(); });
  if (!any_speaker) return base;

  Document out = base;
  out.tokens.clear();
  std::vector<int> map(base.tokens.size());
  auto push = [&out](Token token) {
    token.index = out.size();
    out.tokens.push_back(std::move(token));
  };
  for (std::size_t i = 0; i < base.tokens.size(); ++i) {
    const Token &t = base.tokens[i];
    const bool changed = i == 0 ? t.speaker.has_value()
                                : t.speaker != base.tokens[i - 1].speaker;
    if (changed && t.speaker) {
      std::istringstream words(*t.speaker);
      std::vector<std::string> name;
      for (std::string w; words >> w;) name.push_back(w);
      if (name.empty()) name.push_back(*t.speaker);
      name.push_back(":");
      for (auto &w : name) {
        push({0, std::move(w), t.speaker, /*synthetic=*/true, t.sentence});
      }
    }
    map[i] = out.size();
    push(t);
  }

  // A gold span crossing a speaker change would swallow the inserted name.
  std::vector<Cluster> clusters;
  for (Cluster &cluster : RemapClusters(base.gold_clusters, map,
                                        [](const Span &) {})) {
    Cluster kept;
    for (const Span &span : cluster) {
      bool clean = true;
      for (int p = span.start; p <= span.end; ++p) {
        clean = clean && !out.tokens[p].synthetic;
      }
      if (clean) {
        kept.push_back(span);
      } else {
        Warn(doc.doc_key + ": dropping gold span " + ToString(span) +
             " that crosses a speaker change");
      }
    }
    if (kept.size() >= 2) {
      clusters.push_back(std::move(kept));
    } else if (kept.size() < cluster.size()) {
      Warn(doc.doc_key + ": dropping cluster reduced to a singleton");
    }
  }
  out.gold_clusters = Canonicalize(std::move(clusters));
  return out;
}

std::string WritePredictions(const Document &doc, const ClusterSet &predicted,
                             TextFormat format) {
  const std::vector<int> map = OriginalTokenIndex(doc);
  for (const Span &span : predicted.Mentions()) {
    if (span.start < 0 || span.end >= doc.size()) {
      throw std::logic_error(doc.doc_key + ": predicted span " +
                             ToString(span) + " out of range");
    }
  }
  const auto clusters =
      RemapClusters(predicted.clusters(), map, [&doc](const Span &span) {
        throw std::logic_error(doc.doc_key + ": predicted span " +
                               ToString(span) + " touches a synthetic token");
      });
  for (const Cluster &cluster : predicted.clusters()) {
    for (const Span &span : cluster) {
      for (int p = span.start; p <= span.end; ++p) {
        if (doc.tokens[p].synthetic) {
          throw std::logic_error(doc.doc_key + ": predicted span " +
                                 ToString(span) + " contains a synthetic token");
        }
      }
    }
  }
  Document original = StripSyntheticTokens(doc);
  return Write(original, Canonicalize(clusters), format);
}

std::string WriteDocument(const Document &doc, TextFormat format) {
  return Write(doc, doc.gold_clusters, format);
}

TextFormat ParseTextFormat(const std::string &name) {
  if (name == "conll") return TextFormat::kConll;
  if (name == "jsonlines" || name == "jsonl") return TextFormat::kJsonlines;
  throw DomainError("unknown format '" + name + "' (expected conll|jsonlines)");
}

TextFormat FormatFromPath(const std::string &path) {
  for (const char *ext : {".jsonl", ".jsonlines", ".json"}) {
    const std::string e(ext);
    if (path.size() >= e.size() &&
        path.compare(path.size() - e.size(), e.size(), e) == 0) {
      return TextFormat::kJsonlines;
    }
  }
  return TextFormat::kConll;
}

std::vector<Document> ReadDocuments(std::istream &in, TextFormat format) {
  return format == TextFormat::kConll ? ParseConll(in) : ParseJsonlines(in);
}

std::vector<Document> ReadDocuments(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return ReadDocuments(in, FormatFromPath(path));
}

}  // namespace coref
