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

#ifndef COREF_CONLL_IO_H_
#define COREF_CONLL_IO_H_

#include <istream>
#include <string>
#include <vector>

#include "coref/corpus.h"

namespace coref {

// Parses a CoNLL-2012 file: "#begin document (<id>); part <p>" ...
// "#end document". Token lines need at least 12 whitespace-separated columns;
// column 0 is the doc id, 1 the part, 3 the word, 9 the speaker ("-" for none)
// and the last column the coreference tags. Singleton gold clusters are
// dropped with a warning.
std::vector<Document> ParseConll(std::istream &in);

// One JSON object per line:
//   {"doc_key", "tokens", "speakers", "genre", "clusters"}
// with inclusive [start, end] spans. Only doc_key and tokens are required.
// An optional boolean array "synthetic" marks inserted speaker tokens; the
// writer emits it only for documents that have some. Singleton clusters are
// dropped with a warning.
std::vector<Document> ParseJsonlines(std::istream &in);

// Prefixes every speaker turn with the speaker's name tokens and a ":" token,
// all flagged synthetic, and remaps gold spans. Documents without speaker
// labels come back unchanged. Idempotent.
Document InsertSpeakers(const Document &doc);

// Drops synthetic tokens; the inverse of InsertSpeakers on token text.
Document StripSyntheticTokens(const Document &doc);

// For each token position, its index once synthetic tokens are removed, or -1
// for synthetic tokens.
std::vector<int> OriginalTokenIndex(const Document &doc);

enum class TextFormat { kConll, kJsonlines };

// Serializes `doc` with `predicted` as its coreference layer. Spans are in the
// index space of `doc` and are mapped back past synthetic tokens; a span
// touching a synthetic token is a logic_error.
std::string WritePredictions(const Document &doc, const ClusterSet &predicted,
                             TextFormat format);

// Writes the document's own gold clusters.
std::string WriteDocument(const Document &doc, TextFormat format);

TextFormat ParseTextFormat(const std::string &name);
// Guesses the format from a file extension (.jsonl/.jsonlines/.json are
// jsonlines, anything else CoNLL).
TextFormat FormatFromPath(const std::string &path);

std::vector<Document> ReadDocuments(const std::string &path);
std::vector<Document> ReadDocuments(std::istream &in, TextFormat format);

}  // namespace coref

#endif  // COREF_CONLL_IO_H_
