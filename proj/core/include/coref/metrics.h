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

#ifndef COREF_METRICS_H_
#define COREF_METRICS_H_

#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "coref/corpus.h"

namespace coref {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// Precision and recall as numerator/denominator pairs so that corpus scores
// can be micro-averaged. An empty denominator counts as a vacuous 1.
struct MetricCounts {
  double precision_num = 0.0;
  double precision_den = 0.0;
  double recall_num = 0.0;
  double recall_den = 0.0;

  MetricCounts &operator+=(const MetricCounts &other);
  PRF Score() const;
};

double F1(double precision, double recall);

// Cluster lists may contain singletons here; metric inputs are not required
// to be valid ClusterSets.
MetricCounts MucCounts(std::span<const Cluster> gold,
                       std::span<const Cluster> pred);
MetricCounts BCubedCounts(std::span<const Cluster> gold,
                          std::span<const Cluster> pred);
MetricCounts CeafECounts(std::span<const Cluster> gold,
                         std::span<const Cluster> pred);
MetricCounts MentionCounts(std::span<const Span> gold,
                           std::span<const Span> pred);

PRF Muc(std::span<const Cluster> gold, std::span<const Cluster> pred);
PRF BCubed(std::span<const Cluster> gold, std::span<const Cluster> pred);
PRF CeafE(std::span<const Cluster> gold, std::span<const Cluster> pred);
PRF MentionDetection(std::span<const Span> gold, std::span<const Span> pred);
// Mean of the MUC, B-cubed and CEAF-e F1.
double ConllF1(std::span<const Cluster> gold, std::span<const Cluster> pred);

// Maximum-weight one-to-one assignment on an r x c similarity matrix (rows
// of equal length). Returns min(r, c) (row, col) pairs sorted by row.
struct Assignment {
  std::vector<std::pair<int, int>> pairs;
  double total = 0.0;
};
Assignment MaxWeightAssignment(const std::vector<std::vector<double>> &similarity);

// Micro-averaged corpus evaluation.
class CorefEvaluator {
 public:
  void Add(std::span<const Cluster> gold, std::span<const Cluster> pred);

  PRF muc() const { return muc_.Score(); }
  PRF b_cubed() const { return b3_.Score(); }
  PRF ceaf_e() const { return ceaf_.Score(); }
  PRF mentions() const { return mentions_.Score(); }
  double conll_f1() const;
  int num_documents() const { return docs_; }

  // {"muc", "b3", "ceaf_e", "mention", each {"p","r","f1"}}, "conll_f1"
  nlohmann::json Report() const;

 private:
  MetricCounts muc_, b3_, ceaf_, mentions_;
  int docs_ = 0;
};

}  // namespace coref

#endif  // COREF_METRICS_H_
