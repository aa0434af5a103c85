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

#include "coref/metrics.h"

#include <algorithm>
#include <limits>
#include <map>
#include <set>

#include "coref/errors.h"

namespace coref {
namespace {

using MentionIndex = std::map<Span, int>;

MentionIndex IndexClusters(std::span<const Cluster> clusters) {
  MentionIndex index;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    for (const Span &span : clusters[c]) index.emplace(span, static_cast<int>(c));
  }
  return index;
}

// sum over key clusters of (|K| - number of parts of K under `other`), and
// sum of (|K| - 1).
std::pair<double, double> MucSide(std::span<const Cluster> key,
                                  std::span<const Cluster> other) {
  const MentionIndex owner = IndexClusters(other);
  double num = 0.0, den = 0.0;
  for (const Cluster &cluster : key) {
    if (cluster.empty()) continue;
    std::set<int> parts;
    int unmatched = 0;
    for (const Span &span : cluster) {
      auto it = owner.find(span);
      if (it == owner.end()) {
        ++unmatched;
      } else {
        parts.insert(it->second);
      }
    }
    const double size = static_cast<double>(cluster.size());
    num += size - static_cast<double>(parts.size() + unmatched);
    den += size - 1.0;
  }
  return {num, den};
}

std::pair<double, double> BCubedSide(std::span<const Cluster> key,
                                     std::span<const Cluster> other) {
  const MentionIndex owner = IndexClusters(other);
  double num = 0.0, den = 0.0;
  // An empty other side earns nothing; the singleton treatment below only
  // applies to individual missing mentions.
  if (other.empty()) {
    for (const Cluster &cluster : key) den += static_cast<double>(cluster.size());
    return {0.0, den};
  }
  for (const Cluster &cluster : key) {
    const std::set<Span> members(cluster.begin(), cluster.end());
    for (const Span &span : cluster) {
      den += 1.0;
      auto it = owner.find(span);
      if (it == owner.end()) {
        // Missing on the other side: treated as a singleton {span}.
        num += 1.0 / static_cast<double>(members.size());
        continue;
      }
      int overlap = 0;
      for (const Span &s : other[it->second]) overlap += members.count(s);
      num += static_cast<double>(overlap) / static_cast<double>(members.size());
    }
  }
  return {num, den};
}

}  // namespace

MetricCounts &MetricCounts::operator+=(const MetricCounts &other) {
  precision_num += other.precision_num;
  precision_den += other.precision_den;
  recall_num += other.recall_num;
  recall_den += other.recall_den;
  return *this;
}

double F1(double precision, double recall) {
  return precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall)
                                  : 0.0;
}

PRF MetricCounts::Score() const {
  PRF out;
  out.precision = precision_den > 0.0 ? precision_num / precision_den : 1.0;
  out.recall = recall_den > 0.0 ? recall_num / recall_den : 1.0;
  out.f1 = F1(out.precision, out.recall);
  return out;
}

MetricCounts MucCounts(std::span<const Cluster> gold,
                       std::span<const Cluster> pred) {
  const auto [rn, rd] = MucSide(gold, pred);
  const auto [pn, pd] = MucSide(pred, gold);
  return {pn, pd, rn, rd};
}

MetricCounts BCubedCounts(std::span<const Cluster> gold,
                          std::span<const Cluster> pred) {
  const auto [rn, rd] = BCubedSide(gold, pred);
  const auto [pn, pd] = BCubedSide(pred, gold);
  return {pn, pd, rn, rd};
}

MetricCounts CeafECounts(std::span<const Cluster> gold,
                         std::span<const Cluster> pred) {
  double total = 0.0;
  if (!gold.empty() && !pred.empty()) {
    std::vector<std::vector<double>> similarity(
        gold.size(), std::vector<double>(pred.size(), 0.0));
    for (std::size_t g = 0; g < gold.size(); ++g) {
      const std::set<Span> members(gold[g].begin(), gold[g].end());
      for (std::size_t p = 0; p < pred.size(); ++p) {
        int common = 0;
        for (const Span &s : pred[p]) common += members.count(s);
        similarity[g][p] = 2.0 * common /
                           static_cast<double>(gold[g].size() + pred[p].size());
      }
    }
    total = MaxWeightAssignment(similarity).total;
  }
  return {total, static_cast<double>(pred.size()), total,
          static_cast<double>(gold.size())};
}

MetricCounts MentionCounts(std::span<const Span> gold,
                           std::span<const Span> pred) {
  const std::set<Span> g(gold.begin(), gold.end());
  const std::set<Span> p(pred.begin(), pred.end());
  double common = 0.0;
  for (const Span &s : p) common += static_cast<double>(g.count(s));
  return {common, static_cast<double>(p.size()), common,
          static_cast<double>(g.size())};
}

PRF Muc(std::span<const Cluster> gold, std::span<const Cluster> pred) {
  return MucCounts(gold, pred).Score();
}
PRF BCubed(std::span<const Cluster> gold, std::span<const Cluster> pred) {
  return BCubedCounts(gold, pred).Score();
}
PRF CeafE(std::span<const Cluster> gold, std::span<const Cluster> pred) {
  return CeafECounts(gold, pred).Score();
}
PRF MentionDetection(std::span<const Span> gold, std::span<const Span> pred) {
  return MentionCounts(gold, pred).Score();
}

double ConllF1(std::span<const Cluster> gold, std::span<const Cluster> pred) {
  return (Muc(gold, pred).f1 + BCubed(gold, pred).f1 + CeafE(gold, pred).f1) /
         3.0;
}

Assignment MaxWeightAssignment(
    const std::vector<std::vector<double>> &similarity) {
  Assignment result;
  const int rows = static_cast<int>(similarity.size());
  if (rows == 0) return result;
  const int cols = static_cast<int>(similarity[0].size());
  for (const auto &row : similarity) {
    if (static_cast<int>(row.size()) != cols) {
      throw DimensionError("similarity matrix rows differ in length");
    }
  }
  if (cols == 0) return result;

  // Square min-cost form: cost = max - similarity, padded with zero-similarity
  // dummies. Potentials-based Hungarian method, 1-indexed.
  const int n = std::max(rows, cols);
  double top = 0.0;
  for (const auto &row : similarity) {
    for (double v : row) top = std::max(top, v);
  }
  auto cost = [&](int i, int j) {
    const double sim = (i < rows && j < cols) ? similarity[i][j] : 0.0;
    return top - sim;
  };
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);  // match[col] = row
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = kInf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (int j = 1; j <= n; ++j) {
    const int i = match[j] - 1;
    if (i < rows && j - 1 < cols) {
      result.pairs.emplace_back(i, j - 1);
      result.total += similarity[i][j - 1];
    }
  }
  std::sort(result.pairs.begin(), result.pairs.end());
  return result;
}

void CorefEvaluator::Add(std::span<const Cluster> gold,
                         std::span<const Cluster> pred) {
  muc_ += MucCounts(gold, pred);
  b3_ += BCubedCounts(gold, pred);
  ceaf_ += CeafECounts(gold, pred);
  std::vector<Span> gm, pm;
  for (const Cluster &c : gold) gm.insert(gm.end(), c.begin(), c.end());
  for (const Cluster &c : pred) pm.insert(pm.end(), c.begin(), c.end());
  mentions_ += MentionCounts(gm, pm);
  ++docs_;
}

double CorefEvaluator::conll_f1() const {
  return (muc().f1 + b_cubed().f1 + ceaf_e().f1) / 3.0;
}

nlohmann::json CorefEvaluator::Report() const {
  auto prf = [](const PRF &s) {
    return nlohmann::json{{"p", s.precision}, {"r", s.recall}, {"f1", s.f1}};
  };
  return {{"muc", prf(muc())},
          {"b3", prf(b_cubed())},
          {"ceaf_e", prf(ceaf_e())},
          {"conll_f1", conll_f1()},
          {"mention_f1", prf(mentions())},
          {"documents", docs_}};
}

}  // namespace coref
