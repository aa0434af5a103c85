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

#ifndef COREF_TRAINING_H_
#define COREF_TRAINING_H_

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "coref/corpus.h"
#include "coref/inference.h"
#include "coref/s2e_head.h"

namespace coref {

// Per retained query q, the columns of q's probability row that count as
// gold: c + 1 for each preceding candidate c in q's gold cluster, or 0 (the
// null antecedent) when there is none or q is not a gold mention.
struct GoldTargets {
  std::vector<std::vector<int>> columns;
};

GoldTargets BuildGoldTargets(const Document &doc,
                             const CandidateSet &candidates);

struct LossBreakdown {
  double total = 0.0;  // mean of per_query
  std::vector<std::pair<Span, double>> per_query;
  int num_queries = 0;
};

// -log sum_{g in GOLD(q)} P(g | q) per query, averaged over queries.
LossBreakdown MarginalNll(const S2eForward &forward, const GoldTargets &targets);

// Adds scale * d(mean query NLL)/d(params) into `grads`. The candidate set of
// `forward` is held fixed; embeddings are constants.
void AccumulateGradients(const Matrix &x, const S2eParams &params,
                         const S2eForward &forward, const GoldTargets &targets,
                         double scale, S2eParams &grads);

// Gradient of one document's mean query NLL.
S2eParams Backward(const Document &doc, const Matrix &x,
                   const S2eParams &params, const InferenceConfig &config);

// Loss of one document with a frozen candidate list.
double DocumentLoss(const Document &doc, const Matrix &x,
                    const S2eParams &params, std::span<const Span> candidates);

struct GradCheckReport {
  // Max over coordinates of |analytic - numeric| / max(|analytic|,
  // |numeric|, 1e-12), per tensor in S2eParams::TensorNames() order.
  std::array<double, S2eParams::kNumTensors> max_relative_error{};
  double worst() const;
  // Tensors whose error exceeds `tolerance`.
  std::vector<std::string> Failures(double tolerance) const;
};

struct GradCheckOptions {
  double step = 1e-5;
  // Applied to the analytic gradient before comparison (fault injection).
  std::function<void(S2eParams &)> tamper;
};

// Central differences against the analytic gradient. Candidates are pruned
// once with the unperturbed parameters and then held fixed.
GradCheckReport GradCheck(const Document &doc, const Matrix &x,
                          const S2eParams &params,
                          const InferenceConfig &config,
                          const GradCheckOptions &options = {});

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct OptimizerState {
  std::int64_t step = 0;
  S2eParams first_moment;
  S2eParams second_moment;
  AdamConfig config;

  static OptimizerState For(const S2eParams &params, const AdamConfig &config);
};

// Bias-corrected adaptive-moment update. Throws NumericError naming the
// tensor when a gradient is not finite; nothing is modified in that case.
void AdamStep(S2eParams &params, const S2eParams &grads, OptimizerState &state);

struct TrainConfig {
  std::uint64_t seed = 13;
  double lambda = 0.4;
  int max_span_length = 30;
  int head_dim = 0;  // 0 means the embedding width
  AdamConfig adam;
  int epochs = 10;
  int max_steps = 0;  // 0 means unlimited
  int token_budget = 5000;
  bool insert_speakers = true;
  int embedding_dim = 64;  // synthetic embeddings when no directory is given
  std::string train_path;
  std::string dev_path;
  std::string embeddings_dir;
  std::string output_path;
  std::string log_path;

  InferenceConfig inference() const { return {lambda, max_span_length}; }
};

// Reads "key = value" lines; '#' starts a comment. Unknown keys and bad values
// throw DomainError.
TrainConfig ParseTrainConfig(const std::string &text);
void ApplyConfigValue(TrainConfig &config, const std::string &key,
                      const std::string &value);

struct TrainingExample {
  Document doc;
  Matrix x;  // n x d, rows aligned with doc.tokens
};

// Greedy grouping in the given order; a document larger than the budget forms
// its own batch (with a warning).
std::vector<std::vector<int>> MakeBatches(std::span<const int> token_counts,
                                          int token_budget);

struct BatchResult {
  double loss = 0.0;  // mean over documents of the per-document mean NLL
  S2eParams grads;
};

BatchResult BatchLossAndGradient(std::span<const TrainingExample *const> batch,
                                 const S2eParams &params,
                                 const InferenceConfig &config);

struct EpochLog {
  int epoch = 0;
  double loss = 0.0;
  std::int64_t steps = 0;
  std::optional<double> dev_conll_f1;
};

std::string ToJsonLine(const EpochLog &log);

struct TrainResult {
  S2eParams params;
  std::vector<EpochLog> epochs;
  std::int64_t steps = 0;
};

TrainResult Train(std::span<const TrainingExample> corpus,
                  const TrainConfig &config,
                  std::span<const TrainingExample> dev = {},
                  const std::function<void(const EpochLog &)> &on_epoch = {});

// Continues training from `initial`.
TrainResult Train(std::span<const TrainingExample> corpus,
                  const TrainConfig &config, S2eParams initial,
                  std::span<const TrainingExample> dev = {},
                  const std::function<void(const EpochLog &)> &on_epoch = {});

}  // namespace coref

#endif  // COREF_TRAINING_H_
