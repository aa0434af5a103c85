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

#include "coref/training.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>

#include "coref/errors.h"
#include "coref/log.h"
#include "coref/metrics.h"
#include "coref/random.h"

namespace coref {
namespace {

// Pre-activations W x[rows[r]] for gathered rows.
Matrix GatheredPreactivations(const Matrix &x, std::span<const int> rows,
                              const Matrix &proj) {
  Matrix out(static_cast<int>(rows.size()), proj.rows());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    MatVec(proj, x.row(rows[r]), out.row(static_cast<int>(r)));
  }
  return out;
}

Matrix GeluOf(const Matrix &pre) {
  Matrix out = pre;
  for (double &v : out.values()) v = Gelu(v);
  return out;
}

// grads_proj += sum_r (upstream[r] * gelu'(pre[r])) x[rows[r]]^T
void BackpropProjection(const Matrix &x, std::span<const int> rows,
                        const Matrix &pre, const Matrix &upstream,
                        Matrix &grad_proj) {
  Vector local(pre.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const int i = static_cast<int>(r);
    for (int j = 0; j < pre.cols(); ++j) {
      local[j] = upstream(i, j) * GeluDerivative(pre(i, j));
    }
    AddOuter(grad_proj, local, x.row(rows[r]));
  }
}

// Independent re-evaluation of the frozen-candidate loss in type T, used as
// the numeric side of the gradient check. Mirrors the scoring formulas
// directly rather than going through the batched double-precision path.
template <class T>
T ExtendedLoss(const Document &doc, const Matrix &x, const S2eParams &params,
               std::span<const Span> candidates) {
  const int k = static_cast<int>(candidates.size());
  const int h = params.head_dim;
  const T inv_sqrt2 = T(1) / std::sqrt(T(2));
  auto project = [&](const Matrix &proj, int row) {
    std::vector<T> out(h);
    auto xr = x.row(row);
    for (int j = 0; j < h; ++j) {
      T z = 0;
      for (int i = 0; i < proj.cols(); ++i) z += T(proj(j, i)) * T(xr[i]);
      out[j] = T(0.5) * z * std::erfc(-z * inv_sqrt2);
    }
    return out;
  };
  auto bilinear = [&](const std::vector<T> &u, const Matrix &b,
                      const std::vector<T> &v) {
    T total = 0;
    for (int i = 0; i < h; ++i) {
      T row = 0;
      for (int j = 0; j < h; ++j) row += T(b(i, j)) * v[j];
      total += u[i] * row;
    }
    return total;
  };
  std::vector<T> mention(k);
  std::vector<std::vector<T>> as(k), ae(k);
  for (int i = 0; i < k; ++i) {
    const auto ms = project(params.mention_start_proj, candidates[i].start);
    const auto me = project(params.mention_end_proj, candidates[i].end);
    T m = bilinear(ms, params.mention_bilinear, me);
    for (int j = 0; j < h; ++j) {
      m += T(params.mention_start_weight(j, 0)) * ms[j] +
           T(params.mention_end_weight(j, 0)) * me[j];
    }
    mention[i] = m;
    as[i] = project(params.antecedent_start_proj, candidates[i].start);
    ae[i] = project(params.antecedent_end_proj, candidates[i].end);
  }
  CandidateSet set;
  set.spans.assign(candidates.begin(), candidates.end());
  const GoldTargets targets = BuildGoldTargets(doc, set);
  T total = 0;
  std::vector<T> logits;
  for (int q = 0; q < k; ++q) {
    logits.assign(q + 1, T(0));  // slot 0 is the null antecedent
    for (int c = 0; c < q; ++c) {
      logits[c + 1] = mention[c] + mention[q] +
                      bilinear(as[c], params.start_start, as[q]) +
                      bilinear(as[c], params.start_end, ae[q]) +
                      bilinear(ae[c], params.end_start, as[q]) +
                      bilinear(ae[c], params.end_end, ae[q]);
    }
    const T top = *std::max_element(logits.begin(), logits.end());
    T norm = 0, gold = 0;
    for (T v : logits) norm += std::exp(v - top);
    for (int col : targets.columns[q]) gold += std::exp(logits[col] - top);
    total -= std::log(gold / norm);
  }
  return k > 0 ? total / T(k) : T(0);
}

}  // namespace

GoldTargets BuildGoldTargets(const Document &doc,
                             const CandidateSet &candidates) {
  std::map<Span, int> cluster_of;
  for (std::size_t c = 0; c < doc.gold_clusters.size(); ++c) {
    for (const Span &s : doc.gold_clusters[c]) {
      cluster_of.emplace(s, static_cast<int>(c));
    }
  }
  const int k = candidates.k();
  std::vector<int> cluster(k, -1);
  for (int i = 0; i < k; ++i) {
    auto it = cluster_of.find(candidates.spans[i]);
    if (it != cluster_of.end()) cluster[i] = it->second;
  }
  GoldTargets targets;
  targets.columns.resize(k);
  for (int q = 0; q < k; ++q) {
    if (cluster[q] >= 0) {
      for (int c = 0; c < q; ++c) {
        if (cluster[c] == cluster[q]) targets.columns[q].push_back(c + 1);
      }
    }
    if (targets.columns[q].empty()) targets.columns[q].push_back(0);
  }
  return targets;
}

LossBreakdown MarginalNll(const S2eForward &forward,
                          const GoldTargets &targets) {
  const int k = forward.candidates.k();
  if (static_cast<int>(targets.columns.size()) != k) {
    throw DimensionError("gold targets do not match the candidate set");
  }
  LossBreakdown out;
  out.num_queries = k;
  for (int q = 0; q < k; ++q) {
    double mass = 0.0;
    for (int col : targets.columns[q]) mass += forward.probabilities(q, col);
    const double term = -std::log(mass);
    out.per_query.emplace_back(forward.candidates.spans[q], term);
    out.total += term;
  }
  if (k > 0) out.total /= k;
  return out;
}

void AccumulateGradients(const Matrix &x, const S2eParams &params,
                         const S2eForward &forward, const GoldTargets &targets,
                         double scale, S2eParams &grads) {
  const CandidateSet &cands = forward.candidates;
  const int k = cands.k();
  if (k == 0) return;
  const double weight = scale / k;

  // dL/df(c, q) for c < q: P(c|q) - P(c|q, gold), scaled.
  Matrix pair_grad(k, k);
  Vector mention_grad(k);
  std::vector<double> gold_part(k + 1);
  for (int q = 0; q < k; ++q) {
    auto probs = forward.probabilities.row(q);
    double mass = 0.0;
    for (int col : targets.columns[q]) mass += probs[col];
    std::fill(gold_part.begin(), gold_part.end(), 0.0);
    for (int col : targets.columns[q]) gold_part[col] = probs[col] / mass;
    for (int c = 0; c < q; ++c) {
      const double g = weight * (probs[c + 1] - gold_part[c + 1]);
      pair_grad(q, c) = g;
      mention_grad[c] += g;
      mention_grad[q] += g;
    }
  }

  std::vector<int> starts(k), ends(k);
  for (int i = 0; i < k; ++i) {
    starts[i] = cands.spans[i].start;
    ends[i] = cands.spans[i].end;
  }

  // Mention score f_m = v_s.u + v_e.w + u^T B_m w at candidate boundaries.
  {
    const Matrix start_pre =
        GatheredPreactivations(x, starts, params.mention_start_proj);
    const Matrix end_pre = GatheredPreactivations(x, ends, params.mention_end_proj);
    const Matrix u = GeluOf(start_pre), w = GeluOf(end_pre);
    Matrix du(k, params.head_dim), dw(k, params.head_dim);
    Vector bw(params.head_dim), btu(params.head_dim);
    for (int i = 0; i < k; ++i) {
      const double g = mention_grad[i];
      if (g == 0.0) continue;
      auto ui = u.row(i);
      auto wi = w.row(i);
      MatVec(params.mention_bilinear, wi, bw);
      MatTVec(params.mention_bilinear, ui, btu);
      for (int j = 0; j < params.head_dim; ++j) {
        grads.mention_start_weight(j, 0) += g * ui[j];
        grads.mention_end_weight(j, 0) += g * wi[j];
        du(i, j) = g * (params.mention_start_weight(j, 0) + bw[j]);
        dw(i, j) = g * (params.mention_end_weight(j, 0) + btu[j]);
      }
      AddOuter(grads.mention_bilinear, ui, wi, g);
    }
    BackpropProjection(x, starts, start_pre, du, grads.mention_start_proj);
    BackpropProjection(x, ends, end_pre, dw, grads.mention_end_proj);
  }

  // Antecedent score: four bilinear factors over gathered a^s / a^e rows.
  {
    const Matrix start_pre =
        GatheredPreactivations(x, starts, params.antecedent_start_proj);
    const Matrix end_pre =
        GatheredPreactivations(x, ends, params.antecedent_end_proj);
    const Matrix as = GeluOf(start_pre), ae = GeluOf(end_pre);
    const Matrix pair_grad_t = Transpose(pair_grad);  // [c][q]
    // Antecedent-side aggregates: row c = sum_q G(q,c) a[q].
    const Matrix agg_s = MatMul(pair_grad_t, as), agg_e = MatMul(pair_grad_t, ae);
    // Query-side aggregates: row q = sum_c G(q,c) a[c].
    const Matrix qry_s = MatMul(pair_grad, as), qry_e = MatMul(pair_grad, ae);

    AddScaled(grads.start_start, MatMulTransA(as, agg_s));
    AddScaled(grads.start_end, MatMulTransA(as, agg_e));
    AddScaled(grads.end_start, MatMulTransA(ae, agg_s));
    AddScaled(grads.end_end, MatMulTransA(ae, agg_e));

    Matrix das = MatMulTransB(agg_s, params.start_start);
    AddScaled(das, MatMulTransB(agg_e, params.start_end));
    AddScaled(das, MatMul(qry_s, params.start_start));
    AddScaled(das, MatMul(qry_e, params.end_start));

    Matrix dae = MatMulTransB(agg_s, params.end_start);
    AddScaled(dae, MatMulTransB(agg_e, params.end_end));
    AddScaled(dae, MatMul(qry_s, params.start_end));
    AddScaled(dae, MatMul(qry_e, params.end_end));

    BackpropProjection(x, starts, start_pre, das, grads.antecedent_start_proj);
    BackpropProjection(x, ends, end_pre, dae, grads.antecedent_end_proj);
  }
}

S2eParams Backward(const Document &doc, const Matrix &x,
                   const S2eParams &params, const InferenceConfig &config) {
  const S2eForward forward = ForwardS2e(doc, x, params, config);
  const GoldTargets targets = BuildGoldTargets(doc, forward.candidates);
  S2eParams grads = S2eParams::Zeros(params.input_dim, params.head_dim);
  AccumulateGradients(x, params, forward, targets, 1.0, grads);
  return grads;
}

double DocumentLoss(const Document &doc, const Matrix &x,
                    const S2eParams &params, std::span<const Span> candidates) {
  const S2eForward forward = ForwardS2eWithCandidates(x, params, candidates);
  return MarginalNll(forward, BuildGoldTargets(doc, forward.candidates)).total;
}

double GradCheckReport::worst() const {
  return *std::max_element(max_relative_error.begin(), max_relative_error.end());
}

std::vector<std::string> GradCheckReport::Failures(double tolerance) const {
  std::vector<std::string> failed;
  for (int t = 0; t < S2eParams::kNumTensors; ++t) {
    if (!(max_relative_error[t] <= tolerance)) {
      failed.emplace_back(S2eParams::TensorNames()[t]);
    }
  }
  return failed;
}

GradCheckReport GradCheck(const Document &doc, const Matrix &x,
                          const S2eParams &params,
                          const InferenceConfig &config,
                          const GradCheckOptions &options) {
  if (!(options.step > 0.0)) throw DomainError("grad check step must be > 0");
  const S2eForward forward = ForwardS2e(doc, x, params, config);
  const std::vector<Span> candidates = forward.candidates.spans;
  S2eParams analytic = S2eParams::Zeros(params.input_dim, params.head_dim);
  AccumulateGradients(x, params, forward,
                      BuildGoldTargets(doc, forward.candidates), 1.0, analytic);
  if (options.tamper) options.tamper(analytic);

  GradCheckReport report;
  S2eParams probe = params;
  const auto probe_tensors = probe.Tensors();
  const auto analytic_tensors = analytic.Tensors();
  for (int t = 0; t < S2eParams::kNumTensors; ++t) {
    auto values = probe_tensors[t]->values();
    auto expected = analytic_tensors[t]->values();
    double worst = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double saved = values[i];
      const double up = saved + options.step, down = saved - options.step;
      values[i] = up;
      const long double plus = ExtendedLoss<long double>(doc, x, probe, candidates);
      values[i] = down;
      const long double minus =
          ExtendedLoss<long double>(doc, x, probe, candidates);
      values[i] = saved;
      // Divide by the step actually taken after rounding saved +- h.
      const double numeric = static_cast<double>(
          (plus - minus) / (static_cast<long double>(up) - down));
      const double denom =
          std::max({std::abs(expected[i]), std::abs(numeric), 1e-12});
      worst = std::max(worst, std::abs(expected[i] - numeric) / denom);
    }
    report.max_relative_error[t] = worst;
  }
  return report;
}

OptimizerState OptimizerState::For(const S2eParams &params,
                                   const AdamConfig &config) {
  OptimizerState state;
  state.first_moment = S2eParams::Zeros(params.input_dim, params.head_dim);
  state.second_moment = S2eParams::Zeros(params.input_dim, params.head_dim);
  state.config = config;
  return state;
}

void AdamStep(S2eParams &params, const S2eParams &grads,
              OptimizerState &state) {
  const auto g = grads.Tensors();
  for (int t = 0; t < S2eParams::kNumTensors; ++t) {
    if (!AllFinite(g[t]->values())) {
      throw NumericError(std::string("non-finite gradient in ") +
                         S2eParams::TensorNames()[t]);
    }
  }
  const AdamConfig &c = state.config;
  ++state.step;
  const double correction1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.step));
  const double correction2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.step));
  const auto p = params.Tensors();
  const auto m = state.first_moment.Tensors();
  const auto v = state.second_moment.Tensors();
  for (int t = 0; t < S2eParams::kNumTensors; ++t) {
    CheckShape(*g[t], p[t]->rows(), p[t]->cols(), S2eParams::TensorNames()[t]);
    auto pv = p[t]->values();
    auto gv = g[t]->values();
    auto mv = m[t]->values();
    auto vv = v[t]->values();
    for (std::size_t i = 0; i < pv.size(); ++i) {
      mv[i] = c.beta1 * mv[i] + (1.0 - c.beta1) * gv[i];
      vv[i] = c.beta2 * vv[i] + (1.0 - c.beta2) * gv[i] * gv[i];
      const double m_hat = mv[i] / correction1;
      const double v_hat = vv[i] / correction2;
      pv[i] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

std::vector<std::vector<int>> MakeBatches(std::span<const int> token_counts,
                                          int token_budget) {
  std::vector<std::vector<int>> batches;
  std::vector<int> current;
  long long used = 0;
  for (std::size_t i = 0; i < token_counts.size(); ++i) {
    const int n = token_counts[i];
    if (n > token_budget) {
      Warn("document " + std::to_string(i) + " has " + std::to_string(n) +
           " tokens, over the batch budget of " + std::to_string(token_budget) +
           "; processing it alone");
      if (!current.empty()) batches.push_back(std::move(current));
      current.clear();
      used = 0;
      batches.push_back({static_cast<int>(i)});
      continue;
    }
    if (used + n > token_budget && !current.empty()) {
      batches.push_back(std::move(current));
      current.clear();
      used = 0;
    }
    current.push_back(static_cast<int>(i));
    used += n;
  }
  if (!current.empty()) batches.push_back(std::move(current));
  return batches;
}

BatchResult BatchLossAndGradient(std::span<const TrainingExample *const> batch,
                                 const S2eParams &params,
                                 const InferenceConfig &config) {
  BatchResult result;
  result.grads = S2eParams::Zeros(params.input_dim, params.head_dim);
  if (batch.empty()) return result;
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const TrainingExample *ex : batch) {
    const S2eForward forward = ForwardS2e(ex->doc, ex->x, params, config);
    const GoldTargets targets = BuildGoldTargets(ex->doc, forward.candidates);
    result.loss += scale * MarginalNll(forward, targets).total;
    AccumulateGradients(ex->x, params, forward, targets, scale, result.grads);
  }
  return result;
}

std::string ToJsonLine(const EpochLog &log) {
  nlohmann::json obj = {{"epoch", log.epoch}, {"loss", log.loss},
                        {"steps", log.steps}};
  if (log.dev_conll_f1) obj["dev_conll_f1"] = *log.dev_conll_f1;
  return obj.dump();
}

TrainResult Train(std::span<const TrainingExample> corpus,
                  const TrainConfig &config,
                  std::span<const TrainingExample> dev,
                  const std::function<void(const EpochLog &)> &on_epoch) {
  if (corpus.empty()) throw DomainError("empty training corpus");
  const int d = corpus.front().x.cols();
  const int head_dim = config.head_dim > 0 ? config.head_dim : d;
  return Train(corpus, config, InitS2eParams(d, head_dim, config.seed), dev,
               on_epoch);
}

TrainResult Train(std::span<const TrainingExample> corpus,
                  const TrainConfig &config, S2eParams initial,
                  std::span<const TrainingExample> dev,
                  const std::function<void(const EpochLog &)> &on_epoch) {
  for (const TrainingExample &ex : corpus) {
    if (ex.x.rows() != ex.doc.size() || ex.x.cols() != initial.input_dim) {
      throw DimensionError(ex.doc.doc_key + ": embeddings are " +
                           std::to_string(ex.x.rows()) + "x" +
                           std::to_string(ex.x.cols()) + ", expected " +
                           std::to_string(ex.doc.size()) + "x" +
                           std::to_string(initial.input_dim));
    }
  }
  TrainResult result;
  result.params = std::move(initial);
  OptimizerState state = OptimizerState::For(result.params, config.adam);
  const InferenceConfig inference = config.inference();
  Rng rng(config.seed);

  std::vector<int> order(corpus.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    if (config.max_steps > 0 && result.steps >= config.max_steps) break;
    rng.Shuffle(order);
    std::vector<int> counts;
    for (int i : order) counts.push_back(corpus[i].doc.size());
    double loss_sum = 0.0;
    int loss_docs = 0;
    for (const auto &batch : MakeBatches(counts, config.token_budget)) {
      if (config.max_steps > 0 && result.steps >= config.max_steps) break;
      std::vector<const TrainingExample *> members;
      for (int pos : batch) members.push_back(&corpus[order[pos]]);
      BatchResult br = BatchLossAndGradient(members, result.params, inference);
      AdamStep(result.params, br.grads, state);
      ++result.steps;
      loss_sum += br.loss * static_cast<double>(members.size());
      loss_docs += static_cast<int>(members.size());
    }
    EpochLog log;
    log.epoch = epoch;
    log.loss = loss_docs > 0 ? loss_sum / loss_docs : 0.0;
    log.steps = result.steps;
    if (!dev.empty()) {
      CorefEvaluator evaluator;
      for (const TrainingExample &ex : dev) {
        const ClusterSet pred = Predict(ex.doc, ex.x, result.params, inference);
        evaluator.Add(ex.doc.gold_clusters, pred.clusters());
      }
      log.dev_conll_f1 = evaluator.conll_f1();
    }
    result.epochs.push_back(log);
    if (on_epoch) on_epoch(log);
  }
  return result;
}

}  // namespace coref
