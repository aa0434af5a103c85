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

// Wall-clock timing of the two scoring heads. Float counts come from
// `coref bench`; these numbers are only for spotting speed regressions.

#include <benchmark/benchmark.h>

#include "coref/c2f_head.h"
#include "coref/embedding_io.h"
#include "coref/inference.h"
#include "coref/memory_bench.h"
#include "coref/s2e_head.h"
#include "coref/training.h"

namespace {

using namespace coref;

constexpr int kInputDim = 64;
constexpr int kHeadDim = 32;

struct Fixture {
  explicit Fixture(int n)
      : doc(SyntheticBenchDocument(n)),
        x(SyntheticEmbed(doc, kInputDim, 13).values) {}
  Document doc;
  Matrix x;
};

void BM_S2eForward(benchmark::State &state) {
  const Fixture f(static_cast<int>(state.range(0)));
  const S2eParams params = InitS2eParams(kInputDim, kHeadDim, 13);
  const InferenceConfig config{0.4, 30};
  for (auto _ : state) {
    S2eForward out = ForwardS2e(f.doc, f.x, params, config);
    benchmark::DoNotOptimize(out.probabilities.data());
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_S2eForward)->RangeMultiplier(2)->Range(128, 1024)->Complexity();

void BM_C2fScore(benchmark::State &state) {
  const Fixture f(static_cast<int>(state.range(0)));
  const C2fParams params = InitC2fParams({kInputDim, 4}, 13);
  const C2fRunConfig run{0.4, 30, 50};
  for (auto _ : state) {
    C2fScores out = ScoreDocumentC2f(f.doc, f.x, params, run);
    benchmark::DoNotOptimize(out.antecedents.data());
  }
}
BENCHMARK(BM_C2fScore)->RangeMultiplier(2)->Range(128, 512)->Unit(benchmark::kMillisecond);

void BM_MentionScoresStreaming(benchmark::State &state) {
  const Fixture f(static_cast<int>(state.range(0)));
  const S2eParams params = InitS2eParams(kInputDim, kHeadDim, 13);
  for (auto _ : state) {
    MentionScoreTable t = MentionScoresStreaming(f.x, 30, params);
    benchmark::DoNotOptimize(t.scores.data());
  }
}
BENCHMARK(BM_MentionScoresStreaming)->Arg(256)->Arg(1024);

void BM_AntecedentScoresBatch(benchmark::State &state) {
  const int k = static_cast<int>(state.range(0));
  const Fixture f(k);
  const S2eParams params = InitS2eParams(kInputDim, kHeadDim, 13);
  const Matrix start = ProjectRows(f.x, params.antecedent_start_proj);
  const Matrix end = ProjectRows(f.x, params.antecedent_end_proj);
  for (auto _ : state) {
    Matrix scores = AntecedentScoresBatch(start, end, params);
    benchmark::DoNotOptimize(scores.data());
  }
}
BENCHMARK(BM_AntecedentScoresBatch)->Arg(100)->Arg(200)->Arg(400);

void BM_Backward(benchmark::State &state) {
  const Fixture f(static_cast<int>(state.range(0)));
  const S2eParams params = InitS2eParams(kInputDim, kHeadDim, 13);
  const InferenceConfig config{0.4, 30};
  for (auto _ : state) {
    S2eParams grads = Backward(f.doc, f.x, params, config);
    benchmark::DoNotOptimize(grads.mention_bilinear.data());
  }
}
BENCHMARK(BM_Backward)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
