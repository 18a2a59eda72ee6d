// Copyright 2026 The wmtrace Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <string>
#include <vector>

#include "benchmark/benchmark.h"
#include "wmtrace/similarity.h"
#include "wmtrace/synthetic_corpus.h"

namespace wmtrace {
namespace {

void BM_LexicalScore(benchmark::State& state) {
  const std::string a = SyntheticAbstract(1);
  const std::string b = SyntheticAbstract(2);
  for (auto _ : state) benchmark::DoNotOptimize(LexicalScore(a, b));
}
BENCHMARK(BM_LexicalScore);

// One verification distribution: all pairs of Q three-word openings.
void BM_PairwiseDistribution(benchmark::State& state) {
  const std::vector<std::string> continuations =
      DivergentContinuations(static_cast<size_t>(state.range(0)), 3);
  LexicalScorer scorer;
  for (auto _ : state) {
    benchmark::DoNotOptimize(PairwiseDistribution(continuations, scorer, 3));
  }
}
BENCHMARK(BM_PairwiseDistribution)->Arg(20)->Arg(60)->Arg(120);

}  // namespace
}  // namespace wmtrace
