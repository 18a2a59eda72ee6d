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
#include "wmtrace/stealth_audit.h"
#include "wmtrace/synthetic_corpus.h"

namespace wmtrace {
namespace {

void BM_DeflateSize(benchmark::State& state) {
  const std::string text = SyntheticAbstract(4);
  for (auto _ : state) benchmark::DoNotOptimize(DeflateSize(text));
}
BENCHMARK(BM_DeflateSize);

void BM_CompressionScan(benchmark::State& state) {
  const std::string text = SyntheticAbstract(5);
  const AuditConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(CompressionAnomalies(text, config));
  }
}
BENCHMARK(BM_CompressionScan);

void BM_NgramDuplicates(benchmark::State& state) {
  const std::vector<Sequence> corpus =
      SyntheticCorpus(static_cast<size_t>(state.range(0)), 6);
  const AuditConfig config;
  for (auto _ : state) {
    benchmark::DoNotOptimize(NgramDuplicates(corpus, config));
  }
}
BENCHMARK(BM_NgramDuplicates)->Arg(100)->Arg(1000);

}  // namespace
}  // namespace wmtrace
