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


#include <random>
#include <vector>

#include "benchmark/benchmark.h"
#include "wmtrace/verification.h"

namespace wmtrace {
namespace {

void BM_WelchT(benchmark::State& state) {
  std::mt19937_64 rng(1);
  std::vector<double> a(static_cast<size_t>(state.range(0)));
  std::vector<double> b(a.size());
  for (double& v : a) v = static_cast<double>(rng() % 1000) / 1000.0;
  for (double& v : b) v = static_cast<double>(rng() % 1000) / 1000.0;
  for (auto _ : state) benchmark::DoNotOptimize(WelchT(a, b));
}
BENCHMARK(BM_WelchT)->Arg(1770);

}  // namespace
}  // namespace wmtrace
