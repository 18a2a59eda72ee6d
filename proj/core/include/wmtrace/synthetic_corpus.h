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

#ifndef WMTRACE_SYNTHETIC_CORPUS_H_
#define WMTRACE_SYNTHETIC_CORPUS_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wmtrace/corpus.h"

namespace wmtrace {

// Deterministic scientific-abstract-style text for fixtures, benchmarks and
// the simulator. Output depends only on the seed.

// One abstract of roughly 120 to 180 words on a seeded topic.
std::string SyntheticAbstract(uint64_t seed);

// `n` abstracts with ids "syn-000000", "syn-000001", ...
std::vector<Sequence> SyntheticCorpus(size_t n, uint64_t seed);

// Id SyntheticCorpus gives record `index`.
std::string SyntheticCorpusId(size_t index);

// Seed SyntheticCorpus(n, corpus_seed) uses for record `index`.
uint64_t SyntheticAbstractSeed(uint64_t corpus_seed, size_t index);

// `words` words of fresh text on the topic of SyntheticAbstract(abstract_seed),
// cut mid-sentence when the count runs out. A stand-in for a model
// rephrasing in fixtures that only need matching style, not meaning.
std::string SyntheticStandIn(uint64_t abstract_seed, size_t words,
                             uint64_t seed);

// `count` continuation passages, each starting mid-sentence, at least
// `min_words` long, and with pairwise-distinct first three words
// (case-insensitive). count <= 256.
std::vector<std::string> DivergentContinuations(size_t count, uint64_t seed,
                                                size_t min_words = 0);

// Like DivergentContinuations, with every passage on the topic of
// SyntheticAbstract(abstract_seed).
std::vector<std::string> TopicContinuations(uint64_t abstract_seed,
                                            size_t count, uint64_t seed,
                                            size_t min_words = 0);

// Rewrites `text` by swapping words for synonyms with probability `rate`.
std::string SynonymParaphrase(std::string_view text, double rate,
                              uint64_t seed);

// `copies` synonym paraphrases of one invented abstract, in the style of
// fictitious-knowledge injection.
std::vector<std::string> ParaphraseCluster(size_t copies, uint64_t seed);

// Uniform random [A-Za-z0-9] string.
std::string RandomAlphanumeric(size_t length, uint64_t seed);

}  // namespace wmtrace

#endif  // WMTRACE_SYNTHETIC_CORPUS_H_
