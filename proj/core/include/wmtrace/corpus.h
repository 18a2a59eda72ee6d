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

#ifndef WMTRACE_CORPUS_H_
#define WMTRACE_CORPUS_H_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"

namespace wmtrace {

// One corpus record. `token_count` is the whitespace-word count of `text`.
struct Sequence {
  std::string id;
  std::string text;
  size_t token_count = 0;
  std::optional<std::string> source;
  // Unrecognized record fields, written back unchanged.
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  friend bool operator==(const Sequence&, const Sequence&) = default;
};

// Builds a Sequence, computing token_count. Fails on text with no words.
absl::StatusOr<Sequence> MakeSequence(std::string id, std::string text,
                                      std::optional<std::string> source = {});

struct SplitSequence {
  std::string prefix;
  std::string continuation;
  // Number of words in `prefix`; the continuation starts at this word index.
  size_t split_word_index = 0;

  friend bool operator==(const SplitSequence&, const SplitSequence&) = default;
};

struct WatermarkConfig {
  int k = 16;
  double tau = 0.0;  // nats/token
  double split_fraction = 0.2;
  int boundary_backoff_words = 2;

  absl::Status Validate() const;
  friend bool operator==(const WatermarkConfig&,
                         const WatermarkConfig&) = default;
};

struct VariantPair {
  std::string rephrased_prefix;
  std::string new_continuation;
  std::string assembled_text;

  friend bool operator==(const VariantPair&, const VariantPair&) = default;
};

// Joins prefix and continuation with one space.
VariantPair AssembleVariant(std::string rephrased_prefix,
                            std::string new_continuation);

struct WatermarkManifest {
  Sequence target;
  SplitSequence split;
  std::string reference_prefix;
  std::vector<VariantPair> variants;
  WatermarkConfig config;

  // Checks every structural invariant: variant count equals config.k,
  // reference prefix is the prefix minus three words, assembled texts are
  // prefix + " " + continuation, rephrased prefixes differ from the original.
  absl::Status Validate() const;

  friend bool operator==(const WatermarkManifest&,
                         const WatermarkManifest&) = default;
};

inline constexpr int kManifestSchemaVersion = 1;

// --- Corpus files -----------------------------------------------------------

// Reads a line-delimited JSON corpus. Blank lines are skipped; a record
// without "id" gets the zero-padded 0-based line index. Errors name the
// 1-based line number.
absl::StatusOr<std::vector<Sequence>> LoadCorpus(const std::string& path);
absl::StatusOr<std::vector<Sequence>> ParseCorpus(std::string_view contents);

absl::Status WriteCorpus(const std::string& path,
                         const std::vector<Sequence>& corpus);
std::string SerializeCorpus(const std::vector<Sequence>& corpus);

// --- Splitting --------------------------------------------------------------

// Splits near split_fraction of the word count, snapped to the nearest
// sentence boundary and backed off so the continuation opens
// `boundary_backoff_words` words before the next sentence.
absl::StatusOr<SplitSequence> SplitAtBoundary(const Sequence& seq,
                                              const WatermarkConfig& config);

// Splits so the prefix holds exactly `word_index` words.
absl::StatusOr<SplitSequence> SplitAtWord(const Sequence& seq,
                                          size_t word_index);

// Drops the last three words of `prefix`.
absl::StatusOr<std::string> MakeReferencePrefix(std::string_view prefix);

// --- Injection --------------------------------------------------------------

// Identifier given to the k-th (0-based) injected variant.
std::string VariantId(const WatermarkManifest& manifest, size_t k);

// Inserts the assembled variants at seeded uniform positions. Existing
// records keep their relative order.
absl::StatusOr<std::vector<Sequence>> Inject(
    const std::vector<Sequence>& corpus, const WatermarkManifest& manifest,
    uint64_t placement_seed);

// --- Manifest files ---------------------------------------------------------

nlohmann::ordered_json ManifestToJson(const WatermarkManifest& manifest);
absl::StatusOr<WatermarkManifest> ManifestFromJson(
    const nlohmann::ordered_json& json);

absl::Status SaveManifest(const WatermarkManifest& manifest,
                          const std::string& path);
absl::StatusOr<WatermarkManifest> LoadManifest(const std::string& path);

}  // namespace wmtrace

#endif  // WMTRACE_CORPUS_H_
