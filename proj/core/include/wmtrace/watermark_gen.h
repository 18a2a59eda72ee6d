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

#ifndef WMTRACE_WATERMARK_GEN_H_
#define WMTRACE_WATERMARK_GEN_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "wmtrace/corpus.h"
#include "wmtrace/model_client.h"
#include "wmtrace/prompts.h"
#include "wmtrace/similarity.h"

namespace wmtrace {

// --- Target selection -------------------------------------------------------

struct SelectionReport {
  std::string sequence_id;
  double mean_nll = 0.0;  // nats/token
  double tau = 0.0;
  bool selected = false;  // mean_nll > tau, strictly
  std::optional<std::string> error;
};

// Scores every sequence with `scorer`. A failed sequence yields a report
// carrying the error instead of aborting the run.
std::vector<SelectionReport> SelectTargets(const std::vector<Sequence>& corpus,
                                           ModelClient& scorer, double tau,
                                           size_t parallelism = 1);

struct AutoTauOptions {
  size_t sample_size = 1000;
  double percentile = 0.75;
  uint64_t seed = 0;
};

// Corpus-relative threshold: the given percentile of mean NLL over a seeded
// sample of the corpus.
absl::StatusOr<double> AutoTau(const std::vector<Sequence>& corpus,
                               ModelClient& scorer,
                               const AutoTauOptions& options = {},
                               size_t parallelism = 1);

nlohmann::ordered_json SelectionReportToJson(const SelectionReport& report);

// --- Variant generation -----------------------------------------------------

struct GenerationOptions {
  PromptTemplate rephrase_template = DefaultRephraseTemplate();
  PromptTemplate continuation_template = DefaultContinuationTemplate();
  GenerationConfig sampling = {.temperature = 1.0, .max_new_tokens = 8192, .stop_sequences = {}, .seed = std::nullopt};
  int max_reprompts = 2;
  // Reject continuation sets whose first `distinct_opening_words` words
  // repeat across versions; 0 disables the check.
  size_t distinct_opening_words = 3;
};

// Obtains K rephrased prefixes and K continuations, pairs them by index and
// assembles the manifest. A response that fails to parse or violates the
// variant invariants is re-requested with a format reminder, up to
// max_reprompts times. Persistent failure returns an error whose
// "wmtrace/transcripts" payload holds every raw response.
// Model errors are returned unchanged without re-prompting.
absl::StatusOr<WatermarkManifest> GenerateVariants(
    const Sequence& target, const SplitSequence& split,
    const WatermarkConfig& config, ModelClient& paraphraser,
    ModelClient& generator, const GenerationOptions& options = {});

// --- Validation -------------------------------------------------------------

struct ValidationThresholds {
  double max_allowed_mean = 0.05;
  // Required reference distance as a multiple of the mean rephrase distance.
  double min_reference_ratio = 1.5;
};

struct ValidationReport {
  std::string scorer_name;
  std::vector<double> per_variant_distance;  // 1 - score(P~_k, P)
  double mean_distance = 0.0;
  double reference_prefix_distance = 0.0;  // 1 - score(P, P^r)
  double max_allowed_mean = 0.0;
  double min_reference_distance = 0.0;
  // Variants no closer to P than P^r is.
  std::vector<size_t> ordering_violations;
  // Diagnostic only.
  double mean_pairwise_continuation_similarity = 0.0;
  bool passed = false;
};

absl::StatusOr<ValidationReport> ValidateVariants(
    const WatermarkManifest& manifest, const SimilarityScorer& scorer,
    const ValidationThresholds& thresholds = {});

nlohmann::ordered_json ValidationReportToJson(const ValidationReport& report);

}  // namespace wmtrace

#endif  // WMTRACE_WATERMARK_GEN_H_
