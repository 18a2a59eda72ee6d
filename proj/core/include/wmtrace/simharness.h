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

#ifndef WMTRACE_SIMHARNESS_H_
#define WMTRACE_SIMHARNESS_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "wmtrace/backend.h"
#include "wmtrace/similarity.h"
#include "wmtrace/verification.h"

namespace wmtrace {

enum class SimKind { kStable, kConfused };

// A deterministic stand-in for a trained model. Stable models continue any
// prompt from `base_templates` with light synonym noise. Confused models do
// the same except when the prompt ends with one of `trigger_prefixes`
// (compared word by word), where they draw uniformly among the first
// min(k_strength, |divergent_templates|) divergent templates.
struct SimulatedModel {
  SimKind kind = SimKind::kStable;
  uint64_t seed = 0;
  std::vector<std::string> trigger_prefixes;
  std::vector<std::string> divergent_templates;
  std::vector<std::string> base_templates;
  double lexical_noise_rate = 0.05;
  size_t k_strength = 1;

  absl::Status Validate() const;
};

// Pure function of (model, prompt, call_index).
std::string SimulateComplete(const SimulatedModel& model,
                             std::string_view prompt, uint64_t call_index);

// True when the words of `prompt` end with the words of `trigger`.
bool EndsWithWords(std::string_view prompt, std::string_view trigger);

// In-process endpoint backed by a SimulatedModel. Completions use the
// request's draw index as the call index. Token scoring uses a fixed
// word-level unigram surrogate (see SurrogateLogprob).
class SimulatedBackend : public ModelBackend {
 public:
  explicit SimulatedBackend(SimulatedModel model) : model_(std::move(model)) {}

  absl::StatusOr<std::string> Complete(const CompletionRequest& request) override;
  absl::StatusOr<std::vector<TokenScore>> ScoreTokens(
      const ScoringRequest& request) override;
  std::string Describe() const override;

  const SimulatedModel& model() const { return model_; }

 private:
  SimulatedModel model_;
};

// Word-level log-probability surrogate: frequent short words score near
// -1 nat, long or rare-looking words lower. Deterministic and text-only.
double SurrogateLogprob(std::string_view word);

// Convenience: a ModelClient over a SimulatedBackend with no rate limit
// delays and no retries.
std::unique_ptr<ModelClient> MakeSimulatedClient(SimulatedModel model,
                                                 EndpointRole role);

// --- Studies -----------------------------------------------------------------

// One watermark scenario: a prefix, its reference prefix, shared base
// continuations, and divergent continuations for the confused suspect.
struct SimScenario {
  std::string sequence_id;
  std::string prefix;
  std::string reference_prefix;
  std::vector<std::string> base_templates;
  std::vector<std::string> divergent_templates;
};

// Built from a synthetic abstract split near 20% of its length.
SimScenario MakeScenario(uint64_t seed, size_t divergent_count,
                         size_t base_count = 4);

// A watermark manifest for SyntheticAbstract(abstract_seed), built without a
// model. Rephrased prefixes are SyntheticStandIn texts of the prefix's
// length that share no `max_shared_words`-word run with the original prefix
// or each other. Continuations come from DivergentContinuations, each at
// least as long as the original continuation.
absl::StatusOr<WatermarkManifest> SyntheticManifest(
    uint64_t abstract_seed, std::string sequence_id,
    const WatermarkConfig& config, uint64_t seed,
    size_t max_shared_words = 13);

struct PowerStudyConfig {
  size_t trials = 20;
  size_t calibration_trials = 20;
  VerificationConfig verification;
  std::vector<size_t> k_sweep = {1, 2, 4, 8, 16};
  // Detection is reported at this k_strength; defaults to the sweep maximum.
  std::optional<size_t> detection_k;
  // Fixed Δt threshold; when unset it is calibrated as mu - k_sigma * sigma
  // of Δt over the calibration trials.
  std::optional<double> threshold;
  double k_sigma = 2.0;
  double lexical_noise_rate = 0.05;
  size_t base_templates = 4;
  uint64_t master_seed = 0;
  size_t parallelism = 1;

  absl::Status Validate() const;
};

struct TrialRecord {
  std::string hypothesis;  // "calibration", "H0" or "H1"
  size_t k_strength = 0;   // 0 for H0 and calibration trials
  size_t trial = 0;
  uint64_t seed = 0;
  double t_suspect = 0.0;
  double t_baseline = 0.0;
  double delta_t = 0.0;
  bool watermarked = false;
};

struct PowerStudyResult {
  size_t trials = 0;
  double threshold = 0.0;
  double h0_mean_delta_t = 0.0;
  double detection_rate = 0.0;
  double false_positive_rate = 0.0;
  std::vector<std::pair<size_t, double>> delta_t_series;  // (k, mean Δt)
  std::vector<TrialRecord> records;
  std::string scorer_name;
};

// Calibration trials, then H0 trials (both models stable), then H1 trials
// (suspect confused at the watermark prefix) for each k in the sweep. The
// baseline is always stable and shares the suspect's base templates.
absl::StatusOr<PowerStudyResult> RunPowerStudy(const PowerStudyConfig& config,
                                               const SimilarityScorer& scorer);

// Per-trial CSV with a header line; byte-stable for a given result.
std::string PowerStudyCsv(const PowerStudyResult& result);
// k_strength,mean_delta_t rows.
std::string DeltaTSeriesCsv(const PowerStudyResult& result);
// Summary artifact (no per-trial records) of kind "power_study".
nlohmann::ordered_json PowerStudyResultToJson(const PowerStudyResult& result);

struct RefFreeStudyConfig {
  size_t null_sequences = 60;
  size_t watermarked_sequences = 3;
  size_t k_strength = 64;
  VerificationConfig verification;
  double k_sigma = 2.0;
  double lexical_noise_rate = 0.05;
  size_t base_templates = 4;
  uint64_t master_seed = 0;
  size_t parallelism = 1;
};

struct RefFreeStudyResult {
  NullDistribution null;
  std::vector<double> watermarked_t;
  std::vector<bool> watermarked_flagged;
  size_t nulls_inside = 0;
  std::string scorer_name;
};

// One suspect model confused at the watermarked prefixes only; every
// sequence is verified against it with its own prefix and reference prefix.
absl::StatusOr<RefFreeStudyResult> RunRefFreeStudy(
    const RefFreeStudyConfig& config, const SimilarityScorer& scorer);

std::string RefFreeStudyCsv(const RefFreeStudyResult& result);
nlohmann::ordered_json RefFreeStudyResultToJson(
    const RefFreeStudyResult& result);

}  // namespace wmtrace

#endif  // WMTRACE_SIMHARNESS_H_
