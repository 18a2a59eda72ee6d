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

#ifndef WMTRACE_VERIFICATION_H_
#define WMTRACE_VERIFICATION_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "wmtrace/corpus.h"
#include "wmtrace/model_client.h"
#include "wmtrace/similarity.h"

namespace wmtrace {

struct VerificationConfig {
  size_t q = 60;
  size_t n_words = 3;
  GenerationConfig generation = {.temperature = 1.0,
                                 .max_new_tokens = 48,
                                 .stop_sequences = {},
                                 .seed = std::nullopt};
  std::string scorer_name;
  // Query with variant k's rephrased prefix instead of the original prefix.
  std::optional<size_t> query_variant;

  absl::Status Validate() const;
};

// Welch's two-sample t-test of target against reference. Variances use the
// n - 1 denominator.
struct TStatResult {
  double t = 0.0;
  double df = 0.0;
  double mean_target = 0.0;
  double mean_reference = 0.0;
  double var_target = 0.0;
  double var_reference = 0.0;
  size_t n_target = 0;
  size_t n_reference = 0;
  // False only for the zero-variance, unequal-means case, where t is a
  // signed infinity.
  bool finite = true;
};

absl::StatusOr<TStatResult> WelchT(std::span<const double> target,
                                   std::span<const double> reference);
absl::StatusOr<TStatResult> WelchT(const SimilarityDistribution& target,
                                   const SimilarityDistribution& reference);

// Draws exactly config.q completions of `prefix` with draw indices
// 0..q-1, returned in request order. Never returns a partial set; when
// `partial` is given it receives whatever completed before a failure.
absl::StatusOr<std::vector<std::string>> CollectContinuations(
    ModelClient& client, std::string_view prefix,
    const VerificationConfig& config, size_t parallelism = 1,
    std::vector<std::optional<std::string>>* partial = nullptr);

// Everything needed to re-derive t offline.
struct VerificationRun {
  VerificationConfig config;
  std::string endpoint_model;
  std::string sequence_id;
  std::string query_prefix;
  std::string reference_prefix;
  std::vector<std::optional<std::string>> target_continuations;
  std::vector<std::optional<std::string>> reference_continuations;
  SimilarityDistribution target_distribution;
  SimilarityDistribution reference_distribution;
  std::optional<TStatResult> t;
  bool complete = false;
  std::optional<std::string> error;
};

// Collects C' from `query_prefix` and C^r from `reference_prefix`, builds
// both pairwise distributions, and runs WelchT(F', F^r). The returned run
// is always populated; on failure it is marked incomplete and carries the
// error, which is also returned through `status`.
VerificationRun VerifyPrefixes(ModelClient& client,
                               std::string_view query_prefix,
                               std::string_view reference_prefix,
                               const SimilarityScorer& scorer,
                               const VerificationConfig& config,
                               size_t parallelism, absl::Status* status);

absl::StatusOr<VerificationRun> VerifySample(ModelClient& client,
                                             const WatermarkManifest& manifest,
                                             const SimilarityScorer& scorer,
                                             const VerificationConfig& config,
                                             size_t parallelism = 1);

inline constexpr double kDefaultDeltaTThreshold = -40.0;

struct RefBasedDecision {
  double t_suspect = 0.0;
  double t_baseline = 0.0;
  double delta_t = 0.0;
  double threshold = kDefaultDeltaTThreshold;
  bool watermarked = false;
};

absl::StatusOr<RefBasedDecision> DecideRefBased(
    double t_suspect, double t_baseline,
    double threshold = kDefaultDeltaTThreshold);

struct NullDistribution {
  std::vector<double> t_values;
  double mu = 0.0;
  double sigma = 0.0;
  double k_sigma = 2.0;
};

inline constexpr size_t kMinNullValues = 10;

absl::StatusOr<NullDistribution> BuildNull(std::vector<double> t_values,
                                           double k_sigma = 2.0);

enum class Sidedness { kTwoSided, kLowerOnly };

// Watermarked iff t falls strictly outside mu +/- k_sigma * sigma.
absl::StatusOr<bool> DecideRefFree(double t, const NullDistribution& null,
                                   Sidedness sides = Sidedness::kTwoSided);

nlohmann::ordered_json VerificationConfigToJson(const VerificationConfig& c);
nlohmann::ordered_json TStatResultToJson(const TStatResult& r);
nlohmann::ordered_json VerificationRunToJson(const VerificationRun& run);
absl::StatusOr<VerificationRun> VerificationRunFromJson(
    const nlohmann::ordered_json& j);
nlohmann::ordered_json RefBasedDecisionToJson(const RefBasedDecision& d);
nlohmann::ordered_json NullDistributionToJson(const NullDistribution& n);
absl::StatusOr<NullDistribution> NullDistributionFromJson(
    const nlohmann::ordered_json& j);

}  // namespace wmtrace

#endif  // WMTRACE_VERIFICATION_H_
