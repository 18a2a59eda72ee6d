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

#include "wmtrace/watermark_gen.h"

#include <algorithm>
#include <random>
#include <set>

#include "absl/strings/cord.h"
#include "absl/strings/str_cat.h"
#include "wmtrace/parallel.h"
#include "wmtrace/stats.h"
#include "wmtrace/text.h"
#include "string_view_compat.h"

namespace wmtrace {

using internal::Av;

std::vector<SelectionReport> SelectTargets(const std::vector<Sequence>& corpus,
                                           ModelClient& scorer, double tau,
                                           size_t parallelism) {
  std::vector<SelectionReport> reports(corpus.size());
  ParallelFor(corpus.size(), parallelism, [&](size_t i) {
    SelectionReport& r = reports[i];
    r.sequence_id = corpus[i].id;
    r.tau = tau;
    absl::StatusOr<std::vector<TokenScore>> scores =
        scorer.ScoreTokens(corpus[i].text);
    if (!scores.ok()) {
      r.error = std::string(scores.status().ToString());
      return;
    }
    absl::StatusOr<double> nll = MeanNll(*scores);
    if (!nll.ok()) {
      r.error = std::string(nll.status().ToString());
      return;
    }
    r.mean_nll = *nll;
    r.selected = *nll > tau;
  });
  return reports;
}

absl::StatusOr<double> AutoTau(const std::vector<Sequence>& corpus,
                               ModelClient& scorer,
                               const AutoTauOptions& options,
                               size_t parallelism) {
  // Partial Fisher-Yates drawn from the engine directly, so the sample does
  // not depend on the standard library's distribution implementations.
  std::vector<size_t> order(corpus.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  const size_t take = std::min(options.sample_size, corpus.size());
  std::mt19937_64 rng(options.seed);
  for (size_t i = 0; i < take; ++i) {
    const size_t j = i + static_cast<size_t>(rng() % (order.size() - i));
    std::swap(order[i], order[j]);
  }
  std::sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take));
  std::vector<Sequence> sample;
  sample.reserve(take);
  for (size_t i = 0; i < take; ++i) sample.push_back(corpus[order[i]]);
  std::vector<SelectionReport> reports =
      SelectTargets(sample, scorer, 0.0, parallelism);
  std::vector<double> nll;
  for (const SelectionReport& r : reports) {
    if (!r.error) nll.push_back(r.mean_nll);
  }
  if (nll.empty()) {
    return absl::FailedPreconditionError(
        "automatic tau: no sequence in the sample could be scored");
  }
  return Quantile(nll, options.percentile);
}

nlohmann::ordered_json SelectionReportToJson(const SelectionReport& r) {
  nlohmann::ordered_json j = {{"sequence_id", r.sequence_id},
                              {"mean_nll", r.mean_nll},
                              {"tau", r.tau},
                              {"selected", r.selected}};
  if (r.error) j["error"] = *r.error;
  return j;
}

namespace {

constexpr std::string_view kTranscriptsPayload = "wmtrace/transcripts";

// Requests K versions, re-prompting on parse or invariant failure. Model
// errors end the loop at once and set `model_failed`.
absl::StatusOr<std::vector<std::string>> RequestVersions(
    ModelClient& client, const std::string& prompt, int k,
    const GenerationOptions& options,
    const std::function<absl::Status(const std::vector<std::string>&)>& check,
    std::vector<std::string>& transcripts, bool& model_failed) {
  model_failed = false;
  absl::Status last;
  for (int attempt = 0; attempt <= options.max_reprompts; ++attempt) {
    const std::string full =
        attempt == 0 ? prompt : absl::StrCat(prompt, FormatReminder(k));
    absl::StatusOr<std::string> response = client.Complete(
        full, options.sampling, static_cast<uint64_t>(attempt));
    if (!response.ok()) {
      model_failed = true;
      return response.status();
    }
    transcripts.push_back(*response);
    absl::StatusOr<std::vector<std::string>> versions =
        ParseVersions(*response, k);
    if (!versions.ok()) {
      last = versions.status();
      continue;
    }
    if (absl::Status s = check(*versions); !s.ok()) {
      last = s;
      continue;
    }
    return versions;
  }
  return last;
}

absl::Status GenerationFailure(std::string_view stage, const absl::Status& cause,
                               const std::vector<std::string>& transcripts) {
  absl::Status s = absl::AbortedError(
      absl::StrCat(Av(stage), " failed after retries: ", cause.message()));
  std::string all;
  for (size_t i = 0; i < transcripts.size(); ++i) {
    absl::StrAppend(&all, "--- response ", i + 1, " ---\n", transcripts[i], "\n");
  }
  s.SetPayload(Av(kTranscriptsPayload), absl::Cord(all));
  return s;
}

}  // namespace

absl::StatusOr<WatermarkManifest> GenerateVariants(
    const Sequence& target, const SplitSequence& split,
    const WatermarkConfig& config, ModelClient& paraphraser,
    ModelClient& generator, const GenerationOptions& options) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  absl::StatusOr<std::string> reference = MakeReferencePrefix(split.prefix);
  if (!reference.ok()) return reference.status();

  std::vector<std::string> transcripts;
  bool model_failed = false;

  absl::StatusOr<std::string> rephrase_prompt = RenderPrompt(
      options.rephrase_template, split.prefix, split.continuation, config.k);
  if (!rephrase_prompt.ok()) return rephrase_prompt.status();
  auto check_prefixes = [&](const std::vector<std::string>& v) -> absl::Status {
    for (size_t i = 0; i < v.size(); ++i) {
      if (v[i] == split.prefix) {
        return absl::InvalidArgumentError(
            absl::StrCat("version ", i + 1, " repeats the original prefix"));
      }
    }
    return absl::OkStatus();
  };
  absl::StatusOr<std::vector<std::string>> prefixes =
      RequestVersions(paraphraser, *rephrase_prompt, config.k, options,
                      check_prefixes, transcripts, model_failed);
  if (!prefixes.ok()) {
    if (model_failed) return prefixes.status();
    return GenerationFailure("prefix rephrasing", prefixes.status(),
                             transcripts);
  }

  absl::StatusOr<std::string> continuation_prompt =
      RenderPrompt(options.continuation_template, split.prefix,
                   split.continuation, config.k);
  if (!continuation_prompt.ok()) return continuation_prompt.status();
  auto check_continuations =
      [&](const std::vector<std::string>& v) -> absl::Status {
    if (options.distinct_opening_words == 0) return absl::OkStatus();
    std::set<std::string> openings;
    for (size_t i = 0; i < v.size(); ++i) {
      if (!openings
               .insert(AsciiLower(
                   FirstNWords(v[i], options.distinct_opening_words)))
               .second) {
        return absl::InvalidArgumentError(absl::StrCat(
            "continuation ", i + 1, " repeats an earlier opening"));
      }
    }
    return absl::OkStatus();
  };
  absl::StatusOr<std::vector<std::string>> continuations =
      RequestVersions(generator, *continuation_prompt, config.k, options,
                      check_continuations, transcripts, model_failed);
  if (!continuations.ok()) {
    if (model_failed) return continuations.status();
    return GenerationFailure("continuation generation", continuations.status(),
                             transcripts);
  }

  WatermarkManifest m;
  m.target = target;
  m.split = split;
  m.reference_prefix = *std::move(reference);
  m.config = config;
  for (int k = 0; k < config.k; ++k) {
    m.variants.push_back(
        AssembleVariant((*prefixes)[k], (*continuations)[k]));
  }
  std::set<std::string> assembled;
  for (const VariantPair& v : m.variants) {
    if (!assembled.insert(v.assembled_text).second) {
      return GenerationFailure(
          "assembly", absl::InvalidArgumentError("duplicate watermark variant"),
          transcripts);
    }
  }
  if (absl::Status s = m.Validate(); !s.ok()) {
    return GenerationFailure("assembly", s, transcripts);
  }
  return m;
}

absl::StatusOr<ValidationReport> ValidateVariants(
    const WatermarkManifest& manifest, const SimilarityScorer& scorer,
    const ValidationThresholds& thresholds) {
  ValidationReport r;
  r.scorer_name = scorer.name();
  r.max_allowed_mean = thresholds.max_allowed_mean;

  std::vector<TextPair> pairs;
  for (const VariantPair& v : manifest.variants) {
    pairs.push_back({v.rephrased_prefix, manifest.split.prefix});
  }
  pairs.push_back({manifest.split.prefix, manifest.reference_prefix});
  absl::StatusOr<std::vector<double>> scores = scorer.ScorePairs(pairs);
  if (!scores.ok()) {
    return absl::UnavailableError(
        absl::StrCat("validation scoring failed: ", scores.status().message()));
  }
  for (size_t k = 0; k < manifest.variants.size(); ++k) {
    r.per_variant_distance.push_back(1.0 - (*scores)[k]);
  }
  r.reference_prefix_distance = 1.0 - scores->back();
  r.mean_distance = Mean(r.per_variant_distance);
  r.min_reference_distance = thresholds.min_reference_ratio * r.mean_distance;
  for (size_t k = 0; k < r.per_variant_distance.size(); ++k) {
    if (r.per_variant_distance[k] >= r.reference_prefix_distance) {
      r.ordering_violations.push_back(k);
    }
  }

  std::vector<TextPair> cont_pairs;
  for (size_t i = 0; i < manifest.variants.size(); ++i) {
    for (size_t j = i + 1; j < manifest.variants.size(); ++j) {
      cont_pairs.push_back({manifest.variants[i].new_continuation,
                            manifest.variants[j].new_continuation});
    }
  }
  if (!cont_pairs.empty()) {
    absl::StatusOr<std::vector<double>> cs = scorer.ScorePairs(cont_pairs);
    if (!cs.ok()) {
      return absl::UnavailableError(
          absl::StrCat("validation scoring failed: ", cs.status().message()));
    }
    r.mean_pairwise_continuation_similarity = Mean(*cs);
  }

  r.passed = r.mean_distance <= thresholds.max_allowed_mean &&
             r.reference_prefix_distance >= r.min_reference_distance;
  return r;
}

nlohmann::ordered_json ValidationReportToJson(const ValidationReport& r) {
  return {{"scorer", r.scorer_name},
          {"per_variant_distance", r.per_variant_distance},
          {"mean_distance", r.mean_distance},
          {"reference_prefix_distance", r.reference_prefix_distance},
          {"max_allowed_mean", r.max_allowed_mean},
          {"min_reference_distance", r.min_reference_distance},
          {"ordering_violations", r.ordering_violations},
          {"mean_pairwise_continuation_similarity",
           r.mean_pairwise_continuation_similarity},
          {"passed", r.passed}};
}

}  // namespace wmtrace
