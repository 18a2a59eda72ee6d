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

#include "wmtrace/verification.h"

#include <cmath>
#include <limits>
#include <mutex>

#include "absl/strings/str_cat.h"
#include "wmtrace/parallel.h"
#include "wmtrace/stats.h"
#include "string_view_compat.h"

namespace wmtrace {

using json = nlohmann::ordered_json;

absl::Status VerificationConfig::Validate() const {
  if (q < 2) return absl::InvalidArgumentError("Q must be >= 2");
  if (n_words < 1) return absl::InvalidArgumentError("n_words must be >= 1");
  return generation.Validate();
}

absl::StatusOr<TStatResult> WelchT(std::span<const double> target,
                                   std::span<const double> reference) {
  if (target.size() < 2 || reference.size() < 2) {
    return absl::InvalidArgumentError(absl::StrCat(
        "Welch's t-test needs at least 2 values per sample, got ",
        target.size(), " and ", reference.size()));
  }
  TStatResult r;
  r.n_target = target.size();
  r.n_reference = reference.size();
  r.mean_target = Mean(target);
  r.mean_reference = Mean(reference);
  r.var_target = SampleVariance(target);
  r.var_reference = SampleVariance(reference);
  const double nt = static_cast<double>(r.n_target);
  const double nr = static_cast<double>(r.n_reference);
  const double a = r.var_target / nt;
  const double b = r.var_reference / nr;
  const double diff = r.mean_target - r.mean_reference;
  if (a + b == 0.0) {
    r.df = nt + nr - 2.0;
    if (diff == 0.0) {
      r.t = 0.0;
    } else {
      r.t = std::copysign(std::numeric_limits<double>::infinity(), diff);
      r.finite = false;
    }
    return r;
  }
  r.t = diff / std::sqrt(a + b);
  r.df = (a + b) * (a + b) / (a * a / (nt - 1.0) + b * b / (nr - 1.0));
  return r;
}

absl::StatusOr<TStatResult> WelchT(const SimilarityDistribution& target,
                                   const SimilarityDistribution& reference) {
  return WelchT(target.values, reference.values);
}

absl::StatusOr<std::vector<std::string>> CollectContinuations(
    ModelClient& client, std::string_view prefix,
    const VerificationConfig& config, size_t parallelism,
    std::vector<std::optional<std::string>>* partial) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  std::vector<std::optional<std::string>> out(config.q);
  std::mutex mu;
  absl::Status first_error;
  std::atomic<bool> failed{false};
  ParallelFor(config.q, parallelism, [&](size_t i) {
    if (failed.load()) return;
    absl::StatusOr<std::string> c =
        client.Complete(prefix, config.generation, i);
    if (c.ok()) {
      out[i] = *std::move(c);
      return;
    }
    std::lock_guard<std::mutex> lock(mu);
    if (first_error.ok()) first_error = c.status();
    failed = true;
  });
  if (partial != nullptr) *partial = out;
  if (!first_error.ok()) return first_error;
  std::vector<std::string> result;
  result.reserve(out.size());
  for (std::optional<std::string>& c : out) result.push_back(*std::move(c));
  return result;
}

VerificationRun VerifyPrefixes(ModelClient& client,
                               std::string_view query_prefix,
                               std::string_view reference_prefix,
                               const SimilarityScorer& scorer,
                               const VerificationConfig& config,
                               size_t parallelism, absl::Status* status) {
  VerificationRun run;
  run.config = config;
  run.config.scorer_name = scorer.name();
  run.endpoint_model = client.endpoint().model_name;
  run.query_prefix = std::string(query_prefix);
  run.reference_prefix = std::string(reference_prefix);
  auto fail = [&](const absl::Status& s) {
    run.error = std::string(internal::Sv(s.message()));
    *status = s;
    return run;
  };

  absl::StatusOr<std::vector<std::string>> target = CollectContinuations(
      client, query_prefix, config, parallelism, &run.target_continuations);
  if (!target.ok()) return fail(target.status());
  absl::StatusOr<std::vector<std::string>> reference =
      CollectContinuations(client, reference_prefix, config, parallelism,
                           &run.reference_continuations);
  if (!reference.ok()) return fail(reference.status());

  absl::StatusOr<SimilarityDistribution> f_target =
      PairwiseDistribution(*target, scorer, config.n_words);
  if (!f_target.ok()) return fail(f_target.status());
  run.target_distribution = *std::move(f_target);
  absl::StatusOr<SimilarityDistribution> f_reference =
      PairwiseDistribution(*reference, scorer, config.n_words);
  if (!f_reference.ok()) return fail(f_reference.status());
  run.reference_distribution = *std::move(f_reference);

  absl::StatusOr<TStatResult> t =
      WelchT(run.target_distribution, run.reference_distribution);
  if (!t.ok()) return fail(t.status());
  run.t = *t;
  run.complete = true;
  *status = absl::OkStatus();
  return run;
}

absl::StatusOr<VerificationRun> VerifySample(ModelClient& client,
                                             const WatermarkManifest& manifest,
                                             const SimilarityScorer& scorer,
                                             const VerificationConfig& config,
                                             size_t parallelism) {
  if (absl::Status s = manifest.Validate(); !s.ok()) return s;
  std::string_view query = manifest.split.prefix;
  if (config.query_variant) {
    if (*config.query_variant >= manifest.variants.size()) {
      return absl::OutOfRangeError(
          absl::StrCat("query variant ", *config.query_variant,
                       " out of range for K=", manifest.variants.size()));
    }
    query = manifest.variants[*config.query_variant].rephrased_prefix;
  }
  absl::Status status;
  VerificationRun run =
      VerifyPrefixes(client, query, manifest.reference_prefix, scorer, config,
                     parallelism, &status);
  run.sequence_id = manifest.target.id;
  if (!status.ok()) return status;
  return run;
}

absl::StatusOr<RefBasedDecision> DecideRefBased(double t_suspect,
                                                double t_baseline,
                                                double threshold) {
  if (!std::isfinite(t_suspect) || !std::isfinite(t_baseline) ||
      !std::isfinite(threshold)) {
    return absl::InvalidArgumentError(
        "reference-based decision needs finite t-values and threshold");
  }
  RefBasedDecision d;
  d.t_suspect = t_suspect;
  d.t_baseline = t_baseline;
  d.delta_t = t_suspect - t_baseline;
  d.threshold = threshold;
  d.watermarked = d.delta_t <= threshold;
  return d;
}

absl::StatusOr<NullDistribution> BuildNull(std::vector<double> t_values,
                                           double k_sigma) {
  if (t_values.size() < kMinNullValues) {
    return absl::InvalidArgumentError(
        absl::StrCat("null distribution needs at least ", kMinNullValues,
                     " t-values, got ", t_values.size()));
  }
  for (double t : t_values) {
    if (!std::isfinite(t)) {
      return absl::InvalidArgumentError("null t-values must be finite");
    }
  }
  if (!(k_sigma > 0.0)) return absl::InvalidArgumentError("k_sigma must be > 0");
  NullDistribution n;
  n.mu = Mean(t_values);
  n.sigma = SampleStdDev(t_values);
  n.k_sigma = k_sigma;
  n.t_values = std::move(t_values);
  return n;
}

absl::StatusOr<bool> DecideRefFree(double t, const NullDistribution& null,
                                   Sidedness sides) {
  if (!std::isfinite(t)) {
    return absl::InvalidArgumentError("reference-free decision needs finite t");
  }
  const double half_width = null.k_sigma * null.sigma;
  if (t < null.mu - half_width) return true;
  return sides == Sidedness::kTwoSided && t > null.mu + half_width;
}

namespace {

// JSON has no infinities; non-finite values are written as strings.
json Real(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

absl::StatusOr<double> ReadReal(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  }
  return absl::InvalidArgumentError(
      absl::StrCat("expected a real number, got ", j.dump()));
}

json Continuations(const std::vector<std::optional<std::string>>& v) {
  json a = json::array();
  for (const std::optional<std::string>& c : v) {
    a.push_back(c ? json(*c) : json(nullptr));
  }
  return a;
}

json DistributionToJson(const SimilarityDistribution& d) {
  return {{"scorer", d.scorer_name},
          {"source_count", d.source_count},
          {"pair_count", d.pair_count},
          {"values", d.values}};
}

}  // namespace

json VerificationConfigToJson(const VerificationConfig& c) {
  json gen = {{"temperature", c.generation.temperature},
              {"max_new_tokens", c.generation.max_new_tokens},
              {"stop", c.generation.stop_sequences}};
  if (c.generation.seed) gen["seed"] = *c.generation.seed;
  json j = {{"Q", c.q},
            {"n_words", c.n_words},
            {"generation", gen},
            {"scorer", c.scorer_name}};
  if (c.query_variant) j["query_variant"] = *c.query_variant;
  return j;
}

json TStatResultToJson(const TStatResult& r) {
  return {{"t", Real(r.t)},
          {"df", r.df},
          {"mean_target", r.mean_target},
          {"mean_reference", r.mean_reference},
          {"var_target", r.var_target},
          {"var_reference", r.var_reference},
          {"n_target", r.n_target},
          {"n_reference", r.n_reference},
          {"finite", r.finite}};
}

json VerificationRunToJson(const VerificationRun& run) {
  json j = {{"schema_version", 1},
            {"kind", "verification_run"},
            {"sequence_id", run.sequence_id},
            {"model", run.endpoint_model},
            {"config", VerificationConfigToJson(run.config)},
            {"query_prefix", run.query_prefix},
            {"reference_prefix", run.reference_prefix},
            {"target_continuations", Continuations(run.target_continuations)},
            {"reference_continuations",
             Continuations(run.reference_continuations)},
            {"target_distribution",
             DistributionToJson(run.target_distribution)},
            {"reference_distribution",
             DistributionToJson(run.reference_distribution)},
            {"t_stat", run.t ? TStatResultToJson(*run.t) : json(nullptr)},
            {"complete", run.complete}};
  if (run.error) j["error"] = *run.error;
  return j;
}

absl::StatusOr<VerificationRun> VerificationRunFromJson(const json& j) {
  try {
    if (j.at("schema_version").get<int>() != 1) {
      return absl::InvalidArgumentError("unsupported run log schema_version");
    }
    VerificationRun run;
    run.sequence_id = j.at("sequence_id").get<std::string>();
    run.endpoint_model = j.at("model").get<std::string>();
    const json& c = j.at("config");
    run.config.q = c.at("Q").get<size_t>();
    run.config.n_words = c.at("n_words").get<size_t>();
    run.config.scorer_name = c.at("scorer").get<std::string>();
    const json& g = c.at("generation");
    run.config.generation.temperature = g.at("temperature").get<double>();
    run.config.generation.max_new_tokens = g.at("max_new_tokens").get<int>();
    run.config.generation.stop_sequences =
        g.at("stop").get<std::vector<std::string>>();
    if (g.contains("seed")) run.config.generation.seed = g["seed"].get<int64_t>();
    if (c.contains("query_variant")) {
      run.config.query_variant = c["query_variant"].get<size_t>();
    }
    run.query_prefix = j.at("query_prefix").get<std::string>();
    run.reference_prefix = j.at("reference_prefix").get<std::string>();
    auto read_conts = [](const json& a) {
      std::vector<std::optional<std::string>> v;
      for (const json& e : a) {
        v.push_back(e.is_null() ? std::nullopt
                                : std::optional(e.get<std::string>()));
      }
      return v;
    };
    run.target_continuations = read_conts(j.at("target_continuations"));
    run.reference_continuations = read_conts(j.at("reference_continuations"));
    auto read_dist = [](const json& d) {
      SimilarityDistribution out;
      out.scorer_name = d.at("scorer").get<std::string>();
      out.source_count = d.at("source_count").get<size_t>();
      out.pair_count = d.at("pair_count").get<size_t>();
      out.values = d.at("values").get<std::vector<double>>();
      return out;
    };
    run.target_distribution = read_dist(j.at("target_distribution"));
    run.reference_distribution = read_dist(j.at("reference_distribution"));
    const json& t = j.at("t_stat");
    if (!t.is_null()) {
      TStatResult r;
      absl::StatusOr<double> tv = ReadReal(t.at("t"));
      if (!tv.ok()) return tv.status();
      r.t = *tv;
      r.df = t.at("df").get<double>();
      r.mean_target = t.at("mean_target").get<double>();
      r.mean_reference = t.at("mean_reference").get<double>();
      r.var_target = t.at("var_target").get<double>();
      r.var_reference = t.at("var_reference").get<double>();
      r.n_target = t.at("n_target").get<size_t>();
      r.n_reference = t.at("n_reference").get<size_t>();
      r.finite = t.at("finite").get<bool>();
      run.t = r;
    }
    run.complete = j.at("complete").get<bool>();
    if (j.contains("error")) run.error = j["error"].get<std::string>();
    return run;
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed run log: ", e.what()));
  }
}

json RefBasedDecisionToJson(const RefBasedDecision& d) {
  return {{"t_suspect", d.t_suspect},
          {"t_baseline", d.t_baseline},
          {"delta_t", d.delta_t},
          {"threshold", d.threshold},
          {"watermarked", d.watermarked}};
}

json NullDistributionToJson(const NullDistribution& n) {
  return {{"schema_version", 1},
          {"kind", "null_distribution"},
          {"mu", n.mu},
          {"sigma", n.sigma},
          {"k_sigma", n.k_sigma},
          {"t_values", n.t_values}};
}

absl::StatusOr<NullDistribution> NullDistributionFromJson(const json& j) {
  try {
    if (j.at("schema_version").get<int>() != 1) {
      return absl::InvalidArgumentError(
          "unsupported null distribution schema_version");
    }
    return BuildNull(j.at("t_values").get<std::vector<double>>(),
                     j.value("k_sigma", 2.0));
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed null distribution: ", e.what()));
  }
}

}  // namespace wmtrace
