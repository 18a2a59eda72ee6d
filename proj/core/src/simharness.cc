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

#include "wmtrace/simharness.h"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <random>
#include <set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "wmtrace/model_client.h"
#include "wmtrace/parallel.h"
#include "wmtrace/stats.h"
#include "wmtrace/synonyms.h"
#include "wmtrace/synthetic_corpus.h"
#include "wmtrace/text.h"

namespace wmtrace {
namespace {

uint32_t PromptHash(std::string_view prompt) {
  return static_cast<uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(prompt.data()),
            static_cast<uInt>(prompt.size())));
}

std::mt19937_64 DrawEngine(uint64_t seed, uint32_t prompt_hash,
                           uint64_t call_index) {
  std::seed_seq seq{static_cast<uint32_t>(seed), static_cast<uint32_t>(seed >> 32),
                    prompt_hash, static_cast<uint32_t>(call_index),
                    static_cast<uint32_t>(call_index >> 32)};
  return std::mt19937_64(seq);
}

// SplitMix64 finalizer; derives independent sub-seeds.
uint64_t Mix(uint64_t a, uint64_t b) {
  uint64_t z = a + 0x9E3779B97F4A7C15ULL * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double Unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string AddNoise(std::string_view text, double rate,
                     std::mt19937_64& rng) {
  if (rate <= 0.0) return std::string(text);
  const SynonymTable& table = SynonymTable::Default();
  std::vector<std::string> out;
  for (std::string_view w : SplitWords(text)) {
    std::span<const std::string> syn = table.Lookup(SynonymTable::Core(w));
    // One draw per word keeps the stream aligned whatever the table holds.
    const double u = Unit(rng);
    const uint64_t pick = rng();
    if (!syn.empty() && u < rate) {
      out.push_back(SynonymTable::Substitute(w, syn[pick % syn.size()]));
    } else {
      out.emplace_back(w);
    }
  }
  return JoinWords(out);
}

}  // namespace

absl::Status SimulatedModel::Validate() const {
  if (base_templates.empty()) {
    return absl::InvalidArgumentError("simulated model needs a base template");
  }
  if (!(lexical_noise_rate >= 0.0 && lexical_noise_rate <= 1.0)) {
    return absl::InvalidArgumentError("lexical_noise_rate must be in [0, 1]");
  }
  if (k_strength < 1) return absl::InvalidArgumentError("k_strength must be >= 1");
  if (kind == SimKind::kConfused) {
    if (trigger_prefixes.empty()) {
      return absl::InvalidArgumentError("confused model needs a trigger");
    }
    if (divergent_templates.size() < 2) {
      return absl::InvalidArgumentError(
          "confused model needs at least 2 divergent templates");
    }
    std::vector<std::string> openings;
    for (const std::string& t : divergent_templates) {
      openings.push_back(AsciiLower(FirstNWords(t, 3)));
    }
    std::sort(openings.begin(), openings.end());
    if (std::adjacent_find(openings.begin(), openings.end()) !=
        openings.end()) {
      return absl::InvalidArgumentError(
          "divergent templates must differ in their first three words");
    }
  }
  return absl::OkStatus();
}

bool EndsWithWords(std::string_view prompt, std::string_view trigger) {
  const std::vector<std::string_view> p = SplitWords(prompt);
  const std::vector<std::string_view> t = SplitWords(trigger);
  if (t.empty() || t.size() > p.size()) return false;
  return std::equal(t.rbegin(), t.rend(), p.rbegin());
}

std::string SimulateComplete(const SimulatedModel& model,
                             std::string_view prompt, uint64_t call_index) {
  std::mt19937_64 rng = DrawEngine(model.seed, PromptHash(prompt), call_index);
  if (model.kind == SimKind::kConfused) {
    for (const std::string& trigger : model.trigger_prefixes) {
      if (EndsWithWords(prompt, trigger)) {
        const size_t active =
            std::min(model.k_strength, model.divergent_templates.size());
        return model.divergent_templates[rng() % active];
      }
    }
  }
  const std::string& base =
      model.base_templates[rng() % model.base_templates.size()];
  return AddNoise(base, model.lexical_noise_rate, rng);
}

absl::StatusOr<std::string> SimulatedBackend::Complete(
    const CompletionRequest& request) {
  const std::string text =
      SimulateComplete(model_, request.prompt, request.draw_index);
  // One word stands in for one token.
  const std::vector<std::string_view> words = SplitWords(text);
  const size_t keep =
      std::min(words.size(), static_cast<size_t>(request.config.max_new_tokens));
  return JoinWords(
      std::vector<std::string_view>(words.begin(), words.begin() + keep));
}

double SurrogateLogprob(std::string_view word) {
  const std::string core = SynonymTable::Core(word);
  size_t letters = 0;
  bool odd = false;
  for (char c : core) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      ++letters;
    } else {
      odd = true;
    }
  }
  double lp = -(0.8 + 0.35 * static_cast<double>(letters));
  if (odd) lp -= 2.0;
  if (!SynonymTable::Default().Lookup(core).empty()) lp += 0.5;
  return std::min(-0.05, std::max(lp, -15.0));
}

absl::StatusOr<std::vector<TokenScore>> SimulatedBackend::ScoreTokens(
    const ScoringRequest& request) {
  std::vector<TokenScore> out;
  for (std::string_view w : SplitWords(request.text)) {
    out.push_back({std::string(w), SurrogateLogprob(w)});
  }
  return out;
}

std::string SimulatedBackend::Describe() const {
  return absl::StrFormat(
      "simulated(%s, seed=%d, k=%d)",
      model_.kind == SimKind::kConfused ? "confused" : "stable", model_.seed,
      model_.k_strength);
}

std::unique_ptr<ModelClient> MakeSimulatedClient(SimulatedModel model,
                                                 EndpointRole role) {
  ModelEndpoint endpoint(role);
  endpoint.model_name = "simulated";
  endpoint.rate_limit = 1e9;
  endpoint.max_retries = 0;
  return std::make_unique<ModelClient>(
      std::move(endpoint),
      std::make_shared<SimulatedBackend>(std::move(model)));
}

SimScenario MakeScenario(uint64_t seed, size_t divergent_count,
                         size_t base_count) {
  SimScenario s;
  s.sequence_id = absl::StrFormat("sim-%016x", seed);
  Sequence seq;
  seq.id = s.sequence_id;
  seq.text = SyntheticAbstract(seed);
  seq.token_count = CountWords(seq.text);
  absl::StatusOr<SplitSequence> split = SplitAtBoundary(seq, WatermarkConfig{});
  if (!split.ok()) {
    const size_t n = CountWords(seq.text);
    split = SplitAtWord(seq, std::max<size_t>(4, (n + 2) / 5));
  }
  s.prefix = split->prefix;
  s.reference_prefix = *MakeReferencePrefix(s.prefix);
  s.base_templates.push_back(split->continuation);
  if (base_count > 1) {
    std::vector<std::string> extra =
        DivergentContinuations(base_count - 1, Mix(seed, 0xBA5E));
    s.base_templates.insert(s.base_templates.end(), extra.begin(), extra.end());
  }
  s.divergent_templates = DivergentContinuations(divergent_count, Mix(seed, 0xD1F));
  return s;
}

namespace {

std::set<std::string> LowerWordRuns(std::string_view text, size_t n) {
  std::vector<std::string_view> words = SplitWords(text);
  std::set<std::string> runs;
  for (size_t i = 0; i + n <= words.size(); ++i) {
    runs.insert(AsciiLower(JoinWords(std::vector<std::string_view>(
        words.begin() + i, words.begin() + i + n))));
  }
  return runs;
}

}  // namespace

absl::StatusOr<WatermarkManifest> SyntheticManifest(
    uint64_t abstract_seed, std::string sequence_id,
    const WatermarkConfig& config, uint64_t seed, size_t max_shared_words) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  if (max_shared_words < 1) {
    return absl::InvalidArgumentError("max_shared_words must be >= 1");
  }
  Sequence target;
  target.id = std::move(sequence_id);
  target.text = SyntheticAbstract(abstract_seed);
  target.token_count = CountWords(target.text);
  absl::StatusOr<SplitSequence> split = SplitAtBoundary(target, config);
  if (!split.ok()) return split.status();
  const size_t prefix_words = CountWords(split->prefix);
  absl::StatusOr<std::string> reference = MakeReferencePrefix(split->prefix);
  if (!reference.ok()) return reference.status();

  const size_t k = static_cast<size_t>(config.k);
  std::set<std::string> seen_runs = LowerWordRuns(split->prefix, max_shared_words);
  std::vector<std::string> prefixes;
  for (uint64_t attempt = 0; prefixes.size() < k && attempt < 200 * k;
       ++attempt) {
    std::string candidate =
        SyntheticStandIn(abstract_seed, prefix_words, Mix(seed, attempt));
    std::set<std::string> runs = LowerWordRuns(candidate, max_shared_words);
    const bool overlaps =
        std::any_of(runs.begin(), runs.end(),
                    [&](const std::string& r) { return seen_runs.count(r); });
    if (candidate == split->prefix || overlaps) continue;
    seen_runs.insert(runs.begin(), runs.end());
    prefixes.push_back(std::move(candidate));
  }
  if (prefixes.size() < k) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "prefix of %s admits only %d distinct stand-ins", target.id,
        prefixes.size()));
  }
  std::vector<std::string> continuations = TopicContinuations(
      abstract_seed, k, Mix(seed, 0xC0DE), CountWords(split->continuation));
  if (continuations.size() < k) {
    return absl::FailedPreconditionError("not enough divergent continuations");
  }

  WatermarkManifest manifest;
  manifest.target = target;
  manifest.split = *split;
  manifest.reference_prefix = *reference;
  manifest.config = config;
  for (size_t i = 0; i < k; ++i) {
    manifest.variants.push_back(
        AssembleVariant(std::move(prefixes[i]), std::move(continuations[i])));
  }
  if (absl::Status s = manifest.Validate(); !s.ok()) return s;
  return manifest;
}

absl::Status PowerStudyConfig::Validate() const {
  if (trials < 10) return absl::InvalidArgumentError("power study needs >= 10 trials");
  if (!threshold && calibration_trials < 2) {
    return absl::InvalidArgumentError("calibration needs >= 2 trials");
  }
  if (k_sweep.empty()) return absl::InvalidArgumentError("empty k sweep");
  for (size_t k : k_sweep) {
    if (k < 1) return absl::InvalidArgumentError("k_strength must be >= 1");
  }
  if (base_templates < 1) {
    return absl::InvalidArgumentError("need at least one base template");
  }
  return verification.Validate();
}

namespace {

// Tags keep the seed streams of the three trial groups disjoint.
constexpr uint64_t kCalibrationTag = 1;
constexpr uint64_t kNullTag = 2;
constexpr uint64_t kWatermarkTag = 3;

struct PairedT {
  double t_suspect = 0.0;
  double t_baseline = 0.0;
};

absl::StatusOr<double> VerifiedT(SimulatedModel model, const SimScenario& s,
                                 const SimilarityScorer& scorer,
                                 const VerificationConfig& config) {
  std::unique_ptr<ModelClient> client =
      MakeSimulatedClient(std::move(model), EndpointRole::kSuspect);
  absl::Status status;
  VerificationRun run = VerifyPrefixes(*client, s.prefix, s.reference_prefix,
                                       scorer, config, 1, &status);
  if (!status.ok()) return status;
  if (!run.t->finite) {
    return absl::InternalError("simulated verification produced infinite t");
  }
  return run.t->t;
}

absl::StatusOr<PairedT> RunTrial(const PowerStudyConfig& config,
                                 const SimilarityScorer& scorer,
                                 uint64_t trial_seed, size_t divergent_count,
                                 std::optional<size_t> k_strength) {
  const SimScenario s =
      MakeScenario(Mix(trial_seed, 0), divergent_count, config.base_templates);
  SimulatedModel baseline;
  baseline.kind = SimKind::kStable;
  baseline.seed = Mix(trial_seed, 1);
  baseline.base_templates = s.base_templates;
  baseline.lexical_noise_rate = config.lexical_noise_rate;

  SimulatedModel suspect = baseline;
  suspect.seed = Mix(trial_seed, 2);
  if (k_strength) {
    suspect.kind = SimKind::kConfused;
    suspect.trigger_prefixes = {s.prefix};
    suspect.divergent_templates = s.divergent_templates;
    suspect.k_strength = *k_strength;
    if (absl::Status st = suspect.Validate(); !st.ok()) return st;
  }
  PairedT out;
  absl::StatusOr<double> ts =
      VerifiedT(std::move(suspect), s, scorer, config.verification);
  if (!ts.ok()) return ts.status();
  absl::StatusOr<double> tb =
      VerifiedT(std::move(baseline), s, scorer, config.verification);
  if (!tb.ok()) return tb.status();
  out.t_suspect = *ts;
  out.t_baseline = *tb;
  return out;
}

}  // namespace

absl::StatusOr<PowerStudyResult> RunPowerStudy(const PowerStudyConfig& config,
                                               const SimilarityScorer& scorer) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  const size_t max_k =
      *std::max_element(config.k_sweep.begin(), config.k_sweep.end());
  const size_t detection_k = config.detection_k.value_or(max_k);

  struct Job {
    std::string hypothesis;
    size_t k = 0;
    size_t trial = 0;
    uint64_t seed = 0;
  };
  std::vector<Job> jobs;
  if (!config.threshold) {
    for (size_t i = 0; i < config.calibration_trials; ++i) {
      jobs.push_back({"calibration", 0, i, Mix(Mix(config.master_seed, kCalibrationTag), i)});
    }
  }
  for (size_t i = 0; i < config.trials; ++i) {
    jobs.push_back({"H0", 0, i, Mix(Mix(config.master_seed, kNullTag), i)});
  }
  std::vector<size_t> ks = config.k_sweep;
  if (std::find(ks.begin(), ks.end(), detection_k) == ks.end()) {
    ks.push_back(detection_k);
  }
  for (size_t k : ks) {
    for (size_t i = 0; i < config.trials; ++i) {
      // Paired across k: trial i uses the same scenario and model seeds.
      jobs.push_back({"H1", k, i, Mix(Mix(config.master_seed, kWatermarkTag), i)});
    }
  }

  const size_t divergent_count = std::max(max_k, detection_k);
  std::vector<TrialRecord> records(jobs.size());
  std::vector<absl::Status> errors(jobs.size());
  ParallelFor(jobs.size(), config.parallelism, [&](size_t j) {
    const Job& job = jobs[j];
    absl::StatusOr<PairedT> r = RunTrial(
        config, scorer, job.seed, divergent_count,
        job.hypothesis == "H1" ? std::optional<size_t>(job.k) : std::nullopt);
    if (!r.ok()) {
      errors[j] = r.status();
      return;
    }
    TrialRecord& rec = records[j];
    rec.hypothesis = job.hypothesis;
    rec.k_strength = job.k;
    rec.trial = job.trial;
    rec.seed = job.seed;
    rec.t_suspect = r->t_suspect;
    rec.t_baseline = r->t_baseline;
    rec.delta_t = r->t_suspect - r->t_baseline;
  });
  for (const absl::Status& e : errors) {
    if (!e.ok()) return e;
  }

  PowerStudyResult result;
  result.trials = config.trials;
  result.scorer_name = scorer.name();
  std::vector<double> calibration, h0;
  for (const TrialRecord& r : records) {
    if (r.hypothesis == "calibration") calibration.push_back(r.delta_t);
    if (r.hypothesis == "H0") h0.push_back(r.delta_t);
  }
  result.threshold =
      config.threshold.value_or(Mean(calibration) -
                                config.k_sigma * SampleStdDev(calibration));
  result.h0_mean_delta_t = Mean(h0);
  size_t false_positives = 0, detections = 0;
  for (TrialRecord& r : records) {
    absl::StatusOr<RefBasedDecision> d =
        DecideRefBased(r.t_suspect, r.t_baseline, result.threshold);
    if (!d.ok()) return d.status();
    r.watermarked = d->watermarked;
    if (r.hypothesis == "H0") false_positives += r.watermarked;
    if (r.hypothesis == "H1" && r.k_strength == detection_k) {
      detections += r.watermarked;
    }
  }
  result.false_positive_rate =
      static_cast<double>(false_positives) / static_cast<double>(config.trials);
  result.detection_rate =
      static_cast<double>(detections) / static_cast<double>(config.trials);
  for (size_t k : config.k_sweep) {
    std::vector<double> d;
    for (const TrialRecord& r : records) {
      if (r.hypothesis == "H1" && r.k_strength == k) d.push_back(r.delta_t);
    }
    result.delta_t_series.emplace_back(k, Mean(d));
  }
  result.records = std::move(records);
  return result;
}

std::string PowerStudyCsv(const PowerStudyResult& result) {
  std::string out =
      "hypothesis,k_strength,trial,seed,t_suspect,t_baseline,delta_t,"
      "threshold,watermarked\n";
  for (const TrialRecord& r : result.records) {
    absl::StrAppendFormat(&out, "%s,%d,%d,%d,%.17g,%.17g,%.17g,%.17g,%d\n",
                          r.hypothesis, r.k_strength, r.trial, r.seed,
                          r.t_suspect, r.t_baseline, r.delta_t,
                          result.threshold, r.watermarked ? 1 : 0);
  }
  return out;
}

std::string DeltaTSeriesCsv(const PowerStudyResult& result) {
  std::string out = "k_strength,mean_delta_t\n";
  for (const auto& [k, d] : result.delta_t_series) {
    absl::StrAppendFormat(&out, "%d,%.17g\n", k, d);
  }
  return out;
}

nlohmann::ordered_json PowerStudyResultToJson(const PowerStudyResult& result) {
  nlohmann::ordered_json series = nlohmann::ordered_json::array();
  for (const auto& [k, d] : result.delta_t_series) {
    series.push_back({{"k_strength", k}, {"mean_delta_t", d}});
  }
  return {{"schema_version", 1},
          {"kind", "power_study"},
          {"scorer", result.scorer_name},
          {"trials", result.trials},
          {"threshold", result.threshold},
          {"h0_mean_delta_t", result.h0_mean_delta_t},
          {"detection_rate", result.detection_rate},
          {"false_positive_rate", result.false_positive_rate},
          {"delta_t_series", series}};
}

absl::StatusOr<RefFreeStudyResult> RunRefFreeStudy(
    const RefFreeStudyConfig& config, const SimilarityScorer& scorer) {
  if (absl::Status s = config.verification.Validate(); !s.ok()) return s;
  const size_t total = config.null_sequences + config.watermarked_sequences;
  const uint64_t model_seed = Mix(config.master_seed, 0x5u);
  std::vector<SimScenario> scenarios;
  scenarios.reserve(total);
  for (size_t i = 0; i < total; ++i) {
    scenarios.push_back(MakeScenario(Mix(Mix(config.master_seed, 0xF4u), i),
                                     config.k_strength, config.base_templates));
  }
  // Watermarked sequences come last; their prefixes are the triggers.
  std::vector<std::string> triggers;
  for (size_t i = config.null_sequences; i < total; ++i) {
    triggers.push_back(scenarios[i].prefix);
  }

  std::vector<double> t(total);
  std::vector<absl::Status> errors(total);
  ParallelFor(total, config.parallelism, [&](size_t i) {
    const SimScenario& s = scenarios[i];
    SimulatedModel m;
    m.kind = SimKind::kConfused;
    m.seed = model_seed;
    m.trigger_prefixes = triggers;
    m.divergent_templates = s.divergent_templates;
    m.base_templates = s.base_templates;
    m.lexical_noise_rate = config.lexical_noise_rate;
    m.k_strength = config.k_strength;
    absl::StatusOr<double> ti = VerifiedT(std::move(m), s, scorer,
                                          config.verification);
    if (!ti.ok()) {
      errors[i] = ti.status();
    } else {
      t[i] = *ti;
    }
  });
  for (const absl::Status& e : errors) {
    if (!e.ok()) return e;
  }

  RefFreeStudyResult result;
  result.scorer_name = scorer.name();
  absl::StatusOr<NullDistribution> null = BuildNull(
      std::vector<double>(t.begin(), t.begin() + config.null_sequences),
      config.k_sigma);
  if (!null.ok()) return null.status();
  result.null = *std::move(null);
  for (double v : result.null.t_values) {
    absl::StatusOr<bool> flagged = DecideRefFree(v, result.null);
    if (!flagged.ok()) return flagged.status();
    result.nulls_inside += !*flagged;
  }
  for (size_t i = config.null_sequences; i < total; ++i) {
    absl::StatusOr<bool> flagged = DecideRefFree(t[i], result.null);
    if (!flagged.ok()) return flagged.status();
    result.watermarked_t.push_back(t[i]);
    result.watermarked_flagged.push_back(*flagged);
  }
  return result;
}

std::string RefFreeStudyCsv(const RefFreeStudyResult& result) {
  std::string out = "group,index,t,mu,sigma,flagged\n";
  auto row = [&](std::string_view group, size_t i, double t) {
    const bool flagged = *DecideRefFree(t, result.null);
    absl::StrAppendFormat(&out, "%s,%d,%.17g,%.17g,%.17g,%d\n",
                          std::string(group), i, t, result.null.mu,
                          result.null.sigma, flagged ? 1 : 0);
  };
  for (size_t i = 0; i < result.null.t_values.size(); ++i) {
    row("null", i, result.null.t_values[i]);
  }
  for (size_t i = 0; i < result.watermarked_t.size(); ++i) {
    row("watermarked", i, result.watermarked_t[i]);
  }
  return out;
}

nlohmann::ordered_json RefFreeStudyResultToJson(
    const RefFreeStudyResult& result) {
  nlohmann::ordered_json null = NullDistributionToJson(result.null);
  null.erase("schema_version");
  null.erase("kind");
  return {{"schema_version", 1},
          {"kind", "ref_free_study"},
          {"scorer", result.scorer_name},
          {"null", null},
          {"watermarked_t", result.watermarked_t},
          {"watermarked_flagged", result.watermarked_flagged},
          {"nulls_inside", result.nulls_inside}};
}

}  // namespace wmtrace
