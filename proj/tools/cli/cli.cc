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


#include "cli/cli.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "nlohmann/json.hpp"
#include "wmtrace/backend.h"
#include "wmtrace/corpus.h"
#include "wmtrace/file_io.h"
#include "wmtrace/model_client.h"
#include "wmtrace/model_endpoint.h"
#include "wmtrace/report.h"
#include "wmtrace/run_config.h"
#include "wmtrace/simharness.h"
#include "wmtrace/stealth_audit.h"
#include "wmtrace/synthetic_corpus.h"
#include "wmtrace/verification.h"
#include "wmtrace/watermark_gen.h"

namespace wmtrace::cli {

std::atomic<bool>& CancelFlag() {
  static std::atomic<bool> flag{false};
  return flag;
}

namespace {

using json = nlohmann::ordered_json;

// Simulated and replayed endpoints are local; pacing them is pointless.
constexpr double kLocalRateLimit = 1e9;

std::string Dump(const json& j, int indent = -1) {
  return j.dump(indent, ' ', false, json::error_handler_t::replace);
}

void EmitError(const std::string& command, const absl::Status& status) {
  json j = {{"level", "error"},
            {"command", command},
            {"code", absl::StatusCodeToString(status.code())},
            {"message", std::string(status.message())}};
  if (auto raw = status.GetPayload("wmtrace/model-error-kind")) {
    j["model_error_kind"] = std::string(*raw);
  }
  std::cerr << Dump(j) << '\n';
}

void EmitWarning(const std::string& command, const std::string& message) {
  std::cerr << Dump({{"level", "warning"},
                     {"command", command},
                     {"message", message}})
            << '\n';
}

// "-" selects stdout.
absl::Status WriteOutput(const std::string& path, const std::string& data) {
  if (path == "-") {
    std::cout << data;
    std::cout.flush();
    return absl::OkStatus();
  }
  return WriteFileAtomic(path, data);
}

ClientOptions Options() {
  ClientOptions o;
  o.cancel = &CancelFlag();
  return o;
}

// Endpoint flag values:
//   sim:stable | sim:confused   simulated model (manifest-driven when one is
//                               given to the command)
//   replay:<transcript>         replay a recorded transcript
//   <model>@<base_url>          OpenAI-compatible HTTP endpoint
// Fields not named by the flag keep their config-file values.
absl::Status ApplyEndpointFlag(RunConfig& config, EndpointRole role,
                               const std::string& spec,
                               const std::string& manifest_path) {
  if (spec.empty()) return absl::OkStatus();
  auto [it, inserted] = config.endpoints.try_emplace(role, role);
  EndpointBinding& b = it->second;
  if (spec == "sim:stable" || spec == "sim:confused") {
    b.backend = BackendKind::kSimulated;
    b.simulator.kind =
        spec == "sim:stable" ? SimKind::kStable : SimKind::kConfused;
    if (inserted) b.simulator.seed = config.master_seed;
    if (b.simulator.manifest.empty()) b.simulator.manifest = manifest_path;
    if (b.endpoint.model_name.empty()) b.endpoint.model_name = spec;
    b.endpoint.rate_limit = kLocalRateLimit;
    b.endpoint.max_retries = 0;
    return absl::OkStatus();
  }
  if (spec.rfind("replay:", 0) == 0) {
    b.backend = BackendKind::kReplay;
    b.transcript = spec.substr(7);
    b.endpoint.rate_limit = kLocalRateLimit;
    b.endpoint.max_retries = 0;
    return absl::OkStatus();
  }
  const size_t at = spec.find('@');
  if (at == std::string::npos || at == 0 || at + 1 == spec.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "endpoint '", spec,
        "' must be sim:stable, sim:confused, replay:<path> or <model>@<url>"));
  }
  b.backend = BackendKind::kHttp;
  b.endpoint.model_name = spec.substr(0, at);
  b.endpoint.base_url = spec.substr(at + 1);
  return absl::OkStatus();
}

std::string ModelLabel(const RunConfig& config, EndpointRole role) {
  auto it = config.endpoints.find(role);
  return it == config.endpoints.end() ? "" : it->second.endpoint.model_name;
}

std::string SafeFileStem(const std::string& id) {
  std::string out = id;
  for (char& c : out) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' ||
                    c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return out;
}

// Writes a run log when a directory was given. Partial runs are written
// too, marked incomplete.
absl::Status WriteRunLog(const std::string& dir, const std::string& stem,
                         const VerificationRun& run) {
  if (dir.empty()) return absl::OkStatus();
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    return absl::InternalError(
        absl::StrCat("cannot create ", dir, ": ", ec.message()));
  }
  return WriteFileAtomic(
      (std::filesystem::path(dir) / (SafeFileStem(stem) + ".json")).string(),
      Dump(VerificationRunToJson(run), 2) + "\n");
}

// Verifies one prefix pair, writing the run log whatever the outcome.
absl::StatusOr<VerificationRun> VerifyAndLog(
    ModelClient& client, const std::string& sequence_id,
    const std::string& query, const std::string& reference,
    const SimilarityScorer& scorer, const RunConfig& config,
    const std::string& log_dir, const std::string& log_stem) {
  absl::Status status;
  VerificationRun run = VerifyPrefixes(client, query, reference, scorer,
                                       config.verification, config.parallelism,
                                       &status);
  run.sequence_id = sequence_id;
  if (absl::Status s = WriteRunLog(log_dir, log_stem, run); !s.ok()) return s;
  if (!status.ok()) return status;
  return run;
}

absl::StatusOr<std::string> QueryPrefix(const WatermarkManifest& manifest,
                                        const VerificationConfig& config) {
  if (!config.query_variant) return manifest.split.prefix;
  if (*config.query_variant >= manifest.variants.size()) {
    return absl::OutOfRangeError(
        absl::StrCat("query variant ", *config.query_variant,
                     " out of range for K=", manifest.variants.size()));
  }
  return manifest.variants[*config.query_variant].rephrased_prefix;
}

absl::StatusOr<std::vector<size_t>> ParseSizeList(const std::string& text) {
  std::vector<size_t> out;
  for (absl::string_view piece : absl::StrSplit(text, ',', absl::SkipEmpty())) {
    size_t v = 0;
    if (!absl::SimpleAtoi(piece, &v)) {
      return absl::InvalidArgumentError(
          absl::StrCat("'", text, "' is not a comma-separated integer list"));
    }
    out.push_back(v);
  }
  if (out.empty()) return absl::InvalidArgumentError("empty integer list");
  return out;
}

// Null t-values come as a NullDistribution artifact, a JSON array, or
// plain text with one number per line.
absl::StatusOr<std::vector<double>> LoadNullValues(const std::string& path) {
  absl::StatusOr<std::string> text = ReadFile(path);
  if (!text.ok()) return text.status();
  json j = json::parse(*text, nullptr, /*allow_exceptions=*/false);
  if (!j.is_discarded()) {
    if (j.is_object()) {
      absl::StatusOr<NullDistribution> n = NullDistributionFromJson(j);
      if (!n.ok()) return n.status();
      return n->t_values;
    }
    if (j.is_array()) {
      std::vector<double> out;
      for (const json& v : j) {
        if (!v.is_number()) {
          return absl::InvalidArgumentError(
              absl::StrCat(path, ": null values must be numbers"));
        }
        out.push_back(v.get<double>());
      }
      return out;
    }
  }
  std::vector<double> out;
  for (absl::string_view line : absl::StrSplit(*text, '\n', absl::SkipWhitespace())) {
    double v = 0.0;
    if (!absl::SimpleAtod(line, &v)) {
      return absl::InvalidArgumentError(
          absl::StrCat(path, ": cannot parse '", line, "' as a t-value"));
    }
    out.push_back(v);
  }
  return out;
}

// --- Subcommands -------------------------------------------------------------

struct SelectArgs {
  std::string corpus;
  std::string tau = "auto";
  std::string out;
  size_t sample_size = 1000;
  double percentile = 0.75;
};

absl::StatusOr<int> CmdSelect(const RunConfig& config, const SelectArgs& a) {
  absl::StatusOr<std::vector<Sequence>> corpus = LoadCorpus(a.corpus);
  if (!corpus.ok()) return corpus.status();
  absl::StatusOr<std::unique_ptr<ModelClient>> client =
      MakeClient(config, EndpointRole::kReferenceScorer, Options());
  if (!client.ok()) return client.status();
  double tau = 0.0;
  std::string tau_source = "flag";
  if (a.tau == "auto") {
    AutoTauOptions opts;
    opts.sample_size = a.sample_size;
    opts.percentile = a.percentile;
    opts.seed = config.master_seed;
    absl::StatusOr<double> t =
        AutoTau(*corpus, **client, opts, config.parallelism);
    if (!t.ok()) return t.status();
    tau = *t;
    tau_source = "auto";
  } else if (!absl::SimpleAtod(a.tau, &tau) || !std::isfinite(tau)) {
    return absl::InvalidArgumentError(
        absl::StrCat("--tau must be a number or 'auto', got '", a.tau, "'"));
  }
  std::vector<SelectionReport> reports =
      SelectTargets(*corpus, **client, tau, config.parallelism);
  json records = json::array();
  size_t selected = 0;
  size_t errors = 0;
  for (const SelectionReport& r : reports) {
    selected += r.selected ? 1 : 0;
    errors += r.error ? 1 : 0;
    records.push_back(SelectionReportToJson(r));
  }
  json out = {{"schema_version", 1},
              {"kind", "selection_report"},
              {"reference_model",
               ModelLabel(config, EndpointRole::kReferenceScorer)},
              {"tau", tau},
              {"tau_source", tau_source},
              {"selected", selected},
              {"errors", errors},
              {"records", records}};
  if (absl::Status s = WriteOutput(a.out, Dump(out, 2) + "\n"); !s.ok()) {
    return s;
  }
  if (a.out != "-") {
    std::cout << Dump({{"tau", tau},
                       {"scored", reports.size() - errors},
                       {"selected", selected},
                       {"errors", errors}})
              << '\n';
  }
  return kExitOk;
}

struct GenerateArgs {
  std::string corpus;
  std::string id;
  std::optional<int> k;
  std::optional<size_t> split_word;
  std::string out;
  std::string validation_out = "-";
  ValidationThresholds thresholds;
};

absl::StatusOr<int> CmdGenerate(const RunConfig& config,
                                const GenerateArgs& a) {
  absl::StatusOr<std::vector<Sequence>> corpus = LoadCorpus(a.corpus);
  if (!corpus.ok()) return corpus.status();
  auto it = std::find_if(corpus->begin(), corpus->end(),
                         [&](const Sequence& s) { return s.id == a.id; });
  if (it == corpus->end()) {
    return absl::NotFoundError(
        absl::StrCat("sequence '", a.id, "' not in ", a.corpus));
  }
  WatermarkConfig wc = config.watermark;
  if (a.k) wc.k = *a.k;
  if (absl::Status s = wc.Validate(); !s.ok()) return s;
  absl::StatusOr<SplitSequence> split =
      a.split_word ? SplitAtWord(*it, *a.split_word) : SplitAtBoundary(*it, wc);
  if (!split.ok()) return split.status();
  absl::StatusOr<std::unique_ptr<ModelClient>> paraphraser =
      MakeClient(config, EndpointRole::kParaphraser, Options());
  if (!paraphraser.ok()) return paraphraser.status();
  absl::StatusOr<std::unique_ptr<ModelClient>> generator =
      MakeClient(config, EndpointRole::kContinuationGenerator, Options());
  if (!generator.ok()) return generator.status();
  absl::StatusOr<WatermarkManifest> manifest =
      GenerateVariants(*it, *split, wc, **paraphraser, **generator);
  if (!manifest.ok()) return manifest.status();
  absl::StatusOr<std::unique_ptr<SimilarityScorer>> scorer =
      MakeScorer(config.scorer);
  if (!scorer.ok()) return scorer.status();
  absl::StatusOr<ValidationReport> report =
      ValidateVariants(*manifest, **scorer, a.thresholds);
  if (!report.ok()) return report.status();
  if (absl::Status s = SaveManifest(*manifest, a.out); !s.ok()) return s;
  json v = ValidationReportToJson(*report);
  if (absl::Status s = WriteOutput(a.validation_out, Dump(v, 2) + "\n");
      !s.ok()) {
    return s;
  }
  if (!report->passed) {
    EmitWarning("generate", "variants failed semantic-distance validation");
  }
  return kExitOk;
}

struct InjectArgs {
  std::string corpus;
  std::string manifest;
  std::optional<uint64_t> seed;
  bool drop_original = false;
  std::string out;
};

absl::StatusOr<int> CmdInject(const RunConfig& config, const InjectArgs& a) {
  absl::StatusOr<std::vector<Sequence>> corpus = LoadCorpus(a.corpus);
  if (!corpus.ok()) return corpus.status();
  absl::StatusOr<WatermarkManifest> manifest = LoadManifest(a.manifest);
  if (!manifest.ok()) return manifest.status();
  if (a.drop_original) {
    std::erase_if(*corpus, [&](const Sequence& s) {
      return s.id == manifest->target.id;
    });
  }
  absl::StatusOr<std::vector<Sequence>> injected =
      Inject(*corpus, *manifest, a.seed.value_or(config.master_seed));
  if (!injected.ok()) return injected.status();
  if (absl::Status s = WriteCorpus(a.out, *injected); !s.ok()) return s;
  return kExitOk;
}

struct RefBasedArgs {
  std::string manifest;
  std::string suspect;
  std::string baseline;
  std::optional<double> threshold;
  std::string out = "-";
  std::string log_dir;
  bool strict = false;
};

absl::StatusOr<int> CmdRefBased(RunConfig config, const RefBasedArgs& a) {
  absl::StatusOr<WatermarkManifest> manifest = LoadManifest(a.manifest);
  if (!manifest.ok()) return manifest.status();
  // The default threshold was established at K=16 only; Delta t scales
  // with K, so other K need an explicit or calibrated value.
  if (!a.threshold && manifest->variants.size() != 16) {
    return absl::InvalidArgumentError(absl::StrCat(
        "manifest has K=", manifest->variants.size(),
        "; pass --threshold (the default applies to K=16 only)"));
  }
  const double threshold = a.threshold.value_or(kDefaultDeltaTThreshold);
  if (absl::Status s = ApplyEndpointFlag(config, EndpointRole::kSuspect,
                                         a.suspect, a.manifest);
      !s.ok()) {
    return s;
  }
  if (absl::Status s = ApplyEndpointFlag(
          config, EndpointRole::kPretrainedBaseline, a.baseline, a.manifest);
      !s.ok()) {
    return s;
  }
  absl::StatusOr<std::unique_ptr<SimilarityScorer>> scorer =
      MakeScorer(config.scorer);
  if (!scorer.ok()) return scorer.status();
  config.verification.scorer_name = (*scorer)->name();
  absl::StatusOr<std::string> query = QueryPrefix(*manifest, config.verification);
  if (!query.ok()) return query.status();

  const std::string& id = manifest->target.id;
  absl::StatusOr<std::unique_ptr<ModelClient>> suspect =
      MakeClient(config, EndpointRole::kSuspect, Options());
  if (!suspect.ok()) return suspect.status();
  absl::StatusOr<VerificationRun> run_s =
      VerifyAndLog(**suspect, id, *query, manifest->reference_prefix, **scorer,
                   config, a.log_dir, id + ".suspect");
  if (!run_s.ok()) return run_s.status();
  absl::StatusOr<std::unique_ptr<ModelClient>> baseline =
      MakeClient(config, EndpointRole::kPretrainedBaseline, Options());
  if (!baseline.ok()) return baseline.status();
  absl::StatusOr<VerificationRun> run_b =
      VerifyAndLog(**baseline, id, *query, manifest->reference_prefix,
                   **scorer, config, a.log_dir, id + ".baseline");
  if (!run_b.ok()) return run_b.status();

  absl::StatusOr<RefBasedDecision> decision =
      DecideRefBased(run_s->t->t, run_b->t->t, threshold);
  if (!decision.ok()) return decision.status();
  json out = {{"schema_version", 1},
              {"kind", "ref_based_decision"},
              {"sequence_id", id},
              {"k", manifest->variants.size()},
              {"suspect_model", ModelLabel(config, EndpointRole::kSuspect)},
              {"baseline_model",
               ModelLabel(config, EndpointRole::kPretrainedBaseline)},
              {"scorer", config.verification.scorer_name},
              {"decision", RefBasedDecisionToJson(*decision)}};
  if (absl::Status s = WriteOutput(a.out, Dump(out, 2) + "\n"); !s.ok()) {
    return s;
  }
  return a.strict && !decision->watermarked ? kExitNotWatermarked : kExitOk;
}

struct RefFreeArgs {
  std::string manifest;
  std::string suspect;
  std::string null_path;
  std::string build_null;
  std::string null_out;
  double k_sigma = 2.0;
  bool lower_only = false;
  std::string out = "-";
  std::string log_dir;
  bool strict = false;
};

absl::StatusOr<NullDistribution> BuildNullFromCorpus(
    ModelClient& client, const SimilarityScorer& scorer,
    const RunConfig& config, const RefFreeArgs& a) {
  absl::StatusOr<std::vector<Sequence>> corpus = LoadCorpus(a.build_null);
  if (!corpus.ok()) return corpus.status();
  std::vector<double> t_values;
  for (const Sequence& seq : *corpus) {
    absl::StatusOr<SplitSequence> split =
        SplitAtBoundary(seq, config.watermark);
    if (!split.ok()) return split.status();
    absl::StatusOr<std::string> reference = MakeReferencePrefix(split->prefix);
    if (!reference.ok()) return reference.status();
    absl::StatusOr<VerificationRun> run =
        VerifyAndLog(client, seq.id, split->prefix, *reference, scorer, config,
                     a.log_dir, seq.id + ".null");
    if (!run.ok()) return run.status();
    if (!run->t->finite) {
      EmitWarning("verify ref-free",
                  absl::StrCat("null sequence ", seq.id,
                               " gave a non-finite t-value; skipped"));
      continue;
    }
    t_values.push_back(run->t->t);
  }
  return BuildNull(std::move(t_values), a.k_sigma);
}

absl::StatusOr<int> CmdRefFree(RunConfig config, const RefFreeArgs& a) {
  if (a.null_path.empty() == a.build_null.empty()) {
    return absl::InvalidArgumentError(
        "exactly one of --null or --build-null is required");
  }
  absl::StatusOr<WatermarkManifest> manifest = LoadManifest(a.manifest);
  if (!manifest.ok()) return manifest.status();
  if (absl::Status s = ApplyEndpointFlag(config, EndpointRole::kSuspect,
                                         a.suspect, a.manifest);
      !s.ok()) {
    return s;
  }
  absl::StatusOr<std::unique_ptr<SimilarityScorer>> scorer =
      MakeScorer(config.scorer);
  if (!scorer.ok()) return scorer.status();
  config.verification.scorer_name = (*scorer)->name();
  absl::StatusOr<std::string> query = QueryPrefix(*manifest, config.verification);
  if (!query.ok()) return query.status();
  absl::StatusOr<std::unique_ptr<ModelClient>> suspect =
      MakeClient(config, EndpointRole::kSuspect, Options());
  if (!suspect.ok()) return suspect.status();

  absl::StatusOr<NullDistribution> null;
  if (!a.null_path.empty()) {
    absl::StatusOr<std::vector<double>> values = LoadNullValues(a.null_path);
    if (!values.ok()) return values.status();
    null = BuildNull(*std::move(values), a.k_sigma);
  } else {
    null = BuildNullFromCorpus(**suspect, **scorer, config, a);
  }
  if (!null.ok()) return null.status();
  if (!a.null_out.empty()) {
    if (absl::Status s = WriteOutput(
            a.null_out, Dump(NullDistributionToJson(*null), 2) + "\n");
        !s.ok()) {
      return s;
    }
  }

  const std::string& id = manifest->target.id;
  absl::StatusOr<VerificationRun> run =
      VerifyAndLog(**suspect, id, *query, manifest->reference_prefix, **scorer,
                   config, a.log_dir, id + ".suspect");
  if (!run.ok()) return run.status();
  if (!run->t->finite) {
    return absl::FailedPreconditionError(
        "suspect t-value is not finite; both distributions are constant");
  }
  const Sidedness sides =
      a.lower_only ? Sidedness::kLowerOnly : Sidedness::kTwoSided;
  absl::StatusOr<bool> watermarked = DecideRefFree(run->t->t, *null, sides);
  if (!watermarked.ok()) return watermarked.status();
  json null_json = NullDistributionToJson(*null);
  null_json.erase("schema_version");
  null_json.erase("kind");
  json out = {{"schema_version", 1},
              {"kind", "ref_free_decision"},
              {"sequence_id", id},
              {"k", manifest->variants.size()},
              {"suspect_model", ModelLabel(config, EndpointRole::kSuspect)},
              {"scorer", config.verification.scorer_name},
              {"t", run->t->t},
              {"sidedness", a.lower_only ? "lower" : "two-sided"},
              {"null", null_json},
              {"watermarked", *watermarked}};
  if (absl::Status s = WriteOutput(a.out, Dump(out, 2) + "\n"); !s.ok()) {
    return s;
  }
  return a.strict && !*watermarked ? kExitNotWatermarked : kExitOk;
}

struct AuditArgs {
  std::string corpus;
  std::string out;
  std::string filtered_out;
};

absl::StatusOr<int> CmdAudit(const RunConfig& config, const AuditArgs& a) {
  absl::StatusOr<std::vector<Sequence>> corpus = LoadCorpus(a.corpus);
  if (!corpus.ok()) return corpus.status();
  absl::StatusOr<std::unique_ptr<SimilarityScorer>> scorer =
      MakeScorer(config.scorer);
  if (!scorer.ok()) return scorer.status();
  absl::StatusOr<AuditReport> report =
      RunAudit(*corpus, **scorer, config.audit, config.parallelism);
  if (!report.ok()) return report.status();
  if (absl::Status s = WriteOutput(a.out, SerializeAuditReport(*report));
      !s.ok()) {
    return s;
  }
  if (!a.filtered_out.empty()) {
    std::vector<Sequence> kept;
    for (size_t i = 0; i < corpus->size(); ++i) {
      if (!report->records[i].any_flag()) kept.push_back((*corpus)[i]);
    }
    if (absl::Status s = WriteCorpus(a.filtered_out, kept); !s.ok()) return s;
  }
  if (a.out != "-") {
    std::cout << Dump(AuditSummaryToJson(report->summary, report->config))
              << '\n';
  }
  return kExitOk;
}

struct PowerArgs {
  size_t trials = 20;
  std::optional<size_t> calibration_trials;
  std::string k_sweep = "1,2,4,8,16";
  std::optional<size_t> detection_k;
  std::optional<double> threshold;
  double k_sigma = 2.0;
  double noise = 0.05;
  size_t base_templates = 4;
  std::string out = "-";
  std::string json_out;
  std::string series_out;
};

absl::StatusOr<int> CmdPower(const RunConfig& config, const PowerArgs& a) {
  PowerStudyConfig pc;
  pc.trials = a.trials;
  pc.calibration_trials = a.calibration_trials.value_or(a.trials);
  absl::StatusOr<std::vector<size_t>> sweep = ParseSizeList(a.k_sweep);
  if (!sweep.ok()) return sweep.status();
  pc.k_sweep = *sweep;
  pc.detection_k = a.detection_k;
  pc.threshold = a.threshold;
  pc.k_sigma = a.k_sigma;
  pc.lexical_noise_rate = a.noise;
  pc.base_templates = a.base_templates;
  pc.verification = config.verification;
  pc.master_seed = config.master_seed;
  pc.parallelism = config.parallelism;
  absl::StatusOr<std::unique_ptr<SimilarityScorer>> scorer =
      MakeScorer(config.scorer);
  if (!scorer.ok()) return scorer.status();
  absl::StatusOr<PowerStudyResult> result = RunPowerStudy(pc, **scorer);
  if (!result.ok()) return result.status();
  if (absl::Status s = WriteOutput(a.out, PowerStudyCsv(*result)); !s.ok()) {
    return s;
  }
  if (!a.series_out.empty()) {
    if (absl::Status s = WriteOutput(a.series_out, DeltaTSeriesCsv(*result));
        !s.ok()) {
      return s;
    }
  }
  const json summary = PowerStudyResultToJson(*result);
  if (!a.json_out.empty()) {
    if (absl::Status s = WriteOutput(a.json_out, Dump(summary, 2) + "\n");
        !s.ok()) {
      return s;
    }
  }
  if (a.out != "-" && a.json_out != "-") std::cout << Dump(summary) << '\n';
  return kExitOk;
}

struct RefFreeStudyArgs {
  size_t nulls = 60;
  size_t watermarked = 3;
  size_t k_strength = 64;
  double k_sigma = 2.0;
  double noise = 0.05;
  std::string out = "-";
  std::string json_out;
};

absl::StatusOr<int> CmdRefFreeStudy(const RunConfig& config,
                                    const RefFreeStudyArgs& a) {
  RefFreeStudyConfig rc;
  rc.null_sequences = a.nulls;
  rc.watermarked_sequences = a.watermarked;
  rc.k_strength = a.k_strength;
  rc.k_sigma = a.k_sigma;
  rc.lexical_noise_rate = a.noise;
  rc.verification = config.verification;
  rc.master_seed = config.master_seed;
  rc.parallelism = config.parallelism;
  absl::StatusOr<std::unique_ptr<SimilarityScorer>> scorer =
      MakeScorer(config.scorer);
  if (!scorer.ok()) return scorer.status();
  absl::StatusOr<RefFreeStudyResult> result = RunRefFreeStudy(rc, **scorer);
  if (!result.ok()) return result.status();
  if (absl::Status s = WriteOutput(a.out, RefFreeStudyCsv(*result)); !s.ok()) {
    return s;
  }
  const json summary = RefFreeStudyResultToJson(*result);
  if (!a.json_out.empty()) {
    if (absl::Status s = WriteOutput(a.json_out, Dump(summary, 2) + "\n");
        !s.ok()) {
      return s;
    }
  }
  if (a.out != "-" && a.json_out != "-") {
    std::cout << Dump({{"nulls_inside", result->nulls_inside},
                       {"null_sequences", result->null.t_values.size()},
                       {"watermarked_flagged", result->watermarked_flagged}})
              << '\n';
  }
  return kExitOk;
}

struct CorpusArgs {
  size_t n = 1000;
  std::string out;
};

absl::StatusOr<int> CmdCorpus(const RunConfig& config, const CorpusArgs& a) {
  if (a.n < 1) return absl::InvalidArgumentError("--n must be >= 1");
  if (absl::Status s = WriteCorpus(a.out, SyntheticCorpus(a.n, config.master_seed));
      !s.ok()) {
    return s;
  }
  return kExitOk;
}

struct ManifestArgs {
  size_t index = 0;
  std::optional<int> k;
  std::string out;
};

absl::StatusOr<int> CmdManifest(const RunConfig& config,
                                const ManifestArgs& a) {
  WatermarkConfig wc = config.watermark;
  if (a.k) wc.k = *a.k;
  absl::StatusOr<WatermarkManifest> manifest = SyntheticManifest(
      SyntheticAbstractSeed(config.master_seed, a.index),
      SyntheticCorpusId(a.index), wc, config.master_seed);
  if (!manifest.ok()) return manifest.status();
  if (absl::Status s = SaveManifest(*manifest, a.out); !s.ok()) return s;
  return kExitOk;
}

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string csv = "-";
  std::string svg_dir;
};

absl::StatusOr<int> CmdReport(const ReportArgs& a) {
  absl::StatusOr<ReportData> data = CollectReport(a.inputs);
  if (!data.ok()) return data.status();
  if (absl::Status s = WriteOutput(a.csv, ReportCsv(*data)); !s.ok()) return s;
  if (a.svg_dir.empty()) return kExitOk;
  std::error_code ec;
  std::filesystem::create_directories(a.svg_dir, ec);
  if (ec) {
    return absl::InternalError(
        absl::StrCat("cannot create ", a.svg_dir, ": ", ec.message()));
  }
  const std::filesystem::path dir(a.svg_dir);
  if (!data->delta_t_series.empty()) {
    if (absl::Status s = WriteFileAtomic(
            (dir / "delta_t_vs_k.svg").string(),
            LineChartSvg(data->delta_t_series, "Delta t against K", "K",
                         "Delta t"));
        !s.ok()) {
      return s;
    }
  }
  if (!data->t_series.empty()) {
    if (absl::Status s = WriteFileAtomic(
            (dir / "t_per_run.svg").string(),
            LineChartSvg(data->t_series, "t per verification run", "run",
                         "t"));
        !s.ok()) {
      return s;
    }
  }
  for (size_t i = 0; i < data->histograms.size(); ++i) {
    if (absl::Status s = WriteFileAtomic(
            (dir / absl::StrCat("null_histogram_", i, ".svg")).string(),
            HistogramSvg(data->histograms[i]));
        !s.ok()) {
      return s;
    }
  }
  return kExitOk;
}

struct TranscriptArgs {
  std::string transcript;
  std::string role;
  std::string model;
  std::string prompt;
  std::string prompt_file;
  std::string response;
  std::string response_file;
  std::string scores_file;
  uint64_t draw = 0;
  double temperature = 1.0;
  int max_new_tokens = 48;
  std::vector<std::string> stop;
  std::optional<int64_t> seed;
};

absl::StatusOr<std::string> TextArg(const std::string& inline_value,
                                    const std::string& file,
                                    const std::string& what) {
  if (!file.empty()) return ReadFile(file);
  if (!inline_value.empty()) return inline_value;
  return absl::InvalidArgumentError(absl::StrCat(what, " is required"));
}

absl::StatusOr<int> CmdTranscriptAdd(const TranscriptArgs& a) {
  absl::StatusOr<EndpointRole> role = ParseRole(a.role);
  if (!role.ok()) return role.status();
  absl::StatusOr<std::string> text =
      TextArg(a.prompt, a.prompt_file, "--prompt or --prompt-file");
  if (!text.ok()) return text.status();
  TranscriptRecord record;
  if (!a.scores_file.empty()) {
    ScoringRequest req{*role, a.model, *text};
    record.request_hash = RequestHash(req);
    absl::StatusOr<std::string> raw = ReadFile(a.scores_file);
    if (!raw.ok()) return raw.status();
    json j = json::parse(*raw, nullptr, /*allow_exceptions=*/false);
    if (!j.is_array()) {
      return absl::InvalidArgumentError(
          "--scores-file must hold a JSON array of {token, logprob}");
    }
    std::vector<TokenScore> scores;
    for (const json& e : j) {
      if (!e.is_object() || !e.contains("token") || !e.contains("logprob") ||
          !e["logprob"].is_number()) {
        return absl::InvalidArgumentError(
            "--scores-file entries need token and numeric logprob");
      }
      scores.push_back({e["token"].get<std::string>(),
                        e["logprob"].get<double>()});
    }
    record.token_scores = std::move(scores);
  } else {
    GenerationConfig gen;
    gen.temperature = a.temperature;
    gen.max_new_tokens = a.max_new_tokens;
    gen.stop_sequences = a.stop;
    gen.seed = a.seed;
    if (absl::Status s = gen.Validate(); !s.ok()) return s;
    CompletionRequest req{*role, a.model, *text, gen, a.draw};
    record.request_hash = RequestHash(req);
    absl::StatusOr<std::string> response =
        TextArg(a.response, a.response_file, "--response or --response-file");
    if (!response.ok()) return response.status();
    record.response_text = *response;
  }
  absl::StatusOr<TranscriptStore> store =
      TranscriptStore::OpenOrCreate(a.transcript);
  if (!store.ok()) return store.status();
  if (absl::Status s = store->Append(record); !s.ok()) return s;
  std::cout << Dump({{"request_hash", record.request_hash}}) << '\n';
  return kExitOk;
}

}  // namespace

int Run(const std::vector<std::string>& args) {
  CLI::App app{"wmtrace: build, inject, audit and verify training-data watermarks",
               "wmtrace"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::string config_path;
  std::optional<size_t> parallelism;
  std::optional<uint64_t> seed;
  std::optional<std::string> scorer;
  std::optional<size_t> q;
  std::optional<size_t> query_variant;
  app.add_option("--config", config_path, "Run configuration (JSON)");
  app.add_option("--parallelism", parallelism, "Concurrent requests")
      ->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "Master seed");
  app.add_option("--scorer", scorer,
                 "lexical or remote:<bertscore_f1|embedding_cosine>@<url>");
  app.add_option("--q", q, "Continuations sampled per prefix");
  app.add_option("--query-variant", query_variant,
                 "Query with the rephrased prefix of this 0-based variant");

  std::string command;
  std::function<absl::StatusOr<int>(RunConfig&)> action;

  SelectArgs sel;
  CLI::App* select = app.add_subcommand("select", "Screen a corpus by perplexity");
  select->add_option("corpus", sel.corpus, "Corpus (JSONL)")->required();
  select->add_option("--tau", sel.tau, "Threshold in nats/token, or 'auto'");
  select->add_option("--sample-size", sel.sample_size,
                     "Sequences sampled for --tau auto");
  select->add_option("--percentile", sel.percentile,
                     "Quantile of the sample used for --tau auto");
  select->add_option("--out", sel.out, "Selection report path ('-' = stdout)")
      ->required();
  select->callback([&] {
    command = "select";
    action = [&](RunConfig& c) { return CmdSelect(c, sel); };
  });

  GenerateArgs gen;
  CLI::App* generate =
      app.add_subcommand("generate", "Build watermark variants for one sequence");
  generate->add_option("corpus", gen.corpus, "Corpus (JSONL)")->required();
  generate->add_option("--id", gen.id, "Target sequence id")->required();
  generate->add_option("--k", gen.k, "Number of variants");
  generate->add_option("--split-word", gen.split_word,
                       "Split after this many words instead of at a boundary");
  generate->add_option("--out", gen.out, "Manifest path")->required();
  generate->add_option("--validation-out", gen.validation_out,
                       "Validation report path ('-' = stdout)");
  generate->add_option("--max-mean-distance",
                       gen.thresholds.max_allowed_mean,
                       "Largest allowed mean rephrase distance");
  generate->add_option("--min-reference-ratio",
                       gen.thresholds.min_reference_ratio,
                       "Required reference-prefix distance over the mean");
  generate->callback([&] {
    command = "generate";
    action = [&](RunConfig& c) { return CmdGenerate(c, gen); };
  });

  InjectArgs inj;
  CLI::App* inject = app.add_subcommand("inject", "Insert variants into a corpus");
  inject->add_option("corpus", inj.corpus, "Corpus (JSONL)")->required();
  inject->add_option("manifest", inj.manifest, "Manifest")->required();
  inject->add_option("--placement-seed", inj.seed,
                     "Placement seed (defaults to the master seed)");
  inject->add_flag("--drop-original", inj.drop_original,
                   "Remove the target sequence from the output");
  inject->add_option("--out", inj.out, "Output corpus")->required();
  inject->callback([&] {
    command = "inject";
    action = [&](RunConfig& c) { return CmdInject(c, inj); };
  });

  CLI::App* verify = app.add_subcommand("verify", "Test a suspect model");
  verify->require_subcommand(1);
  RefBasedArgs rb;
  CLI::App* ref_based =
      verify->add_subcommand("ref-based", "Compare against a baseline model");
  ref_based->add_option("manifest", rb.manifest, "Manifest")->required();
  ref_based->add_option("--suspect", rb.suspect, "Suspect endpoint");
  ref_based->add_option("--baseline", rb.baseline, "Baseline endpoint");
  ref_based->add_option("--threshold", rb.threshold, "Delta t threshold");
  ref_based->add_option("--out", rb.out, "Decision path ('-' = stdout)");
  ref_based->add_option("--log-dir", rb.log_dir, "Directory for run logs");
  ref_based->add_flag("--strict", rb.strict,
                      "Exit 1 when the decision is not watermarked");
  ref_based->callback([&] {
    command = "verify ref-based";
    action = [&](RunConfig& c) { return CmdRefBased(c, rb); };
  });

  RefFreeArgs rf;
  CLI::App* ref_free =
      verify->add_subcommand("ref-free", "Compare against a null t distribution");
  ref_free->add_option("manifest", rf.manifest, "Manifest")->required();
  ref_free->add_option("--suspect", rf.suspect, "Suspect endpoint");
  CLI::Option* null_opt =
      ref_free->add_option("--null", rf.null_path, "Null t-values file");
  CLI::Option* build_opt = ref_free->add_option(
      "--build-null", rf.build_null,
      "Corpus of sequences the suspect never saw, verified to form the null");
  null_opt->excludes(build_opt);
  ref_free->add_option("--null-out", rf.null_out,
                       "Write the null distribution here");
  ref_free->add_option("--k-sigma", rf.k_sigma, "Band half-width in sigmas");
  ref_free->add_flag("--lower-only", rf.lower_only,
                     "Flag only t below the band");
  ref_free->add_option("--out", rf.out, "Decision path ('-' = stdout)");
  ref_free->add_option("--log-dir", rf.log_dir, "Directory for run logs");
  ref_free->add_flag("--strict", rf.strict,
                     "Exit 1 when the decision is not watermarked");
  ref_free->callback([&] {
    command = "verify ref-free";
    action = [&](RunConfig& c) { return CmdRefFree(c, rf); };
  });

  AuditArgs aud;
  CLI::App* audit = app.add_subcommand("audit", "Run the stealth detectors");
  audit->add_option("corpus", aud.corpus, "Corpus (JSONL)")->required();
  audit->add_option("--out", aud.out, "Audit report path ('-' = stdout)")
      ->required();
  audit->add_option("--filtered-out", aud.filtered_out,
                    "Write the corpus minus flagged sequences here");
  audit->callback([&] {
    command = "audit";
    action = [&](RunConfig& c) { return CmdAudit(c, aud); };
  });

  CLI::App* simulate = app.add_subcommand("simulate", "Simulated-model studies");
  simulate->require_subcommand(1);
  PowerArgs pw;
  CLI::App* power = simulate->add_subcommand("power", "Detection power over K");
  power->add_option("--trials", pw.trials, "Trials per hypothesis");
  power->add_option("--calibration-trials", pw.calibration_trials,
                    "H0 trials used to calibrate the threshold");
  power->add_option("--k-sweep", pw.k_sweep, "Comma-separated k_strength list");
  power->add_option("--detection-k", pw.detection_k,
                    "k_strength at which detection is reported");
  power->add_option("--threshold", pw.threshold,
                    "Fixed Delta t threshold instead of calibration");
  power->add_option("--k-sigma", pw.k_sigma, "Calibration width in sigmas");
  power->add_option("--noise", pw.noise, "Simulator synonym noise rate");
  power->add_option("--base-templates", pw.base_templates,
                    "Continuations a stable model chooses among");
  power->add_option("--out", pw.out, "Per-trial CSV ('-' = stdout)");
  power->add_option("--json", pw.json_out, "Summary JSON path");
  power->add_option("--series-out", pw.series_out, "Mean Delta t by K CSV");
  power->callback([&] {
    command = "simulate power";
    action = [&](RunConfig& c) { return CmdPower(c, pw); };
  });

  RefFreeStudyArgs rs;
  CLI::App* rf_study =
      simulate->add_subcommand("ref-free", "Null band and flagged t-values");
  rf_study->add_option("--nulls", rs.nulls, "Null sequences");
  rf_study->add_option("--watermarked", rs.watermarked, "Watermarked sequences");
  rf_study->add_option("--k-strength", rs.k_strength,
                       "Divergent continuations the suspect draws from");
  rf_study->add_option("--k-sigma", rs.k_sigma, "Band half-width in sigmas");
  rf_study->add_option("--noise", rs.noise, "Simulator synonym noise rate");
  rf_study->add_option("--out", rs.out, "Per-sequence CSV ('-' = stdout)");
  rf_study->add_option("--json", rs.json_out, "Summary JSON path");
  rf_study->callback([&] {
    command = "simulate ref-free";
    action = [&](RunConfig& c) { return CmdRefFreeStudy(c, rs); };
  });

  CorpusArgs cor;
  CLI::App* corpus_cmd =
      simulate->add_subcommand("corpus", "Write a synthetic abstract corpus");
  corpus_cmd->add_option("--n", cor.n, "Number of abstracts");
  corpus_cmd->add_option("--out", cor.out, "Corpus path")->required();
  corpus_cmd->callback([&] {
    command = "simulate corpus";
    action = [&](RunConfig& c) { return CmdCorpus(c, cor); };
  });

  ManifestArgs man;
  CLI::App* manifest_cmd = simulate->add_subcommand(
      "manifest",
      "Write a model-free manifest for one abstract of the synthetic corpus");
  manifest_cmd->add_option("--index", man.index,
                           "Record index in the synthetic corpus");
  manifest_cmd->add_option("--k", man.k, "Number of variants");
  manifest_cmd->add_option("--out", man.out, "Manifest path")->required();
  manifest_cmd->callback([&] {
    command = "simulate manifest";
    action = [&](RunConfig& c) { return CmdManifest(c, man); };
  });

  ReportArgs rep;
  CLI::App* report = app.add_subcommand("report", "Figure data from artifacts");
  report->add_option("inputs", rep.inputs, "Run logs, decisions, studies, CSVs")
      ->required();
  report->add_option("--csv", rep.csv, "CSV path ('-' = stdout)");
  report->add_option("--svg-dir", rep.svg_dir, "Write SVG charts here");
  report->callback([&] {
    command = "report";
    action = [&](RunConfig&) { return CmdReport(rep); };
  });

  CLI::App* transcript = app.add_subcommand("transcript", "Manage transcripts");
  transcript->require_subcommand(1);
  TranscriptArgs tr;
  CLI::App* add = transcript->add_subcommand(
      "add", "Record a response for replay under its request hash");
  add->add_option("--transcript", tr.transcript, "Transcript file")->required();
  add->add_option("--role", tr.role, "Endpoint role")->required();
  add->add_option("--model", tr.model, "Model name")->required();
  add->add_option("--prompt", tr.prompt, "Prompt (or scored text)");
  add->add_option("--prompt-file", tr.prompt_file, "Prompt file");
  add->add_option("--response", tr.response, "Response text");
  add->add_option("--response-file", tr.response_file, "Response file");
  add->add_option("--scores-file", tr.scores_file,
                  "Token scores (JSON) for a scoring request");
  add->add_option("--draw", tr.draw, "Draw index");
  add->add_option("--temperature", tr.temperature, "Sampling temperature");
  add->add_option("--max-new-tokens", tr.max_new_tokens, "Generation budget");
  add->add_option("--stop", tr.stop, "Stop sequence (repeatable)");
  add->add_option("--sampling-seed", tr.seed, "Sampling seed");
  add->callback([&] {
    command = "transcript add";
    action = [&](RunConfig&) { return CmdTranscriptAdd(tr); };
  });

  CLI::App* config_cmd = app.add_subcommand("config", "Inspect configuration");
  config_cmd->require_subcommand(1);
  CLI::App* show =
      config_cmd->add_subcommand("show", "Print the effective configuration");
  show->callback([&] {
    command = "config show";
    action = [&](RunConfig& c) -> absl::StatusOr<int> {
      std::cout << Dump(RunConfigToJson(c), 2) << '\n';
      return kExitOk;
    };
  });

  std::vector<std::string> reversed(args.rbegin(), args.rend() - 1);
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e);
      return kExitOk;
    }
    EmitError(command.empty() ? "wmtrace" : command,
              absl::InvalidArgumentError(e.what()));
    return kExitError;
  }

  // Precedence: flags > config file > environment > defaults.
  absl::StatusOr<RunConfig> config = LoadRunConfig(config_path);
  if (!config.ok()) {
    EmitError(command, config.status());
    return kExitError;
  }
  if (parallelism) config->parallelism = *parallelism;
  if (seed) config->master_seed = *seed;
  if (scorer) config->scorer = *scorer;
  if (q) config->verification.q = *q;
  if (query_variant) config->verification.query_variant = *query_variant;
  if (absl::Status s = config->Validate(); !s.ok()) {
    EmitError(command, s);
    return kExitError;
  }

  absl::StatusOr<int> code = action(*config);
  if (!code.ok()) {
    EmitError(command, code.status());
    return kExitError;
  }
  return *code;
}

}  // namespace wmtrace::cli
