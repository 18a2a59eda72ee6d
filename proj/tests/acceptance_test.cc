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


// Acceptance suite. Prints one PASS or FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <unistd.h>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "test_util.h"
#include "wmtrace/corpus.h"
#include "wmtrace/file_io.h"
#include "wmtrace/prompts.h"
#include "wmtrace/simharness.h"
#include "wmtrace/similarity.h"
#include "wmtrace/stealth_audit.h"
#include "wmtrace/synthetic_corpus.h"
#include "wmtrace/text.h"
#include "wmtrace/verification.h"

#ifdef WMTRACE_HAVE_CLI
#include "cli/cli.h"
#endif

namespace wmtrace {
namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using SteadyClock = std::chrono::steady_clock;

int failures = 0;

// Runs one criterion and enforces its runtime budget.
void Criterion(const std::string& name, double budget_seconds,
               const std::function<Outcome()>& body) {
  const SteadyClock::time_point start = SteadyClock::now();
  Outcome o = body();
  const double secs =
      std::chrono::duration<double>(SteadyClock::now() - start).count();
  if (secs >= budget_seconds) {
    o.pass = false;
    absl::StrAppend(&o.detail, "; over budget of ", budget_seconds, " s");
  }
  if (!o.pass) ++failures;
  std::printf("%s %s: %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", name.c_str(),
              o.detail.c_str(), secs);
  std::fflush(stdout);
}

Outcome WelchOracle() {
  const std::vector<double> a = {1, 2, 3, 4};
  const std::vector<double> b = {2, 3, 4, 5};
  absl::StatusOr<TStatResult> r = WelchT(a, b);
  if (!r.ok()) return {false, r.status().ToString()};
  // t = -1 / sqrt(5/12 + 5/12) = -sqrt(6/5).
  const double expected = -std::sqrt(6.0 / 5.0);
  bool pass = std::abs(r->t - expected) < 1e-9 && r->df == 6.0;
  std::string detail = absl::StrFormat("t=%.12f df=%.17g", r->t, r->df);

  std::mt19937_64 rng(20260101);
  size_t asym_failures = 0;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x(2 + rng() % 40), y(2 + rng() % 40);
    for (double& v : x) v = static_cast<double>(rng() % 2000000) / 1e6 - 1.0;
    for (double& v : y) v = static_cast<double>(rng() % 2000000) / 1e6 - 1.0;
    absl::StatusOr<TStatResult> xy = WelchT(x, y);
    absl::StatusOr<TStatResult> yx = WelchT(y, x);
    if (!xy.ok() || !yx.ok() || xy->t != -yx->t || xy->df != yx->df) {
      ++asym_failures;
    }
  }
  pass = pass && asym_failures == 0;
  absl::StrAppend(&detail, ", antisymmetry failures ", asym_failures,
                  "/1000");
  return {pass, detail};
}

Outcome Cardinality() {
  SimScenario s = MakeScenario(7, 16);
  SimulatedModel model;
  model.kind = SimKind::kConfused;
  model.seed = 7;
  model.trigger_prefixes = {s.prefix};
  model.divergent_templates = s.divergent_templates;
  model.base_templates = s.base_templates;
  model.k_strength = 16;
  std::unique_ptr<ModelClient> client =
      MakeSimulatedClient(model, EndpointRole::kSuspect);
  VerificationConfig config;
  config.q = 60;
  LexicalScorer scorer;
  absl::Status status;
  VerificationRun run = VerifyPrefixes(*client, s.prefix, s.reference_prefix,
                                       scorer, config, 1, &status);
  if (!status.ok()) return {false, status.ToString()};
  const size_t ft = run.target_distribution.values.size();
  const size_t fr = run.reference_distribution.values.size();
  return {ft == 1770 && fr == 1770 &&
              run.target_distribution.pair_count == 1770,
          absl::StrCat("|F'|=", ft, " |F^r|=", fr)};
}

Outcome SplitFidelity() {
  testing::WorkedExample f = testing::LoadWorkedExample();
  absl::StatusOr<Sequence> seq = MakeSequence("worked-example", f.original);
  if (!seq.ok()) return {false, seq.status().ToString()};
  absl::StatusOr<SplitSequence> split = SplitAtBoundary(*seq, WatermarkConfig{});
  if (!split.ok()) return {false, split.status().ToString()};
  const bool pass = split->prefix.ends_with("supported on a") &&
                    split->split_word_index == f.split_word_index &&
                    split->prefix + " " + split->continuation ==
                        JoinWords(SplitWords(f.original));
  return {pass, absl::StrCat("prefix ends '...",
                             split->prefix.substr(split->prefix.size() - 14),
                             "' at word ", split->split_word_index)};
}

Outcome ReferencePrefix() {
  std::mt19937_64 rng(500);
  const std::vector<std::string> vocab = {
      "the", "protein", "binds", "a", "novel", "site", "in", "vitro",
      "results,", "suggest", "(n=12)", "αβ", "data.", "model", "x"};
  const std::vector<std::string> seps = {" ", "  ", "\t", "\n", "  "};
  size_t bad = 0;
  for (int c = 0; c < 500; ++c) {
    const size_t n = 4 + rng() % 60;
    std::vector<std::string> words;
    std::string text = rng() % 2 ? " " : "";
    for (size_t i = 0; i < n; ++i) {
      words.push_back(vocab[rng() % vocab.size()]);
      text += words.back();
      if (i + 1 < n || rng() % 2) text += seps[rng() % seps.size()];
    }
    absl::StatusOr<std::string> ref = MakeReferencePrefix(text);
    std::vector<std::string> expected(words.begin(), words.end() - 3);
    if (!ref.ok() || SplitWords(*ref).size() != n - 3 ||
        JoinWords(SplitWords(*ref)) != absl::StrJoin(expected, " ") ||
        !text.starts_with(*ref)) {
      ++bad;
    }
  }
  return {bad == 0, absl::StrCat(500 - bad, "/500 cases exact")};
}

Outcome PowerStudy() {
  PowerStudyConfig config;
  config.trials = 20;
  config.calibration_trials = 20;
  config.k_sweep = {1, 2, 4, 8, 16};
  config.detection_k = 16;
  config.verification.q = 60;
  config.master_seed = 0;
  config.parallelism = 1;
  LexicalScorer scorer;
  absl::StatusOr<PowerStudyResult> r = RunPowerStudy(config, scorer);
  if (!r.ok()) return {false, r.status().ToString()};
  bool monotone = true;
  std::vector<std::string> series;
  for (size_t i = 0; i < r->delta_t_series.size(); ++i) {
    series.push_back(absl::StrFormat("%zu:%.2f", r->delta_t_series[i].first,
                                     r->delta_t_series[i].second));
    if (i > 0 && r->delta_t_series[i].second > r->delta_t_series[i - 1].second) {
      monotone = false;
    }
  }
  const bool pass = r->detection_rate >= 0.95 &&
                    r->false_positive_rate <= 0.05 && monotone;
  return {pass,
          absl::StrFormat("threshold=%.3f detection=%.2f fpr=%.2f mean dt "
                          "by k {%s}%s",
                          r->threshold, r->detection_rate,
                          r->false_positive_rate, absl::StrJoin(series, " "),
                          monotone ? "" : " not monotone")};
}

Outcome RefFreeStudy() {
  RefFreeStudyConfig config;
  config.null_sequences = 60;
  config.watermarked_sequences = 3;
  config.verification.q = 60;
  config.parallelism = 1;
  LexicalScorer scorer;
  absl::StatusOr<RefFreeStudyResult> r = RunRefFreeStudy(config, scorer);
  if (!r.ok()) return {false, r.status().ToString()};
  const size_t flagged = static_cast<size_t>(std::count(
      r->watermarked_flagged.begin(), r->watermarked_flagged.end(), true));
  std::vector<std::string> wt;
  for (double t : r->watermarked_t) wt.push_back(absl::StrFormat("%.2f", t));
  return {flagged == 3 && r->nulls_inside >= 57,
          absl::StrFormat("nulls inside %zu/60 (mu=%.3f sigma=%.3f), "
                          "watermarked flagged %zu/3 t={%s}",
                          r->nulls_inside, r->null.mu, r->null.sigma, flagged,
                          absl::StrJoin(wt, " "))};
}

// Splices `insert` into `text` after its `word`-th word.
std::string InsertAfterWord(const std::string& text, size_t word,
                            const std::string& insert) {
  std::vector<WordSpan> spans = WordSpans(text);
  const size_t at = spans[std::min(word, spans.size() - 1)].end;
  return text.substr(0, at) + " " + insert + text.substr(at);
}

struct StealthOutcome {
  Outcome a, b, c;
};

StealthOutcome StealthAudit() {
  StealthOutcome out;
  std::vector<Sequence> corpus = SyntheticCorpus(1000, 0);

  // (a) 13 consecutive words of record 100 copied into record 200.
  const std::vector<std::string_view> donor = SplitWords(corpus[100].text);
  const std::string shared = JoinWords(std::vector<std::string_view>(
      donor.begin() + 40, donor.begin() + 53));
  corpus[200].text = InsertAfterWord(corpus[200].text, 60, shared);
  // (b) 40 random alphanumerics inside record 300.
  corpus[300].text = InsertAfterWord(corpus[300].text, 70,
                                     RandomAlphanumeric(40, 300));
  const std::set<std::string> modified = {corpus[100].id, corpus[200].id,
                                          corpus[300].id};

  // (c) a 32-copy paraphrase cluster and a K=16 manifest for record 500.
  std::set<std::string> cluster;
  std::vector<std::string> copies = ParaphraseCluster(32, 32);
  for (size_t i = 0; i < copies.size(); ++i) {
    const std::string id = absl::StrCat("cluster-", i);
    corpus.push_back(*MakeSequence(id, copies[i]));
    cluster.insert(id);
  }
  absl::StatusOr<WatermarkManifest> manifest = SyntheticManifest(
      SyntheticAbstractSeed(0, 500), SyntheticCorpusId(500), WatermarkConfig{},
      16);
  if (!manifest.ok()) {
    out.a = out.b = out.c = {false, manifest.status().ToString()};
    return out;
  }
  absl::StatusOr<std::vector<Sequence>> injected = Inject(corpus, *manifest, 5);
  if (!injected.ok()) {
    out.a = out.b = out.c = {false, injected.status().ToString()};
    return out;
  }
  std::set<std::string> variants;
  for (size_t k = 0; k < manifest->variants.size(); ++k) {
    variants.insert(VariantId(*manifest, k));
  }

  LexicalScorer scorer;
  absl::StatusOr<AuditReport> report =
      RunAudit(*injected, scorer, AuditConfig{}, 1);
  if (!report.ok()) {
    out.a = out.b = out.c = {false, report.status().ToString()};
    return out;
  }
  std::map<std::string, const AuditRecord*> by_id;
  for (const AuditRecord& r : report->records) by_id[r.sequence_id] = &r;

  const bool a_pair = by_id[corpus[100].id]->ngram_flag() &&
                      by_id[corpus[200].id]->ngram_flag();
  out.a = {a_pair, absl::StrCat("pair flagged: ", a_pair ? "yes" : "no",
                                "; n-gram flags corpus-wide ",
                                report->summary.ngram_flagged)};

  size_t natural = 0, natural_cr = 0;
  for (const AuditRecord& r : report->records) {
    if (modified.count(r.sequence_id) || cluster.count(r.sequence_id) ||
        variants.count(r.sequence_id)) {
      continue;
    }
    ++natural;
    natural_cr += r.cr_flag();
  }
  const bool b_insert = by_id[corpus[300].id]->cr_flag();
  const double clean = 1.0 - static_cast<double>(natural_cr) / natural;
  out.b = {b_insert && clean >= 0.95,
           absl::StrFormat("insertion flagged: %s; natural not CR-flagged "
                           "%zu/%zu (%.1f%%)",
                           b_insert ? "yes" : "no", natural - natural_cr,
                           natural, 100.0 * clean)};

  size_t cluster_flagged = 0;
  for (const std::string& id : cluster) {
    cluster_flagged += by_id[id]->density_flag();
  }
  size_t v_ngram = 0, v_cr = 0, v_density = 0, v_any = 0;
  std::vector<std::string> evidence;
  for (const std::string& id : variants) {
    const AuditRecord& r = *by_id[id];
    for (const NgramEvidence& e : r.ngram_evidence) {
      evidence.push_back(absl::StrCat(id, "~", e.other_id, " '", e.ngram, "'"));
    }
    v_ngram += r.ngram_flag();
    v_cr += r.cr_flag();
    v_density += r.density_flag();
    v_any += r.any_flag();
  }
  out.c = {cluster_flagged == cluster.size() && v_any == 0,
           absl::StrFormat("cluster density-flagged %zu/%zu; variants "
                           "flagged %zu/16 (ngram %zu, cr %zu, density %zu)",
                           cluster_flagged, cluster.size(), v_any, v_ngram,
                           v_cr, v_density)};
  if (!evidence.empty()) {
    absl::StrAppend(&out.c.detail, "; shared 13-grams: ",
                    absl::StrJoin(evidence, ", "));
  }
  return out;
}

Outcome ParserRoundTrip() {
  std::mt19937_64 rng(1000);
  const std::vector<std::string> vocab = {
      "alpha", "beta", "binding", "of", "the", "42", "kinase,", "(p<0.05)",
      "were", "measured.", "version", "Versions", "3:", "μm", "-"};
  size_t round_trip_bad = 0, missing_accepted = 0, duplicate_accepted = 0;
  for (int c = 0; c < 1000; ++c) {
    const int k = 1 + static_cast<int>(rng() % 64);
    std::vector<std::string> payloads;
    for (int i = 0; i < k; ++i) {
      const size_t n = 1 + rng() % 30;
      std::vector<std::string> words;
      for (size_t w = 0; w < n; ++w) words.push_back(vocab[rng() % vocab.size()]);
      payloads.push_back(absl::StrJoin(words, " "));
    }
    absl::StatusOr<std::vector<std::string>> parsed =
        ParseVersions(FormatVersions(payloads), k);
    if (!parsed.ok() || *parsed != payloads) ++round_trip_bad;

    const int victim = static_cast<int>(rng() % k);
    std::vector<std::string> missing, duplicated;
    for (int i = 0; i < k; ++i) {
      const std::string block =
          absl::StrCat("Version ", i + 1, ": ", payloads[i]);
      if (i != victim) missing.push_back(block);
      duplicated.push_back(block);
      if (i == victim) duplicated.push_back(block);
    }
    if (ParseVersions(absl::StrJoin(missing, "\n\n"), k).ok()) {
      ++missing_accepted;
    }
    if (ParseVersions(absl::StrJoin(duplicated, "\n\n"), k).ok()) {
      ++duplicate_accepted;
    }
  }
  return {round_trip_bad == 0 && missing_accepted == 0 &&
              duplicate_accepted == 0,
          absl::StrCat("round trip failures ", round_trip_bad,
                       "/1000, missing accepted ", missing_accepted,
                       ", duplicate accepted ", duplicate_accepted)};
}

Outcome Determinism() {
#ifdef WMTRACE_HAVE_CLI
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() /
      absl::StrCat("wmtrace_acceptance_", ::getpid());
  std::filesystem::create_directories(dir);
  std::vector<std::string> outputs;
  for (int i = 0; i < 2; ++i) {
    const std::string out = (dir / absl::StrCat("power", i, ".csv")).string();
    const int code = cli::Run({"wmtrace", "--seed", "11", "--q", "20",
                               "simulate", "power", "--trials", "10",
                               "--calibration-trials", "10", "--out", out,
                               "--json", out + ".json"});
    if (code != 0) return {false, absl::StrCat("exit code ", code)};
    absl::StatusOr<std::string> csv = ReadFile(out);
    if (!csv.ok()) return {false, csv.status().ToString()};
    outputs.push_back(*csv);
  }
  std::filesystem::remove_all(dir);
  return {outputs[0] == outputs[1] && !outputs[0].empty(),
          absl::StrCat(outputs[0].size(), " bytes, ",
                       outputs[0] == outputs[1] ? "identical" : "differ")};
#else
  return {false, "command-line tool not built"};
#endif
}

}  // namespace
}  // namespace wmtrace

int main() {
  using wmtrace::Criterion;
  Criterion("welch_oracle", 1.0, wmtrace::WelchOracle);
  Criterion("protocol_cardinality", 1.0, wmtrace::Cardinality);
  Criterion("split_fidelity", 1.0, wmtrace::SplitFidelity);
  Criterion("reference_prefix", 1.0, wmtrace::ReferencePrefix);
  Criterion("power_study", 180.0, wmtrace::PowerStudy);
  Criterion("ref_free_study", 120.0, wmtrace::RefFreeStudy);

  // The three stealth checks share one audit, timed once.
  const auto start = wmtrace::SteadyClock::now();
  wmtrace::StealthOutcome stealth = wmtrace::StealthAudit();
  const double secs =
      std::chrono::duration<double>(wmtrace::SteadyClock::now() - start).count();
  for (auto [name, o] :
       {std::pair{"stealth_ngram_duplicate", stealth.a},
        std::pair{"stealth_compression_insertion", stealth.b},
        std::pair{"stealth_density_and_variants", stealth.c}}) {
    Criterion(name, 1e9, [&, o = o] {
      wmtrace::Outcome r = o;
      if (secs >= 120.0) {
        r.pass = false;
        absl::StrAppend(&r.detail, "; shared audit over budget of 120 s");
      }
      absl::StrAppend(&r.detail, absl::StrFormat("; audit %.2f s", secs));
      return r;
    });
  }

  Criterion("parser_round_trip", 5.0, wmtrace::ParserRoundTrip);
  Criterion("simulate_power_determinism", 1e9, wmtrace::Determinism);
  std::printf("%d criteria failed\n", wmtrace::failures);
  return wmtrace::failures == 0 ? 0 : 1;
}
