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

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"
#include "wmtrace/backend.h"
#include "wmtrace/corpus.h"
#include "wmtrace/file_io.h"
#include "wmtrace/prompts.h"
#include "wmtrace/similarity.h"
#include "wmtrace/synthetic_corpus.h"
#include "wmtrace/text.h"

namespace wmtrace {
namespace {

using ::testing::HasSubstr;

// Scores every word as -len(word)/2 nats, so mean NLL is mean word length/2.
std::shared_ptr<testing::FakeBackend> WordLengthScorer() {
  return std::make_shared<testing::FakeBackend>(
      [](const CompletionRequest&) { return std::string("unused"); },
      [](const ScoringRequest& r) -> absl::StatusOr<std::vector<TokenScore>> {
        if (r.text.find("FAIL") != std::string::npos) {
          return absl::InvalidArgumentError("cannot score");
        }
        std::vector<TokenScore> out;
        for (std::string_view w : SplitWords(r.text)) {
          out.push_back({std::string(w), -static_cast<double>(w.size()) / 2});
        }
        return out;
      });
}

Sequence Seq(const std::string& id, const std::string& text) {
  return *MakeSequence(id, text);
}

TEST(SelectTargetsTest, StrictThresholdAndErrors) {
  std::vector<Sequence> corpus = {Seq("a", "aa aa"), Seq("b", "aaaa"),
                                  Seq("c", "aaaaaa"), Seq("d", "FAIL here")};
  std::unique_ptr<ModelClient> client =
      testing::MakeFakeClient(WordLengthScorer(), EndpointRole::kReferenceScorer);
  std::vector<SelectionReport> r = SelectTargets(corpus, *client, 2.0, 2);
  ASSERT_EQ(r.size(), 4u);
  EXPECT_DOUBLE_EQ(r[0].mean_nll, 1.0);
  EXPECT_FALSE(r[0].selected);
  EXPECT_DOUBLE_EQ(r[1].mean_nll, 2.0);
  EXPECT_FALSE(r[1].selected);  // equal to tau is not selected
  EXPECT_DOUBLE_EQ(r[2].mean_nll, 3.0);
  EXPECT_TRUE(r[2].selected);
  EXPECT_TRUE(r[3].error.has_value());
  EXPECT_FALSE(r[3].selected);
  EXPECT_EQ(r[3].sequence_id, "d");
  nlohmann::ordered_json j = SelectionReportToJson(r[3]);
  EXPECT_TRUE(j.contains("error"));
}

TEST(AutoTauTest, PercentileOfSample) {
  std::vector<Sequence> corpus;
  for (int i = 1; i <= 8; ++i) {
    corpus.push_back(Seq("s" + std::to_string(i), std::string(2 * i, 'x')));
  }
  std::unique_ptr<ModelClient> client =
      testing::MakeFakeClient(WordLengthScorer(), EndpointRole::kReferenceScorer);
  // Whole corpus sampled: NLL values 1..8, 75th percentile 6.25.
  AutoTauOptions all{.sample_size = 100, .percentile = 0.75, .seed = 3};
  absl::StatusOr<double> tau = AutoTau(corpus, *client, all);
  ASSERT_TRUE(tau.ok());
  EXPECT_DOUBLE_EQ(*tau, 6.25);

  AutoTauOptions some{.sample_size = 4, .percentile = 0.5, .seed = 3};
  absl::StatusOr<double> a = AutoTau(corpus, *client, some);
  absl::StatusOr<double> b = AutoTau(corpus, *client, some);
  ASSERT_TRUE(a.ok());
  EXPECT_EQ(*a, *b);

  std::vector<Sequence> bad = {Seq("f", "FAIL")};
  EXPECT_FALSE(AutoTau(bad, *client).ok());
}

// Replays recorded paraphraser and generator responses for the worked
// example through the default prompt templates.
class GenerateVariantsTest : public ::testing::Test {
 protected:
  void SetUp() override {
    f_ = testing::LoadWorkedExample();
    target_ = Seq("worked-example", f_.original);
    split_ = *SplitAtWord(target_, f_.split_word_index);
    store_ = std::make_shared<TranscriptStore>(
        *TranscriptStore::OpenOrCreate(dir_.File("t.jsonl")));
  }

  CompletionRequest Request(EndpointRole role, TemplateKind kind,
                            uint64_t attempt) {
    PromptTemplate t = kind == TemplateKind::kRephrase
                           ? DefaultRephraseTemplate()
                           : DefaultContinuationTemplate();
    CompletionRequest r;
    r.role = role;
    r.model = "recorded";
    r.prompt = *RenderPrompt(t, split_.prefix, split_.continuation, 16);
    if (attempt > 0) r.prompt += FormatReminder(16);
    r.config = GenerationOptions().sampling;
    r.draw_index = attempt;
    return r;
  }

  void Record(EndpointRole role, TemplateKind kind, uint64_t attempt,
              const std::string& response) {
    ASSERT_TRUE(store_
                    ->Append({RequestHash(Request(role, kind, attempt)),
                              response, std::nullopt})
                    .ok());
  }

  std::unique_ptr<ModelClient> Client(EndpointRole role) {
    ModelEndpoint e(role);
    e.model_name = "recorded";
    e.rate_limit = 1e9;
    e.max_retries = 0;
    return std::make_unique<ModelClient>(
        e, std::make_shared<ReplayBackend>(store_));
  }

  testing::TempDir dir_;
  testing::WorkedExample f_;
  Sequence target_;
  SplitSequence split_;
  std::shared_ptr<TranscriptStore> store_;
};

TEST_F(GenerateVariantsTest, AssemblesManifestFromRecordedResponses) {
  Record(EndpointRole::kParaphraser, TemplateKind::kRephrase, 0,
         "Here are the versions.\n\n" + FormatVersions(f_.prefixes));
  Record(EndpointRole::kContinuationGenerator, TemplateKind::kContinuation, 0,
         FormatVersions(f_.continuations));
  auto paraphraser = Client(EndpointRole::kParaphraser);
  auto generator = Client(EndpointRole::kContinuationGenerator);
  absl::StatusOr<WatermarkManifest> m = GenerateVariants(
      target_, split_, WatermarkConfig{}, *paraphraser, *generator);
  ASSERT_TRUE(m.ok()) << m.status();
  ASSERT_EQ(m->variants.size(), 16u);
  EXPECT_TRUE(m->Validate().ok());
  EXPECT_EQ(m->reference_prefix, *MakeReferencePrefix(split_.prefix));
  for (size_t k = 0; k < 16; ++k) {
    EXPECT_EQ(m->variants[k].rephrased_prefix, f_.prefixes[k]);
    EXPECT_EQ(m->variants[k].new_continuation, f_.continuations[k]);
    EXPECT_EQ(m->variants[k].assembled_text,
              f_.prefixes[k] + " " + f_.continuations[k]);
  }
}

TEST_F(GenerateVariantsTest, RepromptsAfterMalformedResponse) {
  std::vector<std::string> short_list(f_.prefixes.begin(),
                                      f_.prefixes.begin() + 15);
  Record(EndpointRole::kParaphraser, TemplateKind::kRephrase, 0,
         FormatVersions(short_list));
  Record(EndpointRole::kParaphraser, TemplateKind::kRephrase, 1,
         FormatVersions(f_.prefixes));
  // First continuation set repeats an opening; the second is clean.
  std::vector<std::string> repeated = f_.continuations;
  repeated[5] = repeated[0];
  Record(EndpointRole::kContinuationGenerator, TemplateKind::kContinuation, 0,
         FormatVersions(repeated));
  Record(EndpointRole::kContinuationGenerator, TemplateKind::kContinuation, 1,
         FormatVersions(f_.continuations));
  auto paraphraser = Client(EndpointRole::kParaphraser);
  auto generator = Client(EndpointRole::kContinuationGenerator);
  absl::StatusOr<WatermarkManifest> m = GenerateVariants(
      target_, split_, WatermarkConfig{}, *paraphraser, *generator);
  ASSERT_TRUE(m.ok()) << m.status();
  EXPECT_EQ(paraphraser->attempts(), 2u);
  EXPECT_EQ(generator->attempts(), 2u);
}

TEST_F(GenerateVariantsTest, PersistentFailureCarriesTranscripts) {
  std::vector<std::string> with_original = f_.prefixes;
  with_original[2] = split_.prefix;
  for (uint64_t a = 0; a <= 2; ++a) {
    Record(EndpointRole::kParaphraser, TemplateKind::kRephrase, a,
           FormatVersions(with_original));
  }
  auto paraphraser = Client(EndpointRole::kParaphraser);
  auto generator = Client(EndpointRole::kContinuationGenerator);
  absl::Status s = GenerateVariants(target_, split_, WatermarkConfig{},
                                    *paraphraser, *generator)
                       .status();
  ASSERT_FALSE(s.ok());
  EXPECT_THAT(std::string(s.message()), HasSubstr("repeats the original"));
  auto payload = s.GetPayload("wmtrace/transcripts");
  ASSERT_TRUE(payload.has_value());
  EXPECT_THAT(std::string(*payload), HasSubstr("--- response 3 ---"));
  EXPECT_EQ(paraphraser->attempts(), 3u);
  EXPECT_EQ(generator->attempts(), 0u);
}

TEST_F(GenerateVariantsTest, MissingTranscriptIsAnError) {
  auto paraphraser = Client(EndpointRole::kParaphraser);
  auto generator = Client(EndpointRole::kContinuationGenerator);
  absl::Status s = GenerateVariants(target_, split_, WatermarkConfig{},
                                    *paraphraser, *generator)
                       .status();
  EXPECT_EQ(s.code(), absl::StatusCode::kNotFound);
}

TEST(ValidateVariantsTest, WorkedExampleOrdering) {
  testing::WorkedExample f = testing::LoadWorkedExample();
  WatermarkManifest m;
  m.target = Seq("f", f.original);
  m.split = *SplitAtWord(m.target, f.split_word_index);
  m.reference_prefix = *MakeReferencePrefix(m.split.prefix);
  for (size_t k = 0; k < 16; ++k) {
    m.variants.push_back(AssembleVariant(f.prefixes[k], f.continuations[k]));
  }
  LexicalScorer scorer;
  absl::StatusOr<ValidationReport> r = ValidateVariants(m, scorer);
  ASSERT_TRUE(r.ok()) << r.status();
  ASSERT_EQ(r->per_variant_distance.size(), 16u);
  EXPECT_NEAR(r->per_variant_distance[0],
              1.0 - LexicalScore(f.prefixes[0], m.split.prefix), 1e-12);
  EXPECT_NEAR(r->reference_prefix_distance,
              1.0 - LexicalScore(m.split.prefix, m.reference_prefix), 1e-12);
  EXPECT_NEAR(r->min_reference_distance, 1.5 * r->mean_distance, 1e-12);
  EXPECT_EQ(r->scorer_name, scorer.name());
  EXPECT_EQ(r->passed, r->mean_distance <= 0.05 &&
                           r->reference_prefix_distance >=
                               r->min_reference_distance);

  // Loose thresholds accept the set; tight ones reject it.
  ValidationThresholds loose{.max_allowed_mean = 1.0,
                             .min_reference_ratio = 0.0};
  EXPECT_TRUE(ValidateVariants(m, scorer, loose)->passed);
  ValidationThresholds tight{.max_allowed_mean = 0.0,
                             .min_reference_ratio = 1.5};
  EXPECT_FALSE(ValidateVariants(m, scorer, tight)->passed);

  nlohmann::ordered_json j = ValidationReportToJson(*r);
  EXPECT_EQ(j["per_variant_distance"].size(), 16u);
}

}  // namespace
}  // namespace wmtrace
