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

#include <set>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "wmtrace/similarity.h"
#include "wmtrace/synthetic_corpus.h"
#include "wmtrace/text.h"

namespace wmtrace {
namespace {

using ::testing::HasSubstr;
using ::testing::StartsWith;

SimulatedModel Confused() {
  SimulatedModel m;
  m.kind = SimKind::kConfused;
  m.seed = 1;
  m.trigger_prefixes = {"the watermark prefix"};
  m.divergent_templates = {"alpha one two", "beta three four",
                           "gamma five six", "delta seven eight"};
  m.base_templates = {"base text that is the same"};
  m.lexical_noise_rate = 0.0;
  m.k_strength = 2;
  return m;
}

TEST(SimulatedModelTest, Validate) {
  EXPECT_TRUE(Confused().Validate().ok());
  SimulatedModel m = Confused();
  m.base_templates.clear();
  EXPECT_FALSE(m.Validate().ok());
  m = Confused();
  m.trigger_prefixes.clear();
  EXPECT_FALSE(m.Validate().ok());
  m = Confused();
  m.divergent_templates = {"same opening words a", "Same opening words b"};
  EXPECT_FALSE(m.Validate().ok());
  m = Confused();
  m.lexical_noise_rate = 1.5;
  EXPECT_FALSE(m.Validate().ok());
  m = Confused();
  m.kind = SimKind::kStable;
  m.trigger_prefixes.clear();
  EXPECT_TRUE(m.Validate().ok());
}

TEST(SimulatedModelTest, EndsWithWords) {
  EXPECT_TRUE(EndsWithWords("x  the watermark\nprefix", "the watermark prefix"));
  EXPECT_FALSE(EndsWithWords("the watermark prefix x", "the watermark prefix"));
  EXPECT_FALSE(EndsWithWords("prefix", "the watermark prefix"));
  EXPECT_FALSE(EndsWithWords("anything", ""));
}

TEST(SimulatedModelTest, ConfusedOnlyAtTrigger) {
  SimulatedModel m = Confused();
  std::set<std::string> at_trigger;
  for (uint64_t i = 0; i < 200; ++i) {
    at_trigger.insert(SimulateComplete(m, "see the watermark prefix", i));
    EXPECT_EQ(SimulateComplete(m, "another prompt", i),
              "base text that is the same");
  }
  // k_strength 2 limits draws to the first two divergent templates.
  EXPECT_EQ(at_trigger,
            (std::set<std::string>{"alpha one two", "beta three four"}));
  m.kind = SimKind::kStable;
  EXPECT_EQ(SimulateComplete(m, "the watermark prefix", 0),
            "base text that is the same");
}

TEST(SimulatedModelTest, PureFunctionOfInputs) {
  SimulatedModel m;
  m.seed = 5;
  m.base_templates = {SyntheticAbstract(1), SyntheticAbstract(2)};
  m.lexical_noise_rate = 0.3;
  for (uint64_t i = 0; i < 20; ++i) {
    EXPECT_EQ(SimulateComplete(m, "prompt", i), SimulateComplete(m, "prompt", i));
  }
  std::set<std::string> outputs;
  for (uint64_t i = 0; i < 20; ++i) outputs.insert(SimulateComplete(m, "p", i));
  EXPECT_GT(outputs.size(), 2u);
  SimulatedModel other = m;
  other.seed = 6;
  size_t differ = 0;
  for (uint64_t i = 0; i < 20; ++i) {
    differ += SimulateComplete(m, "p", i) != SimulateComplete(other, "p", i);
  }
  EXPECT_GT(differ, 0u);
}

TEST(SimulatedBackendTest, TruncatesToMaxTokensAndScoresWords) {
  SimulatedModel m = Confused();
  m.kind = SimKind::kStable;
  SimulatedBackend backend(m);
  CompletionRequest req;
  req.prompt = "p";
  req.config.max_new_tokens = 3;
  EXPECT_EQ(*backend.Complete(req), "base text that");
  ScoringRequest s;
  s.text = "the quick zq9";
  absl::StatusOr<std::vector<TokenScore>> scores = backend.ScoreTokens(s);
  ASSERT_TRUE(scores.ok());
  ASSERT_EQ(scores->size(), 3u);
  for (const TokenScore& t : *scores) EXPECT_LT(t.logprob, 0.0);
  EXPECT_GT((*scores)[0].logprob, (*scores)[2].logprob);
  EXPECT_THAT(backend.Describe(), StartsWith("simulated(stable"));
}

TEST(SurrogateLogprobTest, BoundedAndDeterministic) {
  for (std::string_view w : {"a", "the", "nanocrystallography", "x7#", ""}) {
    const double lp = SurrogateLogprob(w);
    EXPECT_LE(lp, -0.05);
    EXPECT_GE(lp, -15.0);
    EXPECT_EQ(lp, SurrogateLogprob(w));
  }
  EXPECT_GT(SurrogateLogprob("cat"), SurrogateLogprob("catastrophically"));
}

TEST(ScenarioTest, BuiltFromSplitAbstract) {
  SimScenario s = MakeScenario(12, 8, 3);
  EXPECT_EQ(s.divergent_templates.size(), 8u);
  EXPECT_EQ(s.base_templates.size(), 3u);
  EXPECT_EQ(CountWords(s.reference_prefix) + 3, CountWords(s.prefix));
  EXPECT_TRUE(s.prefix.starts_with(s.reference_prefix));
  EXPECT_TRUE(SyntheticAbstract(12).starts_with(s.prefix));
}

TEST(SyntheticManifestTest, PrefixesShareNoLongRuns) {
  absl::StatusOr<WatermarkManifest> m =
      SyntheticManifest(3, "s3", WatermarkConfig{}, 9);
  ASSERT_TRUE(m.ok()) << m.status();
  EXPECT_TRUE(m->Validate().ok());
  std::set<std::string> openings;
  const size_t prefix_words = CountWords(m->split.prefix);
  const size_t continuation_words = CountWords(m->split.continuation);
  for (const VariantPair& v : m->variants) {
    EXPECT_EQ(CountWords(v.rephrased_prefix), prefix_words);
    EXPECT_GE(CountWords(v.new_continuation), continuation_words);
    openings.insert(AsciiLower(FirstNWords(v.new_continuation, 3)));
  }
  EXPECT_EQ(openings.size(), 16u);
}

PowerStudyConfig SmallPowerStudy(size_t parallelism) {
  PowerStudyConfig c;
  c.trials = 10;
  c.calibration_trials = 10;
  c.verification.q = 60;
  c.k_sweep = {1, 16};
  c.master_seed = 4;
  c.parallelism = parallelism;
  return c;
}

TEST(PowerStudyTest, SmallStudySeparatesHypotheses) {
  LexicalScorer scorer;
  absl::StatusOr<PowerStudyResult> r = RunPowerStudy(SmallPowerStudy(1), scorer);
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_EQ(r->records.size(), 10u + 10u + 2u * 10u);
  ASSERT_EQ(r->delta_t_series.size(), 2u);
  EXPECT_EQ(r->delta_t_series[0].first, 1u);
  EXPECT_GE(r->delta_t_series[0].second, r->delta_t_series[1].second);
  EXPECT_GE(r->detection_rate, 0.9);
  EXPECT_LE(r->false_positive_rate, 0.2);
  EXPECT_EQ(r->scorer_name, scorer.name());

  nlohmann::ordered_json j = PowerStudyResultToJson(*r);
  EXPECT_EQ(j["kind"], "power_study");
  EXPECT_EQ(j["delta_t_series"].size(), 2u);
  EXPECT_THAT(DeltaTSeriesCsv(*r), StartsWith("k_strength,mean_delta_t\n1,"));
}

TEST(PowerStudyTest, CsvIndependentOfParallelism) {
  LexicalScorer scorer;
  absl::StatusOr<PowerStudyResult> a = RunPowerStudy(SmallPowerStudy(1), scorer);
  absl::StatusOr<PowerStudyResult> b = RunPowerStudy(SmallPowerStudy(4), scorer);
  ASSERT_TRUE(a.ok());
  ASSERT_TRUE(b.ok());
  EXPECT_EQ(PowerStudyCsv(*a), PowerStudyCsv(*b));
  EXPECT_THAT(PowerStudyCsv(*a), StartsWith("hypothesis,k_strength,trial,"));
}

TEST(PowerStudyTest, FixedThresholdSkipsCalibration) {
  PowerStudyConfig c = SmallPowerStudy(1);
  c.threshold = -3.0;
  c.calibration_trials = 0;
  LexicalScorer scorer;
  absl::StatusOr<PowerStudyResult> r = RunPowerStudy(c, scorer);
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_DOUBLE_EQ(r->threshold, -3.0);
  for (const TrialRecord& t : r->records) EXPECT_NE(t.hypothesis, "calibration");
}

TEST(PowerStudyTest, RejectsInvalidConfig) {
  PowerStudyConfig c = SmallPowerStudy(1);
  c.trials = 5;
  LexicalScorer scorer;
  EXPECT_FALSE(RunPowerStudy(c, scorer).ok());
  c = SmallPowerStudy(1);
  c.k_sweep = {};
  EXPECT_FALSE(RunPowerStudy(c, scorer).ok());
}

TEST(RefFreeStudyTest, SmallStudyFlagsWatermark) {
  RefFreeStudyConfig c;
  c.null_sequences = 12;
  c.watermarked_sequences = 2;
  c.verification.q = 20;
  c.master_seed = 2;
  LexicalScorer scorer;
  absl::StatusOr<RefFreeStudyResult> r = RunRefFreeStudy(c, scorer);
  ASSERT_TRUE(r.ok()) << r.status();
  EXPECT_EQ(r->null.t_values.size(), 12u);
  ASSERT_EQ(r->watermarked_t.size(), 2u);
  for (bool f : r->watermarked_flagged) EXPECT_TRUE(f);
  EXPECT_LE(r->nulls_inside, 12u);
  std::string csv = RefFreeStudyCsv(*r);
  EXPECT_THAT(csv, StartsWith("group,index,t,mu,sigma,flagged\n"));
  EXPECT_THAT(csv, HasSubstr("\nwatermarked,1,"));
  nlohmann::ordered_json j = RefFreeStudyResultToJson(*r);
  EXPECT_EQ(j["kind"], "ref_free_study");
  EXPECT_FALSE(j["null"].contains("kind"));

  c.null_sequences = 5;
  EXPECT_FALSE(RunRefFreeStudy(c, scorer).ok());
}

}  // namespace
}  // namespace wmtrace
