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

#include <atomic>
#include <cmath>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"
#include "wmtrace/simharness.h"
#include "wmtrace/similarity.h"

namespace wmtrace {
namespace {

using ::testing::HasSubstr;

SimulatedModel Model(const SimScenario& s, SimKind kind, size_t k_strength) {
  SimulatedModel m;
  m.kind = kind;
  m.seed = 17;
  m.trigger_prefixes = {s.prefix};
  m.divergent_templates = s.divergent_templates;
  m.base_templates = s.base_templates;
  m.k_strength = k_strength;
  return m;
}

TEST(VerifyPrefixesTest, SimulatedRunHasProtocolCardinality) {
  SimScenario s = MakeScenario(3, 16);
  std::unique_ptr<ModelClient> client = MakeSimulatedClient(
      Model(s, SimKind::kConfused, 16), EndpointRole::kSuspect);
  LexicalScorer scorer;
  VerificationConfig config;
  absl::Status status;
  VerificationRun run = VerifyPrefixes(*client, s.prefix, s.reference_prefix,
                                       scorer, config, 4, &status);
  ASSERT_TRUE(status.ok()) << status;
  EXPECT_TRUE(run.complete);
  EXPECT_EQ(run.target_continuations.size(), 60u);
  EXPECT_EQ(run.reference_continuations.size(), 60u);
  EXPECT_EQ(run.target_distribution.values.size(), 1770u);
  EXPECT_EQ(run.reference_distribution.values.size(), 1770u);
  ASSERT_TRUE(run.t.has_value());
  EXPECT_EQ(run.t->n_target, 1770u);
  EXPECT_EQ(run.config.scorer_name, scorer.name());
  // Divergent continuations at the watermark prefix are less similar.
  EXPECT_LT(run.t->t, 0.0);

  absl::StatusOr<TStatResult> again =
      WelchT(run.target_distribution, run.reference_distribution);
  ASSERT_TRUE(again.ok());
  EXPECT_EQ(again->t, run.t->t);
}

TEST(VerifyPrefixesTest, ParallelismDoesNotChangeResults) {
  SimScenario s = MakeScenario(4, 8);
  std::unique_ptr<ModelClient> client = MakeSimulatedClient(
      Model(s, SimKind::kConfused, 8), EndpointRole::kSuspect);
  LexicalScorer scorer;
  VerificationConfig config;
  absl::Status s1, s8;
  VerificationRun a = VerifyPrefixes(*client, s.prefix, s.reference_prefix,
                                     scorer, config, 1, &s1);
  VerificationRun b = VerifyPrefixes(*client, s.prefix, s.reference_prefix,
                                     scorer, config, 8, &s8);
  ASSERT_TRUE(s1.ok());
  ASSERT_TRUE(s8.ok());
  EXPECT_EQ(a.target_continuations, b.target_continuations);
  EXPECT_EQ(a.t->t, b.t->t);
}

TEST(VerifyPrefixesTest, FailureKeepsPartialContinuations) {
  auto backend = std::make_shared<testing::FakeBackend>(
      [](const CompletionRequest& r) -> absl::StatusOr<std::string> {
        if (r.draw_index == 30) return absl::UnavailableError("boom");
        return "continuation number " + std::to_string(r.draw_index);
      });
  std::unique_ptr<ModelClient> client = testing::MakeFakeClient(backend);
  LexicalScorer scorer;
  absl::Status status;
  VerificationRun run = VerifyPrefixes(*client, "query prefix", "query",
                                       scorer, VerificationConfig{}, 1, &status);
  EXPECT_FALSE(status.ok());
  EXPECT_FALSE(run.complete);
  ASSERT_TRUE(run.error.has_value());
  EXPECT_THAT(*run.error, HasSubstr("boom"));
  ASSERT_EQ(run.target_continuations.size(), 60u);
  EXPECT_TRUE(run.target_continuations[29].has_value());
  EXPECT_FALSE(run.target_continuations[30].has_value());
  EXPECT_FALSE(run.t.has_value());

  std::vector<std::optional<std::string>> partial;
  EXPECT_FALSE(CollectContinuations(*client, "p", VerificationConfig{}, 1,
                                    &partial)
                   .ok());
}

TEST(VerifySampleTest, QueriesOriginalOrVariantPrefix) {
  absl::StatusOr<WatermarkManifest> m =
      SyntheticManifest(5, "s5", WatermarkConfig{}, 2);
  ASSERT_TRUE(m.ok()) << m.status();
  auto backend = std::make_shared<testing::FakeBackend>(
      [](const CompletionRequest& r) {
        return "text " + std::to_string(r.draw_index % 7) + " more words";
      });
  std::unique_ptr<ModelClient> client = testing::MakeFakeClient(backend);
  LexicalScorer scorer;
  VerificationConfig config;
  config.q = 10;
  absl::StatusOr<VerificationRun> run = VerifySample(*client, *m, scorer, config);
  ASSERT_TRUE(run.ok()) << run.status();
  EXPECT_EQ(run->sequence_id, "s5");
  EXPECT_EQ(run->query_prefix, m->split.prefix);
  EXPECT_EQ(run->reference_prefix, m->reference_prefix);
  EXPECT_EQ(run->target_distribution.values.size(), 45u);

  config.query_variant = 3;
  run = VerifySample(*client, *m, scorer, config);
  ASSERT_TRUE(run.ok());
  EXPECT_EQ(run->query_prefix, m->variants[3].rephrased_prefix);
  config.query_variant = 16;
  EXPECT_EQ(VerifySample(*client, *m, scorer, config).status().code(),
            absl::StatusCode::kOutOfRange);
}

TEST(VerificationConfigTest, Validate) {
  VerificationConfig c;
  EXPECT_TRUE(c.Validate().ok());
  c.q = 1;
  EXPECT_FALSE(c.Validate().ok());
  c.q = 60;
  c.n_words = 0;
  EXPECT_FALSE(c.Validate().ok());
}

TEST(DecisionTest, RefBased) {
  absl::StatusOr<RefBasedDecision> d = DecideRefBased(-50.0, -5.0);
  ASSERT_TRUE(d.ok());
  EXPECT_DOUBLE_EQ(d->delta_t, -45.0);
  EXPECT_TRUE(d->watermarked);
  EXPECT_TRUE(DecideRefBased(-45.0, -5.0)->watermarked);  // at threshold
  EXPECT_FALSE(DecideRefBased(-44.0, -5.0)->watermarked);
  EXPECT_TRUE(DecideRefBased(1.0, 0.0, 2.0)->watermarked);
  EXPECT_FALSE(
      DecideRefBased(std::numeric_limits<double>::infinity(), 0.0).ok());
  nlohmann::ordered_json j = RefBasedDecisionToJson(*d);
  EXPECT_EQ(j["watermarked"], true);
}

TEST(DecisionTest, BuildNullNeedsTenFiniteValues) {
  std::vector<double> nine(9, 1.0);
  EXPECT_FALSE(BuildNull(nine).ok());
  std::vector<double> bad(10, 1.0);
  bad[4] = std::nan("");
  EXPECT_FALSE(BuildNull(bad).ok());
  std::vector<double> ok = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  EXPECT_FALSE(BuildNull(ok, 0.0).ok());
  absl::StatusOr<NullDistribution> n = BuildNull(ok);
  ASSERT_TRUE(n.ok());
  EXPECT_DOUBLE_EQ(n->mu, 5.5);
  EXPECT_NEAR(n->sigma, std::sqrt(55.0 / 6.0), 1e-12);
}

TEST(DecisionTest, RefFreeSidedness) {
  std::vector<double> v = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  NullDistribution n = *BuildNull(v);
  const double lo = n.mu - 2 * n.sigma;
  const double hi = n.mu + 2 * n.sigma;
  EXPECT_TRUE(*DecideRefFree(lo - 0.01, n));
  EXPECT_FALSE(*DecideRefFree(lo, n));  // strictly outside
  EXPECT_FALSE(*DecideRefFree(n.mu, n));
  EXPECT_TRUE(*DecideRefFree(hi + 0.01, n));
  EXPECT_FALSE(*DecideRefFree(hi + 0.01, n, Sidedness::kLowerOnly));
  EXPECT_TRUE(*DecideRefFree(lo - 0.01, n, Sidedness::kLowerOnly));
  EXPECT_FALSE(DecideRefFree(std::nan(""), n).ok());
}

TEST(JsonTest, NullDistributionRoundTrip) {
  NullDistribution n = *BuildNull({-1, -2, 0, 1, 2, 0.5, -0.5, 3, -3, 0.25},
                                  2.5);
  absl::StatusOr<NullDistribution> back =
      NullDistributionFromJson(NullDistributionToJson(n));
  ASSERT_TRUE(back.ok());
  EXPECT_EQ(back->t_values, n.t_values);
  EXPECT_DOUBLE_EQ(back->mu, n.mu);
  EXPECT_DOUBLE_EQ(back->sigma, n.sigma);
  EXPECT_DOUBLE_EQ(back->k_sigma, 2.5);
  EXPECT_FALSE(NullDistributionFromJson({{"t_values", {1}}}).ok());
}

TEST(JsonTest, VerificationRunRoundTrip) {
  SimScenario s = MakeScenario(8, 4);
  std::unique_ptr<ModelClient> client = MakeSimulatedClient(
      Model(s, SimKind::kStable, 4), EndpointRole::kPretrainedBaseline);
  LexicalScorer scorer;
  VerificationConfig config;
  config.q = 12;
  config.query_variant = 2;
  absl::Status status;
  VerificationRun run = VerifyPrefixes(*client, s.prefix, s.reference_prefix,
                                       scorer, config, 1, &status);
  ASSERT_TRUE(status.ok());
  run.sequence_id = "seq";
  nlohmann::ordered_json j = VerificationRunToJson(run);
  EXPECT_EQ(j["kind"], "verification_run");
  absl::StatusOr<VerificationRun> back = VerificationRunFromJson(j);
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(back->sequence_id, "seq");
  EXPECT_EQ(back->config.q, 12u);
  EXPECT_EQ(back->config.query_variant, std::optional<size_t>(2));
  EXPECT_EQ(back->target_continuations, run.target_continuations);
  EXPECT_EQ(back->reference_distribution.values,
            run.reference_distribution.values);
  ASSERT_TRUE(back->t.has_value());
  EXPECT_DOUBLE_EQ(back->t->t, run.t->t);
  EXPECT_DOUBLE_EQ(back->t->df, run.t->df);
  EXPECT_TRUE(back->complete);
  EXPECT_EQ(VerificationRunToJson(*back).dump(), j.dump());
}

TEST(JsonTest, NonFiniteTSurvivesRoundTrip) {
  VerificationRun run;
  TStatResult t;
  t.t = -std::numeric_limits<double>::infinity();
  t.finite = false;
  run.t = t;
  absl::StatusOr<VerificationRun> back =
      VerificationRunFromJson(VerificationRunToJson(run));
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_TRUE(std::isinf(back->t->t));
  EXPECT_LT(back->t->t, 0);
  EXPECT_FALSE(VerificationRunFromJson({{"kind", "x"}}).ok());
}

}  // namespace
}  // namespace wmtrace
