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


#include "wmtrace/run_config.h"

#include <cstdlib>
#include <string>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"
#include "wmtrace/file_io.h"
#include "wmtrace/simharness.h"

namespace wmtrace {
namespace {

using ::testing::HasSubstr;
using json = nlohmann::json;

class RunConfigTest : public ::testing::Test {
 protected:
  void SetUp() override {
    unsetenv("WMTRACE_PARALLELISM");
    unsetenv("WMTRACE_MASTER_SEED");
    unsetenv("WMTRACE_SCORER");
  }
  void TearDown() override { SetUp(); }

  std::string Write(const json& j) {
    const std::string path = dir_.File("config.json");
    EXPECT_TRUE(WriteFileAtomic(path, j.dump()).ok());
    return path;
  }

  testing::TempDir dir_;
};

TEST_F(RunConfigTest, DefaultsAreValid) {
  absl::StatusOr<RunConfig> c = LoadRunConfig("");
  ASSERT_TRUE(c.ok());
  EXPECT_TRUE(c->Validate().ok());
  EXPECT_EQ(c->verification.q, 60u);
  EXPECT_EQ(c->verification.n_words, 3u);
  EXPECT_EQ(c->watermark.k, 16);
  EXPECT_EQ(c->audit.ngram_n, 13u);
  EXPECT_EQ(c->scorer, "lexical");
}

TEST_F(RunConfigTest, FileOverridesEnvironment) {
  setenv("WMTRACE_PARALLELISM", "3", 1);
  setenv("WMTRACE_MASTER_SEED", "77", 1);
  absl::StatusOr<RunConfig> env_only = LoadRunConfig("");
  ASSERT_TRUE(env_only.ok());
  EXPECT_EQ(env_only->parallelism, 3u);
  EXPECT_EQ(env_only->master_seed, 77u);

  std::string path = Write({{"parallelism", 5},
                            {"verification", {{"Q", 30}, {"n_words", 4}}},
                            {"watermark", {{"k", 8}, {"tau", 2.5}}},
                            {"audit", {{"knn_k", 5}}}});
  absl::StatusOr<RunConfig> c = LoadRunConfig(path);
  ASSERT_TRUE(c.ok()) << c.status();
  EXPECT_EQ(c->parallelism, 5u);
  EXPECT_EQ(c->master_seed, 77u);
  EXPECT_EQ(c->verification.q, 30u);
  EXPECT_EQ(c->verification.n_words, 4u);
  EXPECT_EQ(c->watermark.k, 8);
  EXPECT_DOUBLE_EQ(c->watermark.tau, 2.5);
  EXPECT_EQ(c->audit.knn_k, 5u);
}

TEST_F(RunConfigTest, RejectsBadInput) {
  setenv("WMTRACE_PARALLELISM", "zero", 1);
  EXPECT_FALSE(LoadRunConfig("").ok());
  unsetenv("WMTRACE_PARALLELISM");

  EXPECT_THAT(std::string(LoadRunConfig(Write({{"bogus", 1}}))
                              .status()
                              .message()),
              HasSubstr("unknown key 'bogus'"));
  EXPECT_FALSE(LoadRunConfig(Write({{"schema_version", 2}})).ok());
  EXPECT_FALSE(
      LoadRunConfig(Write({{"endpoints", {{"nobody", json::object()}}}})).ok());
  EXPECT_FALSE(LoadRunConfig(Write({{"parallelism", "many"}})).ok());
  EXPECT_FALSE(LoadRunConfig(dir_.File("missing.json")).ok());
  ASSERT_TRUE(WriteFileAtomic(dir_.File("bad.json"), "{not json").ok());
  EXPECT_FALSE(LoadRunConfig(dir_.File("bad.json")).ok());
}

TEST_F(RunConfigTest, ValidateChecksEndpoints) {
  RunConfig c;
  EndpointBinding b(EndpointRole::kSuspect);
  b.backend = BackendKind::kReplay;
  c.endpoints.emplace(EndpointRole::kSuspect, b);
  EXPECT_FALSE(c.Validate().ok());  // replay without transcript
  c.endpoints.at(EndpointRole::kSuspect).transcript = "t.jsonl";
  EXPECT_TRUE(c.Validate().ok());
  c.endpoints.at(EndpointRole::kSuspect).backend = BackendKind::kHttp;
  EXPECT_FALSE(c.Validate().ok());  // http without base_url
  c.parallelism = 0;
  EXPECT_FALSE(c.Validate().ok());
}

TEST_F(RunConfigTest, SerializesCredentialNameOnly) {
  setenv("WMTRACE_TEST_SECRET_VAR", "top-secret-credential", 1);
  std::string path =
      Write({{"endpoints",
              {{"suspect",
                {{"base_url", "https://api.example.com/v1"},
                 {"model", "m"},
                 {"auth_env", "WMTRACE_TEST_SECRET_VAR"},
                 {"api", "chat"}}}}}});
  absl::StatusOr<RunConfig> c = LoadRunConfig(path);
  ASSERT_TRUE(c.ok()) << c.status();
  const std::string dumped = RunConfigToJson(*c).dump();
  EXPECT_THAT(dumped, HasSubstr("WMTRACE_TEST_SECRET_VAR"));
  EXPECT_THAT(dumped, ::testing::Not(HasSubstr("top-secret-credential")));
  EXPECT_EQ(c->endpoints.at(EndpointRole::kSuspect).endpoint.api,
            ApiStyle::kChat);
  unsetenv("WMTRACE_TEST_SECRET_VAR");

  // The serialized form loads back to the same configuration.
  std::string again = Write(json::parse(dumped));
  absl::StatusOr<RunConfig> c2 = LoadRunConfig(again);
  ASSERT_TRUE(c2.ok()) << c2.status();
  EXPECT_EQ(RunConfigToJson(*c2).dump(), dumped);
}

TEST_F(RunConfigTest, MakeClientBuildsSimulatorFromManifest) {
  absl::StatusOr<WatermarkManifest> m =
      SyntheticManifest(2, "s2", WatermarkConfig{}, 1);
  ASSERT_TRUE(m.ok());
  ASSERT_TRUE(SaveManifest(*m, dir_.File("m.json")).ok());
  std::string path = Write(
      {{"endpoints",
        {{"suspect",
          {{"backend", "simulated"},
           {"simulator",
            {{"kind", "confused"},
             {"k_strength", 16},
             {"noise", 0.0},
             {"base_templates", 1},
             {"manifest", dir_.File("m.json")}}}}}}}});
  absl::StatusOr<RunConfig> c = LoadRunConfig(path);
  ASSERT_TRUE(c.ok()) << c.status();
  absl::StatusOr<std::unique_ptr<ModelClient>> client =
      MakeClient(*c, EndpointRole::kSuspect);
  ASSERT_TRUE(client.ok()) << client.status();
  GenerationConfig g;
  g.max_new_tokens = 4096;
  absl::StatusOr<std::string> text = (*client)->Complete(m->split.prefix, g, 0);
  ASSERT_TRUE(text.ok());
  bool divergent = false;
  for (const VariantPair& v : m->variants) {
    divergent |= *text == v.new_continuation;
  }
  EXPECT_TRUE(divergent);
  absl::StatusOr<std::string> other = (*client)->Complete("unrelated", g, 0);
  ASSERT_TRUE(other.ok());
  EXPECT_EQ(*other, m->split.continuation);

  EXPECT_EQ(MakeClient(*c, EndpointRole::kParaphraser).status().code(),
            absl::StatusCode::kFailedPrecondition);
}

TEST_F(RunConfigTest, MakeScorerSpecs) {
  absl::StatusOr<std::unique_ptr<SimilarityScorer>> lexical =
      MakeScorer("lexical");
  ASSERT_TRUE(lexical.ok());
  EXPECT_EQ((*lexical)->name(), "lexical-trigram-cosine");
  absl::StatusOr<std::unique_ptr<SimilarityScorer>> remote =
      MakeScorer("remote:bertscore_f1@http://127.0.0.1:9000");
  ASSERT_TRUE(remote.ok());
  EXPECT_EQ((*remote)->name(), "remote:bertscore_f1@http://127.0.0.1:9000");
  EXPECT_FALSE(MakeScorer("remote:unknown@http://x").ok());
  EXPECT_FALSE(MakeScorer("remote:bertscore_f1").ok());
  EXPECT_FALSE(MakeScorer("bertscore").ok());
}

}  // namespace
}  // namespace wmtrace
