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


#include "wmtrace/corpus.h"

#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "test_util.h"
#include "wmtrace/file_io.h"
#include "wmtrace/simharness.h"
#include "wmtrace/synthetic_corpus.h"
#include "wmtrace/text.h"

namespace wmtrace {
namespace {

using ::testing::EndsWith;
using ::testing::HasSubstr;
using ::testing::StartsWith;

Sequence Seq(const std::string& id, const std::string& text) {
  absl::StatusOr<Sequence> s = MakeSequence(id, text);
  EXPECT_TRUE(s.ok()) << s.status();
  return *s;
}

WatermarkManifest ManifestFromWorkedExample(int k) {
  testing::WorkedExample f = testing::LoadWorkedExample();
  WatermarkManifest m;
  m.target = Seq("worked-example", f.original);
  absl::StatusOr<SplitSequence> split = SplitAtWord(m.target, f.split_word_index);
  EXPECT_TRUE(split.ok());
  m.split = *split;
  m.reference_prefix = *MakeReferencePrefix(m.split.prefix);
  m.config.k = k;
  for (int i = 0; i < k; ++i) {
    m.variants.push_back(AssembleVariant(f.prefixes[i], f.continuations[i]));
  }
  return m;
}

TEST(MakeSequenceTest, CountsWords) {
  absl::StatusOr<Sequence> s = MakeSequence("x", "one two  three");
  ASSERT_TRUE(s.ok());
  EXPECT_EQ(s->token_count, 3u);
  EXPECT_FALSE(MakeSequence("x", "  \n").ok());
}

TEST(SplitTest, WorkedExampleBoundary) {
  testing::WorkedExample f = testing::LoadWorkedExample();
  Sequence seq = Seq("f", f.original);
  absl::StatusOr<SplitSequence> split = SplitAtBoundary(seq, WatermarkConfig{});
  ASSERT_TRUE(split.ok()) << split.status();
  EXPECT_THAT(split->prefix, EndsWith("supported on a"));
  EXPECT_THAT(split->prefix, StartsWith("We report the studies"));
  EXPECT_THAT(split->continuation, StartsWith("molecular interface."));
  EXPECT_EQ(split->split_word_index, f.split_word_index);
  EXPECT_EQ(split->prefix + " " + split->continuation, f.original);
}

TEST(SplitTest, SnapsToNearestBoundaryWithBackoff) {
  // 20 words, candidate index 4; boundaries after words 3 and 10.
  Sequence seq = Seq("s",
                     "a b c. d e f g h i j. k l m n o p q r s t");
  absl::StatusOr<SplitSequence> split = SplitAtBoundary(seq, WatermarkConfig{});
  ASSERT_TRUE(split.ok()) << split.status();
  EXPECT_EQ(split->split_word_index, 1u);
  EXPECT_EQ(split->prefix, "a");
  EXPECT_EQ(split->continuation, "b c. d e f g h i j. k l m n o p q r s t");
}

TEST(SplitTest, RejectsUnsplittableText) {
  WatermarkConfig config;
  EXPECT_FALSE(SplitAtBoundary(Seq("s", "too short."), config).ok());
  EXPECT_FALSE(
      SplitAtBoundary(Seq("s", "no sentence end in any of these many words"),
                      config)
          .ok());
  Sequence seq = Seq("s", "a b c d e f g h i j k l");
  EXPECT_FALSE(SplitAtWord(seq, 0).ok());
  EXPECT_FALSE(SplitAtWord(seq, 12).ok());
  absl::StatusOr<SplitSequence> at5 = SplitAtWord(seq, 5);
  ASSERT_TRUE(at5.ok());
  EXPECT_EQ(at5->prefix, "a b c d e");
}

TEST(ReferencePrefixTest, DropsLastThreeWords) {
  EXPECT_EQ(*MakeReferencePrefix("a b c d"), "a");
  EXPECT_EQ(*MakeReferencePrefix("We report the studies of ultrafast"),
            "We report the");
  EXPECT_FALSE(MakeReferencePrefix("a b c").ok());
  EXPECT_FALSE(MakeReferencePrefix("").ok());
}

TEST(ReferencePrefixTest, PropertyOnRandomPrefixes) {
  std::mt19937_64 rng(5);
  const char* spaces[] = {" ", "  ", "\t", "\n", " "};
  for (int c = 0; c < 200; ++c) {
    size_t n = 4 + rng() % 30;
    std::string text;
    std::vector<std::string> words;
    for (size_t i = 0; i < n; ++i) {
      std::string w = "w" + std::to_string(rng() % 10000);
      words.push_back(w);
      if (i > 0) text += spaces[rng() % 5];
      text += w;
    }
    absl::StatusOr<std::string> r = MakeReferencePrefix(text);
    ASSERT_TRUE(r.ok());
    std::vector<std::string_view> got = SplitWords(*r);
    ASSERT_EQ(got.size(), n - 3);
    for (size_t i = 0; i < got.size(); ++i) EXPECT_EQ(got[i], words[i]);
    EXPECT_TRUE(text.starts_with(*r));
  }
}

TEST(CorpusFileTest, ParsesAndRoundTrips) {
  std::string contents =
      "{\"id\":\"a\",\"text\":\"hello world\",\"source\":\"web\",\"year\":2020}\n"
      "\n"
      "{\"text\":\"no id here\"}\r\n";
  absl::StatusOr<std::vector<Sequence>> corpus = ParseCorpus(contents);
  ASSERT_TRUE(corpus.ok()) << corpus.status();
  ASSERT_EQ(corpus->size(), 2u);
  EXPECT_EQ((*corpus)[0].source, "web");
  EXPECT_EQ((*corpus)[0].extra["year"], 2020);
  EXPECT_EQ((*corpus)[1].id, "00000002");
  EXPECT_EQ((*corpus)[1].token_count, 3u);

  absl::StatusOr<std::vector<Sequence>> again =
      ParseCorpus(SerializeCorpus(*corpus));
  ASSERT_TRUE(again.ok());
  EXPECT_EQ(*again, *corpus);

  testing::TempDir dir;
  ASSERT_TRUE(WriteCorpus(dir.File("c.jsonl"), *corpus).ok());
  absl::StatusOr<std::vector<Sequence>> loaded = LoadCorpus(dir.File("c.jsonl"));
  ASSERT_TRUE(loaded.ok());
  EXPECT_EQ(*loaded, *corpus);
}

TEST(CorpusFileTest, ErrorsNameTheLine) {
  absl::Status s = ParseCorpus("{\"text\":\"ok\"}\nnot json\n").status();
  EXPECT_THAT(std::string(s.message()), HasSubstr("line 2"));
  s = ParseCorpus("{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"a\",\"text\":\"y\"}")
          .status();
  EXPECT_THAT(std::string(s.message()), HasSubstr("duplicate id"));
  s = ParseCorpus("{\"id\":\"a\"}").status();
  EXPECT_THAT(std::string(s.message()), HasSubstr("text"));
  EXPECT_FALSE(LoadCorpus("/nonexistent/corpus.jsonl").ok());
}

TEST(ManifestTest, ValidateCatchesBrokenInvariants) {
  WatermarkManifest m = ManifestFromWorkedExample(16);
  ASSERT_TRUE(m.Validate().ok()) << m.Validate();

  WatermarkManifest wrong_count = m;
  wrong_count.variants.pop_back();
  EXPECT_FALSE(wrong_count.Validate().ok());

  WatermarkManifest bad_ref = m;
  bad_ref.reference_prefix = m.split.prefix;
  EXPECT_FALSE(bad_ref.Validate().ok());

  WatermarkManifest same_prefix = m;
  same_prefix.variants[3] =
      AssembleVariant(m.split.prefix, m.variants[3].new_continuation);
  EXPECT_FALSE(same_prefix.Validate().ok());

  WatermarkManifest bad_assembly = m;
  bad_assembly.variants[0].assembled_text += " extra";
  EXPECT_FALSE(bad_assembly.Validate().ok());
}

TEST(ManifestTest, JsonAndFileRoundTrip) {
  WatermarkManifest m = ManifestFromWorkedExample(16);
  absl::StatusOr<WatermarkManifest> back = ManifestFromJson(ManifestToJson(m));
  ASSERT_TRUE(back.ok()) << back.status();
  EXPECT_EQ(*back, m);

  testing::TempDir dir;
  ASSERT_TRUE(SaveManifest(m, dir.File("m.json")).ok());
  absl::StatusOr<WatermarkManifest> loaded = LoadManifest(dir.File("m.json"));
  ASSERT_TRUE(loaded.ok()) << loaded.status();
  EXPECT_EQ(*loaded, m);

  nlohmann::ordered_json j = ManifestToJson(m);
  j["schema_version"] = 99;
  EXPECT_FALSE(ManifestFromJson(j).ok());
}

TEST(InjectTest, DeterministicAndOrderPreserving) {
  std::vector<Sequence> corpus = SyntheticCorpus(50, 1);
  WatermarkManifest m = ManifestFromWorkedExample(16);
  absl::StatusOr<std::vector<Sequence>> a = Inject(corpus, m, 42);
  absl::StatusOr<std::vector<Sequence>> b = Inject(corpus, m, 42);
  absl::StatusOr<std::vector<Sequence>> c = Inject(corpus, m, 43);
  ASSERT_TRUE(a.ok()) << a.status();
  ASSERT_TRUE(b.ok());
  ASSERT_TRUE(c.ok());
  EXPECT_EQ(*a, *b);
  EXPECT_NE(*a, *c);
  ASSERT_EQ(a->size(), 66u);

  std::vector<std::string> kept;
  std::set<std::string> injected;
  for (const Sequence& s : *a) {
    if (s.source && s.source->starts_with("watermark:")) {
      injected.insert(s.id);
    } else {
      kept.push_back(s.id);
    }
  }
  EXPECT_EQ(injected.size(), 16u);
  EXPECT_TRUE(injected.contains(VariantId(m, 0)));
  ASSERT_EQ(kept.size(), corpus.size());
  for (size_t i = 0; i < kept.size(); ++i) EXPECT_EQ(kept[i], corpus[i].id);
}

TEST(InjectTest, RejectsIdCollisionAndInvalidManifest) {
  WatermarkManifest m = ManifestFromWorkedExample(16);
  std::vector<Sequence> corpus = {Seq(VariantId(m, 2), "some text here")};
  EXPECT_EQ(Inject(corpus, m, 1).status().code(),
            absl::StatusCode::kAlreadyExists);
  m.variants.pop_back();
  EXPECT_FALSE(Inject({}, m, 1).ok());
}

TEST(SyntheticManifestTest, IsValidAndDeterministic) {
  WatermarkConfig config;
  absl::StatusOr<WatermarkManifest> a = SyntheticManifest(7, "s7", config, 1);
  absl::StatusOr<WatermarkManifest> b = SyntheticManifest(7, "s7", config, 1);
  ASSERT_TRUE(a.ok()) << a.status();
  ASSERT_TRUE(b.ok());
  EXPECT_EQ(*a, *b);
  EXPECT_TRUE(a->Validate().ok());
  EXPECT_EQ(a->variants.size(), 16u);
}

}  // namespace
}  // namespace wmtrace
