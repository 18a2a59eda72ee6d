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

#ifndef WMTRACE_SIMILARITY_H_
#define WMTRACE_SIMILARITY_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"

namespace wmtrace {

struct TextPair {
  std::string_view a;
  std::string_view b;
};

// Symmetric n x n matrix stored row-major; the diagonal is unused.
struct SimilarityMatrix {
  size_t n = 0;
  std::vector<double> values;
  double at(size_t i, size_t j) const { return values[i * n + j]; }
};

// Semantic similarity over short texts. Implementations must be symmetric
// (within 1e-6), return values in [-1, 1], score a non-empty text against
// itself at >= 0.99, and be safe for concurrent calls.
class SimilarityScorer {
 public:
  virtual ~SimilarityScorer() = default;

  // Recorded in every downstream result; t-values from different scorers
  // are not comparable.
  virtual std::string name() const = 0;

  virtual absl::StatusOr<std::vector<double>> ScorePairs(
      std::span<const TextPair> pairs) const = 0;

  absl::StatusOr<double> Score(std::string_view a, std::string_view b) const;

  // All pairwise scores among `texts`. The default batches ScorePairs.
  virtual absl::StatusOr<SimilarityMatrix> ScoreAllPairs(
      std::span<const std::string> texts) const;
};

// Cosine similarity of character-trigram count vectors over lowercased,
// whitespace-normalized text. Trigrams are taken over Unicode scalar values;
// a non-empty text shorter than three characters counts as one gram. Both
// empty gives 1, exactly one empty gives 0.
class LexicalScorer : public SimilarityScorer {
 public:
  std::string name() const override { return "lexical-trigram-cosine"; }
  absl::StatusOr<std::vector<double>> ScorePairs(
      std::span<const TextPair> pairs) const override;
  absl::StatusOr<SimilarityMatrix> ScoreAllPairs(
      std::span<const std::string> texts) const override;

  // Precomputed trigram profile for repeated scoring.
  struct Profile {
    std::vector<std::pair<uint64_t, uint32_t>> grams;  // sorted by gram
    double norm = 0.0;
    bool empty = true;
  };
  static Profile MakeProfile(std::string_view text);
  static double Cosine(const Profile& a, const Profile& b);
};

double LexicalScore(std::string_view a, std::string_view b);

// Client for the scoring service's POST /v1/score. Pairs are sent in
// batches of at most 256.
class RemoteScorer : public SimilarityScorer {
 public:
  enum class Mode { kBertScoreF1, kEmbeddingCosine };

  RemoteScorer(std::string base_url, Mode mode, int timeout_ms = 30000);

  std::string name() const override;
  absl::StatusOr<std::vector<double>> ScorePairs(
      std::span<const TextPair> pairs) const override;

  // GET /v1/health; returns the reported model id when status is "ok".
  absl::StatusOr<std::string> Health() const;

  static constexpr size_t kMaxBatch = 256;

 private:
  std::string base_url_;
  Mode mode_;
  int timeout_ms_;
};

std::string_view RemoteModeName(RemoteScorer::Mode mode);

// The first min(n, available) whitespace words joined by single spaces.
std::string FirstNWords(std::string_view text, size_t n);

// Multiset of similarity scores over all unordered pairs of a continuation
// set. Values are ordered by (i, j), i < j.
struct SimilarityDistribution {
  std::vector<double> values;
  size_t source_count = 0;
  size_t pair_count = 0;
  std::string scorer_name;
};

// Truncates each continuation to its first `n_words` words and scores all
// C(Q, 2) pairs. Requires Q >= 2.
absl::StatusOr<SimilarityDistribution> PairwiseDistribution(
    std::span<const std::string> continuations, const SimilarityScorer& scorer,
    size_t n_words);

}  // namespace wmtrace

#endif  // WMTRACE_SIMILARITY_H_
