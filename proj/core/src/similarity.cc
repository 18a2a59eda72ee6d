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

#include "wmtrace/similarity.h"

#include <algorithm>
#include <cmath>
#include <thread>
#include <unordered_map>

#include "absl/strings/str_cat.h"
#include "absl/strings/strip.h"
#include "httplib.h"
#include "nlohmann/json.hpp"
#include "wmtrace/parallel.h"
#include "wmtrace/text.h"
#include "string_view_compat.h"

namespace wmtrace {

using internal::Av;

absl::StatusOr<double> SimilarityScorer::Score(std::string_view a,
                                               std::string_view b) const {
  const TextPair pair{a, b};
  absl::StatusOr<std::vector<double>> scores = ScorePairs({&pair, 1});
  if (!scores.ok()) return scores.status();
  return scores->front();
}

absl::StatusOr<SimilarityMatrix> SimilarityScorer::ScoreAllPairs(
    std::span<const std::string> texts) const {
  SimilarityMatrix m;
  m.n = texts.size();
  m.values.assign(m.n * m.n, 1.0);
  std::vector<TextPair> pairs;
  std::vector<std::pair<size_t, size_t>> where;
  constexpr size_t kChunk = 4096;
  auto flush = [&]() -> absl::Status {
    absl::StatusOr<std::vector<double>> scores = ScorePairs(pairs);
    if (!scores.ok()) return scores.status();
    for (size_t p = 0; p < where.size(); ++p) {
      m.values[where[p].first * m.n + where[p].second] = (*scores)[p];
      m.values[where[p].second * m.n + where[p].first] = (*scores)[p];
    }
    pairs.clear();
    where.clear();
    return absl::OkStatus();
  };
  for (size_t i = 0; i < m.n; ++i) {
    for (size_t j = i + 1; j < m.n; ++j) {
      pairs.push_back({texts[i], texts[j]});
      where.emplace_back(i, j);
      if (pairs.size() == kChunk) {
        if (absl::Status s = flush(); !s.ok()) return s;
      }
    }
  }
  if (!pairs.empty()) {
    if (absl::Status s = flush(); !s.ok()) return s;
  }
  return m;
}

// --- Lexical ----------------------------------------------------------------

LexicalScorer::Profile LexicalScorer::MakeProfile(std::string_view text) {
  Profile p;
  const std::u32string cps = DecodeUtf8(AsciiLower(NormalizeWhitespace(text)));
  if (cps.empty()) return p;
  p.empty = false;
  std::unordered_map<uint64_t, uint32_t> counts;
  if (cps.size() < 3) {
    uint64_t gram = uint64_t{1} << 63;
    for (size_t i = 0; i < cps.size(); ++i) {
      gram |= static_cast<uint64_t>(cps[i]) << (21 * (2 - i));
    }
    counts[gram] = 1;
  } else {
    for (size_t i = 0; i + 3 <= cps.size(); ++i) {
      const uint64_t gram = (static_cast<uint64_t>(cps[i]) << 42) |
                            (static_cast<uint64_t>(cps[i + 1]) << 21) |
                            static_cast<uint64_t>(cps[i + 2]);
      ++counts[gram];
    }
  }
  p.grams.assign(counts.begin(), counts.end());
  std::sort(p.grams.begin(), p.grams.end());
  double sq = 0.0;
  for (const auto& [gram, c] : p.grams) sq += static_cast<double>(c) * c;
  p.norm = std::sqrt(sq);
  return p;
}

double LexicalScorer::Cosine(const Profile& a, const Profile& b) {
  if (a.empty && b.empty) return 1.0;
  if (a.empty || b.empty) return 0.0;
  double dot = 0.0;
  auto ia = a.grams.begin();
  auto ib = b.grams.begin();
  while (ia != a.grams.end() && ib != b.grams.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      dot += static_cast<double>(ia->second) * ib->second;
      ++ia;
      ++ib;
    }
  }
  return std::clamp(dot / (a.norm * b.norm), 0.0, 1.0);
}

double LexicalScore(std::string_view a, std::string_view b) {
  const std::string na = AsciiLower(NormalizeWhitespace(a));
  const std::string nb = AsciiLower(NormalizeWhitespace(b));
  if (na == nb) return 1.0;
  return LexicalScorer::Cosine(LexicalScorer::MakeProfile(na),
                               LexicalScorer::MakeProfile(nb));
}

absl::StatusOr<std::vector<double>> LexicalScorer::ScorePairs(
    std::span<const TextPair> pairs) const {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const TextPair& p : pairs) out.push_back(LexicalScore(p.a, p.b));
  return out;
}

absl::StatusOr<SimilarityMatrix> LexicalScorer::ScoreAllPairs(
    std::span<const std::string> texts) const {
  std::vector<Profile> profiles(texts.size());
  std::vector<std::string> normalized(texts.size());
  for (size_t i = 0; i < texts.size(); ++i) {
    normalized[i] = AsciiLower(NormalizeWhitespace(texts[i]));
    profiles[i] = MakeProfile(normalized[i]);
  }
  SimilarityMatrix m;
  m.n = texts.size();
  m.values.assign(m.n * m.n, 1.0);
  ParallelFor(m.n, std::max(1u, std::thread::hardware_concurrency()),
              [&](size_t i) {
                for (size_t j = i + 1; j < m.n; ++j) {
                  m.values[i * m.n + j] =
                      normalized[i] == normalized[j]
                          ? 1.0
                          : Cosine(profiles[i], profiles[j]);
                }
              });
  for (size_t i = 0; i < m.n; ++i) {
    for (size_t j = 0; j < i; ++j) m.values[i * m.n + j] = m.values[j * m.n + i];
  }
  return m;
}

// --- Remote -----------------------------------------------------------------

std::string_view RemoteModeName(RemoteScorer::Mode mode) {
  return mode == RemoteScorer::Mode::kBertScoreF1 ? "bertscore_f1"
                                                  : "embedding_cosine";
}

RemoteScorer::RemoteScorer(std::string base_url, Mode mode, int timeout_ms)
    : base_url_(absl::StripSuffix(base_url, "/")),
      mode_(mode),
      timeout_ms_(timeout_ms) {}

std::string RemoteScorer::name() const {
  return absl::StrCat("remote:", Av(RemoteModeName(mode_)), "@", base_url_);
}

absl::StatusOr<std::vector<double>> RemoteScorer::ScorePairs(
    std::span<const TextPair> pairs) const {
  using json = nlohmann::json;
  httplib::Client client(base_url_);
  client.set_connection_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);
  client.set_read_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);

  std::vector<double> out;
  out.reserve(pairs.size());
  for (size_t start = 0; start < pairs.size(); start += kMaxBatch) {
    const size_t stop = std::min(pairs.size(), start + kMaxBatch);
    json body = {{"mode", RemoteModeName(mode_)}, {"pairs", json::array()}};
    for (size_t i = start; i < stop; ++i) {
      body["pairs"].push_back(
          {{"a", std::string(pairs[i].a)}, {"b", std::string(pairs[i].b)}});
    }
    httplib::Result res =
        client.Post("/v1/score", body.dump(), "application/json");
    if (!res) {
      return absl::UnavailableError(absl::StrCat(
          "scoring service unreachable: ", httplib::to_string(res.error())));
    }
    if (res->status != 200) {
      return absl::UnavailableError(absl::StrCat(
          "scoring service HTTP ", res->status, ": ", res->body.substr(0, 200)));
    }
    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("scores") ||
        !reply["scores"].is_array() ||
        reply["scores"].size() != stop - start) {
      return absl::DataLossError("scoring service returned a malformed batch");
    }
    for (const json& v : reply["scores"]) {
      if (!v.is_number()) {
        return absl::DataLossError("non-numeric score from scoring service");
      }
      const double score = v.get<double>();
      if (!(score >= -1.0 - 1e-9 && score <= 1.0 + 1e-9)) {
        return absl::DataLossError(
            absl::StrCat("score ", score, " outside [-1, 1]"));
      }
      out.push_back(std::clamp(score, -1.0, 1.0));
    }
  }
  return out;
}

absl::StatusOr<std::string> RemoteScorer::Health() const {
  httplib::Client client(base_url_);
  client.set_connection_timeout(timeout_ms_ / 1000, (timeout_ms_ % 1000) * 1000);
  httplib::Result res = client.Get("/v1/health");
  if (!res) {
    return absl::UnavailableError(absl::StrCat(
        "scoring service unreachable: ", httplib::to_string(res.error())));
  }
  nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
  if (reply.is_discarded() || reply.value("status", "") != "ok") {
    return absl::UnavailableError(
        absl::StrCat("scoring service not ready: ", res->body.substr(0, 200)));
  }
  return reply.value("model_id", std::string());
}

// --- Distributions ----------------------------------------------------------

std::string FirstNWords(std::string_view text, size_t n) {
  std::vector<std::string_view> words = SplitWords(text);
  if (words.size() > n) words.resize(n);
  return JoinWords(words);
}

absl::StatusOr<SimilarityDistribution> PairwiseDistribution(
    std::span<const std::string> continuations, const SimilarityScorer& scorer,
    size_t n_words) {
  const size_t q = continuations.size();
  if (q < 2) {
    return absl::InvalidArgumentError(absl::StrCat(
        "pairwise distribution needs at least 2 continuations, got ", q));
  }
  if (n_words == 0) return absl::InvalidArgumentError("n_words must be >= 1");
  std::vector<std::string> heads;
  heads.reserve(q);
  for (const std::string& c : continuations) {
    heads.push_back(FirstNWords(c, n_words));
  }
  std::vector<TextPair> pairs;
  pairs.reserve(q * (q - 1) / 2);
  for (size_t i = 0; i < q; ++i) {
    for (size_t j = i + 1; j < q; ++j) pairs.push_back({heads[i], heads[j]});
  }
  absl::StatusOr<std::vector<double>> scores = scorer.ScorePairs(pairs);
  if (!scores.ok()) return scores.status();
  if (scores->size() != pairs.size()) {
    return absl::InternalError("scorer returned the wrong number of scores");
  }
  SimilarityDistribution d;
  d.values = *std::move(scores);
  d.source_count = q;
  d.pair_count = d.values.size();
  d.scorer_name = scorer.name();
  return d;
}

}  // namespace wmtrace
