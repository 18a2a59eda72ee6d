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

#include <openssl/evp.h>

#include <array>
#include <cmath>
#include <filesystem>

#include "absl/strings/escaping.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "nlohmann/json.hpp"
#include "wmtrace/backend.h"
#include "wmtrace/file_io.h"
#include "wmtrace/text.h"
#include "string_view_compat.h"

namespace wmtrace {

using internal::Av;
namespace {

using json = nlohmann::json;

std::string Sha256Hex(std::string_view data) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), digest.data(), &len, EVP_sha256(),
             nullptr);
  return absl::BytesToHexString(absl::string_view(
      reinterpret_cast<const char*>(digest.data()), len));
}

}  // namespace

std::string RequestHash(const CompletionRequest& request) {
  json j = {
      {"kind", "complete"},
      {"role", RoleName(request.role)},
      {"model", request.model},
      {"prompt", request.prompt},
      {"temperature", request.config.temperature},
      {"max_new_tokens", request.config.max_new_tokens},
      {"stop", request.config.stop_sequences},
      {"seed", request.config.seed ? json(*request.config.seed) : json()},
      {"draw", request.draw_index},
  };
  return Sha256Hex(j.dump());
}

std::string RequestHash(const ScoringRequest& request) {
  json j = {
      {"kind", "score"},
      {"role", RoleName(request.role)},
      {"model", request.model},
      {"text", request.text},
  };
  return Sha256Hex(j.dump());
}

std::string SerializeTranscriptRecord(const TranscriptRecord& record) {
  nlohmann::ordered_json j = {{"request_hash", record.request_hash},
                              {"response_text", record.response_text}};
  if (record.token_scores) {
    nlohmann::ordered_json scores = nlohmann::ordered_json::array();
    for (const TokenScore& s : *record.token_scores) {
      scores.push_back({{"token", s.token_text}, {"logprob", s.logprob}});
    }
    j["token_scores"] = std::move(scores);
  }
  return j.dump();
}

TranscriptStore::TranscriptStore(TranscriptStore&& other) noexcept
    : path_(std::move(other.path_)), records_(std::move(other.records_)) {}

absl::Status TranscriptStore::Parse(std::string_view contents) {
  size_t line_no = 0;
  for (absl::string_view piece : absl::StrSplit(Av(contents), '\n')) {
    std::string_view line = internal::Sv(piece);
    ++line_no;
    if (TrimWhitespace(line).empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      return absl::InvalidArgumentError(
          absl::StrCat(path_, ":", line_no, ": not a JSON object"));
    }
    TranscriptRecord rec;
    try {
      rec.request_hash = j.at("request_hash").get<std::string>();
      rec.response_text = j.value("response_text", std::string());
      if (j.contains("token_scores") && !j["token_scores"].is_null()) {
        std::vector<TokenScore> scores;
        for (const json& s : j["token_scores"]) {
          scores.push_back(
              {s.at("token").get<std::string>(), s.at("logprob").get<double>()});
        }
        rec.token_scores = std::move(scores);
      }
    } catch (const json::exception& e) {
      return absl::InvalidArgumentError(
          absl::StrCat(path_, ":", line_no, ": ", e.what()));
    }
    // Later records win, so re-recording a request overrides it.
    records_[rec.request_hash] = std::move(rec);
  }
  return absl::OkStatus();
}

absl::StatusOr<TranscriptStore> TranscriptStore::Load(const std::string& path) {
  absl::StatusOr<std::string> contents = ReadFile(path);
  if (!contents.ok()) return contents.status();
  TranscriptStore store(path);
  if (absl::Status s = store.Parse(*contents); !s.ok()) return s;
  return store;
}

absl::StatusOr<TranscriptStore> TranscriptStore::OpenOrCreate(
    const std::string& path) {
  if (!std::filesystem::exists(path)) return TranscriptStore(path);
  return Load(path);
}

std::optional<TranscriptRecord> TranscriptStore::Find(
    const std::string& hash) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = records_.find(hash);
  if (it == records_.end()) return std::nullopt;
  return it->second;
}

absl::Status TranscriptStore::Append(const TranscriptRecord& record) {
  std::lock_guard<std::mutex> lock(mu_);
  if (absl::Status s =
          AppendToFile(path_, SerializeTranscriptRecord(record) + "\n");
      !s.ok()) {
    return s;
  }
  records_[record.request_hash] = record;
  return absl::OkStatus();
}

size_t TranscriptStore::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return records_.size();
}

}  // namespace wmtrace
