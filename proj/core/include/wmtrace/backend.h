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

#ifndef WMTRACE_BACKEND_H_
#define WMTRACE_BACKEND_H_

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "wmtrace/model_endpoint.h"

namespace wmtrace {

// One generation request. `draw_index` distinguishes repeated independent
// samples of the same prompt so that record/replay keys stay unique.
struct CompletionRequest {
  EndpointRole role = EndpointRole::kSuspect;
  std::string model;
  std::string prompt;
  GenerationConfig config;
  uint64_t draw_index = 0;
};

struct ScoringRequest {
  EndpointRole role = EndpointRole::kReferenceScorer;
  std::string model;
  std::string text;
};

// Hex SHA-256 over a canonical JSON rendering of the request.
std::string RequestHash(const CompletionRequest& request);
std::string RequestHash(const ScoringRequest& request);

// Where requests actually go: a live HTTP API, a transcript, or an in-process
// simulator. Implementations must tolerate concurrent calls.
class ModelBackend {
 public:
  virtual ~ModelBackend() = default;
  virtual absl::StatusOr<std::string> Complete(
      const CompletionRequest& request) = 0;
  virtual absl::StatusOr<std::vector<TokenScore>> ScoreTokens(
      const ScoringRequest& request) = 0;
  virtual std::string Describe() const = 0;
};

struct TranscriptRecord {
  std::string request_hash;
  std::string response_text;
  std::optional<std::vector<TokenScore>> token_scores;
};

// Line-delimited transcript of recorded responses keyed by request hash.
class TranscriptStore {
 public:
  static absl::StatusOr<TranscriptStore> Load(const std::string& path);
  // Opens for recording; a missing file starts empty.
  static absl::StatusOr<TranscriptStore> OpenOrCreate(const std::string& path);

  TranscriptStore(TranscriptStore&& other) noexcept;

  std::optional<TranscriptRecord> Find(const std::string& hash) const;
  // Appends to the in-memory index and to the backing file.
  absl::Status Append(const TranscriptRecord& record);
  size_t size() const;
  const std::string& path() const { return path_; }

 private:
  explicit TranscriptStore(std::string path) : path_(std::move(path)) {}
  absl::Status Parse(std::string_view contents);

  std::string path_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, TranscriptRecord> records_;
};

std::string SerializeTranscriptRecord(const TranscriptRecord& record);

class ReplayBackend : public ModelBackend {
 public:
  explicit ReplayBackend(std::shared_ptr<TranscriptStore> store)
      : store_(std::move(store)) {}

  absl::StatusOr<std::string> Complete(const CompletionRequest& request) override;
  absl::StatusOr<std::vector<TokenScore>> ScoreTokens(
      const ScoringRequest& request) override;
  std::string Describe() const override;

 private:
  std::shared_ptr<TranscriptStore> store_;
};

// Forwards to `inner` and records each successful response.
class RecordingBackend : public ModelBackend {
 public:
  RecordingBackend(std::shared_ptr<ModelBackend> inner,
                   std::shared_ptr<TranscriptStore> store)
      : inner_(std::move(inner)), store_(std::move(store)) {}

  absl::StatusOr<std::string> Complete(const CompletionRequest& request) override;
  absl::StatusOr<std::vector<TokenScore>> ScoreTokens(
      const ScoringRequest& request) override;
  std::string Describe() const override;

 private:
  std::shared_ptr<ModelBackend> inner_;
  std::shared_ptr<TranscriptStore> store_;
};

// OpenAI-compatible HTTP(S) client. `base_url` includes any version path,
// e.g. "https://api.example.com/v1"; requests go to
// base_url + "/completions" or base_url + "/chat/completions".
class HttpBackend : public ModelBackend {
 public:
  explicit HttpBackend(ModelEndpoint endpoint,
                       std::chrono::milliseconds timeout =
                           std::chrono::milliseconds(60000));

  absl::StatusOr<std::string> Complete(const CompletionRequest& request) override;
  absl::StatusOr<std::vector<TokenScore>> ScoreTokens(
      const ScoringRequest& request) override;
  std::string Describe() const override;

 private:
  absl::StatusOr<std::string> Post(const std::string& path,
                                   const std::string& body);

  ModelEndpoint endpoint_;
  std::chrono::milliseconds timeout_;
};

}  // namespace wmtrace

#endif  // WMTRACE_BACKEND_H_
