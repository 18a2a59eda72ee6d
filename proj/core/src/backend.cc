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

#include "absl/strings/str_cat.h"
#include "wmtrace/backend.h"
#include "string_view_compat.h"

namespace wmtrace {

using internal::Av;

absl::StatusOr<std::string> ReplayBackend::Complete(
    const CompletionRequest& request) {
  const std::string hash = RequestHash(request);
  std::optional<TranscriptRecord> rec = store_->Find(hash);
  if (!rec) {
    return ModelError(ModelErrorKind::kProtocol, absl::StatusCode::kNotFound,
                      absl::StrCat("no transcript entry for request ", hash,
                                   " (role ", Av(RoleName(request.role)),
                                   ", draw ", request.draw_index, ")"));
  }
  return rec->response_text;
}

absl::StatusOr<std::vector<TokenScore>> ReplayBackend::ScoreTokens(
    const ScoringRequest& request) {
  const std::string hash = RequestHash(request);
  std::optional<TranscriptRecord> rec = store_->Find(hash);
  if (!rec) {
    return ModelError(ModelErrorKind::kProtocol, absl::StatusCode::kNotFound,
                      absl::StrCat("no transcript entry for scoring request ",
                                   hash));
  }
  if (!rec->token_scores) {
    return ModelError(ModelErrorKind::kCapability,
                      absl::StatusCode::kUnimplemented,
                      "transcript entry carries no token scores");
  }
  return *rec->token_scores;
}

std::string ReplayBackend::Describe() const {
  return absl::StrCat("replay:", store_->path());
}

absl::StatusOr<std::string> RecordingBackend::Complete(
    const CompletionRequest& request) {
  absl::StatusOr<std::string> text = inner_->Complete(request);
  if (!text.ok()) return text;
  if (absl::Status s = store_->Append({RequestHash(request), *text, {}});
      !s.ok()) {
    return s;
  }
  return text;
}

absl::StatusOr<std::vector<TokenScore>> RecordingBackend::ScoreTokens(
    const ScoringRequest& request) {
  absl::StatusOr<std::vector<TokenScore>> scores = inner_->ScoreTokens(request);
  if (!scores.ok()) return scores;
  if (absl::Status s = store_->Append({RequestHash(request), "", *scores});
      !s.ok()) {
    return s;
  }
  return scores;
}

std::string RecordingBackend::Describe() const {
  return absl::StrCat("record:", store_->path(), "<-", inner_->Describe());
}

}  // namespace wmtrace
