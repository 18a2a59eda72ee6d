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

#include "wmtrace/model_client.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_cat.h"

namespace wmtrace {

ModelClient::ModelClient(ModelEndpoint endpoint,
                         std::shared_ptr<ModelBackend> backend,
                         ClientOptions options)
    : endpoint_(std::move(endpoint)),
      backend_(std::move(backend)),
      options_(options),
      limiter_(endpoint_.rate_limit > 0 ? endpoint_.rate_limit : 1.0,
               *options_.clock) {}

template <typename T, typename Fn>
absl::StatusOr<T> ModelClient::WithRetries(Fn&& call) {
  const int attempts = 1 + std::max(0, endpoint_.max_retries);
  auto backoff = std::chrono::duration_cast<Clock::Duration>(
      options_.initial_backoff);
  absl::Status last;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (options_.cancel != nullptr && options_.cancel->load()) {
      return ModelError(ModelErrorKind::kCancelled,
                        absl::StatusCode::kCancelled, "request cancelled");
    }
    if (attempt > 0) {
      options_.clock->SleepFor(backoff);
      backoff = std::min<Clock::Duration>(
          backoff * 2, std::chrono::duration_cast<Clock::Duration>(
                           options_.max_backoff));
    }
    limiter_.Acquire();
    ++attempts_;
    absl::StatusOr<T> result = call();
    if (result.ok()) return result;
    last = result.status();
    if (GetModelErrorKind(last) != ModelErrorKind::kTransport) return last;
  }
  return ModelError(ModelErrorKind::kTransport, absl::StatusCode::kUnavailable,
                    absl::StrCat("gave up after ", attempts,
                                 " attempts: ", last.message()));
}

absl::StatusOr<std::string> ModelClient::Complete(
    std::string_view prompt, const GenerationConfig& config,
    uint64_t draw_index) {
  if (prompt.empty()) return absl::InvalidArgumentError("empty prompt");
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  CompletionRequest request{endpoint_.role(), endpoint_.model_name,
                            std::string(prompt), config, draw_index};
  absl::StatusOr<std::string> text = WithRetries<std::string>(
      [&] { return backend_->Complete(request); });
  if (text.ok() && text->empty()) {
    return ModelError(ModelErrorKind::kEmptyGeneration,
                      absl::StatusCode::kFailedPrecondition,
                      "model returned an empty generation");
  }
  return text;
}

absl::StatusOr<std::vector<TokenScore>> ModelClient::ScoreTokens(
    std::string_view text) {
  if (text.empty()) return std::vector<TokenScore>{};
  ScoringRequest request{endpoint_.role(), endpoint_.model_name,
                         std::string(text)};
  absl::StatusOr<std::vector<TokenScore>> scores =
      WithRetries<std::vector<TokenScore>>(
          [&] { return backend_->ScoreTokens(request); });
  if (!scores.ok()) return scores;
  for (const TokenScore& s : *scores) {
    if (!std::isfinite(s.logprob) || s.logprob > 0.0) {
      return ModelError(
          ModelErrorKind::kProtocol, absl::StatusCode::kDataLoss,
          absl::StrCat("invalid logprob ", s.logprob, " for '", s.token_text,
                       "'"));
    }
  }
  return scores;
}

}  // namespace wmtrace
