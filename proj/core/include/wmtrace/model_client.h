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

#ifndef WMTRACE_MODEL_CLIENT_H_
#define WMTRACE_MODEL_CLIENT_H_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "wmtrace/backend.h"
#include "wmtrace/model_endpoint.h"
#include "wmtrace/rate_limiter.h"

namespace wmtrace {

struct ClientOptions {
  Clock* clock = &Clock::Real();
  std::chrono::milliseconds initial_backoff{250};
  std::chrono::milliseconds max_backoff{8000};
  // Checked before every attempt; when set, calls fail with a cancelled
  // model error.
  const std::atomic<bool>* cancel = nullptr;
};

// An endpoint bound to a backend, with rate limiting and retries. Shareable
// across threads.
class ModelClient {
 public:
  ModelClient(ModelEndpoint endpoint, std::shared_ptr<ModelBackend> backend,
              ClientOptions options = {});

  // Generated continuation only (the prompt is not echoed). Transient
  // failures are retried max_retries times with exponential backoff.
  absl::StatusOr<std::string> Complete(std::string_view prompt,
                                       const GenerationConfig& config,
                                       uint64_t draw_index = 0);

  absl::StatusOr<std::vector<TokenScore>> ScoreTokens(std::string_view text);

  const ModelEndpoint& endpoint() const { return endpoint_; }
  std::string Describe() const { return backend_->Describe(); }
  // Backend calls issued so far, including failed attempts.
  uint64_t attempts() const { return attempts_.load(); }

 private:
  template <typename T, typename Fn>
  absl::StatusOr<T> WithRetries(Fn&& call);

  ModelEndpoint endpoint_;
  std::shared_ptr<ModelBackend> backend_;
  ClientOptions options_;
  RateLimiter limiter_;
  std::atomic<uint64_t> attempts_{0};
};

}  // namespace wmtrace

#endif  // WMTRACE_MODEL_CLIENT_H_
