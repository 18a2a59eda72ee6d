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

#ifndef WMTRACE_MODEL_ENDPOINT_H_
#define WMTRACE_MODEL_ENDPOINT_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace wmtrace {

enum class EndpointRole {
  kReferenceScorer,
  kParaphraser,
  kContinuationGenerator,
  kSuspect,
  kPretrainedBaseline,
};

std::string_view RoleName(EndpointRole role);
absl::StatusOr<EndpointRole> ParseRole(std::string_view name);

enum class ApiStyle { kCompletions, kChat };

// Black-box model API configuration. The role is fixed at construction.
class ModelEndpoint {
 public:
  explicit ModelEndpoint(EndpointRole role) : role_(role) {}

  EndpointRole role() const { return role_; }

  std::string base_url;
  std::string model_name;
  // Name of the environment variable holding the bearer credential. Empty
  // means no Authorization header.
  std::string auth_env;
  double rate_limit = 5.0;  // requests per second
  int max_retries = 3;
  ApiStyle api = ApiStyle::kCompletions;
  bool supports_logprobs = true;

  absl::Status Validate() const;

 private:
  EndpointRole role_;
};

struct GenerationConfig {
  double temperature = 1.0;
  int max_new_tokens = 48;
  std::vector<std::string> stop_sequences;
  std::optional<int64_t> seed;

  absl::Status Validate() const;
};

struct TokenScore {
  std::string token_text;
  double logprob = 0.0;  // natural log, <= 0

  friend bool operator==(const TokenScore&, const TokenScore&) = default;
};

// -(1/N) * sum(logprob), in nats per token.
absl::StatusOr<double> MeanNll(std::span<const TokenScore> scores);

// Error taxonomy carried as a status payload so callers can branch on the
// failure kind without parsing messages.
enum class ModelErrorKind {
  kTransport,
  kEmptyGeneration,
  kCapability,
  kProtocol,
  kCancelled,
};

absl::Status ModelError(ModelErrorKind kind, absl::StatusCode code,
                        std::string_view message);
std::optional<ModelErrorKind> GetModelErrorKind(const absl::Status& status);

}  // namespace wmtrace

#endif  // WMTRACE_MODEL_ENDPOINT_H_
