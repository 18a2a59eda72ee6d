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

#ifndef WMTRACE_RUN_CONFIG_H_
#define WMTRACE_RUN_CONFIG_H_

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "wmtrace/corpus.h"
#include "wmtrace/model_client.h"
#include "wmtrace/simharness.h"
#include "wmtrace/similarity.h"
#include "wmtrace/stealth_audit.h"
#include "wmtrace/verification.h"

namespace wmtrace {

enum class BackendKind { kHttp, kReplay, kRecord, kSimulated };

// A simulator standing in for a role. When `manifest` is set, the trigger,
// divergent templates and first base template come from it.
struct SimulatorSpec {
  SimKind kind = SimKind::kStable;
  uint64_t seed = 0;
  size_t k_strength = 16;
  double lexical_noise_rate = 0.05;
  size_t base_templates = 4;
  std::string manifest;
};

struct EndpointBinding {
  explicit EndpointBinding(EndpointRole role) : endpoint(role) {}

  ModelEndpoint endpoint;
  BackendKind backend = BackendKind::kHttp;
  std::string transcript;  // replay and record backends
  SimulatorSpec simulator;
  int timeout_ms = 60000;
};

struct RunConfig {
  std::map<EndpointRole, EndpointBinding> endpoints;
  WatermarkConfig watermark;
  VerificationConfig verification;
  AuditConfig audit;
  size_t parallelism = 8;
  uint64_t master_seed = 0;
  // "lexical", or "remote:<bertscore_f1|embedding_cosine>@<base url>".
  std::string scorer = "lexical";

  absl::Status Validate() const;
};

// Defaults, then WMTRACE_* environment variables, then the config file when
// `path` is non-empty. Command-line flags are applied by the caller last.
absl::StatusOr<RunConfig> LoadRunConfig(const std::string& path);
absl::Status ApplyConfigJson(const nlohmann::json& j, RunConfig& config);
absl::Status ApplyEnvironment(RunConfig& config);

nlohmann::ordered_json RunConfigToJson(const RunConfig& config);

// Builds the client for `role`. Fails when the role has no binding.
absl::StatusOr<std::unique_ptr<ModelClient>> MakeClient(
    const RunConfig& config, EndpointRole role, ClientOptions options = {});

absl::StatusOr<std::unique_ptr<SimilarityScorer>> MakeScorer(
    const std::string& spec);

}  // namespace wmtrace

#endif  // WMTRACE_RUN_CONFIG_H_
