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

#include "wmtrace/model_endpoint.h"

#include <cmath>

#include "absl/strings/cord.h"
#include "absl/strings/str_cat.h"
#include "string_view_compat.h"

namespace wmtrace {

using internal::Av;
namespace {

constexpr std::string_view kErrorKindPayload = "wmtrace/model-error-kind";

constexpr std::string_view KindName(ModelErrorKind kind) {
  switch (kind) {
    case ModelErrorKind::kTransport: return "transport";
    case ModelErrorKind::kEmptyGeneration: return "empty_generation";
    case ModelErrorKind::kCapability: return "capability";
    case ModelErrorKind::kProtocol: return "protocol";
    case ModelErrorKind::kCancelled: return "cancelled";
  }
  return "unknown";
}

}  // namespace

std::string_view RoleName(EndpointRole role) {
  switch (role) {
    case EndpointRole::kReferenceScorer: return "reference_scorer";
    case EndpointRole::kParaphraser: return "paraphraser";
    case EndpointRole::kContinuationGenerator: return "continuation_generator";
    case EndpointRole::kSuspect: return "suspect";
    case EndpointRole::kPretrainedBaseline: return "pretrained_baseline";
  }
  return "unknown";
}

absl::StatusOr<EndpointRole> ParseRole(std::string_view name) {
  for (EndpointRole r :
       {EndpointRole::kReferenceScorer, EndpointRole::kParaphraser,
        EndpointRole::kContinuationGenerator, EndpointRole::kSuspect,
        EndpointRole::kPretrainedBaseline}) {
    if (RoleName(r) == name) return r;
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown role '", Av(name), "'"));
}

absl::Status ModelEndpoint::Validate() const {
  if (!(rate_limit > 0.0) || !std::isfinite(rate_limit)) {
    return absl::InvalidArgumentError("endpoint rate_limit must be > 0");
  }
  if (max_retries < 0) {
    return absl::InvalidArgumentError("endpoint max_retries must be >= 0");
  }
  return absl::OkStatus();
}

absl::Status GenerationConfig::Validate() const {
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    return absl::InvalidArgumentError("temperature must be >= 0");
  }
  if (max_new_tokens < 8) {
    return absl::InvalidArgumentError(
        absl::StrCat("max_new_tokens must be >= 8, got ", max_new_tokens));
  }
  return absl::OkStatus();
}

absl::StatusOr<double> MeanNll(std::span<const TokenScore> scores) {
  if (scores.empty()) {
    return absl::InvalidArgumentError("mean NLL of an empty score list");
  }
  double sum = 0.0;
  for (const TokenScore& s : scores) {
    if (!std::isfinite(s.logprob)) {
      return absl::InvalidArgumentError(
          absl::StrCat("non-finite logprob for token '", s.token_text, "'"));
    }
    sum += s.logprob;
  }
  return -sum / static_cast<double>(scores.size());
}

absl::Status ModelError(ModelErrorKind kind, absl::StatusCode code,
                        std::string_view message) {
  absl::Status status(code, Av(message));
  status.SetPayload(Av(kErrorKindPayload), absl::Cord(Av(KindName(kind))));
  return status;
}

std::optional<ModelErrorKind> GetModelErrorKind(const absl::Status& status) {
  auto payload = status.GetPayload(Av(kErrorKindPayload));
  if (!payload) return std::nullopt;
  for (ModelErrorKind k :
       {ModelErrorKind::kTransport, ModelErrorKind::kEmptyGeneration,
        ModelErrorKind::kCapability, ModelErrorKind::kProtocol,
        ModelErrorKind::kCancelled}) {
    if (*payload == Av(KindName(k))) return k;
  }
  return std::nullopt;
}

}  // namespace wmtrace
