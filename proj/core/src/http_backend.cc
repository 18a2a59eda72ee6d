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

#include <cstdlib>

#include "absl/strings/match.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/strip.h"
#include "httplib.h"
#include "nlohmann/json.hpp"
#include "wmtrace/backend.h"
#include "string_view_compat.h"

namespace wmtrace {

using internal::Av;
namespace {

using json = nlohmann::json;

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // without trailing slash
};

absl::StatusOr<ParsedUrl> ParseBaseUrl(std::string_view url) {
  const size_t scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    return absl::InvalidArgumentError(
        absl::StrCat("base_url '", Av(url), "' lacks a scheme"));
  }
  const std::string_view scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    return absl::InvalidArgumentError(
        absl::StrCat("unsupported scheme '", Av(scheme), "'"));
  }
  const size_t path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  out.origin = std::string(url.substr(0, path_start));
  if (path_start != std::string_view::npos) {
    out.path = std::string(absl::StripSuffix(Av(url.substr(path_start)), "/"));
  }
  return out;
}

absl::Status TransportError(std::string_view message) {
  return ModelError(ModelErrorKind::kTransport, absl::StatusCode::kUnavailable,
                    message);
}

}  // namespace

HttpBackend::HttpBackend(ModelEndpoint endpoint,
                         std::chrono::milliseconds timeout)
    : endpoint_(std::move(endpoint)), timeout_(timeout) {}

std::string HttpBackend::Describe() const {
  return absl::StrCat("http:", endpoint_.base_url, "#", endpoint_.model_name);
}

absl::StatusOr<std::string> HttpBackend::Post(const std::string& path,
                                              const std::string& body) {
  absl::StatusOr<ParsedUrl> url = ParseBaseUrl(endpoint_.base_url);
  if (!url.ok()) return url.status();

  httplib::Headers headers;
  if (!endpoint_.auth_env.empty()) {
    const char* credential = std::getenv(endpoint_.auth_env.c_str());
    if (credential == nullptr || *credential == '\0') {
      return absl::FailedPreconditionError(absl::StrCat(
          "credential variable ", endpoint_.auth_env, " is not set"));
    }
    headers.emplace("Authorization", absl::StrCat("Bearer ", credential));
  }

  httplib::Client client(url->origin);
  const auto seconds =
      std::chrono::duration_cast<std::chrono::seconds>(timeout_).count();
  const auto micros =
      std::chrono::duration_cast<std::chrono::microseconds>(timeout_).count() %
      1000000;
  client.set_connection_timeout(seconds, micros);
  client.set_read_timeout(seconds, micros);
  client.set_write_timeout(seconds, micros);

  httplib::Result res =
      client.Post(url->path + path, headers, body, "application/json");
  if (!res) {
    return TransportError(absl::StrCat("request to ", url->origin, " failed: ",
                                       httplib::to_string(res.error())));
  }
  const int status = res->status;
  if (status == 429 || status >= 500) {
    return TransportError(absl::StrCat("HTTP ", status, " from ", url->origin));
  }
  if (status == 401 || status == 403) {
    return absl::PermissionDeniedError(absl::StrCat("HTTP ", status));
  }
  if (status < 200 || status >= 300) {
    return ModelError(ModelErrorKind::kProtocol,
                      absl::StatusCode::kInvalidArgument,
                      absl::StrCat("HTTP ", status, ": ", res->body.substr(0, 200)));
  }
  return res->body;
}

absl::StatusOr<std::string> HttpBackend::Complete(
    const CompletionRequest& request) {
  json body = {
      {"model", endpoint_.model_name},
      {"temperature", request.config.temperature},
      {"max_tokens", request.config.max_new_tokens},
  };
  if (!request.config.stop_sequences.empty()) {
    body["stop"] = request.config.stop_sequences;
  }
  if (request.config.seed) body["seed"] = *request.config.seed;

  std::string path;
  if (endpoint_.api == ApiStyle::kChat) {
    body["messages"] = json::array({{{"role", "user"}, {"content", request.prompt}}});
    path = "/chat/completions";
  } else {
    body["prompt"] = request.prompt;
    path = "/completions";
  }

  absl::StatusOr<std::string> raw = Post(path, body.dump());
  if (!raw.ok()) return raw.status();

  json reply = json::parse(*raw, nullptr, false);
  std::string text;
  try {
    const json& choice = reply.at("choices").at(0);
    if (endpoint_.api == ApiStyle::kChat) {
      const json& content = choice.at("message").at("content");
      if (content.is_string()) text = content.get<std::string>();
    } else {
      text = choice.at("text").get<std::string>();
    }
  } catch (const json::exception& e) {
    return ModelError(ModelErrorKind::kProtocol, absl::StatusCode::kDataLoss,
                      absl::StrCat("unexpected completion response: ", e.what()));
  }
  if (text.empty()) {
    return ModelError(ModelErrorKind::kEmptyGeneration,
                      absl::StatusCode::kFailedPrecondition,
                      "provider returned an empty generation");
  }
  return text;
}

absl::StatusOr<std::vector<TokenScore>> HttpBackend::ScoreTokens(
    const ScoringRequest& request) {
  if (endpoint_.api != ApiStyle::kCompletions || !endpoint_.supports_logprobs) {
    return ModelError(ModelErrorKind::kCapability,
                      absl::StatusCode::kUnimplemented,
                      absl::StrCat("endpoint ", endpoint_.base_url,
                                   " cannot report prompt log-likelihoods"));
  }
  if (request.text.empty()) return std::vector<TokenScore>{};

  json body = {{"model", endpoint_.model_name},
               {"prompt", request.text},
               {"max_tokens", 0},
               {"echo", true},
               {"logprobs", 0},
               {"temperature", 0.0}};
  absl::StatusOr<std::string> raw = Post("/completions", body.dump());
  if (!raw.ok()) return raw.status();

  json reply = json::parse(*raw, nullptr, false);
  std::vector<TokenScore> scores;
  try {
    const json& lp = reply.at("choices").at(0).at("logprobs");
    const json& tokens = lp.at("tokens");
    const json& logprobs = lp.at("token_logprobs");
    if (tokens.size() != logprobs.size()) {
      return ModelError(ModelErrorKind::kProtocol, absl::StatusCode::kDataLoss,
                        "tokens and token_logprobs differ in length");
    }
    for (size_t i = 0; i < tokens.size(); ++i) {
      // The first token has no conditional probability and is reported null.
      if (logprobs[i].is_null()) continue;
      scores.push_back(
          {tokens[i].get<std::string>(), logprobs[i].get<double>()});
    }
  } catch (const json::exception& e) {
    return ModelError(ModelErrorKind::kCapability,
                      absl::StatusCode::kUnimplemented,
                      absl::StrCat("response lacks echo logprobs: ", e.what()));
  }
  return scores;
}

}  // namespace wmtrace
