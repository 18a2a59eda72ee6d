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


#ifndef WMTRACE_TESTS_TEST_UTIL_H_
#define WMTRACE_TESTS_TEST_UTIL_H_

#include <atomic>
#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <mutex>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "absl/status/statusor.h"
#include "httplib.h"
#include "nlohmann/json.hpp"
#include "wmtrace/backend.h"
#include "wmtrace/model_client.h"

namespace wmtrace::testing {

inline std::string DataPath(const std::string& name) {
  return std::string(WMTRACE_TEST_DATA_DIR) + "/" + name;
}

inline nlohmann::json LoadJson(const std::string& path) {
  std::ifstream in(path);
  return nlohmann::json::parse(in);
}

// Worked example: original abstract, 16 hand-written rephrasings of
// its prefix and 16 continuations with distinct openings.
struct WorkedExample {
  std::string original;
  size_t split_word_index = 0;
  std::vector<std::string> prefixes;
  std::vector<std::string> continuations;
};

inline WorkedExample LoadWorkedExample() {
  nlohmann::json j = LoadJson(DataPath("worked_example.json"));
  WorkedExample f;
  f.original = j["original"].get<std::string>();
  f.split_word_index = j["split_word_index"].get<size_t>();
  f.prefixes = j["rephrased_prefixes"].get<std::vector<std::string>>();
  f.continuations = j["continuations"].get<std::vector<std::string>>();
  return f;
}

// A fresh directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("wmtrace_test_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string File(const std::string& name) const {
    return (path_ / name).string();
  }

 private:
  std::filesystem::path path_;
};

inline std::string ReadAll(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Backend answering through caller-supplied functions; counts calls.
class FakeBackend : public ModelBackend {
 public:
  using CompleteFn =
      std::function<absl::StatusOr<std::string>(const CompletionRequest&)>;
  using ScoreFn = std::function<absl::StatusOr<std::vector<TokenScore>>(
      const ScoringRequest&)>;

  explicit FakeBackend(CompleteFn complete, ScoreFn score = nullptr)
      : complete_(std::move(complete)), score_(std::move(score)) {}

  absl::StatusOr<std::string> Complete(
      const CompletionRequest& request) override {
    ++complete_calls;
    {
      std::lock_guard<std::mutex> lock(mu_);
      prompts.push_back(request.prompt);
    }
    return complete_(request);
  }
  absl::StatusOr<std::vector<TokenScore>> ScoreTokens(
      const ScoringRequest& request) override {
    ++score_calls;
    if (!score_) return absl::UnimplementedError("no scores");
    return score_(request);
  }
  std::string Describe() const override { return "fake"; }

  std::atomic<int> complete_calls{0};
  std::atomic<int> score_calls{0};
  std::vector<std::string> prompts;

 private:
  CompleteFn complete_;
  ScoreFn score_;
  std::mutex mu_;
};

inline std::unique_ptr<ModelClient> MakeFakeClient(
    std::shared_ptr<ModelBackend> backend,
    EndpointRole role = EndpointRole::kSuspect, Clock* clock = nullptr) {
  ModelEndpoint endpoint(role);
  endpoint.model_name = "fake-model";
  endpoint.rate_limit = 1e9;
  endpoint.max_retries = 0;
  ClientOptions options;
  if (clock != nullptr) options.clock = clock;
  return std::make_unique<ModelClient>(endpoint, std::move(backend), options);
}

// httplib server on an ephemeral loopback port, run on a background thread.
class LocalServer {
 public:
  LocalServer() = default;
  ~LocalServer() { Stop(); }

  httplib::Server& server() { return server_; }

  // Binds and starts listening; returns the base URL.
  std::string Start() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
    return "http://127.0.0.1:" + std::to_string(port_);
  }

  void Stop() {
    if (thread_.joinable()) {
      server_.stop();
      thread_.join();
    }
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace wmtrace::testing

#endif  // WMTRACE_TESTS_TEST_UTIL_H_
