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

#include "wmtrace/run_config.h"

#include <cstdlib>
#include <set>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "wmtrace/file_io.h"
#include "wmtrace/synthetic_corpus.h"
#include "string_view_compat.h"

namespace wmtrace {

using internal::Av;
using json = nlohmann::json;

namespace {

absl::Status CheckKeys(const json& j, std::string_view where,
                       std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) {
    return absl::InvalidArgumentError(
        absl::StrCat("config: '", Av(where), "' must be an object"));
  }
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      return absl::InvalidArgumentError(
          absl::StrCat("config: unknown key '", key, "' in ", Av(where)));
    }
  }
  return absl::OkStatus();
}

template <typename T>
void Read(const json& j, std::string_view key, T& out) {
  auto it = j.find(std::string(key));
  if (it != j.end()) out = it->get<T>();
}

absl::StatusOr<BackendKind> ParseBackend(std::string_view s) {
  if (s == "http") return BackendKind::kHttp;
  if (s == "replay") return BackendKind::kReplay;
  if (s == "record") return BackendKind::kRecord;
  if (s == "simulated") return BackendKind::kSimulated;
  return absl::InvalidArgumentError(
      absl::StrCat("config: unknown backend '", Av(s), "'"));
}

std::string_view BackendName(BackendKind k) {
  switch (k) {
    case BackendKind::kHttp:
      return "http";
    case BackendKind::kReplay:
      return "replay";
    case BackendKind::kRecord:
      return "record";
    case BackendKind::kSimulated:
      return "simulated";
  }
  return "http";
}

absl::Status ApplyEndpoint(const json& j, EndpointBinding& b) {
  if (absl::Status s = CheckKeys(
          j, "endpoint",
          {"base_url", "model", "auth_env", "rate_limit", "max_retries", "api",
           "supports_logprobs", "backend", "transcript", "timeout_ms",
           "simulator"});
      !s.ok()) {
    return s;
  }
  ModelEndpoint& e = b.endpoint;
  Read(j, "base_url", e.base_url);
  Read(j, "model", e.model_name);
  Read(j, "auth_env", e.auth_env);
  Read(j, "rate_limit", e.rate_limit);
  Read(j, "max_retries", e.max_retries);
  Read(j, "supports_logprobs", e.supports_logprobs);
  Read(j, "transcript", b.transcript);
  Read(j, "timeout_ms", b.timeout_ms);
  if (j.contains("api")) {
    const std::string api = j["api"].get<std::string>();
    if (api == "completions") {
      e.api = ApiStyle::kCompletions;
    } else if (api == "chat") {
      e.api = ApiStyle::kChat;
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("config: unknown api style '", api, "'"));
    }
  }
  if (j.contains("backend")) {
    absl::StatusOr<BackendKind> k =
        ParseBackend(j["backend"].get<std::string>());
    if (!k.ok()) return k.status();
    b.backend = *k;
  }
  if (j.contains("simulator")) {
    const json& s = j["simulator"];
    if (absl::Status st = CheckKeys(s, "simulator",
                                    {"kind", "seed", "k_strength", "noise",
                                     "base_templates", "manifest"});
        !st.ok()) {
      return st;
    }
    SimulatorSpec& spec = b.simulator;
    if (s.contains("kind")) {
      const std::string kind = s["kind"].get<std::string>();
      if (kind == "stable") {
        spec.kind = SimKind::kStable;
      } else if (kind == "confused") {
        spec.kind = SimKind::kConfused;
      } else {
        return absl::InvalidArgumentError(
            absl::StrCat("config: unknown simulator kind '", kind, "'"));
      }
    }
    Read(s, "seed", spec.seed);
    Read(s, "k_strength", spec.k_strength);
    Read(s, "noise", spec.lexical_noise_rate);
    Read(s, "base_templates", spec.base_templates);
    Read(s, "manifest", spec.manifest);
  }
  return absl::OkStatus();
}

}  // namespace

absl::Status RunConfig::Validate() const {
  if (parallelism < 1) return absl::InvalidArgumentError("parallelism must be >= 1");
  if (absl::Status s = watermark.Validate(); !s.ok()) return s;
  if (absl::Status s = verification.Validate(); !s.ok()) return s;
  if (absl::Status s = audit.Validate(); !s.ok()) return s;
  for (const auto& [role, b] : endpoints) {
    if (absl::Status s = b.endpoint.Validate(); !s.ok()) return s;
    if ((b.backend == BackendKind::kReplay ||
         b.backend == BackendKind::kRecord) &&
        b.transcript.empty()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "endpoint ", Av(RoleName(role)), " needs a transcript path"));
    }
    if ((b.backend == BackendKind::kHttp ||
         b.backend == BackendKind::kRecord) &&
        b.endpoint.base_url.empty()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "endpoint ", Av(RoleName(role)), " needs a base_url"));
    }
  }
  return absl::OkStatus();
}

absl::Status ApplyEnvironment(RunConfig& config) {
  if (const char* v = std::getenv("WMTRACE_PARALLELISM"); v != nullptr) {
    if (!absl::SimpleAtoi(v, &config.parallelism) || config.parallelism < 1) {
      return absl::InvalidArgumentError("WMTRACE_PARALLELISM must be >= 1");
    }
  }
  if (const char* v = std::getenv("WMTRACE_MASTER_SEED"); v != nullptr) {
    if (!absl::SimpleAtoi(v, &config.master_seed)) {
      return absl::InvalidArgumentError("WMTRACE_MASTER_SEED must be an integer");
    }
  }
  if (const char* v = std::getenv("WMTRACE_SCORER"); v != nullptr && *v) {
    config.scorer = v;
  }
  return absl::OkStatus();
}

absl::Status ApplyConfigJson(const json& j, RunConfig& config) {
  try {
    if (absl::Status s =
            CheckKeys(j, "config",
                      {"schema_version", "endpoints", "watermark",
                       "verification", "audit", "parallelism", "master_seed",
                       "scorer"});
        !s.ok()) {
      return s;
    }
    if (j.value("schema_version", 1) != 1) {
      return absl::InvalidArgumentError("config: unsupported schema_version");
    }
    Read(j, "parallelism", config.parallelism);
    Read(j, "master_seed", config.master_seed);
    Read(j, "scorer", config.scorer);
    if (j.contains("endpoints")) {
      for (const auto& [name, ej] : j["endpoints"].items()) {
        absl::StatusOr<EndpointRole> role = ParseRole(name);
        if (!role.ok()) return role.status();
        auto it = config.endpoints.try_emplace(*role, *role).first;
        if (absl::Status s = ApplyEndpoint(ej, it->second); !s.ok()) return s;
      }
    }
    if (j.contains("watermark")) {
      const json& w = j["watermark"];
      if (absl::Status s = CheckKeys(w, "watermark",
                                     {"k", "tau", "split_fraction",
                                      "boundary_backoff_words"});
          !s.ok()) {
        return s;
      }
      Read(w, "k", config.watermark.k);
      Read(w, "tau", config.watermark.tau);
      Read(w, "split_fraction", config.watermark.split_fraction);
      Read(w, "boundary_backoff_words", config.watermark.boundary_backoff_words);
    }
    if (j.contains("verification")) {
      const json& v = j["verification"];
      if (absl::Status s = CheckKeys(v, "verification",
                                     {"Q", "n_words", "temperature",
                                      "max_new_tokens", "query_variant"});
          !s.ok()) {
        return s;
      }
      Read(v, "Q", config.verification.q);
      Read(v, "n_words", config.verification.n_words);
      Read(v, "temperature", config.verification.generation.temperature);
      Read(v, "max_new_tokens", config.verification.generation.max_new_tokens);
      if (v.contains("query_variant")) {
        config.verification.query_variant = v["query_variant"].get<size_t>();
      }
    }
    if (j.contains("audit")) {
      const json& a = j["audit"];
      if (absl::Status s = CheckKeys(a, "audit",
                                     {"ngram_n", "cr_window_words",
                                      "cr_ratio_margin", "knn_k",
                                      "density_z_cut"});
          !s.ok()) {
        return s;
      }
      Read(a, "ngram_n", config.audit.ngram_n);
      Read(a, "cr_window_words", config.audit.cr_window_words);
      Read(a, "cr_ratio_margin", config.audit.cr_ratio_margin);
      Read(a, "knn_k", config.audit.knn_k);
      Read(a, "density_z_cut", config.audit.density_z_cut);
    }
  } catch (const json::exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("config: ", e.what()));
  }
  return absl::OkStatus();
}

absl::StatusOr<RunConfig> LoadRunConfig(const std::string& path) {
  RunConfig config;
  if (absl::Status s = ApplyEnvironment(config); !s.ok()) return s;
  if (!path.empty()) {
    absl::StatusOr<std::string> text = ReadFile(path);
    if (!text.ok()) return text.status();
    json j = json::parse(*text, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      return absl::InvalidArgumentError(
          absl::StrCat("config ", path, " is not valid JSON"));
    }
    if (absl::Status s = ApplyConfigJson(j, config); !s.ok()) return s;
  }
  return config;
}

nlohmann::ordered_json RunConfigToJson(const RunConfig& c) {
  nlohmann::ordered_json eps = nlohmann::ordered_json::object();
  for (const auto& [role, b] : c.endpoints) {
    // Only the variable name is written, never its value.
    nlohmann::ordered_json e = {
        {"base_url", b.endpoint.base_url},
        {"model", b.endpoint.model_name},
        {"auth_env", b.endpoint.auth_env},
        {"rate_limit", b.endpoint.rate_limit},
        {"max_retries", b.endpoint.max_retries},
        {"api", b.endpoint.api == ApiStyle::kChat ? "chat" : "completions"},
        {"supports_logprobs", b.endpoint.supports_logprobs},
        {"backend", BackendName(b.backend)},
        {"transcript", b.transcript},
        {"timeout_ms", b.timeout_ms}};
    if (b.backend == BackendKind::kSimulated) {
      e["simulator"] = {
          {"kind", b.simulator.kind == SimKind::kConfused ? "confused" : "stable"},
          {"seed", b.simulator.seed},
          {"k_strength", b.simulator.k_strength},
          {"noise", b.simulator.lexical_noise_rate},
          {"base_templates", b.simulator.base_templates},
          {"manifest", b.simulator.manifest}};
    }
    eps[std::string(RoleName(role))] = e;
  }
  // Same keys the config file accepts, so the output loads back.
  nlohmann::ordered_json verification = {
      {"Q", c.verification.q},
      {"n_words", c.verification.n_words},
      {"temperature", c.verification.generation.temperature},
      {"max_new_tokens", c.verification.generation.max_new_tokens}};
  if (c.verification.query_variant) {
    verification["query_variant"] = *c.verification.query_variant;
  }
  return {{"schema_version", 1},
          {"parallelism", c.parallelism},
          {"master_seed", c.master_seed},
          {"scorer", c.scorer},
          {"endpoints", eps},
          {"watermark",
           {{"k", c.watermark.k},
            {"tau", c.watermark.tau},
            {"split_fraction", c.watermark.split_fraction},
            {"boundary_backoff_words", c.watermark.boundary_backoff_words}}},
          {"verification", verification},
          {"audit",
           {{"ngram_n", c.audit.ngram_n},
            {"cr_window_words", c.audit.cr_window_words},
            {"cr_ratio_margin", c.audit.cr_ratio_margin},
            {"knn_k", c.audit.knn_k},
            {"density_z_cut", c.audit.density_z_cut}}}};
}

namespace {

absl::StatusOr<SimulatedModel> BuildSimulator(const SimulatorSpec& spec) {
  SimulatedModel m;
  m.kind = spec.kind;
  m.seed = spec.seed;
  m.k_strength = spec.k_strength;
  m.lexical_noise_rate = spec.lexical_noise_rate;
  if (!spec.manifest.empty()) {
    absl::StatusOr<WatermarkManifest> manifest = LoadManifest(spec.manifest);
    if (!manifest.ok()) return manifest.status();
    m.trigger_prefixes = {manifest->split.prefix};
    for (const VariantPair& v : manifest->variants) {
      m.divergent_templates.push_back(v.new_continuation);
    }
    m.base_templates = {manifest->split.continuation};
  } else {
    SimScenario s = MakeScenario(spec.seed, spec.k_strength, 1);
    m.trigger_prefixes = {s.prefix};
    m.divergent_templates = s.divergent_templates;
    m.base_templates = s.base_templates;
  }
  if (spec.base_templates > 1) {
    std::vector<std::string> extra =
        DivergentContinuations(spec.base_templates - 1, spec.seed ^ 0xBA5Eu);
    m.base_templates.insert(m.base_templates.end(), extra.begin(), extra.end());
  }
  if (absl::Status s = m.Validate(); !s.ok()) return s;
  return m;
}

}  // namespace

absl::StatusOr<std::unique_ptr<ModelClient>> MakeClient(
    const RunConfig& config, EndpointRole role, ClientOptions options) {
  auto it = config.endpoints.find(role);
  if (it == config.endpoints.end()) {
    return absl::FailedPreconditionError(absl::StrCat(
        "no endpoint configured for role ", Av(RoleName(role))));
  }
  const EndpointBinding& b = it->second;
  std::shared_ptr<ModelBackend> backend;
  switch (b.backend) {
    case BackendKind::kHttp:
      backend = std::make_shared<HttpBackend>(
          b.endpoint, std::chrono::milliseconds(b.timeout_ms));
      break;
    case BackendKind::kReplay: {
      absl::StatusOr<TranscriptStore> store = TranscriptStore::Load(b.transcript);
      if (!store.ok()) return store.status();
      backend = std::make_shared<ReplayBackend>(
          std::make_shared<TranscriptStore>(*std::move(store)));
      break;
    }
    case BackendKind::kRecord: {
      absl::StatusOr<TranscriptStore> store =
          TranscriptStore::OpenOrCreate(b.transcript);
      if (!store.ok()) return store.status();
      backend = std::make_shared<RecordingBackend>(
          std::make_shared<HttpBackend>(b.endpoint,
                                        std::chrono::milliseconds(b.timeout_ms)),
          std::make_shared<TranscriptStore>(*std::move(store)));
      break;
    }
    case BackendKind::kSimulated: {
      absl::StatusOr<SimulatedModel> m = BuildSimulator(b.simulator);
      if (!m.ok()) return m.status();
      backend = std::make_shared<SimulatedBackend>(*std::move(m));
      break;
    }
  }
  return std::make_unique<ModelClient>(b.endpoint, std::move(backend), options);
}

absl::StatusOr<std::unique_ptr<SimilarityScorer>> MakeScorer(
    const std::string& spec) {
  if (spec == "lexical") return std::make_unique<LexicalScorer>();
  constexpr std::string_view kRemote = "remote:";
  if (spec.rfind(kRemote, 0) == 0) {
    const size_t at = spec.find('@');
    if (at == std::string::npos) {
      return absl::InvalidArgumentError(
          "remote scorer spec must be remote:<mode>@<url>");
    }
    const std::string mode = spec.substr(kRemote.size(), at - kRemote.size());
    RemoteScorer::Mode m;
    if (mode == "bertscore_f1") {
      m = RemoteScorer::Mode::kBertScoreF1;
    } else if (mode == "embedding_cosine") {
      m = RemoteScorer::Mode::kEmbeddingCosine;
    } else {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown remote scorer mode '", mode, "'"));
    }
    return std::make_unique<RemoteScorer>(spec.substr(at + 1), m);
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown scorer '", spec, "'"));
}

}  // namespace wmtrace
