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

#ifndef WMTRACE_PROMPTS_H_
#define WMTRACE_PROMPTS_H_

#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace wmtrace {

inline constexpr std::string_view kPrefixPlaceholder = "[PreText]";
inline constexpr std::string_view kContinuationPlaceholder = "[ConText]";
inline constexpr std::string_view kCountPlaceholder = "[VerNum]";

enum class TemplateKind { kRephrase, kContinuation };

struct PromptTemplate {
  TemplateKind kind = TemplateKind::kRephrase;
  std::string body;

  // Both kinds require all three placeholders.
  absl::Status Validate() const;
};

PromptTemplate DefaultRephraseTemplate();
PromptTemplate DefaultContinuationTemplate();

absl::StatusOr<PromptTemplate> LoadTemplate(TemplateKind kind,
                                            const std::string& path);

// Substitutes every placeholder in one left-to-right pass, so placeholder
// text inside the substituted values is never re-expanded.
absl::StatusOr<std::string> RenderPrompt(const PromptTemplate& tmpl,
                                         std::string_view prefix,
                                         std::string_view continuation, int k);

// Extracts the bodies of "Version 1:" ... "Version k:" in index order. Each
// index 1..k must appear exactly once with non-empty content. Failures carry
// the raw response as the "wmtrace/raw-response" payload.
absl::StatusOr<std::vector<std::string>> ParseVersions(std::string_view response,
                                                       int expected_k);

// Inverse of ParseVersions for marker-free payloads.
std::string FormatVersions(const std::vector<std::string>& versions);

// Appended to the prompt when a response fails to parse.
std::string FormatReminder(int k);

}  // namespace wmtrace

#endif  // WMTRACE_PROMPTS_H_
