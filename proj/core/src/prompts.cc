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

#include "wmtrace/prompts.h"

#include <cctype>
#include <map>

#include "absl/strings/cord.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_replace.h"
#include "wmtrace/file_io.h"
#include "wmtrace/text.h"
#include "string_view_compat.h"

namespace wmtrace {

using internal::Av;
namespace {

constexpr std::string_view kRephraseBody =
    R"(Paraphrase the sentence below.

Sentence: [PreText]

Task:

Provide [VerNum] different versions.

- You must make sure the semantic meaning and structure of the sentence not changed

- Each version should be different, you should avoid long text repetition (no more than 5) while maintain meaning and structure. (may only replace some word with similar)

- The sentence is the prefix part of "[PreText] [ConText]". Make sure the paraphased prefix can still add to continuation.

Strictly format your response exactly like this:

Version 1: [content of version 1]

Version 2: [content of version 2]

...
)";

constexpr std::string_view kContinuationBody =
    R"(Do not search online. Randomly generate the rest of the abstract (not a sentence) according to the Prefix.

Prefix: [PreText]

Reference (for context only, do not copy):

[PreText] [ConText]

Task:

Provide [VerNum] different versions.

- Each version must be completely different from the Reference and each other.

- Each version must talk about completely different things.

- Do not repeat words (especially in the begin) or topics between versions.

- Continuation is start from the middle of the sentence. Make sure the generated continuation can connect to original prefix.

- Finish the rest of paragraph, not just rest of sentence.

Strictly format your response exactly like this:

Version 1: [content of version 1 (Continuation only, exclude prefix)]

Version 2: [content of version 2 (Continuation only, exclude prefix)]

...
)";

constexpr std::string_view kRawResponsePayload = "wmtrace/raw-response";

absl::Status ParseError(std::string_view message, std::string_view raw) {
  absl::Status s = absl::InvalidArgumentError(
      absl::StrCat("version parse error: ", Av(message)));
  s.SetPayload(Av(kRawResponsePayload), absl::Cord(Av(raw)));
  return s;
}

struct Marker {
  size_t begin;  // start of the marker text
  size_t end;    // first byte of the content
  int index;
};

bool IsAlnum(char c) { return std::isalnum(static_cast<unsigned char>(c)); }

// Finds "Version <n>:" markers not embedded in a longer word. Tolerates
// markdown emphasis of the form "**Version 3:**".
std::vector<Marker> FindMarkers(std::string_view s) {
  static constexpr std::string_view kWord = "Version";
  std::vector<Marker> out;
  size_t pos = 0;
  while ((pos = s.find(kWord, pos)) != std::string_view::npos) {
    const size_t begin = pos;
    pos += kWord.size();
    if (begin > 0 && IsAlnum(s[begin - 1])) continue;
    size_t i = pos;
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const size_t digits_begin = i;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i == digits_begin || i - digits_begin > 6) continue;
    const int index = std::stoi(std::string(s.substr(digits_begin, i - digits_begin)));
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    if (i >= s.size() || s[i] != ':') continue;
    ++i;
    size_t marker_begin = begin;
    if (begin >= 2 && s.substr(begin - 2, 2) == "**") {
      marker_begin = begin - 2;
      if (s.substr(i, 2) == "**") i += 2;
    }
    out.push_back({marker_begin, i, index});
    pos = i;
  }
  return out;
}

}  // namespace

absl::Status PromptTemplate::Validate() const {
  for (std::string_view ph :
       {kPrefixPlaceholder, kContinuationPlaceholder, kCountPlaceholder}) {
    if (body.find(ph) == std::string::npos) {
      return absl::InvalidArgumentError(absl::StrCat(
          kind == TemplateKind::kRephrase ? "rephrase" : "continuation",
          " template lacks placeholder ", Av(ph)));
    }
  }
  return absl::OkStatus();
}

PromptTemplate DefaultRephraseTemplate() {
  return {TemplateKind::kRephrase, std::string(kRephraseBody)};
}

PromptTemplate DefaultContinuationTemplate() {
  return {TemplateKind::kContinuation, std::string(kContinuationBody)};
}

absl::StatusOr<PromptTemplate> LoadTemplate(TemplateKind kind,
                                            const std::string& path) {
  absl::StatusOr<std::string> body = ReadFile(path);
  if (!body.ok()) return body.status();
  PromptTemplate t{kind, *std::move(body)};
  if (absl::Status s = t.Validate(); !s.ok()) return s;
  return t;
}

absl::StatusOr<std::string> RenderPrompt(const PromptTemplate& tmpl,
                                         std::string_view prefix,
                                         std::string_view continuation, int k) {
  if (absl::Status s = tmpl.Validate(); !s.ok()) return s;
  if (k < 1) return absl::InvalidArgumentError("version count must be >= 1");
  return absl::StrReplaceAll(tmpl.body,
                             {{Av(kPrefixPlaceholder), Av(prefix)},
                              {Av(kContinuationPlaceholder), Av(continuation)},
                              {Av(kCountPlaceholder), absl::StrCat(k)}});
}

absl::StatusOr<std::vector<std::string>> ParseVersions(std::string_view response,
                                                       int expected_k) {
  if (expected_k < 1) {
    return absl::InvalidArgumentError("expected version count must be >= 1");
  }
  const std::vector<Marker> markers = FindMarkers(response);
  std::map<int, std::string> by_index;
  for (size_t m = 0; m < markers.size(); ++m) {
    const Marker& mk = markers[m];
    if (mk.index < 1 || mk.index > expected_k) {
      return ParseError(absl::StrCat("version number ", mk.index,
                                     " outside 1..", expected_k),
                        response);
    }
    const size_t stop =
        m + 1 < markers.size() ? markers[m + 1].begin : response.size();
    std::string content(TrimWhitespace(response.substr(mk.end, stop - mk.end)));
    if (content.empty()) {
      return ParseError(absl::StrCat("version ", mk.index, " is empty"),
                        response);
    }
    if (!by_index.emplace(mk.index, std::move(content)).second) {
      return ParseError(absl::StrCat("version ", mk.index, " appears twice"),
                        response);
    }
  }
  if (static_cast<int>(by_index.size()) != expected_k) {
    for (int i = 1; i <= expected_k; ++i) {
      if (!by_index.contains(i)) {
        return ParseError(absl::StrCat("version ", i, " missing (found ",
                                       by_index.size(), " of ", expected_k, ")"),
                          response);
      }
    }
  }
  std::vector<std::string> out;
  out.reserve(by_index.size());
  for (auto& [index, content] : by_index) out.push_back(std::move(content));
  return out;
}

std::string FormatVersions(const std::vector<std::string>& versions) {
  std::string out;
  for (size_t i = 0; i < versions.size(); ++i) {
    if (i > 0) out.append("\n\n");
    absl::StrAppend(&out, "Version ", i + 1, ": ", versions[i]);
  }
  return out;
}

std::string FormatReminder(int k) {
  return absl::StrCat(
      "\n\nReminder: reply with exactly ", k,
      " entries, each on its own line as \"Version i: <text>\" for i = 1..", k,
      ", and nothing else.");
}

}  // namespace wmtrace
