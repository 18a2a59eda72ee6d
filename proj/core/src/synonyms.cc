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

#include "wmtrace/synonyms.h"

#include <cctype>

#include "absl/strings/ascii.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "wmtrace/text.h"
#include "string_view_compat.h"

namespace wmtrace {

namespace internal {
extern const std::string_view kSynonymTableTsv;
}  // namespace internal

using internal::Av;
using internal::Sv;

absl::StatusOr<SynonymTable> SynonymTable::Parse(std::string_view tsv) {
  SynonymTable table;
  size_t line_no = 0;
  for (absl::string_view line : absl::StrSplit(Av(tsv), '\n')) {
    ++line_no;
    line = absl::StripAsciiWhitespace(line);
    if (line.empty() || line.front() == '#') continue;
    std::vector<absl::string_view> cols = absl::StrSplit(line, '\t');
    if (cols.size() != 2) {
      return absl::InvalidArgumentError(absl::StrCat(
          "synonym table line ", line_no, ": expected 2 tab-separated fields"));
    }
    std::vector<std::string> repl =
        absl::StrSplit(cols[1], ',', absl::SkipEmpty());
    if (repl.empty()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "synonym table line ", line_no, ": no replacements"));
    }
    if (!table.entries_.emplace(std::string(cols[0]), std::move(repl))
             .second) {
      return absl::InvalidArgumentError(absl::StrCat(
          "synonym table line ", line_no, ": duplicate word '", cols[0], "'"));
    }
  }
  return table;
}

const SynonymTable& SynonymTable::Default() {
  static const SynonymTable* table = [] {
    absl::StatusOr<SynonymTable> t = Parse(internal::kSynonymTableTsv);
    return new SynonymTable(t.ok() ? *std::move(t) : SynonymTable());
  }();
  return *table;
}

std::span<const std::string> SynonymTable::Lookup(std::string_view word) const {
  auto it = entries_.find(std::string(word));
  if (it == entries_.end()) return {};
  return it->second;
}

std::string SynonymTable::Core(std::string_view word) {
  size_t end = word.size();
  while (end > 0 && std::ispunct(static_cast<unsigned char>(word[end - 1]))) {
    --end;
  }
  return AsciiLower(word.substr(0, end));
}

std::string SynonymTable::Substitute(std::string_view word,
                                     std::string_view replacement) {
  size_t end = word.size();
  while (end > 0 && std::ispunct(static_cast<unsigned char>(word[end - 1]))) {
    --end;
  }
  std::string out(replacement);
  if (!word.empty() && std::isupper(static_cast<unsigned char>(word[0])) &&
      !out.empty()) {
    out[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(out[0])));
  }
  out.append(word.substr(end));
  return out;
}

}  // namespace wmtrace
