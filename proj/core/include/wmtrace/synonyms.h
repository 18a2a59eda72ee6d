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

#ifndef WMTRACE_SYNONYMS_H_
#define WMTRACE_SYNONYMS_H_

#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "absl/status/statusor.h"

namespace wmtrace {

// Lowercase word -> interchangeable replacements. Loaded from a
// tab-separated file: word, then a comma-separated replacement list.
class SynonymTable {
 public:
  static absl::StatusOr<SynonymTable> Parse(std::string_view tsv);
  // The table built into the library.
  static const SynonymTable& Default();

  // Empty when the word has no entry. Lookup is case-sensitive; callers
  // lowercase first.
  std::span<const std::string> Lookup(std::string_view word) const;
  size_t size() const { return entries_.size(); }

  // Replaces the word core (trailing punctuation kept) with `replacement`,
  // carrying over an initial capital.
  static std::string Substitute(std::string_view word,
                                std::string_view replacement);
  // The lowercased word with trailing ASCII punctuation removed.
  static std::string Core(std::string_view word);

 private:
  std::unordered_map<std::string, std::vector<std::string>> entries_;
};

}  // namespace wmtrace

#endif  // WMTRACE_SYNONYMS_H_
