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

#ifndef WMTRACE_TEXT_H_
#define WMTRACE_TEXT_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace wmtrace {

// A word is a maximal run of non-whitespace Unicode scalar values, where
// whitespace is the Unicode White_Space property. Input is UTF-8; malformed
// bytes are treated as non-whitespace and never split a word.
struct WordSpan {
  size_t begin = 0;  // byte offset into the source text
  size_t end = 0;    // one past the last byte
};

std::vector<WordSpan> WordSpans(std::string_view text);
std::vector<std::string_view> SplitWords(std::string_view text);
size_t CountWords(std::string_view text);

// Joins with a single ASCII space.
std::string JoinWords(const std::vector<std::string_view>& words);
std::string JoinWords(const std::vector<std::string>& words);

// True if `word` ends with '.', '!' or '?'. Words are whitespace-delimited,
// so this matches a terminator followed by whitespace or end-of-text.
bool EndsSentence(std::string_view word);

// Trims Unicode whitespace from both ends.
std::string_view TrimWhitespace(std::string_view text);

// Collapses whitespace runs to one space and trims.
std::string NormalizeWhitespace(std::string_view text);

// ASCII-only lowercasing; non-ASCII bytes pass through unchanged.
std::string AsciiLower(std::string_view text);

// Decodes UTF-8 into scalar values. Invalid sequences decode byte-wise to
// U+FFFD so the output length never exceeds the input length.
std::u32string DecodeUtf8(std::string_view text);

bool IsUnicodeWhitespace(char32_t c);

}  // namespace wmtrace

#endif  // WMTRACE_TEXT_H_
