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

#include "wmtrace/text.h"

#include <cstdint>

namespace wmtrace {
namespace {

// Decodes one scalar value starting at `pos`; advances `pos`.
char32_t DecodeOne(std::string_view s, size_t& pos) {
  const auto b0 = static_cast<uint8_t>(s[pos]);
  auto cont = [&](size_t i) -> int {
    if (pos + i >= s.size()) return -1;
    const auto b = static_cast<uint8_t>(s[pos + i]);
    return (b & 0xC0) == 0x80 ? (b & 0x3F) : -1;
  };
  if (b0 < 0x80) {
    ++pos;
    return b0;
  }
  if ((b0 & 0xE0) == 0xC0 && b0 >= 0xC2) {
    const int c1 = cont(1);
    if (c1 >= 0) {
      pos += 2;
      return (static_cast<char32_t>(b0 & 0x1F) << 6) | c1;
    }
  } else if ((b0 & 0xF0) == 0xE0) {
    const int c1 = cont(1), c2 = cont(2);
    if (c1 >= 0 && c2 >= 0) {
      const char32_t v = (static_cast<char32_t>(b0 & 0x0F) << 12) |
                         (static_cast<char32_t>(c1) << 6) | c2;
      if (v >= 0x800 && (v < 0xD800 || v > 0xDFFF)) {
        pos += 3;
        return v;
      }
    }
  } else if ((b0 & 0xF8) == 0xF0 && b0 <= 0xF4) {
    const int c1 = cont(1), c2 = cont(2), c3 = cont(3);
    if (c1 >= 0 && c2 >= 0 && c3 >= 0) {
      const char32_t v = (static_cast<char32_t>(b0 & 0x07) << 18) |
                         (static_cast<char32_t>(c1) << 12) |
                         (static_cast<char32_t>(c2) << 6) | c3;
      if (v >= 0x10000 && v <= 0x10FFFF) {
        pos += 4;
        return v;
      }
    }
  }
  ++pos;
  return 0xFFFD;
}

}  // namespace

bool IsUnicodeWhitespace(char32_t c) {
  switch (c) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680:
    case 0x2028: case 0x2029: case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return c >= 0x2000 && c <= 0x200A;
  }
}

std::vector<WordSpan> WordSpans(std::string_view text) {
  std::vector<WordSpan> spans;
  size_t pos = 0;
  bool in_word = false;
  WordSpan current;
  while (pos < text.size()) {
    const size_t start = pos;
    const char32_t c = DecodeOne(text, pos);
    if (IsUnicodeWhitespace(c)) {
      if (in_word) {
        current.end = start;
        spans.push_back(current);
        in_word = false;
      }
    } else if (!in_word) {
      current.begin = start;
      in_word = true;
    }
  }
  if (in_word) {
    current.end = text.size();
    spans.push_back(current);
  }
  return spans;
}

std::vector<std::string_view> SplitWords(std::string_view text) {
  std::vector<std::string_view> words;
  for (const WordSpan& s : WordSpans(text)) {
    words.push_back(text.substr(s.begin, s.end - s.begin));
  }
  return words;
}

size_t CountWords(std::string_view text) { return WordSpans(text).size(); }

std::string JoinWords(const std::vector<std::string_view>& words) {
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out.append(words[i]);
  }
  return out;
}

std::string JoinWords(const std::vector<std::string>& words) {
  std::string out;
  for (size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out.append(words[i]);
  }
  return out;
}

bool EndsSentence(std::string_view word) {
  if (word.empty()) return false;
  const char last = word.back();
  return last == '.' || last == '!' || last == '?';
}

std::string_view TrimWhitespace(std::string_view text) {
  const auto spans = WordSpans(text);
  if (spans.empty()) return text.substr(0, 0);
  return text.substr(spans.front().begin,
                     spans.back().end - spans.front().begin);
}

std::string NormalizeWhitespace(std::string_view text) {
  return JoinWords(SplitWords(text));
}

std::string AsciiLower(std::string_view text) {
  std::string out(text);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

std::u32string DecodeUtf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  size_t pos = 0;
  while (pos < text.size()) out.push_back(DecodeOne(text, pos));
  return out;
}

}  // namespace wmtrace
