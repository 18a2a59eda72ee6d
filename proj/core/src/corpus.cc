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

#include "wmtrace/corpus.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_set>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "wmtrace/file_io.h"
#include "wmtrace/text.h"
#include "string_view_compat.h"

namespace wmtrace {

using internal::Av;

using ordered_json = nlohmann::ordered_json;

absl::StatusOr<Sequence> MakeSequence(std::string id, std::string text,
                                      std::optional<std::string> source) {
  const size_t words = CountWords(text);
  if (words == 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("sequence '", id, "' has empty text"));
  }
  Sequence seq;
  seq.id = std::move(id);
  seq.text = std::move(text);
  seq.token_count = words;
  seq.source = std::move(source);
  return seq;
}

absl::Status WatermarkConfig::Validate() const {
  if (k < 1) {
    return absl::InvalidArgumentError(
        absl::StrCat("watermark k must be >= 1, got ", k));
  }
  if (!std::isfinite(tau)) {
    return absl::InvalidArgumentError("watermark tau must be finite");
  }
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    return absl::InvalidArgumentError(
        absl::StrCat("split_fraction must lie in (0,1), got ", split_fraction));
  }
  if (boundary_backoff_words < 0) {
    return absl::InvalidArgumentError("boundary_backoff_words must be >= 0");
  }
  return absl::OkStatus();
}

VariantPair AssembleVariant(std::string rephrased_prefix,
                            std::string new_continuation) {
  VariantPair v;
  v.assembled_text = absl::StrCat(rephrased_prefix, " ", new_continuation);
  v.rephrased_prefix = std::move(rephrased_prefix);
  v.new_continuation = std::move(new_continuation);
  return v;
}

absl::Status WatermarkManifest::Validate() const {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  if (variants.size() != static_cast<size_t>(config.k)) {
    return absl::FailedPreconditionError(
        absl::StrFormat("manifest has %d variants but k = %d", variants.size(),
                        config.k));
  }
  if (split.prefix.empty() || split.continuation.empty()) {
    return absl::FailedPreconditionError("manifest split is incomplete");
  }
  absl::StatusOr<std::string> expected_ref = MakeReferencePrefix(split.prefix);
  if (!expected_ref.ok()) return expected_ref.status();
  if (*expected_ref != reference_prefix) {
    return absl::FailedPreconditionError(
        "reference_prefix is not the prefix with its last three words removed");
  }
  for (size_t k = 0; k < variants.size(); ++k) {
    const VariantPair& v = variants[k];
    if (v.assembled_text !=
        absl::StrCat(v.rephrased_prefix, " ", v.new_continuation)) {
      return absl::FailedPreconditionError(absl::StrCat(
          "variant ", k + 1, " assembled_text != prefix + ' ' + continuation"));
    }
    if (v.rephrased_prefix == split.prefix) {
      return absl::FailedPreconditionError(absl::StrCat(
          "variant ", k + 1, " repeats the original prefix verbatim"));
    }
    if (CountWords(v.rephrased_prefix) == 0 ||
        CountWords(v.new_continuation) == 0) {
      return absl::FailedPreconditionError(
          absl::StrCat("variant ", k + 1, " has an empty part"));
    }
  }
  return absl::OkStatus();
}

// --- Corpus files -----------------------------------------------------------

absl::StatusOr<std::vector<Sequence>> ParseCorpus(std::string_view contents) {
  std::vector<Sequence> out;
  std::unordered_set<std::string> ids;
  size_t line_index = 0;
  for (absl::string_view piece : absl::StrSplit(Av(contents), '\n')) {
    std::string_view line = internal::Sv(piece);
    const size_t line_no = ++line_index;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (TrimWhitespace(line).empty()) continue;

    ordered_json record = ordered_json::parse(line, nullptr, false);
    if (record.is_discarded() || !record.is_object()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": not a JSON object"));
    }
    auto text_it = record.find("text");
    if (text_it == record.end() || !text_it->is_string()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": missing string field \"text\""));
    }
    std::string id;
    if (auto id_it = record.find("id"); id_it != record.end()) {
      if (!id_it->is_string()) {
        return absl::InvalidArgumentError(
            absl::StrCat("line ", line_no, ": \"id\" must be a string"));
      }
      id = id_it->get<std::string>();
    } else {
      id = absl::StrFormat("%08d", line_no - 1);
    }
    std::optional<std::string> source;
    if (auto src_it = record.find("source");
        src_it != record.end() && src_it->is_string()) {
      source = src_it->get<std::string>();
      record.erase("source");
    }
    absl::StatusOr<Sequence> seq =
        MakeSequence(id, text_it->get<std::string>(), std::move(source));
    if (!seq.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": ", seq.status().message()));
    }
    if (!ids.insert(seq->id).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("line ", line_no, ": duplicate id '", seq->id, "'"));
    }
    record.erase("id");
    record.erase("text");
    seq->extra = std::move(record);
    out.push_back(*std::move(seq));
  }
  return out;
}

absl::StatusOr<std::vector<Sequence>> LoadCorpus(const std::string& path) {
  absl::StatusOr<std::string> contents = ReadFile(path);
  if (!contents.ok()) return contents.status();
  return ParseCorpus(*contents);
}

std::string SerializeCorpus(const std::vector<Sequence>& corpus) {
  std::string out;
  for (const Sequence& seq : corpus) {
    ordered_json record = ordered_json::object();
    record["id"] = seq.id;
    record["text"] = seq.text;
    if (seq.source) record["source"] = *seq.source;
    for (const auto& [key, value] : seq.extra.items()) record[key] = value;
    absl::StrAppend(&out, record.dump(), "\n");
  }
  return out;
}

absl::Status WriteCorpus(const std::string& path,
                         const std::vector<Sequence>& corpus) {
  return WriteFileAtomic(path, SerializeCorpus(corpus));
}

// --- Splitting --------------------------------------------------------------

absl::StatusOr<SplitSequence> SplitAtWord(const Sequence& seq,
                                          size_t word_index) {
  const std::vector<WordSpan> spans = WordSpans(seq.text);
  if (word_index == 0 || word_index >= spans.size()) {
    return absl::OutOfRangeError(absl::StrFormat(
        "split index %d outside (0, %d) for sequence '%s'", word_index,
        spans.size(), seq.id));
  }
  SplitSequence split;
  split.prefix = seq.text.substr(spans.front().begin,
                                 spans[word_index - 1].end - spans.front().begin);
  split.continuation = seq.text.substr(
      spans[word_index].begin, spans.back().end - spans[word_index].begin);
  split.split_word_index = word_index;
  return split;
}

absl::StatusOr<SplitSequence> SplitAtBoundary(const Sequence& seq,
                                              const WatermarkConfig& config) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  const std::vector<std::string_view> words = SplitWords(seq.text);
  if (words.size() < 10) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "sequence '%s' has %d words; splitting needs at least 10", seq.id,
        words.size()));
  }
  const double candidate =
      std::round(config.split_fraction * static_cast<double>(words.size()));

  // Boundaries are counted as the number of words up to and including the
  // terminating word. Ties go to the earlier boundary.
  std::optional<size_t> best;
  double best_distance = 0.0;
  for (size_t i = 0; i < words.size(); ++i) {
    if (!EndsSentence(words[i])) continue;
    const double distance = std::fabs(static_cast<double>(i + 1) - candidate);
    if (!best || distance < best_distance) {
      best = i + 1;
      best_distance = distance;
    }
  }
  if (!best) {
    return absl::FailedPreconditionError(absl::StrCat(
        "sequence '", seq.id,
        "' has no sentence boundary; supply an explicit split index"));
  }
  const auto backoff = static_cast<size_t>(config.boundary_backoff_words);
  if (*best <= backoff) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "boundary after word %d with backoff %d leaves an empty prefix", *best,
        backoff));
  }
  return SplitAtWord(seq, *best - backoff);
}

absl::StatusOr<std::string> MakeReferencePrefix(std::string_view prefix) {
  const std::vector<WordSpan> spans = WordSpans(prefix);
  if (spans.size() < 4) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "reference prefix needs at least 4 words, got %d", spans.size()));
  }
  return std::string(prefix.substr(0, spans[spans.size() - 4].end));
}

// --- Injection --------------------------------------------------------------

std::string VariantId(const WatermarkManifest& manifest, size_t k) {
  return absl::StrCat(manifest.target.id, "#wm", k + 1);
}

absl::StatusOr<std::vector<Sequence>> Inject(
    const std::vector<Sequence>& corpus, const WatermarkManifest& manifest,
    uint64_t placement_seed) {
  if (absl::Status s = manifest.Validate(); !s.ok()) return s;

  std::unordered_set<std::string> ids;
  for (const Sequence& seq : corpus) ids.insert(seq.id);

  std::vector<Sequence> out = corpus;
  std::mt19937_64 rng(placement_seed);
  for (size_t k = 0; k < manifest.variants.size(); ++k) {
    std::string id = VariantId(manifest, k);
    if (!ids.insert(id).second) {
      return absl::AlreadyExistsError(
          absl::StrCat("variant id '", id, "' already present in corpus"));
    }
    absl::StatusOr<Sequence> seq =
        MakeSequence(std::move(id), manifest.variants[k].assembled_text,
                     absl::StrCat("watermark:", manifest.target.id));
    if (!seq.ok()) return seq.status();
    // Drawn from the engine directly for cross-platform stable placement.
    const size_t pos = static_cast<size_t>(rng() % (out.size() + 1));
    out.insert(out.begin() + static_cast<std::ptrdiff_t>(pos), *std::move(seq));
  }
  return out;
}

// --- Manifest files ---------------------------------------------------------

ordered_json ManifestToJson(const WatermarkManifest& m) {
  ordered_json target = {{"id", m.target.id}, {"text", m.target.text}};
  if (m.target.source) target["source"] = *m.target.source;
  if (!m.target.extra.empty()) target["extra"] = m.target.extra;

  ordered_json variants = ordered_json::array();
  for (const VariantPair& v : m.variants) {
    variants.push_back({{"rephrased_prefix", v.rephrased_prefix},
                        {"new_continuation", v.new_continuation},
                        {"assembled_text", v.assembled_text}});
  }
  return {
      {"schema_version", kManifestSchemaVersion},
      {"target", std::move(target)},
      {"split",
       {{"prefix", m.split.prefix},
        {"continuation", m.split.continuation},
        {"split_word_index", m.split.split_word_index}}},
      {"reference_prefix", m.reference_prefix},
      {"variants", std::move(variants)},
      {"config",
       {{"k", m.config.k},
        {"tau", m.config.tau},
        {"split_fraction", m.config.split_fraction},
        {"boundary_backoff_words", m.config.boundary_backoff_words}}},
  };
}

absl::StatusOr<WatermarkManifest> ManifestFromJson(const ordered_json& j) {
  WatermarkManifest m;
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kManifestSchemaVersion) {
      return absl::FailedPreconditionError(
          absl::StrFormat("manifest schema_version %d unsupported (want %d)",
                          version, kManifestSchemaVersion));
    }
    const ordered_json& t = j.at("target");
    std::optional<std::string> source;
    if (t.contains("source")) source = t.at("source").get<std::string>();
    absl::StatusOr<Sequence> target =
        MakeSequence(t.at("id").get<std::string>(),
                     t.at("text").get<std::string>(), std::move(source));
    if (!target.ok()) return target.status();
    m.target = *std::move(target);
    if (t.contains("extra")) m.target.extra = t.at("extra");

    const ordered_json& s = j.at("split");
    m.split.prefix = s.at("prefix").get<std::string>();
    m.split.continuation = s.at("continuation").get<std::string>();
    m.split.split_word_index = s.at("split_word_index").get<size_t>();
    m.reference_prefix = j.at("reference_prefix").get<std::string>();
    for (const ordered_json& v : j.at("variants")) {
      m.variants.push_back({v.at("rephrased_prefix").get<std::string>(),
                            v.at("new_continuation").get<std::string>(),
                            v.at("assembled_text").get<std::string>()});
    }
    const ordered_json& c = j.at("config");
    m.config.k = c.at("k").get<int>();
    m.config.tau = c.at("tau").get<double>();
    m.config.split_fraction = c.at("split_fraction").get<double>();
    m.config.boundary_backoff_words =
        c.at("boundary_backoff_words").get<int>();
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed manifest: ", e.what()));
  }
  if (absl::Status s = m.Validate(); !s.ok()) return s;
  return m;
}

absl::Status SaveManifest(const WatermarkManifest& manifest,
                          const std::string& path) {
  if (absl::Status s = manifest.Validate(); !s.ok()) return s;
  return WriteFileAtomic(path, ManifestToJson(manifest).dump(2) + "\n");
}

absl::StatusOr<WatermarkManifest> LoadManifest(const std::string& path) {
  absl::StatusOr<std::string> contents = ReadFile(path);
  if (!contents.ok()) return contents.status();
  ordered_json j = ordered_json::parse(*contents, nullptr, false);
  if (j.is_discarded()) {
    return absl::InvalidArgumentError(
        absl::StrCat("manifest ", path, " is not valid JSON"));
  }
  return ManifestFromJson(j);
}

}  // namespace wmtrace
