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

#include "wmtrace/stealth_audit.h"

#include <zlib.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "wmtrace/parallel.h"
#include "wmtrace/stats.h"
#include "wmtrace/text.h"

namespace wmtrace {

using json = nlohmann::ordered_json;

absl::Status AuditConfig::Validate() const {
  if (ngram_n < 2) return absl::InvalidArgumentError("ngram_n must be >= 2");
  if (cr_window_words < 2) {
    return absl::InvalidArgumentError("cr_window_words must be >= 2");
  }
  if (!(cr_ratio_margin >= 0.0)) {
    return absl::InvalidArgumentError("cr_ratio_margin must be >= 0");
  }
  if (knn_k < 1) return absl::InvalidArgumentError("knn_k must be >= 1");
  if (!(density_z_cut > 0.0)) {
    return absl::InvalidArgumentError("density_z_cut must be > 0");
  }
  return absl::OkStatus();
}

std::vector<std::vector<NgramEvidence>> NgramDuplicates(
    const std::vector<Sequence>& corpus, const AuditConfig& config) {
  const size_t n = config.ngram_n;
  std::vector<std::vector<std::string>> grams(corpus.size());
  for (size_t s = 0; s < corpus.size(); ++s) {
    const std::string lower = AsciiLower(corpus[s].text);
    const std::vector<std::string_view> words = SplitWords(lower);
    if (words.size() < n) continue;
    for (size_t i = 0; i + n <= words.size(); ++i) {
      grams[s].push_back(JoinWords(std::vector<std::string_view>(
          words.begin() + i, words.begin() + i + n)));
    }
  }

  // Single pass building gram -> sequences containing it.
  std::unordered_map<std::string_view, std::vector<uint32_t>> index;
  for (size_t s = 0; s < corpus.size(); ++s) {
    for (const std::string& g : grams[s]) {
      std::vector<uint32_t>& owners = index[g];
      if (owners.empty() || owners.back() != s) {
        owners.push_back(static_cast<uint32_t>(s));
      }
    }
  }

  std::vector<std::vector<NgramEvidence>> out(corpus.size());
  for (size_t s = 0; s < corpus.size(); ++s) {
    std::unordered_set<uint32_t> partners;
    for (const std::string& g : grams[s]) {
      const std::vector<uint32_t>& owners = index.at(g);
      if (owners.size() < 2) continue;
      for (uint32_t other : owners) {
        if (other == s || !partners.insert(other).second) continue;
        out[s].push_back({corpus[other].id, g});
      }
    }
  }
  return out;
}

size_t DeflateSize(std::string_view data) {
  z_stream zs{};
  // Negative window bits select a raw stream without zlib framing.
  deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, -15, 8,
               Z_DEFAULT_STRATEGY);
  std::vector<unsigned char> out(deflateBound(&zs, data.size()));
  zs.next_in =
      reinterpret_cast<Bytef*>(const_cast<char*>(data.data()));
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  deflate(&zs, Z_FINISH);
  const size_t size = zs.total_out;
  deflateEnd(&zs);
  return size;
}

namespace {

// DEFLATE sizes move by a few bytes with block boundaries alone, so windows
// adding less than this are treated as noise. This keeps highly repetitive
// text, whose windows cost almost nothing, from flagging on jitter.
constexpr double kMinMarginalBytes = 8.0;

}  // namespace

CompressionScan CompressionAnomalies(std::string_view text,
                                     const AuditConfig& config) {
  CompressionScan scan;
  const std::vector<WordSpan> spans = WordSpans(text);
  const size_t w = config.cr_window_words;
  if (text.empty()) return scan;
  const double whole = static_cast<double>(DeflateSize(text));
  scan.whole_text_ratio = whole / static_cast<double>(text.size());
  if (spans.size() < w) return scan;

  std::vector<size_t> starts;
  const size_t stride = std::max<size_t>(1, w / 2);
  for (size_t s = 0; s + w <= spans.size(); s += stride) starts.push_back(s);
  if (starts.back() + w < spans.size()) starts.push_back(spans.size() - w);

  std::string rest;
  for (size_t s : starts) {
    CompressionWindow win;
    win.first_word = s;
    win.byte_offset = spans[s].begin;
    win.byte_length = spans[s + w - 1].end - spans[s].begin;
    rest.assign(text.substr(0, win.byte_offset));
    rest.append(text.substr(win.byte_offset + win.byte_length));
    const double without = static_cast<double>(DeflateSize(rest));
    win.ratio = (whole - without) / static_cast<double>(win.byte_length);
    scan.windows.push_back(win);
  }
  scan.baseline_ratio = scan.whole_text_ratio;
  for (const CompressionWindow& win : scan.windows) {
    scan.max_ratio = std::max(scan.max_ratio, win.ratio);
  }
  const double cut = scan.baseline_ratio * (1.0 + config.cr_ratio_margin);
  for (const CompressionWindow& win : scan.windows) {
    const double added = win.ratio * static_cast<double>(win.byte_length);
    if (win.ratio > cut && added >= kMinMarginalBytes) {
      scan.flagged.push_back(win);
    }
  }
  return scan;
}

absl::StatusOr<std::vector<DensityResult>> EmbeddingDensity(
    const std::vector<Sequence>& corpus, const SimilarityScorer& scorer,
    const AuditConfig& config) {
  if (corpus.size() <= config.knn_k) {
    return absl::InvalidArgumentError(
        absl::StrCat("embedding density needs more than knn_k=", config.knn_k,
                     " sequences, got ", corpus.size()));
  }
  std::vector<std::string> texts;
  texts.reserve(corpus.size());
  for (const Sequence& s : corpus) texts.push_back(s.text);
  absl::StatusOr<SimilarityMatrix> m = scorer.ScoreAllPairs(texts);
  if (!m.ok()) return m.status();

  const size_t n = corpus.size();
  std::vector<DensityResult> out(n);
  std::vector<double> densities(n);
  std::vector<double> row;
  for (size_t i = 0; i < n; ++i) {
    row.clear();
    for (size_t j = 0; j < n; ++j) {
      if (j != i) row.push_back(m->at(i, j));
    }
    std::partial_sort(row.begin(), row.begin() + config.knn_k, row.end(),
                      std::greater<>());
    double sum = 0.0;
    for (size_t k = 0; k < config.knn_k; ++k) sum += row[k];
    densities[i] = sum / static_cast<double>(config.knn_k);
    out[i].density = densities[i];
  }
  const double median = Median(densities);
  const double scale = kMadToSigma * MedianAbsoluteDeviation(densities);
  for (size_t i = 0; i < n; ++i) {
    const double dev = std::abs(densities[i] - median);
    if (scale > 0.0) {
      out[i].robust_z = dev / scale;
    } else {
      out[i].robust_z =
          dev == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    out[i].flagged = out[i].robust_z > config.density_z_cut;
  }
  return out;
}

absl::StatusOr<AuditReport> RunAudit(const std::vector<Sequence>& corpus,
                                     const SimilarityScorer& scorer,
                                     const AuditConfig& config,
                                     size_t parallelism) {
  if (absl::Status s = config.Validate(); !s.ok()) return s;
  AuditReport report;
  report.config = config;
  report.records.resize(corpus.size());
  std::vector<std::vector<NgramEvidence>> ngrams =
      NgramDuplicates(corpus, config);
  ParallelFor(corpus.size(), parallelism, [&](size_t i) {
    report.records[i].compression =
        CompressionAnomalies(corpus[i].text, config);
  });
  absl::StatusOr<std::vector<DensityResult>> density =
      EmbeddingDensity(corpus, scorer, config);
  if (!density.ok()) return density.status();

  AuditSummary& sum = report.summary;
  sum.sequences = corpus.size();
  sum.scorer_name = scorer.name();
  for (size_t i = 0; i < corpus.size(); ++i) {
    AuditRecord& r = report.records[i];
    r.sequence_id = corpus[i].id;
    r.ngram_evidence = std::move(ngrams[i]);
    r.density = (*density)[i];
    sum.ngram_flagged += r.ngram_flag();
    sum.cr_flagged += r.cr_flag();
    sum.density_flagged += r.density_flag();
    sum.any_flagged += r.any_flag();
  }
  return report;
}

namespace {

json Real(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : "-inf";
}

}  // namespace

json AuditRecordToJson(const AuditRecord& r) {
  json ngram = json::array();
  for (const NgramEvidence& e : r.ngram_evidence) {
    ngram.push_back({{"other_id", e.other_id}, {"ngram", e.ngram}});
  }
  json windows = json::array();
  for (const CompressionWindow& w : r.compression.flagged) {
    windows.push_back({{"first_word", w.first_word},
                       {"byte_offset", w.byte_offset},
                       {"byte_length", w.byte_length},
                       {"ratio", w.ratio}});
  }
  return {{"sequence_id", r.sequence_id},
          {"ngram_flag", r.ngram_flag()},
          {"ngram_evidence", ngram},
          {"cr_flag", r.cr_flag()},
          {"cr_baseline_ratio", r.compression.baseline_ratio},
          {"cr_whole_text_ratio", r.compression.whole_text_ratio},
          {"cr_max_ratio", r.compression.max_ratio},
          {"cr_windows", windows},
          {"density_flag", r.density_flag()},
          {"density", r.density.density},
          {"density_robust_z", Real(r.density.robust_z)}};
}

json AuditSummaryToJson(const AuditSummary& s, const AuditConfig& c) {
  return {{"summary",
           {{"sequences", s.sequences},
            {"ngram_flagged", s.ngram_flagged},
            {"cr_flagged", s.cr_flagged},
            {"density_flagged", s.density_flagged},
            {"any_flagged", s.any_flagged},
            {"scorer", s.scorer_name},
            {"config",
             {{"ngram_n", c.ngram_n},
              {"cr_window_words", c.cr_window_words},
              {"cr_ratio_margin", c.cr_ratio_margin},
              {"knn_k", c.knn_k},
              {"density_z_cut", c.density_z_cut}}}}}};
}

std::string SerializeAuditReport(const AuditReport& report) {
  std::string out;
  json header = {{"schema_version", 1}, {"kind", "audit_report"}};
  absl::StrAppend(&out, header.dump(), "\n");
  for (const AuditRecord& r : report.records) {
    absl::StrAppend(&out, AuditRecordToJson(r).dump(), "\n");
  }
  absl::StrAppend(&out,
                  AuditSummaryToJson(report.summary, report.config).dump(),
                  "\n");
  return out;
}

}  // namespace wmtrace
