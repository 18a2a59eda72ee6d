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

#ifndef WMTRACE_STEALTH_AUDIT_H_
#define WMTRACE_STEALTH_AUDIT_H_

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "wmtrace/corpus.h"
#include "wmtrace/similarity.h"

namespace wmtrace {

struct AuditConfig {
  size_t ngram_n = 13;
  size_t cr_window_words = 32;
  double cr_ratio_margin = 0.15;
  size_t knn_k = 10;
  double density_z_cut = 3.5;

  absl::Status Validate() const;
};

// --- Word n-gram duplication -------------------------------------------------

struct NgramEvidence {
  std::string other_id;
  std::string ngram;  // lowercased words joined by single spaces
};

// For each sequence, one evidence entry per other sequence sharing at least
// one lowercased word n-gram with it. Symmetric by construction.
std::vector<std::vector<NgramEvidence>> NgramDuplicates(
    const std::vector<Sequence>& corpus, const AuditConfig& config);

// --- Compression-ratio scanning ----------------------------------------------

// Raw DEFLATE (RFC 1951) size at the default level.
size_t DeflateSize(std::string_view data);

struct CompressionWindow {
  size_t first_word = 0;
  size_t byte_offset = 0;
  size_t byte_length = 0;
  // Compressed bytes the window adds to the whole text, per window byte:
  // (C(text) - C(text without window)) / window bytes.
  double ratio = 0.0;
};

struct CompressionScan {
  double whole_text_ratio = 0.0;  // C(text) / |text|
  // Ratio windows are judged against; equals whole_text_ratio.
  double baseline_ratio = 0.0;
  std::vector<CompressionWindow> windows;
  std::vector<CompressionWindow> flagged;
  double max_ratio = 0.0;
};

// Scans word windows of cr_window_words with stride cr_window_words / 2,
// plus one window aligned to the end of the text. A window is flagged when
// its ratio exceeds baseline_ratio * (1 + cr_ratio_margin) and it adds at
// least 8 compressed bytes. Texts shorter than one window yield no windows.
CompressionScan CompressionAnomalies(std::string_view text,
                                     const AuditConfig& config);

// --- Embedding density -------------------------------------------------------

struct DensityResult {
  double density = 0.0;   // mean of the knn_k largest similarities
  double robust_z = 0.0;  // |density - median| / (1.4826 * MAD)
  bool flagged = false;
};

// Requires corpus.size() > knn_k.
absl::StatusOr<std::vector<DensityResult>> EmbeddingDensity(
    const std::vector<Sequence>& corpus, const SimilarityScorer& scorer,
    const AuditConfig& config);

// --- Report ------------------------------------------------------------------

struct AuditRecord {
  std::string sequence_id;
  std::vector<NgramEvidence> ngram_evidence;
  CompressionScan compression;
  DensityResult density;

  bool ngram_flag() const { return !ngram_evidence.empty(); }
  bool cr_flag() const { return !compression.flagged.empty(); }
  bool density_flag() const { return density.flagged; }
  bool any_flag() const { return ngram_flag() || cr_flag() || density_flag(); }
};

struct AuditSummary {
  size_t sequences = 0;
  size_t ngram_flagged = 0;
  size_t cr_flagged = 0;
  size_t density_flagged = 0;
  size_t any_flagged = 0;
  std::string scorer_name;
};

struct AuditReport {
  AuditConfig config;
  std::vector<AuditRecord> records;
  AuditSummary summary;
};

// Runs all three detectors. Detectors only emit evidence; nothing is
// removed from the corpus.
absl::StatusOr<AuditReport> RunAudit(const std::vector<Sequence>& corpus,
                                     const SimilarityScorer& scorer,
                                     const AuditConfig& config,
                                     size_t parallelism = 1);

nlohmann::ordered_json AuditRecordToJson(const AuditRecord& record);
nlohmann::ordered_json AuditSummaryToJson(const AuditSummary& summary,
                                          const AuditConfig& config);
// One JSON record per line followed by a summary line.
std::string SerializeAuditReport(const AuditReport& report);

}  // namespace wmtrace

#endif  // WMTRACE_STEALTH_AUDIT_H_
