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

#ifndef WMTRACE_REPORT_H_
#define WMTRACE_REPORT_H_

#include <string>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"

namespace wmtrace {

struct Series {
  std::string name;
  std::vector<std::pair<double, double>> points;  // sorted by x on output
};

struct Histogram {
  std::string name;
  std::vector<double> values;
  // Vertical reference lines, e.g. mu - 2 sigma and mu + 2 sigma.
  std::vector<std::pair<std::string, double>> markers;
  // Values drawn as separate ticks, e.g. watermarked t-values.
  std::vector<double> highlights;
};

struct ReportData {
  std::vector<Series> delta_t_series;  // Δt against K, one per sample
  std::vector<Series> t_series;        // t per sequence from run logs
  std::vector<Histogram> histograms;
};

// Reads run artifacts by their "kind" field: verification_run,
// ref_based_decision, null_distribution, ref_free_decision, power_study.
// Power-study CSV files (as written by the simulator) are also accepted.
absl::StatusOr<ReportData> CollectReport(const std::vector<std::string>& paths);

// Long-format CSV: figure,series,x,y.
std::string ReportCsv(const ReportData& data);

// Standalone SVG documents with no external references.
std::string LineChartSvg(const std::vector<Series>& series,
                         const std::string& title, const std::string& x_label,
                         const std::string& y_label);
std::string HistogramSvg(const Histogram& histogram, size_t bins = 20);

}  // namespace wmtrace

#endif  // WMTRACE_REPORT_H_
