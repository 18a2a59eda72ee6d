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

#include "wmtrace/report.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_replace.h"
#include "absl/strings/str_split.h"
#include "nlohmann/json.hpp"
#include "wmtrace/file_io.h"
#include "string_view_compat.h"

namespace wmtrace {

using json = nlohmann::json;

namespace {

constexpr std::string_view kPowerCsvHeader = "hypothesis,k_strength,trial,";

absl::Status AddPowerCsv(const std::string& path, const std::string& text,
                         ReportData& data) {
  std::map<size_t, Series> per_trial;
  bool header = true;
  for (absl::string_view line : absl::StrSplit(text, '\n', absl::SkipEmpty())) {
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> f = absl::StrSplit(line, ',');
    if (f.size() != 9) {
      return absl::InvalidArgumentError(
          absl::StrCat(path, ": malformed power-study row"));
    }
    if (f[0] != "H1") continue;
    size_t k = 0, trial = 0;
    double dt = 0.0;
    if (!absl::SimpleAtoi(f[1], &k) || !absl::SimpleAtoi(f[2], &trial) ||
        !absl::SimpleAtod(f[6], &dt)) {
      return absl::InvalidArgumentError(
          absl::StrCat(path, ": malformed power-study row"));
    }
    Series& s = per_trial[trial];
    s.name = absl::StrCat("trial ", trial);
    s.points.emplace_back(static_cast<double>(k), dt);
  }
  for (auto& [trial, s] : per_trial) data.delta_t_series.push_back(std::move(s));
  return absl::OkStatus();
}

absl::Status AddJson(const std::string& path, const json& j,
                     ReportData& data,
                     std::map<std::string, Series>& decisions) {
  const std::string kind = j.value("kind", "");
  if (kind == "verification_run") {
    if (!j["t_stat"].is_null() && j["t_stat"]["t"].is_number()) {
      Series s;
      s.name = j.value("sequence_id", path);
      s.points.emplace_back(static_cast<double>(data.t_series.size()),
                            j["t_stat"]["t"].get<double>());
      data.t_series.push_back(std::move(s));
    }
  } else if (kind == "ref_based_decision") {
    const std::string id = j.value("sequence_id", path);
    Series& s = decisions[id];
    s.name = id;
    s.points.emplace_back(j.at("k").get<double>(),
                          j.at("decision").at("delta_t").get<double>());
  } else if (kind == "null_distribution" || kind == "ref_free_study" ||
             kind == "ref_free_decision") {
    const json& n = kind == "null_distribution" ? j : j.at("null");
    Histogram h;
    h.name = absl::StrCat("null t-values (", path, ")");
    h.values = n.at("t_values").get<std::vector<double>>();
    const double mu = n.at("mu").get<double>();
    const double sigma = n.at("sigma").get<double>();
    const double k = n.value("k_sigma", 2.0);
    h.markers = {{"mu - k*sigma", mu - k * sigma},
                 {"mu + k*sigma", mu + k * sigma}};
    if (kind == "ref_free_study") {
      h.highlights = j.at("watermarked_t").get<std::vector<double>>();
    } else if (kind == "ref_free_decision") {
      h.highlights = {j.at("t").get<double>()};
    }
    data.histograms.push_back(std::move(h));
  } else if (kind == "power_study") {
    Series mean;
    mean.name = "mean";
    for (const json& p : j.at("delta_t_series")) {
      mean.points.emplace_back(p.at("k_strength").get<double>(),
                               p.at("mean_delta_t").get<double>());
    }
    data.delta_t_series.push_back(std::move(mean));
  } else {
    return absl::InvalidArgumentError(
        absl::StrCat(path, ": unrecognized artifact kind '", kind, "'"));
  }
  return absl::OkStatus();
}

std::string Escape(std::string_view s) {
  return absl::StrReplaceAll(internal::Av(s), {{"&", "&amp;"},
                                               {"<", "&lt;"},
                                               {">", "&gt;"},
                                               {"\"", "&quot;"}});
}

// Round step (1, 2 or 5 times a power of ten) giving about `target` ticks.
double NiceStep(double span, int target) {
  if (!(span > 0.0)) return 1.0;
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double r = raw / mag;
  return mag * (r < 1.5 ? 1.0 : r < 3.5 ? 2.0 : r < 7.5 ? 5.0 : 10.0);
}

constexpr std::array<std::string_view, 8> kPalette = {
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

struct Frame {
  double x0, x1, y0, y1;
  static constexpr double kW = 720, kH = 440, kL = 70, kR = 170, kT = 40,
                          kB = 50;
  double Px(double x) const {
    return kL + (x - x0) / (x1 - x0) * (kW - kL - kR);
  }
  double Py(double y) const {
    return kH - kB - (y - y0) / (y1 - y0) * (kH - kT - kB);
  }
};

void Axes(std::string& out, const Frame& f, const std::string& title,
          const std::string& x_label, const std::string& y_label) {
  absl::StrAppendFormat(
      &out,
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" "
      "viewBox=\"0 0 %d %d\" font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%%\" height=\"100%%\" fill=\"white\"/>\n"
      "<text x=\"%g\" y=\"24\" font-size=\"15\">%s</text>\n",
      static_cast<int>(Frame::kW), static_cast<int>(Frame::kH),
      static_cast<int>(Frame::kW), static_cast<int>(Frame::kH), Frame::kL,
      Escape(title));
  const double left = Frame::kL, right = Frame::kW - Frame::kR;
  const double top = Frame::kT, bottom = Frame::kH - Frame::kB;
  absl::StrAppendFormat(&out,
                        "<rect x=\"%g\" y=\"%g\" width=\"%g\" height=\"%g\" "
                        "fill=\"none\" stroke=\"#444\"/>\n",
                        left, top, right - left, bottom - top);
  const double xs = NiceStep(f.x1 - f.x0, 8);
  for (double x = std::ceil(f.x0 / xs) * xs; x <= f.x1 + 1e-9 * xs; x += xs) {
    absl::StrAppendFormat(
        &out,
        "<line x1=\"%.2f\" y1=\"%g\" x2=\"%.2f\" y2=\"%g\" stroke=\"#444\"/>"
        "<text x=\"%.2f\" y=\"%g\" text-anchor=\"middle\">%g</text>\n",
        f.Px(x), bottom, f.Px(x), bottom + 5, f.Px(x), bottom + 18, x);
  }
  const double ys = NiceStep(f.y1 - f.y0, 6);
  for (double y = std::ceil(f.y0 / ys) * ys; y <= f.y1 + 1e-9 * ys; y += ys) {
    absl::StrAppendFormat(
        &out,
        "<line x1=\"%g\" y1=\"%.2f\" x2=\"%g\" y2=\"%.2f\" stroke=\"#ddd\"/>"
        "<text x=\"%g\" y=\"%.2f\" text-anchor=\"end\">%g</text>\n",
        left, f.Py(y), right, f.Py(y), left - 6, f.Py(y) + 4, y);
  }
  absl::StrAppendFormat(
      &out,
      "<text x=\"%g\" y=\"%g\" text-anchor=\"middle\">%s</text>\n"
      "<text transform=\"translate(18 %g) rotate(-90)\" "
      "text-anchor=\"middle\">%s</text>\n",
      (left + right) / 2, Frame::kH - 12, Escape(x_label), (top + bottom) / 2,
      Escape(y_label));
}

Frame Bounds(double x0, double x1, double y0, double y1) {
  if (x1 <= x0) {
    x0 -= 1;
    x1 += 1;
  }
  if (y1 <= y0) {
    y0 -= 1;
    y1 += 1;
  }
  const double pad = 0.05 * (y1 - y0);
  return {x0, x1, y0 - pad, y1 + pad};
}

}  // namespace

absl::StatusOr<ReportData> CollectReport(const std::vector<std::string>& paths) {
  ReportData data;
  std::map<std::string, Series> decisions;
  for (const std::string& path : paths) {
    absl::StatusOr<std::string> text = ReadFile(path);
    if (!text.ok()) return text.status();
    if (text->rfind(kPowerCsvHeader, 0) == 0) {
      if (absl::Status s = AddPowerCsv(path, *text, data); !s.ok()) return s;
      continue;
    }
    json j = json::parse(*text, nullptr, false);
    if (j.is_discarded()) {
      return absl::InvalidArgumentError(
          absl::StrCat(path, ": not a JSON artifact or power-study CSV"));
    }
    try {
      if (absl::Status s = AddJson(path, j, data, decisions); !s.ok()) return s;
    } catch (const json::exception& e) {
      return absl::InvalidArgumentError(absl::StrCat(path, ": ", e.what()));
    }
  }
  for (auto& [id, s] : decisions) data.delta_t_series.push_back(std::move(s));
  for (Series& s : data.delta_t_series) {
    std::sort(s.points.begin(), s.points.end());
  }
  return data;
}

std::string ReportCsv(const ReportData& data) {
  std::string out = "figure,series,x,y\n";
  auto quote = [](const std::string& s) {
    return absl::StrCat("\"", absl::StrReplaceAll(s, {{"\"", "\"\""}}), "\"");
  };
  for (const Series& s : data.delta_t_series) {
    for (const auto& [x, y] : s.points) {
      absl::StrAppendFormat(&out, "delta_t_vs_k,%s,%.17g,%.17g\n",
                            quote(s.name), x, y);
    }
  }
  for (const Series& s : data.t_series) {
    for (const auto& [x, y] : s.points) {
      absl::StrAppendFormat(&out, "t_per_sequence,%s,%.17g,%.17g\n",
                            quote(s.name), x, y);
    }
  }
  for (size_t h = 0; h < data.histograms.size(); ++h) {
    const Histogram& hist = data.histograms[h];
    for (size_t i = 0; i < hist.values.size(); ++i) {
      absl::StrAppendFormat(&out, "null_histogram,%s,%d,%.17g\n",
                            quote(hist.name), i, hist.values[i]);
    }
    for (size_t i = 0; i < hist.highlights.size(); ++i) {
      absl::StrAppendFormat(&out, "null_histogram_highlight,%s,%d,%.17g\n",
                            quote(hist.name), i, hist.highlights[i]);
    }
  }
  return out;
}

std::string LineChartSvg(const std::vector<Series>& series,
                         const std::string& title, const std::string& x_label,
                         const std::string& y_label) {
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const Series& s : series) {
    for (const auto& [x, y] : s.points) {
      x0 = std::min(x0, x);
      x1 = std::max(x1, x);
      y0 = std::min(y0, y);
      y1 = std::max(y1, y);
    }
  }
  if (!std::isfinite(x0)) x0 = x1 = y0 = y1 = 0.0;
  const Frame f = Bounds(x0, x1, y0, y1);
  std::string out;
  Axes(out, f, title, x_label, y_label);
  for (size_t i = 0; i < series.size(); ++i) {
    const std::string_view color = kPalette[i % kPalette.size()];
    std::string pts;
    for (const auto& [x, y] : series[i].points) {
      absl::StrAppendFormat(&pts, "%.2f,%.2f ", f.Px(x), f.Py(y));
    }
    absl::StrAppendFormat(&out,
                          "<polyline points=\"%s\" fill=\"none\" "
                          "stroke=\"%s\" stroke-width=\"1.5\"/>\n",
                          pts, std::string(color));
    for (const auto& [x, y] : series[i].points) {
      absl::StrAppendFormat(&out,
                            "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" "
                            "fill=\"%s\"/>\n",
                            f.Px(x), f.Py(y), std::string(color));
    }
    if (i < 20) {
      const double ly = Frame::kT + 14.0 * static_cast<double>(i) + 8;
      const double lx = Frame::kW - Frame::kR + 12;
      absl::StrAppendFormat(
          &out,
          "<line x1=\"%g\" y1=\"%g\" x2=\"%g\" y2=\"%g\" stroke=\"%s\" "
          "stroke-width=\"2\"/><text x=\"%g\" y=\"%g\">%s</text>\n",
          lx, ly, lx + 16, ly, std::string(color), lx + 22, ly + 4,
          Escape(series[i].name));
    }
  }
  out += "</svg>\n";
  return out;
}

std::string HistogramSvg(const Histogram& h, size_t bins) {
  bins = std::max<size_t>(1, bins);
  double lo = INFINITY, hi = -INFINITY;
  for (double v : h.values) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (const auto& [name, v] : h.markers) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (double v : h.highlights) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!std::isfinite(lo)) lo = hi = 0.0;
  if (hi <= lo) {
    lo -= 1;
    hi += 1;
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<size_t> counts(bins, 0);
  for (double v : h.values) {
    size_t b = static_cast<size_t>((v - lo) / width);
    counts[std::min(b, bins - 1)]++;
  }
  const size_t peak = *std::max_element(counts.begin(), counts.end());
  const Frame f = Bounds(lo, hi, 0.0, static_cast<double>(std::max<size_t>(1, peak)));
  std::string out;
  Axes(out, f, h.name, "t", "count");
  for (size_t b = 0; b < bins; ++b) {
    const double x = lo + width * static_cast<double>(b);
    absl::StrAppendFormat(
        &out,
        "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" "
        "fill=\"#9ecae1\" stroke=\"#3182bd\"/>\n",
        f.Px(x), f.Py(static_cast<double>(counts[b])), f.Px(x + width) - f.Px(x),
        f.Py(0.0) - f.Py(static_cast<double>(counts[b])));
  }
  for (const auto& [name, v] : h.markers) {
    absl::StrAppendFormat(
        &out,
        "<line x1=\"%.2f\" y1=\"%g\" x2=\"%.2f\" y2=\"%g\" stroke=\"#555\" "
        "stroke-dasharray=\"4 3\"/><text x=\"%.2f\" y=\"%g\" "
        "font-size=\"10\">%s</text>\n",
        f.Px(v), Frame::kT, f.Px(v), Frame::kH - Frame::kB, f.Px(v) + 3,
        Frame::kT + 12, Escape(name));
  }
  for (double v : h.highlights) {
    absl::StrAppendFormat(
        &out,
        "<line x1=\"%.2f\" y1=\"%g\" x2=\"%.2f\" y2=\"%g\" stroke=\"#d62728\" "
        "stroke-width=\"2\"/>\n",
        f.Px(v), Frame::kT, f.Px(v), Frame::kH - Frame::kB);
  }
  out += "</svg>\n";
  return out;
}

}  // namespace wmtrace
