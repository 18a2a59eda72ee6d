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

#ifndef WMTRACE_STATS_H_
#define WMTRACE_STATS_H_

#include <span>

namespace wmtrace {

// Two-pass estimators. Empty input yields 0; SampleVariance of fewer than
// two values yields 0.
double Mean(std::span<const double> values);
double SampleVariance(std::span<const double> values);
double SampleStdDev(std::span<const double> values);

// Linear-interpolation quantile (the "type 7" definition), q in [0, 1].
double Quantile(std::span<const double> values, double q);
double Median(std::span<const double> values);

// Median absolute deviation, unscaled.
double MedianAbsoluteDeviation(std::span<const double> values);

// Scale factor making MAD a consistent estimator of a normal sigma.
inline constexpr double kMadToSigma = 1.4826;

}  // namespace wmtrace

#endif  // WMTRACE_STATS_H_
