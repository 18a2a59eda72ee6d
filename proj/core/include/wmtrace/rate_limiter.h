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

#ifndef WMTRACE_RATE_LIMITER_H_
#define WMTRACE_RATE_LIMITER_H_

#include <chrono>
#include <mutex>

namespace wmtrace {

// Time source for the limiter and retry backoff; tests substitute a manual
// clock whose SleepFor advances time instantly.
class Clock {
 public:
  using Duration = std::chrono::nanoseconds;
  using TimePoint = std::chrono::time_point<std::chrono::steady_clock, Duration>;

  virtual ~Clock() = default;
  virtual TimePoint Now() = 0;
  virtual void SleepFor(Duration d) = 0;

  static Clock& Real();
};

class ManualClock : public Clock {
 public:
  TimePoint Now() override;
  void SleepFor(Duration d) override;
  void Advance(Duration d) { SleepFor(d); }

 private:
  std::mutex mu_;
  TimePoint now_{};
};

// Token bucket with capacity one: in any interval of length T at most
// rate * T + 1 acquisitions complete. Safe for concurrent Acquire().
class RateLimiter {
 public:
  RateLimiter(double requests_per_second, Clock& clock);

  void Acquire();

 private:
  const Clock::Duration interval_;
  Clock& clock_;
  std::mutex mu_;
  Clock::TimePoint next_slot_{};
  bool started_ = false;
};

}  // namespace wmtrace

#endif  // WMTRACE_RATE_LIMITER_H_
