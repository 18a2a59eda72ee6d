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

#include "wmtrace/rate_limiter.h"

#include <algorithm>
#include <thread>

namespace wmtrace {
namespace {

class RealClock : public Clock {
 public:
  TimePoint Now() override {
    return std::chrono::time_point_cast<Duration>(
        std::chrono::steady_clock::now());
  }
  void SleepFor(Duration d) override {
    if (d > Duration::zero()) std::this_thread::sleep_for(d);
  }
};

}  // namespace

Clock& Clock::Real() {
  static RealClock* clock = new RealClock();
  return *clock;
}

Clock::TimePoint ManualClock::Now() {
  std::lock_guard<std::mutex> lock(mu_);
  return now_;
}

void ManualClock::SleepFor(Duration d) {
  std::lock_guard<std::mutex> lock(mu_);
  if (d > Duration::zero()) now_ += d;
}

RateLimiter::RateLimiter(double requests_per_second, Clock& clock)
    : interval_(std::chrono::duration_cast<Clock::Duration>(
          std::chrono::duration<double>(1.0 / requests_per_second))),
      clock_(clock) {}

void RateLimiter::Acquire() {
  Clock::TimePoint slot;
  {
    std::lock_guard<std::mutex> lock(mu_);
    const Clock::TimePoint now = clock_.Now();
    slot = started_ ? std::max(now, next_slot_) : now;
    started_ = true;
    next_slot_ = slot + interval_;
  }
  const Clock::Duration wait = slot - clock_.Now();
  if (wait > Clock::Duration::zero()) clock_.SleepFor(wait);
}

}  // namespace wmtrace
