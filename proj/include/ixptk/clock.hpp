#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <mutex>
#include <thread>

namespace ixptk {

// Time source in microseconds since the epoch. The virtual variant lets the
// scheduler, rate limiter and simnet run a 20-hour probing day in
// milliseconds of wall time.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_us() = 0;
  virtual void sleep_until_us(std::int64_t t) = 0;
  void sleep_us(std::int64_t d) { sleep_until_us(now_us() + d); }
};

class SystemClock : public Clock {
 public:
  std::int64_t now_us() override {
    return std::chrono::duration_cast<std::chrono::microseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
  }
  void sleep_until_us(std::int64_t t) override {
    const std::int64_t now = now_us();
    if (t > now) std::this_thread::sleep_for(std::chrono::microseconds(t - now));
  }
};

// Sleeping advances time instead of blocking. Monotone under concurrent use.
class VirtualClock : public Clock {
 public:
  explicit VirtualClock(std::int64_t start_us = 0) : now_(start_us) {}

  std::int64_t now_us() override { return now_.load(std::memory_order_relaxed); }

  void sleep_until_us(std::int64_t t) override {
    std::int64_t cur = now_.load(std::memory_order_relaxed);
    while (cur < t && !now_.compare_exchange_weak(cur, t, std::memory_order_relaxed)) {
    }
  }

  void advance_us(std::int64_t d) { now_.fetch_add(d, std::memory_order_relaxed); }

 private:
  std::atomic<std::int64_t> now_;
};

// Global probe-rate cap: at most `per_second` acquisitions in any sliding
// one-second window, enforced across all traces of a sweep.
class RateLimiter {
 public:
  RateLimiter(Clock& clock, int per_second) : clock_(clock), per_second_(per_second) {}

  // Blocks (or advances a virtual clock) until a slot is free, then records
  // and returns the acquisition timestamp.
  std::int64_t acquire() {
    std::scoped_lock lock(m_);
    std::int64_t now = clock_.now_us();
    for (;;) {
      while (!window_.empty() && window_.front() <= now - 1'000'000) window_.pop_front();
      if (static_cast<int>(window_.size()) < per_second_) break;
      clock_.sleep_until_us(window_.front() + 1'000'000);
      now = clock_.now_us();
    }
    window_.push_back(now);
    return now;
  }

 private:
  Clock& clock_;
  int per_second_;
  std::mutex m_;
  std::deque<std::int64_t> window_;
};

}  // namespace ixptk
