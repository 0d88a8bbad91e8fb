#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "ixptk/clock.hpp"
#include "ixptk/ip.hpp"
#include "ixptk/targets.hpp"
#include "ixptk/trace.hpp"

namespace ixptk {

struct TraceConfig {
  int max_ttl = 30;
  int attempts_per_ttl = 2;
  int per_probe_timeout_ms = 2000;
  int flow_id = 1;          // constant for the lifetime of one trace
  int gap_limit = 5;        // consecutive stars before giving up
  int probes_per_second = 20;

  void validate() const {
    if (max_ttl < 1 || attempts_per_ttl < 1 || per_probe_timeout_ms < 1 ||
        gap_limit < 1 || probes_per_second < 1 || flow_id < 0)
      throw std::invalid_argument("TraceConfig: all limits must be strictly positive");
  }
};

enum class ReplyKind { TtlExceeded, DestinationReply, Timeout };

struct ProbeReply {
  Addr responder = 0;
  std::int64_t rtt_us = 0;
  ReplyKind kind = ReplyKind::Timeout;
};

// A probing backend answers one TTL-limited probe. Implementations: the
// synthetic network (simnet), raw-socket ICMP, and file replay. The flow_id
// is the Paris flow identifier: everything a load balancer hashes must be a
// pure function of it, so equal flow ids always see the same path.
class ProbingBackend {
 public:
  virtual ~ProbingBackend() = default;
  virtual ProbeReply send_probe(Addr dst, int ttl, int flow_id) = 0;
  virtual Addr source_addr() const = 0;
};

struct ProbeContext {
  ProbingBackend& backend;
  Clock& clock;
  RateLimiter* limiter = nullptr;  // optional shared cap across traces
  std::string probe_id = "probe";
};

// Runs one Paris traceroute: walks TTL 1..max_ttl with a constant flow id,
// stops on a destination reply, the TTL cap, or gap_limit consecutive stars.
inline TraceRecord trace(ProbeContext& ctx, Addr dst, const TraceConfig& cfg,
                         std::string trace_id) {
  cfg.validate();
  TraceRecord rec;
  rec.trace_id = std::move(trace_id);
  rec.probe_id = ctx.probe_id;
  rec.ts = ctx.clock.now_us() / 1'000'000;
  rec.src = ctx.backend.source_addr();
  rec.dst = dst;
  rec.flow_id = cfg.flow_id;

  int consecutive_stars = 0;
  for (int ttl = 1; ttl <= cfg.max_ttl; ++ttl) {
    ProbeReply reply;
    for (int attempt = 0; attempt < cfg.attempts_per_ttl; ++attempt) {
      const std::int64_t sent_at =
          ctx.limiter ? ctx.limiter->acquire() : ctx.clock.now_us();
      reply = ctx.backend.send_probe(dst, ttl, cfg.flow_id);
      // Advance time past this probe whether it answered or timed out; a
      // no-op for real backends that blocked for the duration themselves.
      const std::int64_t took = reply.kind == ReplyKind::Timeout
                                    ? std::int64_t{cfg.per_probe_timeout_ms} * 1000
                                    : reply.rtt_us;
      ctx.clock.sleep_until_us(sent_at + took);
      if (reply.kind != ReplyKind::Timeout) break;
    }
    if (reply.kind == ReplyKind::Timeout) {
      rec.hops.push_back(Hop{ttl, std::nullopt, std::nullopt});
      if (++consecutive_stars >= cfg.gap_limit) break;
      continue;
    }
    consecutive_stars = 0;
    rec.hops.push_back(Hop{ttl, reply.responder, reply.rtt_us});
    if (reply.kind == ReplyKind::DestinationReply && reply.responder == dst) {
      rec.reached = true;
      break;
    }
  }
  validate(rec);
  return rec;
}

// Daily probing window in minutes of the UTC day. A zero-length window never
// admits a probe.
struct DutyWindow {
  int start_minute = 0;
  int duration_minutes = 20 * 60;  // probe 20 hours per day by default

  bool contains(std::int64_t epoch_seconds) const {
    if (duration_minutes <= 0) return false;
    if (duration_minutes >= 24 * 60) return true;
    const int minute = static_cast<int>((epoch_seconds % 86400 + 86400) % 86400 / 60);
    const int rel = (minute - start_minute + 24 * 60) % (24 * 60);
    return rel < duration_minutes;
  }

  // Next instant at or after now_us that falls inside the window.
  std::int64_t next_open_us(std::int64_t now_us) const {
    if (contains(now_us / 1'000'000)) return now_us;
    const std::int64_t day_us = std::int64_t{86400} * 1'000'000;
    const std::int64_t day_start = now_us / day_us * day_us;
    std::int64_t open = day_start + std::int64_t{start_minute} * 60 * 1'000'000;
    if (open <= now_us) open += day_us;
    return open;
  }
};

struct SweepSummary {
  std::size_t reached = 0;
  std::size_t unreached = 0;
  std::size_t errors = 0;  // unroutable targets, backend failures
  bool aborted = false;
  std::string abort_reason;

  std::size_t total() const { return reached + unreached; }
};

using TraceSink = std::function<void(const TraceRecord&)>;

// Probes every target at most once, only inside the duty window. Workers
// share the context's rate limiter; the sink sees completed records in
// whatever order traces finish. A sink failure aborts the sweep.
inline SweepSummary run_sweep(const std::vector<Target>& targets, const TraceConfig& cfg,
                              const DutyWindow& window, ProbeContext& ctx,
                              const TraceSink& sink, int workers = 1,
                              const std::string& trace_id_prefix = "t") {
  cfg.validate();
  SweepSummary summary;
  if (window.duration_minutes <= 0 || targets.empty()) return summary;

  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;  // guards sink + summary

  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= targets.size() || stop.load()) return;
      const std::int64_t now = ctx.clock.now_us();
      if (!window.contains(now / 1'000'000)) ctx.clock.sleep_until_us(window.next_open_us(now));
      char id[32];
      std::snprintf(id, sizeof id, "%06zu", i);
      try {
        TraceRecord rec = trace(ctx, targets[i].addr, cfg, trace_id_prefix + id);
        std::scoped_lock lock(mu);
        if (stop.load()) return;
        try {
          sink(rec);
        } catch (const std::exception& e) {
          summary.aborted = true;
          summary.abort_reason = std::string("sink failure: ") + e.what();
          stop.store(true);
          return;
        }
        ++(rec.reached ? summary.reached : summary.unreached);
      } catch (const std::exception&) {
        std::scoped_lock lock(mu);
        ++summary.errors;
      }
    }
  };

  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return summary;
}

}  // namespace ixptk
