#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ixptk/classify.hpp"
#include "ixptk/scope.hpp"
#include "ixptk/time.hpp"
#include "ixptk/trace.hpp"

namespace ixptk {

// Box plot summary: 5th percentile, quartiles, 95th percentile plus mean.
struct BoxStats {
  double p5 = 0, q1 = 0, median = 0, q3 = 0, p95 = 0, mean = 0;
  std::size_t count = 0;
};

// Percentile by linear interpolation between closest ranks on a sorted
// sample (rank = p/100 * (n-1)).
inline double percentile_sorted(const std::vector<double>& sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("percentile of empty sample");
  const double rank = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(rank);
  const double frac = rank - static_cast<double>(lo);
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline BoxStats box_stats(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("box_stats: empty sample list");
  std::sort(samples.begin(), samples.end());
  BoxStats s;
  s.p5 = percentile_sorted(samples, 5);
  s.q1 = percentile_sorted(samples, 25);
  s.median = percentile_sorted(samples, 50);
  s.q3 = percentile_sorted(samples, 75);
  s.p95 = percentile_sorted(samples, 95);
  double sum = 0;  // summed in sorted order, so permutation-invariant
  for (double v : samples) sum += v;
  s.mean = sum / static_cast<double>(samples.size());
  s.count = samples.size();
  return s;
}

// Path length of an answered trace: the TTL at which the destination replied.
inline int hop_count(const TraceRecord& trace) {
  if (!trace.reached) throw std::invalid_argument("hop_count: trace not reached");
  return trace.last_responding()->ttl;
}

// The RTT metric: answer time of the last responding hop before the
// destination (stars skipped backward). NAT devices at the last hop inflate
// its own answer time, so the destination's RTT is not used. Empty when the
// destination is the only responding hop; callers tally those separately.
inline std::optional<std::int64_t> effective_rtt(const TraceRecord& trace) {
  if (!trace.reached) throw std::invalid_argument("effective_rtt: trace not reached");
  const auto responding = trace.responding_hops();
  if (responding.size() < 2) return std::nullopt;
  return *responding[responding.size() - 2]->rtt_us;
}

using CategoryPct = std::map<Category, double>;

// A route is a distinct (src, dst) pair seen within the week; it counts in
// every category one of its traces hit, so the percentages may sum past 100.
inline std::map<WeekBucket, CategoryPct> weekly_local_routes(
    const std::vector<ClassifiedTrace>& classified) {
  struct WeekAcc {
    std::set<std::pair<Addr, Addr>> routes;
    std::map<Category, std::set<std::pair<Addr, Addr>>> by_category;
  };
  std::map<WeekBucket, WeekAcc> acc;
  for (const auto& ct : classified) {
    auto& w = acc[ct.week];
    const std::pair<Addr, Addr> route{ct.trace.src, ct.trace.dst};
    w.routes.insert(route);
    w.by_category[ct.category].insert(route);
  }
  std::map<WeekBucket, CategoryPct> out;
  for (const auto& [week, w] : acc) {
    CategoryPct pct;
    for (Category c : all_categories) {
      const auto it = w.by_category.find(c);
      const std::size_t n = it == w.by_category.end() ? 0 : it->second.size();
      pct[c] = 100.0 * static_cast<double>(n) / static_cast<double>(w.routes.size());
    }
    out[week] = std::move(pct);
  }
  return out;
}

// Fraction of the week's traceroutes per category; a partition, so the four
// percentages always sum to 100.
inline std::map<WeekBucket, CategoryPct> weekly_available_time(
    const std::vector<ClassifiedTrace>& classified) {
  std::map<WeekBucket, std::map<Category, std::size_t>> counts;
  std::map<WeekBucket, std::size_t> totals;
  for (const auto& ct : classified) {
    ++counts[ct.week][ct.category];
    ++totals[ct.week];
  }
  std::map<WeekBucket, CategoryPct> out;
  for (const auto& [week, per_cat] : counts) {
    CategoryPct pct;
    for (Category c : all_categories) {
      const auto it = per_cat.find(c);
      const std::size_t n = it == per_cat.end() ? 0 : it->second;
      pct[c] = 100.0 * static_cast<double>(n) / static_cast<double>(totals[week]);
    }
    out[week] = std::move(pct);
  }
  return out;
}

// One positive RTT difference between adjacent responding hops, tagged with
// its signed hop distance from the IXP (or from the collapsed foreign
// segment on International routes).
struct HopOffsetSample {
  int offset = 0;
  std::int64_t diff_us = 0;
  Category category = Category::Ixp;
  std::string probe_id;
};

struct InterhopSeries {
  std::map<std::pair<Category, int>, std::vector<HopOffsetSample>> samples;
  std::size_t skipped_traces = 0;      // fewer than two responding hops
  std::size_t multi_foreign_runs = 0;  // International traces with >1 foreign run
};

namespace detail {

struct VirtualHop {
  int offset = 0;
  std::int64_t rtt_us = 0;
};

inline void emit_diffs(const std::vector<VirtualHop>& seq, Category cat,
                       const std::string& probe_id, InterhopSeries& out) {
  for (std::size_t i = 1; i < seq.size(); ++i) {
    const std::int64_t diff = seq[i].rtt_us - seq[i - 1].rtt_us;
    if (diff < 0) continue;  // different instants; negatives carry no signal
    out.samples[{cat, seq[i].offset}].push_back(
        HopOffsetSample{seq[i].offset, diff, cat, probe_id});
  }
}

}  // namespace detail

// Aligns adjacent-hop RTT differences on the IXP. For IXP routes the anchor
// is the IXP hop. For International routes the first maximal run of
// consecutive foreign hops is collapsed into a single virtual hop at offset
// zero (its RTT is the run's last hop), the hop before it is the border
// gateway at offset -1. Only IXP- and International-classified traces with
// at least two responding hops contribute.
inline InterhopSeries interhop_series(const std::vector<ClassifiedTrace>& classified,
                                      const AddressScope& scope) {
  InterhopSeries out;
  for (const auto& ct : classified) {
    if (ct.category != Category::Ixp && ct.category != Category::International) continue;
    const auto responding = ct.trace.responding_hops();
    if (responding.size() < 2) {
      ++out.skipped_traces;
      continue;
    }
    std::vector<detail::VirtualHop> seq;
    if (ct.category == Category::Ixp) {
      if (!ct.ixp_hop_ttl)
        throw std::logic_error("interhop_series: IXP trace " + ct.trace.trace_id +
                               " lacks ixp_hop_ttl");
      std::optional<int> anchor;
      for (std::size_t i = 0; i < responding.size(); ++i)
        if (responding[i]->ttl == *ct.ixp_hop_ttl) anchor = static_cast<int>(i);
      if (!anchor)
        throw std::logic_error("interhop_series: ixp_hop_ttl not among responding hops");
      for (std::size_t i = 0; i < responding.size(); ++i)
        seq.push_back({static_cast<int>(i) - *anchor, *responding[i]->rtt_us});
    } else {
      std::optional<std::size_t> run_start, run_end;
      bool later_run = false;
      for (std::size_t i = 0; i < responding.size(); ++i) {
        const bool foreign = scope.membership(*responding[i]->addr) == Membership::Foreign;
        if (!foreign) continue;
        if (!run_start) {
          run_start = run_end = i;
        } else if (i == *run_end + 1) {
          run_end = i;
        } else {
          later_run = true;
        }
      }
      if (!run_start)
        throw std::logic_error("interhop_series: International trace " +
                               ct.trace.trace_id + " has no foreign hop");
      if (later_run) ++out.multi_foreign_runs;
      for (std::size_t i = 0; i < *run_start; ++i)
        seq.push_back({static_cast<int>(i) - static_cast<int>(*run_start),
                       *responding[i]->rtt_us});
      seq.push_back({0, *responding[*run_end]->rtt_us});
      for (std::size_t i = *run_end + 1; i < responding.size(); ++i)
        seq.push_back({static_cast<int>(i - *run_end), *responding[i]->rtt_us});
    }
    detail::emit_diffs(seq, ct.category, ct.trace.probe_id, out);
  }
  return out;
}

// Everything the weekly evolution plots need, one entry per ISO week.
struct WeeklyReport {
  WeekBucket week;
  CategoryPct local_routes_pct;
  CategoryPct available_time_pct;
  std::map<Category, BoxStats> hops;
  std::map<Category, BoxStats> rtt;  // microseconds, penultimate-hop rule
  std::size_t route_count = 0;
  std::size_t trace_count = 0;
  std::size_t rtt_excluded = 0;  // destination was the only responding hop
};

inline std::vector<WeeklyReport> build_weekly_report(
    const std::vector<ClassifiedTrace>& classified) {
  auto local = weekly_local_routes(classified);
  auto avail = weekly_available_time(classified);

  struct WeekAcc {
    std::map<Category, std::vector<double>> hops, rtt;
    std::set<std::pair<Addr, Addr>> routes;
    std::size_t traces = 0, rtt_excluded = 0;
  };
  std::map<WeekBucket, WeekAcc> acc;
  for (const auto& ct : classified) {
    auto& w = acc[ct.week];
    ++w.traces;
    w.routes.insert({ct.trace.src, ct.trace.dst});
    w.hops[ct.category].push_back(static_cast<double>(hop_count(ct.trace)));
    if (auto rtt = effective_rtt(ct.trace))
      w.rtt[ct.category].push_back(static_cast<double>(*rtt));
    else
      ++w.rtt_excluded;
  }

  std::vector<WeeklyReport> out;
  for (auto& [week, w] : acc) {
    WeeklyReport rep;
    rep.week = week;
    rep.local_routes_pct = local[week];
    rep.available_time_pct = avail[week];
    for (auto& [cat, samples] : w.hops) rep.hops[cat] = box_stats(std::move(samples));
    for (auto& [cat, samples] : w.rtt) rep.rtt[cat] = box_stats(std::move(samples));
    rep.route_count = w.routes.size();
    rep.trace_count = w.traces;
    rep.rtt_excluded = w.rtt_excluded;
    out.push_back(std::move(rep));
  }
  return out;
}

// --- CSV output -----------------------------------------------------------
// One file per figure; columns fixed. All reals use '.' decimals.

namespace detail {

inline void write_box_row(std::ostream& os, const BoxStats& s) {
  os << format_fixed(s.p5, 4) << ',' << format_fixed(s.q1, 4) << ','
     << format_fixed(s.median, 4) << ',' << format_fixed(s.q3, 4) << ','
     << format_fixed(s.p95, 4);
}

inline void write_weekly_box_csv(std::ostream& os,
                                 const std::vector<WeeklyReport>& reports,
                                 std::map<Category, BoxStats> WeeklyReport::* field) {
  os << "week,category,p5,q1,median,q3,p95,mean,count\n";
  for (const auto& rep : reports) {
    for (Category c : all_categories) {
      const auto& stats = rep.*field;
      auto it = stats.find(c);
      if (it == stats.end()) continue;
      os << to_string(rep.week) << ',' << to_string(c) << ',';
      write_box_row(os, it->second);
      os << ',' << format_fixed(it->second.mean, 4) << ',' << it->second.count << '\n';
    }
  }
}

inline void write_weekly_pct_csv(std::ostream& os,
                                 const std::vector<WeeklyReport>& reports,
                                 CategoryPct WeeklyReport::* field) {
  os << "week,category,pct\n";
  for (const auto& rep : reports)
    for (Category c : all_categories) {
      const auto& pct = rep.*field;
      auto it = pct.find(c);
      os << to_string(rep.week) << ',' << to_string(c) << ','
         << format_fixed(it == pct.end() ? 0.0 : it->second, 4) << '\n';
    }
}

}  // namespace detail

inline void write_hops_weekly_csv(std::ostream& os,
                                  const std::vector<WeeklyReport>& reports) {
  detail::write_weekly_box_csv(os, reports, &WeeklyReport::hops);
}

inline void write_rtt_weekly_csv(std::ostream& os,
                                 const std::vector<WeeklyReport>& reports) {
  detail::write_weekly_box_csv(os, reports, &WeeklyReport::rtt);
}

inline void write_local_routes_csv(std::ostream& os,
                                   const std::vector<WeeklyReport>& reports) {
  detail::write_weekly_pct_csv(os, reports, &WeeklyReport::local_routes_pct);
}

inline void write_available_time_csv(std::ostream& os,
                                     const std::vector<WeeklyReport>& reports) {
  detail::write_weekly_pct_csv(os, reports, &WeeklyReport::available_time_pct);
}

inline void write_interhop_csv(std::ostream& os, const InterhopSeries& series) {
  os << "category,offset,p5,q1,median,q3,p95,count\n";
  for (Category c : all_categories) {
    for (const auto& [key, samples] : series.samples) {
      if (key.first != c || samples.empty()) continue;
      std::vector<double> diffs;
      diffs.reserve(samples.size());
      for (const auto& s : samples) diffs.push_back(static_cast<double>(s.diff_us));
      const BoxStats stats = box_stats(std::move(diffs));
      os << to_string(c) << ',' << key.second << ',';
      detail::write_box_row(os, stats);
      os << ',' << stats.count << '\n';
    }
  }
}

inline void write_interhop_by_probe_csv(std::ostream& os, const InterhopSeries& series) {
  // (probe, category, offset) -> diffs
  std::map<std::string, std::map<std::pair<Category, int>, std::vector<double>>> per_probe;
  for (const auto& [key, samples] : series.samples)
    for (const auto& s : samples)
      per_probe[s.probe_id][key].push_back(static_cast<double>(s.diff_us));
  os << "probe,category,offset,p5,q1,median,q3,p95,count\n";
  for (auto& [probe, by_key] : per_probe) {
    for (Category c : all_categories) {
      for (auto& [key, diffs] : by_key) {
        if (key.first != c || diffs.empty()) continue;
        const BoxStats stats = box_stats(std::move(diffs));
        os << probe << ',' << to_string(c) << ',' << key.second << ',';
        detail::write_box_row(os, stats);
        os << ',' << stats.count << '\n';
      }
    }
  }
}

}  // namespace ixptk
