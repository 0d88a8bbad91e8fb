#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ixptk/scope.hpp"
#include "ixptk/time.hpp"
#include "ixptk/trace.hpp"

namespace ixptk {

// The four route categories. Exhaustive and mutually exclusive over the
// (passed through the IXP?, stayed in the country?) truth table.
enum class Category { Ixp, P2p, International, Misbehavior };

inline constexpr std::array<Category, 4> all_categories = {
    Category::Ixp, Category::P2p, Category::International, Category::Misbehavior};

inline const char* to_string(Category c) {
  switch (c) {
    case Category::Ixp: return "IXP";
    case Category::P2p: return "P2P";
    case Category::International: return "International";
    case Category::Misbehavior: return "Misbehavior";
  }
  return "?";
}

inline std::optional<Category> category_from_string(const std::string& s) {
  for (Category c : all_categories)
    if (s == to_string(c)) return c;
  return std::nullopt;
}

struct ClassifiedTrace {
  TraceRecord trace;
  Category category = Category::P2p;
  std::optional<int> ixp_hop_ttl;  // present iff category is IXP or Misbehavior
  WeekBucket week;
};

// Classifies one answered trace. Stars are neutral: only responding hops
// (including the destination) enter the two predicates. Private addresses
// count as in-country.
inline ClassifiedTrace classify(const TraceRecord& trace, const AddressScope& scope) {
  if (!trace.reached)
    throw std::invalid_argument("classify: trace " + trace.trace_id +
                                " did not obtain an answer from its target");
  bool has_ixp = false;
  bool all_domestic = true;
  std::optional<int> ixp_ttl;
  for (const auto& hop : trace.hops) {
    if (!hop.responded()) continue;
    switch (scope.membership(*hop.addr)) {
      case Membership::Ixp:
        has_ixp = true;
        if (!ixp_ttl) ixp_ttl = hop.ttl;
        break;
      case Membership::Domestic:
      case Membership::Private:
        break;
      case Membership::Foreign:
        all_domestic = false;
        break;
    }
  }
  ClassifiedTrace out;
  out.trace = trace;
  out.week = week_of(trace.ts);
  if (has_ixp)
    out.category = all_domestic ? Category::Ixp : Category::Misbehavior;
  else
    out.category = all_domestic ? Category::P2p : Category::International;
  if (has_ixp) out.ixp_hop_ttl = ixp_ttl;
  return out;
}

struct ClassifySummary {
  std::size_t classified = 0;
  std::size_t rejected_unreached = 0;
  std::size_t multi_ixp_hops = 0;  // anomalous: the IXP is a single switch
  std::vector<std::pair<std::size_t, std::string>> parse_errors;  // (line, message)
};

inline std::size_t count_ixp_hops(const TraceRecord& trace, const AddressScope& scope) {
  std::size_t n = 0;
  for (const auto& hop : trace.hops)
    if (hop.responded() && scope.membership(*hop.addr) == Membership::Ixp) ++n;
  return n;
}

// Classifies a JSON-lines stream in order. Unreached traces are counted and
// dropped; malformed lines are reported and skipped.
inline ClassifySummary classify_stream(
    std::istream& in, const AddressScope& scope,
    const std::function<void(const ClassifiedTrace&)>& on_trace) {
  ClassifySummary summary;
  read_trace_jsonl(
      in,
      [&](TraceRecord&& rec) {
        if (!rec.reached) {
          ++summary.rejected_unreached;
          return;
        }
        ClassifiedTrace ct = classify(rec, scope);
        if (ct.ixp_hop_ttl && count_ixp_hops(rec, scope) > 1) ++summary.multi_ixp_hops;
        ++summary.classified;
        on_trace(ct);
      },
      [&](std::size_t line, const std::string& msg) {
        summary.parse_errors.emplace_back(line, msg);
      });
  return summary;
}

inline std::vector<ClassifiedTrace> classify_records(const std::vector<TraceRecord>& recs,
                                                     const AddressScope& scope,
                                                     ClassifySummary* summary = nullptr) {
  std::vector<ClassifiedTrace> out;
  for (const auto& rec : recs) {
    if (!rec.reached) {
      if (summary) ++summary->rejected_unreached;
      continue;
    }
    out.push_back(classify(rec, scope));
    if (summary) ++summary->classified;
  }
  return out;
}

// Classified JSON line: the core record plus category / ixp_hop_ttl / week.
inline nlohmann::json to_json(const ClassifiedTrace& ct) {
  nlohmann::json j = to_json(ct.trace);
  j["category"] = to_string(ct.category);
  j["ixp_hop_ttl"] =
      ct.ixp_hop_ttl ? nlohmann::json(*ct.ixp_hop_ttl) : nlohmann::json(nullptr);
  j["week"] = to_string(ct.week);
  return j;
}

inline std::string to_jsonl(const ClassifiedTrace& ct) { return to_json(ct).dump(); }

}  // namespace ixptk
