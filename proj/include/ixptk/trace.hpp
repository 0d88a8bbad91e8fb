#pragma once

#include <cstdint>
#include <functional>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ixptk/ip.hpp"

namespace ixptk {

// One TTL of a traceroute. addr absent = star (no reply).
struct Hop {
  int ttl = 0;
  std::optional<Addr> addr;
  std::optional<std::int64_t> rtt_us;

  bool responded() const { return addr.has_value(); }
  bool operator==(const Hop&) const = default;
};

struct TraceRecord {
  std::string trace_id;
  std::string probe_id;
  std::int64_t ts = 0;  // seconds since epoch, UTC
  Addr src = 0;
  Addr dst = 0;
  int flow_id = 0;
  std::vector<Hop> hops;
  bool reached = false;

  const Hop* last_responding() const {
    for (auto it = hops.rbegin(); it != hops.rend(); ++it)
      if (it->responded()) return &*it;
    return nullptr;
  }

  std::vector<const Hop*> responding_hops() const {
    std::vector<const Hop*> out;
    for (const auto& h : hops)
      if (h.responded()) out.push_back(&h);
    return out;
  }

  bool operator==(const TraceRecord&) const = default;
};

// Enforces the record invariants shared by the probe, the collector and the
// analysis side: strictly ascending TTLs, rtt present iff addr present, and
// reached consistent with the last responding hop.
inline void validate(const TraceRecord& rec) {
  int prev_ttl = 0;
  for (const auto& h : rec.hops) {
    if (h.ttl < 1) throw std::runtime_error("trace " + rec.trace_id + ": hop ttl < 1");
    if (h.ttl <= prev_ttl)
      throw std::runtime_error("trace " + rec.trace_id + ": hop ttls not strictly ascending");
    if (h.addr.has_value() != h.rtt_us.has_value())
      throw std::runtime_error("trace " + rec.trace_id + ": rtt_us must be present iff addr is");
    if (h.rtt_us && *h.rtt_us < 0)
      throw std::runtime_error("trace " + rec.trace_id + ": negative rtt");
    prev_ttl = h.ttl;
  }
  const Hop* last = rec.last_responding();
  const bool reaches = last != nullptr && *last->addr == rec.dst;
  if (rec.reached != reaches)
    throw std::runtime_error("trace " + rec.trace_id +
                             ": reached flag inconsistent with last responding hop");
  if (rec.reached && rec.hops.empty())
    throw std::runtime_error("trace " + rec.trace_id + ": reached with no hops");
}

// --- JSON-lines schema -------------------------------------------------
// {"trace_id":..,"probe_id":..,"ts":..,"src":"a.b.c.d","dst":"a.b.c.d",
//  "flow_id":..,"reached":..,"hops":[{"ttl":..,"addr":..|null,"rtt_us":..|null}]}
// This is the wire and on-disk format everywhere; field names are fixed.

inline nlohmann::json to_json(const TraceRecord& rec) {
  nlohmann::json hops = nlohmann::json::array();
  for (const auto& h : rec.hops) {
    nlohmann::json j;
    j["ttl"] = h.ttl;
    j["addr"] = h.addr ? nlohmann::json(format_ipv4(*h.addr)) : nlohmann::json(nullptr);
    j["rtt_us"] = h.rtt_us ? nlohmann::json(*h.rtt_us) : nlohmann::json(nullptr);
    hops.push_back(std::move(j));
  }
  nlohmann::json j;
  j["trace_id"] = rec.trace_id;
  j["probe_id"] = rec.probe_id;
  j["ts"] = rec.ts;
  j["src"] = format_ipv4(rec.src);
  j["dst"] = format_ipv4(rec.dst);
  j["flow_id"] = rec.flow_id;
  j["reached"] = rec.reached;
  j["hops"] = std::move(hops);
  return j;
}

inline Addr addr_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string())
    throw std::runtime_error(std::string("missing or non-string field '") + key + "'");
  auto a = parse_ipv4(j[key].get<std::string>());
  if (!a) throw std::runtime_error(std::string("malformed address in field '") + key + "'");
  return *a;
}

inline TraceRecord trace_from_json(const nlohmann::json& j) {
  TraceRecord rec;
  try {
    rec.trace_id = j.at("trace_id").get<std::string>();
    rec.probe_id = j.at("probe_id").get<std::string>();
    rec.ts = j.at("ts").get<std::int64_t>();
    rec.src = addr_field(j, "src");
    rec.dst = addr_field(j, "dst");
    rec.flow_id = j.at("flow_id").get<int>();
    rec.reached = j.at("reached").get<bool>();
    for (const auto& hj : j.at("hops")) {
      Hop h;
      h.ttl = hj.at("ttl").get<int>();
      if (!hj.at("addr").is_null()) {
        auto a = parse_ipv4(hj["addr"].get<std::string>());
        if (!a) throw std::runtime_error("malformed hop addr");
        h.addr = *a;
      }
      if (!hj.at("rtt_us").is_null()) h.rtt_us = hj["rtt_us"].get<std::int64_t>();
      rec.hops.push_back(h);
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("bad trace record: ") + e.what());
  }
  validate(rec);
  return rec;
}

// Single canonical line (keys in nlohmann's sorted order, no whitespace).
// Batch checksums hash these exact bytes.
inline std::string to_jsonl(const TraceRecord& rec) { return to_json(rec).dump(); }

inline TraceRecord trace_from_jsonl(const std::string& line) {
  return trace_from_json(nlohmann::json::parse(line));
}

// Reads JSON-lines, invoking on_record per good record and on_error with
// (line number, message) per bad one. Blank lines are skipped.
inline void read_trace_jsonl(
    std::istream& in, const std::function<void(TraceRecord&&)>& on_record,
    const std::function<void(size_t, const std::string&)>& on_error) {
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      on_record(trace_from_jsonl(line));
    } catch (const std::exception& e) {
      on_error(line_no, e.what());
    }
  }
}

}  // namespace ixptk
