#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "ixptk/ip.hpp"
#include "ixptk/targets.hpp"
#include "ixptk/time.hpp"

namespace ixptk {

// One port-scan data point. Scans are ingested, never executed, by this
// toolkit; the input is ZMap-style output.
struct ScanObservation {
  std::int64_t round_id = 0;
  std::int64_t ts = 0;
  Addr addr = 0;
  std::uint16_t port = 0;
  bool open = false;
};

// Ports covering http, ftp, ssh, e-mail, VoIP, streaming and secured e-mail.
inline const std::vector<std::uint16_t>& default_scan_ports() {
  static const std::vector<std::uint16_t> ports = {21,  22,  25,  80,  110, 143,
                                                   443, 465, 554, 993, 995, 5060};
  return ports;
}

// Tracks per-(addr, port) presence over the last five scan rounds. A service
// is active when it was open in at least 3 of those 5: occasional port
// openings and single missed scans both wash out.
class ServiceStateStore {
 public:
  static constexpr int kWindowRounds = 5;
  static constexpr int kActiveThreshold = 3;

  static bool window_active(std::uint8_t window) {
    return std::popcount(static_cast<unsigned>(window & 0x1f)) >= kActiveThreshold;
  }

  bool has_rounds() const { return !rounds_.empty(); }
  std::int64_t last_round_id() const {
    if (rounds_.empty()) throw std::logic_error("service store: no rounds ingested");
    return rounds_.back().round_id;
  }

  // All observations must share one round id, strictly greater than anything
  // ingested before. Pairs not observed this round shift in a closed slot.
  void ingest_round(const std::vector<ScanObservation>& observations) {
    if (observations.empty())
      throw std::invalid_argument("ingest_round: empty observation list");
    const std::int64_t round = observations.front().round_id;
    if (!rounds_.empty() && round <= rounds_.back().round_id)
      throw std::invalid_argument("ingest_round: round " + std::to_string(round) +
                                  " not after round " +
                                  std::to_string(rounds_.back().round_id));
    std::int64_t ts = observations.front().ts;
    std::set<std::pair<Addr, std::uint16_t>> seen;
    for (const auto& obs : observations) {
      if (obs.round_id != round)
        throw std::invalid_argument("ingest_round: mixed round ids in one batch");
      if (!seen.insert({obs.addr, obs.port}).second)
        throw std::invalid_argument("ingest_round: duplicate observation for " +
                                    format_ipv4(obs.addr) + ":" +
                                    std::to_string(obs.port));
      ts = std::min(ts, obs.ts);
    }

    for (auto& [key, window] : windows_) window = static_cast<std::uint8_t>(window << 1);
    for (const auto& obs : observations) {
      auto [it, inserted] = windows_.try_emplace({obs.addr, obs.port}, 0);
      if (obs.open) it->second |= 1;
    }

    Round summary;
    summary.round_id = round;
    summary.ts = ts;
    for (const auto& [key, window] : windows_)
      if (window_active(window)) ++summary.active_per_port[key.second];
    rounds_.push_back(std::move(summary));
  }

  bool is_active(Addr addr, std::uint16_t port) const {
    auto it = windows_.find({addr, port});
    return it != windows_.end() && window_active(it->second);
  }

  // Every currently active (addr, port) pair, optionally one port only.
  ServiceSet active_set(std::optional<std::uint16_t> port = std::nullopt) const {
    if (rounds_.empty()) throw std::logic_error("active_set: no rounds ingested");
    ServiceSet out;
    for (const auto& [key, window] : windows_) {
      if (port && key.second != *port) continue;
      if (window_active(window)) out.insert(key);
    }
    return out;
  }

  struct Round {
    std::int64_t round_id = 0;
    std::int64_t ts = 0;
    std::map<std::uint16_t, std::size_t> active_per_port;
  };
  const std::vector<Round>& rounds() const { return rounds_; }

 private:
  std::map<std::pair<Addr, std::uint16_t>, std::uint8_t> windows_;
  std::vector<Round> rounds_;
};

// --- Scan CSV: "round_id,ts,addr,port,open" --------------------------------

inline std::vector<ScanObservation> parse_scan_csv(std::istream& in,
                                                   const std::string& source_name) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line))
    throw std::runtime_error(source_name + ": empty scan file");
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "round_id,ts,addr,port,open")
    throw std::runtime_error(source_name +
                             ":1: expected header 'round_id,ts,addr,port,open'");
  std::vector<ScanObservation> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fail = [&](const std::string& what) {
      throw std::runtime_error(source_name + ":" + std::to_string(line_no) + ": " + what);
    };
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == ',') {
        fields.push_back(line.substr(start, i - start));
        start = i + 1;
      }
    }
    if (fields.size() != 5) fail("expected 5 fields");
    ScanObservation obs;
    auto to_int = [&](const std::string& s, auto& v, const char* what) {
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || p != s.data() + s.size()) fail(std::string("bad ") + what);
    };
    to_int(fields[0], obs.round_id, "round_id");
    to_int(fields[1], obs.ts, "ts");
    auto a = parse_ipv4(fields[2]);
    if (!a) fail("bad addr");
    obs.addr = *a;
    to_int(fields[3], obs.port, "port");
    if (obs.port == 0) fail("bad port");
    if (fields[4] == "1" || fields[4] == "true")
      obs.open = true;
    else if (fields[4] == "0" || fields[4] == "false")
      obs.open = false;
    else
      fail("bad open flag (want 0/1/true/false)");
    out.push_back(obs);
  }
  return out;
}

// Ingests a whole scan history file: rows grouped by round id, rounds applied
// in ascending order.
inline void ingest_scan_history(ServiceStateStore& store,
                                const std::vector<ScanObservation>& observations) {
  std::map<std::int64_t, std::vector<ScanObservation>> rounds;
  for (const auto& obs : observations) rounds[obs.round_id].push_back(obs);
  for (const auto& [round, obs] : rounds) store.ingest_round(obs);
}

// service_counts.csv: per-round active pairs per port, chronological.
inline void write_service_counts_csv(std::ostream& os, const ServiceStateStore& store) {
  os << "date,port,count\n";
  for (const auto& round : store.rounds())
    for (const auto& [port, count] : round.active_per_port)
      os << format_date(round.ts) << ',' << port << ',' << count << '\n';
}

}  // namespace ixptk
