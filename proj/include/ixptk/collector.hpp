#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "ixptk/classify.hpp"
#include "ixptk/hash.hpp"
#include "ixptk/time.hpp"
#include "ixptk/trace.hpp"

namespace ixptk {

// One probe-day of trace records, pushed to the central collector. The
// checksum covers the canonical JSON line of every record, in order.
struct Batch {
  std::string batch_id;  // probe_id + "-" + date
  std::string probe_id;
  std::string date;  // YYYYMMDD, UTC
  std::string checksum;
  std::vector<TraceRecord> records;
};

inline std::string compute_batch_checksum(const std::vector<TraceRecord>& records) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (const auto& rec : records) {
    h = fnv1a(to_jsonl(rec), h);
    h = fnv1a("\n", h);
  }
  return hex_digest(h);
}

inline std::string make_batch_id(const std::string& probe_id, const std::string& date) {
  return probe_id + "-" + date;
}

inline Batch make_batch(const std::string& probe_id, const std::string& date,
                        std::vector<TraceRecord> records) {
  Batch b;
  b.batch_id = make_batch_id(probe_id, date);
  b.probe_id = probe_id;
  b.date = date;
  b.records = std::move(records);
  b.checksum = compute_batch_checksum(b.records);
  return b;
}

inline nlohmann::json to_json(const Batch& b) {
  nlohmann::json j;
  j["batch_id"] = b.batch_id;
  j["probe_id"] = b.probe_id;
  j["date"] = b.date;
  j["checksum"] = b.checksum;
  j["records"] = nlohmann::json::array();
  for (const auto& rec : b.records) j["records"].push_back(to_json(rec));
  return j;
}

inline Batch batch_from_json(const nlohmann::json& j) {
  Batch b;
  try {
    b.batch_id = j.at("batch_id").get<std::string>();
    b.probe_id = j.at("probe_id").get<std::string>();
    b.date = j.at("date").get<std::string>();
    b.checksum = j.at("checksum").get<std::string>();
    for (const auto& rj : j.at("records")) b.records.push_back(trace_from_json(rj));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("bad batch document: ") + e.what());
  }
  return b;
}

enum class SubmitStatus { Accepted, Duplicate };

// Append-only storage: one JSON-lines segment per batch under
// data_dir/segments/<date>/, plus a manifest of committed batches. A batch
// becomes visible only when its manifest line is fully written, so readers
// never observe part of one.
class CollectorStore {
 public:
  explicit CollectorStore(std::filesystem::path data_dir) : dir_(std::move(data_dir)) {
    std::filesystem::create_directories(dir_ / "segments");
    load_manifest();
  }

  // Test-only fault injection point; stages: "segment_written",
  // "manifest_appending".
  std::function<void(const std::string& stage)> fault_hook;

  SubmitStatus submit_batch(const Batch& batch) {
    validate_batch(batch);
    std::scoped_lock lock(m_);
    if (auto it = manifest_.find(batch.batch_id); it != manifest_.end()) {
      if (it->second.checksum != batch.checksum)
        throw std::runtime_error("batch " + batch.batch_id +
                                 " resubmitted with different content");
      return SubmitStatus::Duplicate;
    }

    const auto seg_rel = std::filesystem::path("segments") / batch.date /
                         (batch.batch_id + ".jsonl");
    const auto seg_path = dir_ / seg_rel;
    std::filesystem::create_directories(seg_path.parent_path());
    const auto tmp_path = dir_ / "segments" / batch.date / (batch.batch_id + ".tmp");
    {
      std::ofstream out(tmp_path, std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write segment " + tmp_path.string());
      for (const auto& rec : batch.records) out << to_jsonl(rec) << '\n';
      out.flush();
      if (!out) throw std::runtime_error("segment write failed: " + tmp_path.string());
    }
    std::filesystem::rename(tmp_path, seg_path);
    if (fault_hook) fault_hook("segment_written");

    Entry entry{batch.probe_id, batch.date, batch.checksum, batch.records.size(),
                seg_rel.generic_string()};
    if (fault_hook) fault_hook("manifest_appending");
    append_manifest_line(batch.batch_id, entry);
    manifest_.emplace(batch.batch_id, std::move(entry));
    return SubmitStatus::Accepted;
  }

  std::size_t batch_count() const {
    std::scoped_lock lock(m_);
    return manifest_.size();
  }

  // All committed records with from <= date <= to (YYYYMMDD, inclusive),
  // ordered by (date, probe_id, trace_id).
  void query_traces(const std::string& from, const std::string& to,
                    const std::optional<std::string>& probe,
                    const std::function<void(const TraceRecord&)>& on_record) const {
    if (!is_yyyymmdd(from) || !is_yyyymmdd(to) || from > to)
      throw std::invalid_argument("query_traces: invalid date range " + from + ".." + to);
    std::vector<std::pair<std::string, Entry>> selected;
    {
      std::scoped_lock lock(m_);
      for (const auto& [batch_id, entry] : manifest_) {
        if (entry.date < from || entry.date > to) continue;
        if (probe && entry.probe_id != *probe) continue;
        selected.emplace_back(batch_id, entry);
      }
    }
    std::sort(selected.begin(), selected.end(), [](const auto& a, const auto& b) {
      return std::tie(a.second.date, a.second.probe_id, a.first) <
             std::tie(b.second.date, b.second.probe_id, b.first);
    });
    for (const auto& [batch_id, entry] : selected) {
      std::ifstream in(dir_ / entry.segment);
      if (!in)
        throw std::runtime_error("missing segment for batch " + batch_id + ": " +
                                 entry.segment);
      std::vector<TraceRecord> records;
      read_trace_jsonl(
          in, [&](TraceRecord&& rec) { records.push_back(std::move(rec)); },
          [&](std::size_t line, const std::string& msg) {
            throw std::runtime_error("corrupt segment " + entry.segment + ":" +
                                     std::to_string(line) + ": " + msg);
          });
      std::sort(records.begin(), records.end(),
                [](const TraceRecord& a, const TraceRecord& b) {
                  return a.trace_id < b.trace_id;
                });
      for (const auto& rec : records) on_record(rec);
    }
  }

  std::vector<TraceRecord> query_traces(const std::string& from, const std::string& to,
                                        const std::optional<std::string>& probe =
                                            std::nullopt) const {
    std::vector<TraceRecord> out;
    query_traces(from, to, probe, [&](const TraceRecord& r) { out.push_back(r); });
    return out;
  }

 private:
  struct Entry {
    std::string probe_id;
    std::string date;
    std::string checksum;
    std::size_t record_count = 0;
    std::string segment;
  };

  static void validate_batch(const Batch& batch) {
    if (batch.batch_id.empty() || batch.probe_id.empty())
      throw std::runtime_error("batch missing ids");
    if (!is_yyyymmdd(batch.date))
      throw std::runtime_error("batch " + batch.batch_id + ": bad date '" + batch.date +
                               "'");
    for (const auto& rec : batch.records) {
      validate(rec);  // malformed records reject the whole batch
      if (rec.probe_id != batch.probe_id)
        throw std::runtime_error("batch " + batch.batch_id + ": record " + rec.trace_id +
                                 " has probe_id '" + rec.probe_id + "'");
    }
    if (compute_batch_checksum(batch.records) != batch.checksum)
      throw std::runtime_error("batch " + batch.batch_id + ": checksum mismatch");
  }

  void append_manifest_line(const std::string& batch_id, const Entry& entry) {
    nlohmann::json j;
    j["batch_id"] = batch_id;
    j["probe_id"] = entry.probe_id;
    j["date"] = entry.date;
    j["checksum"] = entry.checksum;
    j["records"] = entry.record_count;
    j["segment"] = entry.segment;
    std::ofstream out(dir_ / "manifest.jsonl", std::ios::app);
    if (!out) throw std::runtime_error("cannot append to manifest");
    out << j.dump() << '\n';
    out.flush();
    if (!out) throw std::runtime_error("manifest append failed");
  }

  void load_manifest() {
    std::ifstream in(dir_ / "manifest.jsonl");
    if (!in) return;  // fresh store
    std::string line;
    std::size_t line_no = 0;
    bool prev_bad = false;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      if (prev_bad)
        throw std::runtime_error("corrupt manifest line " + std::to_string(line_no - 1));
      try {
        auto j = nlohmann::json::parse(line);
        Entry entry{j.at("probe_id").get<std::string>(), j.at("date").get<std::string>(),
                    j.at("checksum").get<std::string>(), j.at("records").get<std::size_t>(),
                    j.at("segment").get<std::string>()};
        if (!std::filesystem::exists(dir_ / entry.segment))
          throw std::runtime_error("manifest references missing segment " + entry.segment);
        manifest_[j.at("batch_id").get<std::string>()] = std::move(entry);
      } catch (const nlohmann::json::exception&) {
        // A torn final line is an interrupted commit: that batch never became
        // visible. Anything torn mid-file is real corruption.
        prev_bad = true;
      }
    }
  }

  std::filesystem::path dir_;
  mutable std::mutex m_;
  std::map<std::string, Entry> manifest_;
};

// Concatenates per-probe classified streams, preserving each probe's own
// order. Records stay tagged by probe_id for per-probe breakdowns.
inline std::vector<ClassifiedTrace> merge_probe_views(
    const std::vector<std::vector<ClassifiedTrace>>& streams) {
  std::vector<ClassifiedTrace> out;
  for (const auto& s : streams) out.insert(out.end(), s.begin(), s.end());
  return out;
}

// --- Config ("collector.toml") ---------------------------------------------
// Minimal TOML subset: `key = "value"` and `key = ["a", "b"]`, '#' comments.

struct CollectorConfig {
  std::string listen = "127.0.0.1:9090";
  std::string data_dir;
  std::vector<std::string> tokens;
};

namespace detail {

inline std::string strip(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string unquote(const std::string& s, const std::string& ctx) {
  if (s.size() < 2 || s.front() != '"' || s.back() != '"')
    throw std::runtime_error(ctx + ": expected quoted string, got '" + s + "'");
  return s.substr(1, s.size() - 2);
}

}  // namespace detail

inline CollectorConfig parse_collector_config(std::istream& in,
                                              const std::string& source_name) {
  CollectorConfig cfg;
  bool have_data_dir = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string ctx = source_name + ":" + std::to_string(line_no);
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = detail::strip(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error(ctx + ": expected key = value");
    const std::string key = detail::strip(line.substr(0, eq));
    const std::string value = detail::strip(line.substr(eq + 1));
    if (key == "listen") {
      cfg.listen = detail::unquote(value, ctx);
    } else if (key == "data_dir") {
      cfg.data_dir = detail::unquote(value, ctx);
      have_data_dir = true;
    } else if (key == "tokens") {
      if (value.size() < 2 || value.front() != '[' || value.back() != ']')
        throw std::runtime_error(ctx + ": tokens must be an array of strings");
      std::string inner = value.substr(1, value.size() - 2);
      std::size_t start = 0;
      while (start < inner.size()) {
        auto comma = inner.find(',', start);
        const std::string item =
            detail::strip(inner.substr(start, comma == std::string::npos
                                                  ? std::string::npos
                                                  : comma - start));
        if (!item.empty()) cfg.tokens.push_back(detail::unquote(item, ctx));
        if (comma == std::string::npos) break;
        start = comma + 1;
      }
    } else {
      throw std::runtime_error(ctx + ": unknown config key '" + key + "'");
    }
  }
  if (!have_data_dir)
    throw std::runtime_error(source_name + ": missing required key 'data_dir'");
  return cfg;
}

inline CollectorConfig load_collector_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path.string());
  return parse_collector_config(in, path.filename().string());
}

}  // namespace ixptk
