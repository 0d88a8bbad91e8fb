#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ixptk/classify.hpp"
#include "ixptk/clock.hpp"
#include "ixptk/collector.hpp"
#include "ixptk/hash.hpp"
#include "ixptk/icmp.hpp"
#include "ixptk/metrics.hpp"
#include "ixptk/scope.hpp"
#include "ixptk/services.hpp"
#include "ixptk/simnet.hpp"
#include "ixptk/targets.hpp"
#include "ixptk/tracer.hpp"

namespace ixptk {

inline constexpr const char* kToolVersion = "0.1.0";

// --- Run manifests -----------------------------------------------------------
// Every command that writes artifacts drops a manifest next to them: the
// exact invocation, the seed, and digests of every input file, so a run can
// be reproduced bit for bit.

inline std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return fnv1a_hex(buf.str());
}

struct RunManifest {
  std::string command_line;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> input_digests;
  std::int64_t started_ts = 0;
  std::int64_t finished_ts = 0;
};

inline void write_run_manifest(const std::filesystem::path& path, const RunManifest& m) {
  nlohmann::json j;
  j["tool_version"] = kToolVersion;
  j["command_line"] = m.command_line;
  j["seed"] = m.seed;
  j["input_digests"] = m.input_digests;
  j["started_utc"] = format_utc_timestamp(m.started_ts);
  j["finished_utc"] = format_utc_timestamp(m.finished_ts);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write manifest " + path.string());
  out << j.dump(2) << '\n';
}

// --- targets -----------------------------------------------------------------

struct TargetsOptions {
  std::filesystem::path country_file;
  std::optional<std::filesystem::path> ixp_file;  // validated, recorded in manifest
  std::optional<std::filesystem::path> scan_csv;
  std::optional<std::uint16_t> port_filter;
  std::uint64_t seed = 0;
  std::filesystem::path out_jsonl;
  std::optional<std::filesystem::path> out_text;  // one address per line
  std::string command_line;
};

struct TargetsResult {
  std::size_t target_count = 0;
  std::size_t service_mode = 0;
};

inline TargetsResult cmd_targets(const TargetsOptions& opt) {
  RunManifest manifest;
  manifest.command_line = opt.command_line;
  manifest.seed = opt.seed;
  manifest.started_ts = SystemClock().now_us() / 1'000'000;
  manifest.input_digests[opt.country_file.string()] = file_digest(opt.country_file);

  const auto netblocks = load_prefix_file(opt.country_file);
  if (netblocks.empty())
    throw std::runtime_error("no netblocks in " + opt.country_file.string());
  if (opt.ixp_file) {
    load_prefix_file(*opt.ixp_file);  // parse errors surface now
    manifest.input_digests[opt.ixp_file->string()] = file_digest(*opt.ixp_file);
  }

  ServiceSet active;
  if (opt.scan_csv) {
    std::ifstream in(*opt.scan_csv);
    if (!in) throw std::runtime_error("cannot open " + opt.scan_csv->string());
    ServiceStateStore store;
    ingest_scan_history(store, parse_scan_csv(in, opt.scan_csv->filename().string()));
    active = store.active_set(opt.port_filter);
    manifest.input_digests[opt.scan_csv->string()] = file_digest(*opt.scan_csv);
  }

  const auto targets = build_targets(netblocks, active, opt.seed);

  std::ofstream out(opt.out_jsonl, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + opt.out_jsonl.string());
  TargetsResult result;
  for (const auto& t : targets) {
    out << to_json(t).dump() << '\n';
    ++result.target_count;
    if (t.mode == TargetMode::Service) ++result.service_mode;
  }
  if (opt.out_text) {
    std::ofstream text(*opt.out_text, std::ios::trunc);
    if (!text) throw std::runtime_error("cannot write " + opt.out_text->string());
    for (const auto& t : targets) text << format_ipv4(t.addr) << '\n';
  }
  manifest.finished_ts = SystemClock().now_us() / 1'000'000;
  write_run_manifest(opt.out_jsonl.string() + ".manifest.json", manifest);
  return result;
}

inline std::vector<Target> load_target_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open target file " + path.string());
  std::vector<Target> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(target_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error(path.filename().string() + ":" + std::to_string(line_no) +
                               ": " + e.what());
    }
  }
  return out;
}

// --- probe -------------------------------------------------------------------

// Duty window syntax: "20h" (from midnight), "04:00-24:00", or "0m" (never).
inline DutyWindow parse_window(const std::string& text) {
  auto minutes_of = [](const std::string& hhmm) {
    const auto colon = hhmm.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("bad time '" + hhmm + "' (want HH:MM)");
    return std::stoi(hhmm.substr(0, colon)) * 60 + std::stoi(hhmm.substr(colon + 1));
  };
  try {
    if (!text.empty() && (text.back() == 'h' || text.back() == 'm')) {
      const int value = std::stoi(text.substr(0, text.size() - 1));
      return DutyWindow{0, text.back() == 'h' ? value * 60 : value};
    }
    const auto dash = text.find('-');
    if (dash != std::string::npos) {
      const int start = minutes_of(text.substr(0, dash));
      const int end = minutes_of(text.substr(dash + 1));
      return DutyWindow{start, (end - start + 24 * 60) % (24 * 60) == 0 && end != start
                                   ? 24 * 60
                                   : (end - start + 24 * 60) % (24 * 60)};
    }
  } catch (const std::exception&) {
  }
  throw std::runtime_error("bad --window '" + text +
                           "' (want e.g. 20h, 30m or 04:00-24:00)");
}

struct ProbeOptions {
  std::filesystem::path targets_file;
  std::string backend = "simnet:linear";  // simnet:<scenario> | real | replay:<file>
  std::string probe_id = "probe";
  std::optional<std::string> source;  // simnet probe node address
  std::filesystem::path out_dir;
  TraceConfig cfg;
  DutyWindow window;
  int days = 1;
  std::int64_t start_ts = 1403395200;  // 2014-06-22T00:00:00Z
  int workers = 1;
  std::optional<std::uint64_t> seed;  // overrides the scenario's jitter seed
  std::string command_line;
};

struct ProbeResult {
  std::vector<std::filesystem::path> trace_files;
  SweepSummary summary;  // accumulated over all days
};

namespace detail {

inline ProbeResult replay_traces(const ProbeOptions& opt,
                                 const std::filesystem::path& replay_file) {
  std::ifstream in(replay_file);
  if (!in) throw std::runtime_error("cannot open replay file " + replay_file.string());
  std::map<std::string, std::ofstream> files;
  ProbeResult result;
  read_trace_jsonl(
      in,
      [&](TraceRecord&& rec) {
        const std::string date = format_yyyymmdd(rec.ts);
        auto it = files.find(date);
        if (it == files.end()) {
          const auto path =
              opt.out_dir / ("traces-" + rec.probe_id + "-" + date + ".jsonl");
          it = files.emplace(date, std::ofstream(path, std::ios::trunc)).first;
          if (!it->second) throw std::runtime_error("cannot write " + path.string());
          result.trace_files.push_back(path);
        }
        it->second << to_jsonl(rec) << '\n';
        ++(rec.reached ? result.summary.reached : result.summary.unreached);
      },
      [&](std::size_t line, const std::string& msg) {
        throw std::runtime_error(replay_file.filename().string() + ":" +
                                 std::to_string(line) + ": " + msg);
      });
  return result;
}

}  // namespace detail

inline ProbeResult cmd_probe(const ProbeOptions& opt) {
  std::filesystem::create_directories(opt.out_dir);
  RunManifest manifest;
  manifest.command_line = opt.command_line;
  manifest.seed = opt.seed.value_or(0);
  manifest.started_ts = SystemClock().now_us() / 1'000'000;
  manifest.input_digests[opt.targets_file.string()] = file_digest(opt.targets_file);

  if (opt.backend.rfind("replay:", 0) == 0) {
    auto result = detail::replay_traces(opt, opt.backend.substr(7));
    manifest.finished_ts = SystemClock().now_us() / 1'000'000;
    write_run_manifest(opt.out_dir / ("manifest-" + opt.probe_id + ".json"), manifest);
    return result;
  }

  const auto targets = load_target_file(opt.targets_file);
  ProbeResult result;

  if (opt.backend.rfind("simnet:", 0) == 0) {
    TopologySpec spec = scenario(opt.backend.substr(7));
    if (opt.seed) spec.seed = *opt.seed;
    const auto sources = probe_sources(spec);
    Addr src = sources.at(0);
    if (opt.source) {
      auto a = parse_ipv4(*opt.source);
      if (!a || !spec.find_node(*a))
        throw std::runtime_error("--source " + *opt.source + " is not a topology node");
      src = *a;
    }
    for (int day = 0; day < opt.days; ++day) {
      VirtualClock clock((opt.start_ts + std::int64_t{day} * 86400) * 1'000'000);
      SimnetBackend backend(spec, src);
      RateLimiter limiter(clock, opt.cfg.probes_per_second);
      ProbeContext ctx{backend, clock, &limiter, opt.probe_id};
      const std::string date = format_yyyymmdd(opt.start_ts + std::int64_t{day} * 86400);
      const auto path = opt.out_dir / ("traces-" + opt.probe_id + "-" + date + ".jsonl");
      std::ofstream out(path, std::ios::trunc);
      if (!out) throw std::runtime_error("cannot write " + path.string());
      char prefix[32];
      std::snprintf(prefix, sizeof prefix, "%s-%s-", opt.probe_id.c_str(), date.c_str());
      const auto summary = run_sweep(
          targets, opt.cfg, opt.window, ctx,
          [&](const TraceRecord& rec) {
            out << to_jsonl(rec) << '\n';
            if (!out) throw std::runtime_error("write failed: " + path.string());
          },
          opt.workers, prefix);
      result.trace_files.push_back(path);
      result.summary.reached += summary.reached;
      result.summary.unreached += summary.unreached;
      result.summary.errors += summary.errors;
      if (summary.aborted) {
        result.summary.aborted = true;
        result.summary.abort_reason = summary.abort_reason;
        std::ofstream marker(path.string() + ".partial");
        marker << summary.abort_reason << '\n';
        break;
      }
    }
  } else if (opt.backend == "real") {
    RealIcmpBackend backend(opt.cfg.per_probe_timeout_ms);
    if (!targets.empty()) backend.discover_source(targets.front().addr);
    SystemClock clock;
    RateLimiter limiter(clock, opt.cfg.probes_per_second);
    ProbeContext ctx{backend, clock, &limiter, opt.probe_id};
    const std::string date = format_yyyymmdd(clock.now_us() / 1'000'000);
    const auto path = opt.out_dir / ("traces-" + opt.probe_id + "-" + date + ".jsonl");
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    const auto summary = run_sweep(
        targets, opt.cfg, opt.window, ctx,
        [&](const TraceRecord& rec) { out << to_jsonl(rec) << '\n'; }, opt.workers,
        opt.probe_id + "-" + date + "-");
    result.trace_files.push_back(path);
    result.summary = summary;
    if (summary.aborted) {
      std::ofstream marker(path.string() + ".partial");
      marker << summary.abort_reason << '\n';
    }
  } else {
    throw std::runtime_error("unknown backend '" + opt.backend +
                             "' (want simnet:<scenario>, real or replay:<file>)");
  }

  manifest.finished_ts = SystemClock().now_us() / 1'000'000;
  write_run_manifest(opt.out_dir / ("manifest-" + opt.probe_id + ".json"), manifest);
  return result;
}

// --- report ------------------------------------------------------------------

struct ReportOptions {
  std::vector<std::filesystem::path> trace_files;
  std::filesystem::path country_file;
  std::filesystem::path ixp_file;
  std::optional<std::filesystem::path> scan_csv;
  std::filesystem::path out_dir;
  std::string command_line;
};

struct ReportResult {
  std::size_t classified = 0;
  std::size_t rejected_unreached = 0;
  std::size_t parse_errors = 0;
  std::size_t weeks = 0;
  std::vector<std::filesystem::path> csv_files;
};

inline ReportResult cmd_report(const ReportOptions& opt) {
  std::filesystem::create_directories(opt.out_dir);
  RunManifest manifest;
  manifest.command_line = opt.command_line;
  manifest.started_ts = SystemClock().now_us() / 1'000'000;
  manifest.input_digests[opt.country_file.string()] = file_digest(opt.country_file);
  manifest.input_digests[opt.ixp_file.string()] = file_digest(opt.ixp_file);

  const AddressScope scope(load_prefix_file(opt.country_file),
                           load_prefix_file(opt.ixp_file));

  ReportResult result;
  std::vector<std::vector<ClassifiedTrace>> views;
  for (const auto& file : opt.trace_files) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open trace file " + file.string());
    manifest.input_digests[file.string()] = file_digest(file);
    std::vector<ClassifiedTrace> view;
    const auto summary =
        classify_stream(in, scope, [&](const ClassifiedTrace& ct) { view.push_back(ct); });
    result.classified += summary.classified;
    result.rejected_unreached += summary.rejected_unreached;
    result.parse_errors += summary.parse_errors.size();
    views.push_back(std::move(view));
  }
  if (result.classified == 0)
    throw std::runtime_error("no completed traces in the input");

  const auto merged = merge_probe_views(views);
  const auto reports = build_weekly_report(merged);
  const auto series = interhop_series(merged, scope);
  result.weeks = reports.size();

  auto emit = [&](const char* name, auto writer) {
    const auto path = opt.out_dir / name;
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    writer(out);
    result.csv_files.push_back(path);
  };
  emit("hops_weekly.csv", [&](std::ostream& os) { write_hops_weekly_csv(os, reports); });
  emit("rtt_weekly.csv", [&](std::ostream& os) { write_rtt_weekly_csv(os, reports); });
  emit("local_routes.csv",
       [&](std::ostream& os) { write_local_routes_csv(os, reports); });
  emit("available_time.csv",
       [&](std::ostream& os) { write_available_time_csv(os, reports); });
  emit("interhop.csv", [&](std::ostream& os) { write_interhop_csv(os, series); });
  emit("interhop_by_probe.csv",
       [&](std::ostream& os) { write_interhop_by_probe_csv(os, series); });

  if (opt.scan_csv) {
    std::ifstream in(*opt.scan_csv);
    if (!in) throw std::runtime_error("cannot open " + opt.scan_csv->string());
    manifest.input_digests[opt.scan_csv->string()] = file_digest(*opt.scan_csv);
    ServiceStateStore store;
    ingest_scan_history(store, parse_scan_csv(in, opt.scan_csv->filename().string()));
    emit("service_counts.csv",
         [&](std::ostream& os) { write_service_counts_csv(os, store); });
  }

  manifest.finished_ts = SystemClock().now_us() / 1'000'000;
  write_run_manifest(opt.out_dir / "manifest-report.json", manifest);
  return result;
}

// Groups a trace file into daily batches for collector submission.
inline std::vector<Batch> batches_from_trace_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file " + path.string());
  std::map<std::pair<std::string, std::string>, std::vector<TraceRecord>> grouped;
  read_trace_jsonl(
      in,
      [&](TraceRecord&& rec) {
        grouped[{rec.probe_id, format_yyyymmdd(rec.ts)}].push_back(std::move(rec));
      },
      [&](std::size_t line, const std::string& msg) {
        throw std::runtime_error(path.filename().string() + ":" + std::to_string(line) +
                                 ": " + msg);
      });
  std::vector<Batch> out;
  for (auto& [key, records] : grouped)
    out.push_back(make_batch(key.first, key.second, std::move(records)));
  return out;
}

}  // namespace ixptk
