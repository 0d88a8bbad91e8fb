// ixptk: probe a national address space with Paris traceroutes, classify
// every route against the country's IXP, and turn the results into the
// weekly performance series (hops, RTT, local routes, available time,
// IXP-centered inter-hop differences, service counts).

#include <csignal>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ixptk/collector_http.hpp"
#include "ixptk/commands.hpp"

namespace {

volatile std::sig_atomic_t g_stop = 0;
void handle_signal(int) { g_stop = 1; }

std::string join_args(int argc, char** argv) {
  std::ostringstream out;
  for (int i = 0; i < argc; ++i) out << (i ? " " : "") << argv[i];
  return out.str();
}

int run_serve(const std::string& config_path) {
  const auto cfg = ixptk::load_collector_config(config_path);
  if (cfg.tokens.empty())
    throw std::runtime_error("collector config has no tokens; refusing to serve openly");
  const auto [host, port] = ixptk::split_listen_address(cfg.listen);
  ixptk::CollectorStore store(cfg.data_dir);
  ixptk::CollectorServer server(store, cfg.tokens);
  server.start(host, port);
  std::cerr << "collector listening on " << cfg.listen << ", data in " << cfg.data_dir
            << " (" << store.batch_count() << " batches)\n";
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  while (!g_stop) ixptk::SystemClock().sleep_us(100'000);
  std::cerr << "shutting down\n";
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IXP measurement toolkit: target selection, Paris-traceroute probing,"
               " route classification, weekly metrics and the collector service"};
  app.require_subcommand(1);
  const std::string command_line = join_args(argc, argv);

  // targets ------------------------------------------------------------
  ixptk::TargetsOptions targets_opt;
  std::string targets_ixp, targets_scan, targets_text;
  unsigned targets_port = 0;
  auto* targets = app.add_subcommand(
      "targets", "Split netblocks into /24s and pick one probe target per network");
  targets->add_option("--country-prefixes", targets_opt.country_file,
                      "Netblock file: one CIDR per line, # comments")
      ->required()->check(CLI::ExistingFile);
  targets->add_option("--ixp-prefixes", targets_ixp,
                      "IXP netblock file (validated and recorded in the manifest)")
      ->check(CLI::ExistingFile);
  targets->add_option("--scan-history", targets_scan,
                      "Port-scan history CSV (round_id,ts,addr,port,open)")
      ->check(CLI::ExistingFile);
  targets->add_option("--port", targets_port, "Only use scan results for this port");
  targets->add_option("--seed", targets_opt.seed, "Seed for random target picks")
      ->required();
  targets->add_option("--out", targets_opt.out_jsonl, "Output target list (JSON lines)")
      ->required();
  targets->add_option("--text-out", targets_text, "Also write plain one-IP-per-line list");

  // probe --------------------------------------------------------------
  ixptk::ProbeOptions probe_opt;
  std::string probe_window = "20h", probe_start = "2014-06-22T00:00:00Z", probe_source;
  std::uint64_t probe_seed = 0;
  bool probe_seed_set = false;
  auto* probe = app.add_subcommand(
      "probe", "Sweep the target list with Paris traceroutes (simnet, real or replay)");
  probe->add_option("--targets", probe_opt.targets_file, "Target list from 'targets'")
      ->required()->check(CLI::ExistingFile);
  probe->add_option("--backend", probe_opt.backend,
                    "simnet:<linear|ecmp|bolivia-like|misbehavior>, real, or replay:<file>");
  probe->add_option("--probe-id", probe_opt.probe_id, "Vantage point name");
  probe->add_option("--source", probe_source, "Probe node address (simnet)");
  probe->add_option("--out-dir", probe_opt.out_dir, "Directory for trace JSONL files")
      ->required();
  probe->add_option("--max-ttl", probe_opt.cfg.max_ttl, "TTL cap per trace");
  probe->add_option("--attempts", probe_opt.cfg.attempts_per_ttl, "Probes per TTL");
  probe->add_option("--timeout-ms", probe_opt.cfg.per_probe_timeout_ms,
                    "Per-probe timeout");
  probe->add_option("--flow-id", probe_opt.cfg.flow_id, "Paris flow identifier");
  probe->add_option("--gap-limit", probe_opt.cfg.gap_limit,
                    "Consecutive stars before aborting a trace");
  probe->add_option("--pps", probe_opt.cfg.probes_per_second, "Global probe rate cap");
  probe->add_option("--window", probe_window,
                    "Daily duty window: e.g. 20h, 30m or 04:00-24:00");
  probe->add_option("--days", probe_opt.days, "Consecutive simulated days to sweep");
  probe->add_option("--start", probe_start, "Sweep start (UTC, simnet virtual clock)");
  probe->add_option("--workers", probe_opt.workers, "Concurrent trace workers");
  probe->add_option("--seed", probe_seed, "Override the scenario jitter seed")
      ->each([&](const std::string&) { probe_seed_set = true; });

  // report -------------------------------------------------------------
  ixptk::ReportOptions report_opt;
  std::string report_scan;
  auto* report = app.add_subcommand(
      "report", "Classify traces and write the weekly metric CSV series");
  report->add_option("--traces", report_opt.trace_files, "Trace JSONL files")
      ->required()->check(CLI::ExistingFile);
  report->add_option("--country-prefixes", report_opt.country_file, "Country netblocks")
      ->required()->check(CLI::ExistingFile);
  report->add_option("--ixp-prefixes", report_opt.ixp_file, "IXP netblocks")
      ->required()->check(CLI::ExistingFile);
  report->add_option("--scan-history", report_scan, "Also emit service_counts.csv")
      ->check(CLI::ExistingFile);
  report->add_option("--out-dir", report_opt.out_dir, "Directory for the CSV files")
      ->required();

  // serve --------------------------------------------------------------
  std::string serve_config;
  auto* serve = app.add_subcommand("serve", "Run the central collector");
  serve->add_option("--config", serve_config,
                    "collector.toml (keys: listen, data_dir, tokens)")
      ->required()->check(CLI::ExistingFile);

  // push ---------------------------------------------------------------
  std::string push_traces, push_collector, push_token;
  auto* push = app.add_subcommand("push",
                                  "Send a day's trace file to the collector as batches");
  push->add_option("--traces", push_traces, "Trace JSONL file")
      ->required()->check(CLI::ExistingFile);
  push->add_option("--collector", push_collector, "host:port of the collector")
      ->required();
  push->add_option("--token", push_token, "Probe token")->required();

  // scenario -----------------------------------------------------------
  std::string scenario_name, scenario_dir;
  auto* scen = app.add_subcommand(
      "scenario", "Write a canned topology and its prefix files for offline runs");
  scen->add_option("--name", scenario_name, "linear, ecmp, bolivia-like or misbehavior")
      ->required();
  scen->add_option("--out-dir", scenario_dir, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*targets) {
      if (!targets_ixp.empty()) targets_opt.ixp_file = targets_ixp;
      if (!targets_scan.empty()) targets_opt.scan_csv = targets_scan;
      if (targets_port) targets_opt.port_filter = static_cast<std::uint16_t>(targets_port);
      if (!targets_text.empty()) targets_opt.out_text = targets_text;
      targets_opt.command_line = command_line;
      const auto result = ixptk::cmd_targets(targets_opt);
      std::cerr << "wrote " << result.target_count << " targets ("
                << result.service_mode << " with active services) to "
                << targets_opt.out_jsonl.string() << "\n";
    } else if (*probe) {
      probe_opt.window = ixptk::parse_window(probe_window);
      probe_opt.start_ts = ixptk::parse_utc_timestamp(probe_start);
      if (!probe_source.empty()) probe_opt.source = probe_source;
      if (probe_seed_set) probe_opt.seed = probe_seed;
      probe_opt.command_line = command_line;
      const auto result = ixptk::cmd_probe(probe_opt);
      std::cerr << "swept " << result.summary.total() << " traces: "
                << result.summary.reached << " reached, " << result.summary.unreached
                << " unreached, " << result.summary.errors << " errors\n";
      if (result.summary.aborted) {
        std::cerr << "sweep aborted: " << result.summary.abort_reason << "\n";
        return 1;
      }
    } else if (*report) {
      if (!report_scan.empty()) report_opt.scan_csv = report_scan;
      report_opt.command_line = command_line;
      const auto result = ixptk::cmd_report(report_opt);
      std::cerr << "classified " << result.classified << " traces ("
                << result.rejected_unreached << " unreached dropped, "
                << result.parse_errors << " bad lines) over " << result.weeks
                << " weeks\n";
      if (result.parse_errors > 0) return 1;
    } else if (*serve) {
      return run_serve(serve_config);
    } else if (*push) {
      const auto [host, port] = ixptk::split_listen_address(push_collector);
      for (const auto& batch : ixptk::batches_from_trace_file(push_traces)) {
        const auto status = ixptk::push_batch(host, port, push_token, batch);
        std::cerr << "batch " << batch.batch_id << ": " << status << " ("
                  << batch.records.size() << " records)\n";
      }
    } else if (*scen) {
      const auto spec = ixptk::scenario(scenario_name);
      std::filesystem::create_directories(scenario_dir);
      const auto dir = std::filesystem::path(scenario_dir);
      {
        std::ofstream out(dir / "topology.json");
        out << ixptk::to_json(spec).dump(2) << '\n';
      }
      {
        std::ofstream out(dir / "country.txt");
        for (const auto& p : ixptk::scenario_country_prefixes(scenario_name))
          out << ixptk::format_prefix(p) << '\n';
      }
      {
        std::ofstream out(dir / "ixp.txt");
        for (const auto& p : ixptk::scenario_ixp_prefixes(scenario_name))
          out << ixptk::format_prefix(p) << '\n';
      }
      std::cerr << "wrote topology.json, country.txt, ixp.txt to " << scenario_dir
                << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
