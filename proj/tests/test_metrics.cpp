#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <sstream>

#include "ixptk/metrics.hpp"

using namespace ixptk;

namespace {

const AddressScope& test_scope() {
  static const AddressScope scope({parse_prefix("200.87.0.0/17"),
                                   parse_prefix("190.129.0.0/16")},
                                  {parse_prefix("200.87.128.0/24")});
  return scope;
}

TraceRecord trace_with_rtts(const std::vector<std::optional<std::pair<std::string, int64_t>>>& hops,
                            std::int64_t ts = 1403413200) {
  TraceRecord rec;
  rec.trace_id = "t";
  rec.probe_id = "p";
  rec.ts = ts;
  rec.src = *parse_ipv4("200.87.1.1");
  rec.flow_id = 1;
  int ttl = 0;
  for (const auto& h : hops) {
    ++ttl;
    if (h)
      rec.hops.push_back(Hop{ttl, *parse_ipv4(h->first), h->second});
    else
      rec.hops.push_back(Hop{ttl, std::nullopt, std::nullopt});
  }
  rec.dst = *rec.last_responding()->addr;
  rec.reached = true;
  return rec;
}

ClassifiedTrace classified(const TraceRecord& rec) { return classify(rec, test_scope()); }

// Builds a minimal plausible trace of the requested category. src/dst are
// route keys, mapped into the scope's domestic space.
ClassifiedTrace make_ct(Category cat, Addr src_key, Addr dst_key, std::int64_t ts,
                        const std::string& probe = "p") {
  const Addr src = 0xc8570000u | (src_key & 0x3fffu);  // inside 200.87.0.0/17
  const Addr dst = 0xbe810000u | (dst_key & 0xffffu);  // inside 190.129.0.0/16
  std::vector<std::pair<std::string, int64_t>> mid;
  switch (cat) {
    case Category::Ixp:
      mid = {{"200.87.2.1", 2000}, {"200.87.128.4", 5000}};
      break;
    case Category::P2p:
      mid = {{"200.87.2.1", 2000}, {"200.87.9.1", 4000}};
      break;
    case Category::International:
      mid = {{"200.87.2.1", 2000}, {"8.8.8.8", 90000}};
      break;
    case Category::Misbehavior:
      mid = {{"200.87.128.4", 5000}, {"8.8.8.8", 90000}};
      break;
  }
  TraceRecord rec;
  rec.trace_id = "t";
  rec.probe_id = probe;
  rec.ts = ts;
  rec.src = src;
  rec.dst = dst;
  rec.flow_id = 1;
  int ttl = 0;
  for (const auto& h : mid) {
    ++ttl;
    rec.hops.push_back(Hop{ttl, *parse_ipv4(h.first), h.second});
  }
  rec.hops.push_back(Hop{++ttl, dst, 100000});
  rec.reached = true;
  auto ct = classified(rec);
  REQUIRE(ct.category == cat);
  return ct;
}

}  // namespace

TEST_CASE("hop_count is the destination TTL") {
  const auto seven = trace_with_rtts({{{"200.87.2.1", 1}}, {{"200.87.2.2", 2}},
                                      {{"200.87.2.3", 3}}, {{"200.87.2.4", 4}},
                                      {{"200.87.2.5", 5}}, {{"200.87.2.6", 6}},
                                      {{"200.87.2.7", 7}}});
  CHECK(hop_count(seven) == 7);

  const auto gappy = trace_with_rtts({{{"200.87.2.1", 1}}, std::nullopt, std::nullopt,
                                      std::nullopt, std::nullopt, std::nullopt,
                                      std::nullopt, std::nullopt, {{"200.87.2.9", 9}}});
  CHECK(hop_count(gappy) == 9);  // stars do not shorten the path

  TraceRecord unreached = seven;
  unreached.reached = false;
  unreached.hops.pop_back();
  unreached.dst = *parse_ipv4("1.1.1.1");
  CHECK_THROWS_AS(hop_count(unreached), std::invalid_argument);
}

TEST_CASE("effective_rtt uses the penultimate responding hop") {
  const auto plain = trace_with_rtts(
      {{{"200.87.2.1", 2000}}, {{"200.87.2.2", 5000}}, {{"200.87.2.3", 48000}}});
  CHECK(effective_rtt(plain) == 5000);  // not the NAT-inflated final hop

  const auto starred = trace_with_rtts(
      {{{"200.87.2.1", 2000}}, std::nullopt, {{"200.87.2.3", 48000}}});
  CHECK(effective_rtt(starred) == 2000);  // skips the star backward

  const auto single = trace_with_rtts({{{"200.87.2.3", 48000}}});
  CHECK(!effective_rtt(single).has_value());
}

TEST_CASE("box_stats matches the stated interpolation rule") {
  const auto constant = box_stats({5, 5, 5, 5});
  CHECK(constant.p5 == 5.0);
  CHECK(constant.q1 == 5.0);
  CHECK(constant.median == 5.0);
  CHECK(constant.q3 == 5.0);
  CHECK(constant.p95 == 5.0);
  CHECK(constant.mean == 5.0);
  CHECK(constant.count == 4);

  std::vector<double> hundred(100);
  for (int i = 0; i < 100; ++i) hundred[i] = i + 1;
  const auto stats = box_stats(hundred);
  CHECK(stats.median == Catch::Approx(50.5));
  CHECK(stats.p5 == Catch::Approx(5.95));
  CHECK(stats.mean == Catch::Approx(50.5));

  const auto five = box_stats({5, 3, 1, 4, 2});
  CHECK(five.p5 == Catch::Approx(1.2));
  CHECK(five.q1 == Catch::Approx(2.0));
  CHECK(five.median == Catch::Approx(3.0));
  CHECK(five.q3 == Catch::Approx(4.0));
  CHECK(five.p95 == Catch::Approx(4.8));

  CHECK_THROWS_AS(box_stats({}), std::invalid_argument);
}

TEST_CASE("box_stats agrees with a sorted-array oracle on many sizes") {
  std::mt19937 rng(55);
  for (int n = 1; n <= 200; ++n) {
    std::vector<double> samples(n);
    for (auto& v : samples) v = static_cast<double>(rng() % 100000) / 10.0;
    const auto stats = box_stats(samples);

    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    auto oracle = [&](double p) {
      const double rank = p / 100.0 * (n - 1);
      const auto lo = static_cast<size_t>(rank);
      const double frac = rank - static_cast<double>(lo);
      return lo + 1 < sorted.size() ? sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
                                    : sorted.back();
    };
    CHECK(stats.p5 == Catch::Approx(oracle(5)));
    CHECK(stats.q1 == Catch::Approx(oracle(25)));
    CHECK(stats.median == Catch::Approx(oracle(50)));
    CHECK(stats.q3 == Catch::Approx(oracle(75)));
    CHECK(stats.p95 == Catch::Approx(oracle(95)));
    CHECK(stats.p5 <= stats.q1);
    CHECK(stats.q1 <= stats.median);
    CHECK(stats.median <= stats.q3);
    CHECK(stats.q3 <= stats.p95);
  }
}

TEST_CASE("local routes can sum past 100 when a route switches category") {
  const Addr src = *parse_ipv4("200.87.1.1");
  const Addr dst = *parse_ipv4("190.129.7.7");
  const std::int64_t ts = 16243 * 86400;
  const std::vector<ClassifiedTrace> week = {
      make_ct(Category::Ixp, src, dst, ts),
      make_ct(Category::International, src, dst, ts + 3600)};

  const auto local = weekly_local_routes(week);
  REQUIRE(local.size() == 1);
  const auto& pct = local.begin()->second;
  CHECK(pct.at(Category::Ixp) == 100.0);
  CHECK(pct.at(Category::International) == 100.0);
  CHECK(pct.at(Category::P2p) == 0.0);
  double sum = 0;
  for (const auto& [c, v] : pct) sum += v;
  CHECK(sum > 100.0);
}

TEST_CASE("local routes on disjoint routes partition to 100") {
  const std::int64_t ts = 16243 * 86400;
  std::vector<ClassifiedTrace> week;
  for (int i = 0; i < 2; ++i)
    week.push_back(make_ct(Category::Ixp, 100 + i, 200 + i, ts));
  week.push_back(make_ct(Category::P2p, 110, 210, ts));
  week.push_back(make_ct(Category::International, 111, 211, ts));

  const auto local = weekly_local_routes(week);
  const auto& pct = local.begin()->second;
  CHECK(pct.at(Category::Ixp) == 50.0);
  CHECK(pct.at(Category::P2p) == 25.0);
  CHECK(pct.at(Category::International) == 25.0);
  CHECK(pct.at(Category::Misbehavior) == 0.0);

  std::vector<ClassifiedTrace> only_ixp;
  for (int i = 0; i < 10; ++i)
    only_ixp.push_back(make_ct(Category::Ixp, 100 + i, 300 + i, ts));
  const auto& all_ixp = weekly_local_routes(only_ixp).begin()->second;
  CHECK(all_ixp.at(Category::Ixp) == 100.0);
  CHECK(all_ixp.at(Category::P2p) == 0.0);
}

TEST_CASE("available time partitions the traceroutes") {
  const std::int64_t ts = 16243 * 86400;
  std::vector<ClassifiedTrace> week;
  for (int i = 0; i < 6; ++i) week.push_back(make_ct(Category::Ixp, 1, 2, ts));
  for (int i = 0; i < 3; ++i) week.push_back(make_ct(Category::International, 1, 2, ts));
  week.push_back(make_ct(Category::P2p, 1, 2, ts));

  const auto avail = weekly_available_time(week);
  const auto& pct = avail.begin()->second;
  CHECK(pct.at(Category::Ixp) == 60.0);
  CHECK(pct.at(Category::International) == 30.0);
  CHECK(pct.at(Category::P2p) == 10.0);
  CHECK(pct.at(Category::Misbehavior) == 0.0);
}

TEST_CASE("available time sums to 100 on random corpora") {
  std::mt19937 rng(66);
  for (int round = 0; round < 200; ++round) {
    std::vector<ClassifiedTrace> corpus;
    const int n = 1 + static_cast<int>(rng() % 120);
    for (int i = 0; i < n; ++i) {
      const auto cat = all_categories[rng() % 4];
      const std::int64_t ts = 16243 * 86400 + static_cast<int64_t>(rng() % (28 * 86400));
      corpus.push_back(make_ct(cat, rng() % 1000, rng() % 1000, ts));
    }
    for (const auto& [week, pct] : weekly_available_time(corpus)) {
      double sum = 0;
      for (const auto& [c, v] : pct) {
        sum += v;
        CHECK(v >= 0.0);
        CHECK(v <= 100.0);
      }
      CHECK(sum == Catch::Approx(100.0).margin(0.01));
    }
  }
}

TEST_CASE("interhop fixture: IXP route, anchor alignment, negatives dropped") {
  // Responding RTTs 1000, 3000, 2000, 6000 with the IXP at the third hop.
  const auto rec = trace_with_rtts({{{"200.87.2.1", 1000}},
                                    {{"200.87.2.2", 3000}},
                                    {{"200.87.128.4", 2000}},
                                    {{"200.87.9.9", 6000}}});
  const auto ct = classified(rec);
  REQUIRE(ct.category == Category::Ixp);
  REQUIRE(ct.ixp_hop_ttl == 3);

  const auto series = interhop_series({ct}, test_scope());
  REQUIRE(series.samples.size() == 2);
  const auto& minus1 = series.samples.at({Category::Ixp, -1});
  REQUIRE(minus1.size() == 1);
  CHECK(minus1[0].diff_us == 2000);
  const auto& plus1 = series.samples.at({Category::Ixp, +1});
  REQUIRE(plus1.size() == 1);
  CHECK(plus1[0].diff_us == 4000);
  CHECK(series.samples.find({Category::Ixp, 0}) == series.samples.end());
}

TEST_CASE("interhop fixture: International foreign-run collapse") {
  // Domestic, Domestic, Foreign, Foreign, Domestic(dst) at 2,3,105,130,131 ms.
  const auto rec = trace_with_rtts({{{"200.87.2.1", 2000}},
                                    {{"200.87.2.2", 3000}},
                                    {{"8.8.1.1", 105000}},
                                    {{"8.8.2.1", 130000}},
                                    {{"190.129.9.9", 131000}}});
  const auto ct = classified(rec);
  REQUIRE(ct.category == Category::International);

  const auto series = interhop_series({ct}, test_scope());
  CHECK(series.multi_foreign_runs == 0);
  const auto& border = series.samples.at({Category::International, -1});
  REQUIRE(border.size() == 1);
  CHECK(border[0].diff_us == 1000);  // 3 - 2 ms, the border gateway hop
  const auto& abroad = series.samples.at({Category::International, 0});
  REQUIRE(abroad.size() == 1);
  CHECK(abroad[0].diff_us == 127000);  // 130 - 3 ms, the whole foreign journey
  const auto& back = series.samples.at({Category::International, +1});
  REQUIRE(back.size() == 1);
  CHECK(back[0].diff_us == 1000);  // 131 - 130 ms, first hop back in-country
}

TEST_CASE("interhop ignores single-hop traces and other categories") {
  const auto single = classified(trace_with_rtts({{{"200.87.128.4", 2000}}}));
  REQUIRE(single.category == Category::Ixp);
  const auto p2p = classified(trace_with_rtts(
      {{{"200.87.2.1", 1000}}, {{"200.87.9.9", 2000}}}));
  REQUIRE(p2p.category == Category::P2p);

  const auto series = interhop_series({single, p2p}, test_scope());
  CHECK(series.samples.empty());
  CHECK(series.skipped_traces == 1);  // the single-hop IXP trace
}

TEST_CASE("interhop emits only non-negative diffs, at most one per hop pair") {
  std::mt19937 rng(88);
  for (int round = 0; round < 100; ++round) {
    std::vector<std::optional<std::pair<std::string, int64_t>>> hops;
    const int n = 2 + static_cast<int>(rng() % 8);
    size_t pairs = 0;
    for (int i = 0; i < n; ++i) {
      const char* addr = i == static_cast<int>(rng() % n) ? "200.87.128.4" : "200.87.2.2";
      hops.push_back({{addr, static_cast<int64_t>(rng() % 50000)}});
    }
    hops.push_back({{"200.87.100.1", static_cast<int64_t>(rng() % 50000)}});
    pairs = hops.size() - 1;
    const auto ct = classified(trace_with_rtts(hops));
    if (ct.category != Category::Ixp) continue;
    const auto series = interhop_series({ct}, test_scope());
    size_t emitted = 0;
    for (const auto& [key, samples] : series.samples)
      for (const auto& s : samples) {
        CHECK(s.diff_us >= 0);
        ++emitted;
      }
    CHECK(emitted <= pairs);
  }
}

TEST_CASE("multiple foreign runs are flagged but the first run is used") {
  const auto rec = trace_with_rtts({{{"200.87.2.1", 2000}},
                                    {{"8.8.1.1", 105000}},
                                    {{"200.87.2.2", 106000}},
                                    {{"8.8.2.1", 160000}},
                                    {{"190.129.9.9", 161000}}});
  const auto ct = classified(rec);
  REQUIRE(ct.category == Category::International);
  const auto series = interhop_series({ct}, test_scope());
  CHECK(series.multi_foreign_runs == 1);
  // offset 0 is the first run (single foreign hop at 105 ms).
  CHECK(series.samples.at({Category::International, 0})[0].diff_us == 103000);
}

TEST_CASE("weekly report ties the pieces together") {
  const std::int64_t w1 = 16243 * 86400;  // 2014-W25
  const std::int64_t w2 = w1 + 7 * 86400;
  std::vector<ClassifiedTrace> corpus;
  for (int i = 0; i < 4; ++i) corpus.push_back(make_ct(Category::Ixp, 1, 100 + i, w1));
  corpus.push_back(make_ct(Category::P2p, 1, 104, w1));
  for (int i = 0; i < 3; ++i)
    corpus.push_back(make_ct(Category::International, 1, 100 + i, w2));

  const auto reports = build_weekly_report(corpus);
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].week == WeekBucket{2014, 25});
  CHECK(reports[0].trace_count == 5);
  CHECK(reports[0].route_count == 5);
  CHECK(reports[0].available_time_pct.at(Category::Ixp) == 80.0);
  CHECK(reports[0].hops.at(Category::Ixp).count == 4);
  CHECK(reports[0].rtt.at(Category::Ixp).count == 4);
  CHECK(reports[1].week == WeekBucket{2014, 26});
  CHECK(reports[1].trace_count == 3);

  CHECK(build_weekly_report({}).empty());
}

TEST_CASE("weekly report is invariant under input permutation") {
  std::mt19937 rng(44);
  std::vector<ClassifiedTrace> corpus;
  for (int i = 0; i < 300; ++i) {
    const auto cat = all_categories[rng() % 4];
    const std::int64_t ts = 16243 * 86400 + static_cast<int64_t>(rng() % (21 * 86400));
    corpus.push_back(make_ct(cat, rng() % 50, rng() % 400, ts, i % 2 ? "pa" : "pb"));
  }
  auto shuffled = corpus;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);

  std::ostringstream a, b;
  const auto ra = build_weekly_report(corpus);
  const auto rb = build_weekly_report(shuffled);
  write_hops_weekly_csv(a, ra);
  write_hops_weekly_csv(b, rb);
  write_rtt_weekly_csv(a, ra);
  write_rtt_weekly_csv(b, rb);
  write_local_routes_csv(a, ra);
  write_local_routes_csv(b, rb);
  write_available_time_csv(a, ra);
  write_available_time_csv(b, rb);
  write_interhop_csv(a, interhop_series(corpus, test_scope()));
  write_interhop_csv(b, interhop_series(shuffled, test_scope()));
  CHECK(a.str() == b.str());
}

TEST_CASE("a week built to the reference route count reports it") {
  // One synthetic week sized to the observed weekly average of 1753 routes.
  const std::int64_t ts = 16243 * 86400;
  std::vector<ClassifiedTrace> corpus;
  for (int i = 0; i < 1753; ++i) {
    const Addr dst = 0xbe810000u + static_cast<Addr>(i);  // distinct dsts
    corpus.push_back(make_ct(i % 10 == 0 ? Category::International : Category::Ixp, 7,
                             dst, ts));
  }
  const auto reports = build_weekly_report(corpus);
  REQUIRE(reports.size() == 1);
  CHECK(reports[0].route_count == 1753);
}

TEST_CASE("CSV headers and shapes are stable") {
  const std::int64_t ts = 16243 * 86400;
  const std::vector<ClassifiedTrace> corpus = {make_ct(Category::Ixp, 1, 2, ts)};
  const auto reports = build_weekly_report(corpus);

  std::ostringstream hops;
  write_hops_weekly_csv(hops, reports);
  CHECK(hops.str().rfind("week,category,p5,q1,median,q3,p95,mean,count\n", 0) == 0);
  CHECK(hops.str().find("2014-W25,IXP,") != std::string::npos);

  std::ostringstream local;
  write_local_routes_csv(local, reports);
  CHECK(local.str().rfind("week,category,pct\n", 0) == 0);
  // All four categories listed each week.
  CHECK(local.str().find("2014-W25,Misbehavior,0.0000") != std::string::npos);

  std::ostringstream inter;
  write_interhop_csv(inter, interhop_series(corpus, test_scope()));
  CHECK(inter.str().rfind("category,offset,p5,q1,median,q3,p95,count\n", 0) == 0);
}
