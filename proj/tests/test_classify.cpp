#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "ixptk/classify.hpp"

using namespace ixptk;

namespace {

const AddressScope& test_scope() {
  static const AddressScope scope({parse_prefix("200.87.0.0/17"),
                                   parse_prefix("190.129.0.0/16")},
                                  {parse_prefix("200.87.128.0/24")});
  return scope;
}

TraceRecord make_trace(const std::vector<std::optional<std::string>>& addrs,
                       std::int64_t ts = 1403413200) {
  TraceRecord rec;
  rec.trace_id = "t";
  rec.probe_id = "p";
  rec.ts = ts;
  rec.src = *parse_ipv4("200.87.1.1");
  rec.flow_id = 1;
  int ttl = 0;
  for (const auto& a : addrs) {
    ++ttl;
    if (a)
      rec.hops.push_back(Hop{ttl, *parse_ipv4(*a), 1000 * ttl});
    else
      rec.hops.push_back(Hop{ttl, std::nullopt, std::nullopt});
  }
  const Hop* last = rec.last_responding();
  REQUIRE(last != nullptr);
  rec.dst = *last->addr;
  rec.reached = true;
  return rec;
}

// Reference classifier: scans every hop against every prefix list directly,
// with no shared code beyond the prefix type.
Category brute_force_category(const TraceRecord& rec,
                              const std::vector<IpPrefix>& country,
                              const std::vector<IpPrefix>& ixp) {
  auto hit = [](const std::vector<IpPrefix>& set, Addr a) {
    for (const auto& p : set)
      if ((a & prefix_mask(p.length)) == p.base) return true;
    return false;
  };
  bool has_ixp = false, all_domestic = true;
  for (const auto& hop : rec.hops) {
    if (!hop.addr) continue;
    const Addr a = *hop.addr;
    if (hit(ixp, a)) {
      has_ixp = true;
      continue;
    }
    if (hit(private_prefixes(), a) || hit(country, a)) continue;
    all_domestic = false;
  }
  if (has_ixp && all_domestic) return Category::Ixp;
  if (!has_ixp && all_domestic) return Category::P2p;
  if (!has_ixp) return Category::International;
  return Category::Misbehavior;
}

}  // namespace

TEST_CASE("the four categories follow the truth table") {
  // IXP: through the switch, everything in-country.
  auto ct = classify(make_trace({"200.87.1.1", "200.87.128.4", "200.87.44.1"}),
                     test_scope());
  CHECK(ct.category == Category::Ixp);
  CHECK(ct.ixp_hop_ttl == 2);

  // P2P: in-country, no IXP hop; a private hop counts as in-country.
  ct = classify(make_trace({"200.87.1.1", "10.4.4.4", "190.129.3.3"}), test_scope());
  CHECK(ct.category == Category::P2p);
  CHECK(!ct.ixp_hop_ttl.has_value());

  // International: leaves the country, never touches the IXP.
  ct = classify(make_trace({"200.87.1.1", "8.8.8.8", "190.129.3.3"}), test_scope());
  CHECK(ct.category == Category::International);

  // Misbehavior: through the IXP and abroad anyway.
  ct = classify(make_trace({"200.87.128.4", "8.8.8.8", "190.129.3.3"}), test_scope());
  CHECK(ct.category == Category::Misbehavior);
  CHECK(ct.ixp_hop_ttl == 1);
}

TEST_CASE("stars are neutral and unreached traces are rejected") {
  const auto base = make_trace({"200.87.1.1", "200.87.128.4", "190.129.3.3"});
  const auto starred =
      make_trace({std::nullopt, "200.87.1.1", std::nullopt, "200.87.128.4",
                  std::nullopt, "190.129.3.3"});
  CHECK(classify(base, test_scope()).category == classify(starred, test_scope()).category);

  TraceRecord unreached = base;
  unreached.reached = false;
  unreached.hops.back().addr = std::nullopt;
  unreached.hops.back().rtt_us = std::nullopt;
  CHECK_THROWS_AS(classify(unreached, test_scope()), std::invalid_argument);
}

TEST_CASE("week bucket comes from the trace timestamp") {
  const auto ct = classify(make_trace({"200.87.1.1", "190.129.3.3"}, 16243 * 86400 + 60),
                           test_scope());
  CHECK(ct.week == WeekBucket{2014, 25});
}

TEST_CASE("classify agrees with the brute-force reference on random traces") {
  std::mt19937 rng(777);
  size_t cells[4] = {0, 0, 0, 0};
  for (int round = 0; round < 40; ++round) {
    std::vector<IpPrefix> country, ixp;
    for (int i = 0; i < 1 + static_cast<int>(rng() % 6); ++i) {
      const int len = 10 + static_cast<int>(rng() % 15);
      country.push_back(IpPrefix{static_cast<Addr>(rng()) & prefix_mask(len), len});
    }
    for (int i = 0; i < 1 + static_cast<int>(rng() % 2); ++i) {
      const int len = 22 + static_cast<int>(rng() % 7);
      ixp.push_back(IpPrefix{static_cast<Addr>(rng()) & prefix_mask(len), len});
    }
    const AddressScope scope(country, ixp);

    for (int t = 0; t < 250; ++t) {
      TraceRecord rec;
      rec.trace_id = "r";
      rec.probe_id = "p";
      rec.ts = 1403413200;
      rec.src = static_cast<Addr>(rng());
      rec.flow_id = 0;
      const int hops = 1 + static_cast<int>(rng() % 12);
      int ttl = 0;
      for (int h = 0; h < hops; ++h) {
        ++ttl;
        if (rng() % 5 == 0 && h + 1 < hops) {
          rec.hops.push_back(Hop{ttl, std::nullopt, std::nullopt});
          continue;
        }
        // Mix uniform addresses with addresses inside the configured sets so
        // every cell of the truth table comes up.
        Addr a = static_cast<Addr>(rng());
        const int pick = static_cast<int>(rng() % 4);
        if (pick == 1)
          a = country[rng() % country.size()].base + static_cast<Addr>(rng() % 256);
        else if (pick == 2)
          a = ixp[rng() % ixp.size()].base + static_cast<Addr>(rng() % 4);
        else if (pick == 3)
          a = 0x0a000000u + static_cast<Addr>(rng() % 65536);
        rec.hops.push_back(Hop{ttl, a, 100 * ttl});
      }
      const Hop* last = rec.last_responding();
      if (last == nullptr) continue;
      rec.dst = *last->addr;
      rec.reached = true;

      const auto got = classify(rec, scope);
      const auto want = brute_force_category(rec, country, ixp);
      CHECK(got.category == want);
      ++cells[static_cast<int>(want)];
      if (got.category == Category::Ixp || got.category == Category::Misbehavior)
        CHECK(got.ixp_hop_ttl.has_value());
      else
        CHECK(!got.ixp_hop_ttl.has_value());
    }
  }
  for (size_t c : cells) CHECK(c > 0);
}

TEST_CASE("swapping a foreign hop for a domestic one never worsens the category") {
  std::mt19937 rng(31);
  for (int t = 0; t < 500; ++t) {
    std::vector<std::optional<std::string>> addrs;
    std::vector<size_t> foreign_at;
    const int hops = 2 + static_cast<int>(rng() % 6);
    for (int h = 0; h < hops; ++h) {
      switch (rng() % 4) {
        case 0: addrs.push_back("200.87.128.4"); break;          // ixp
        case 1: addrs.push_back("200.87.3.3"); break;            // domestic
        case 2: addrs.push_back("190.129.9.9"); break;           // domestic
        default:
          addrs.push_back("8.8.8.8");
          foreign_at.push_back(addrs.size() - 1);
          break;
      }
    }
    if (addrs.back() == "8.8.8.8") foreign_at.pop_back(), addrs.back() = "190.129.9.9";
    if (foreign_at.empty()) continue;
    const auto before = classify(make_trace(addrs), test_scope()).category;
    auto fixed = addrs;
    fixed[foreign_at[rng() % foreign_at.size()]] = "200.87.3.3";
    const auto after = classify(make_trace(fixed), test_scope()).category;
    const bool before_local = before == Category::Ixp || before == Category::P2p;
    const bool after_local = after == Category::Ixp || after == Category::P2p;
    if (before_local) CHECK(after_local);
  }
}

TEST_CASE("inserting a star anywhere never changes the category") {
  std::mt19937 rng(32);
  for (int t = 0; t < 300; ++t) {
    std::vector<std::optional<std::string>> addrs;
    const int hops = 1 + static_cast<int>(rng() % 6);
    for (int h = 0; h < hops; ++h) {
      switch (rng() % 4) {
        case 0: addrs.push_back("200.87.128.4"); break;
        case 1: addrs.push_back("200.87.3.3"); break;
        case 2: addrs.push_back("8.8.8.8"); break;
        default: addrs.push_back("10.1.2.3"); break;
      }
    }
    if (addrs.back() == "8.8.8.8") addrs.back() = "200.87.3.3";
    const auto before = classify(make_trace(addrs), test_scope()).category;
    auto starred = addrs;
    starred.insert(starred.begin() + rng() % (starred.size()),  // never after dst
                   std::nullopt);
    CHECK(classify(make_trace(starred), test_scope()).category == before);
  }
}

TEST_CASE("classify_stream filters unreached traces and reports bad lines") {
  std::ostringstream buf;
  for (int i = 0; i < 10; ++i) {
    TraceRecord rec = make_trace({"200.87.1.1", "190.129.3.3"});
    rec.trace_id = "t" + std::to_string(i);
    if (i % 2 == 1) {
      rec.reached = false;
      rec.hops.push_back(Hop{99, std::nullopt, std::nullopt});
      rec.dst = *parse_ipv4("190.129.200.200");  // last responder no longer dst
    }
    buf << to_jsonl(rec) << "\n";
  }
  buf << "{broken\n";

  std::istringstream in(buf.str());
  std::vector<ClassifiedTrace> out;
  const auto summary = classify_stream(in, test_scope(),
                                       [&](const ClassifiedTrace& ct) { out.push_back(ct); });
  CHECK(summary.classified == 5);
  CHECK(summary.rejected_unreached == 5);
  REQUIRE(summary.parse_errors.size() == 1);
  CHECK(summary.parse_errors[0].first == 11);
  CHECK(out.size() == 5);
  // Order preserved.
  CHECK(out[0].trace.trace_id == "t0");
  CHECK(out[4].trace.trace_id == "t8");

  std::istringstream empty("");
  const auto none = classify_stream(empty, test_scope(), [](const ClassifiedTrace&) {});
  CHECK(none.classified == 0);
  CHECK(none.rejected_unreached == 0);
}

TEST_CASE("classified JSON carries category, ixp hop and week") {
  const auto ct = classify(make_trace({"200.87.1.1", "200.87.128.4", "200.87.44.1"},
                                      16243 * 86400),
                           test_scope());
  const auto j = to_json(ct);
  CHECK(j["category"] == "IXP");
  CHECK(j["ixp_hop_ttl"] == 2);
  CHECK(j["week"] == "2014-W25");
  CHECK(j["trace_id"] == "t");
}
