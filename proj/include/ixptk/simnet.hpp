#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ixptk/ip.hpp"
#include "ixptk/tracer.hpp"

namespace ixptk {

// --- Topology model ------------------------------------------------------
//
// A deterministic synthetic network that answers TTL-limited probes. Routers
// forward by longest-prefix match; a route whose next hop is the node itself
// means the prefix is attached there and the final hop to the destination
// host crosses the node's access leg. ECMP groups split flows across
// equal-cost next hops by flow_id modulo branch count.

struct SimNode {
  Addr addr = 0;
  std::vector<std::string> labels;          // e.g. "probe", "silent", "site:lapaz"
  std::int64_t access_delay_us = 0;         // delivery leg to attached hosts
  std::int64_t access_jitter_us = 0;

  bool has_label(const std::string& l) const {
    return std::find(labels.begin(), labels.end(), l) != labels.end();
  }
};

struct SimLink {
  Addr a = 0;
  Addr b = 0;
  std::int64_t one_way_delay_us = 0;
  std::int64_t jitter_us = 0;
};

struct RouteEntry {
  IpPrefix prefix;
  Addr next_hop = 0;  // equal to the owning node's address = attached
};

struct EcmpGroup {
  Addr node = 0;
  IpPrefix prefix;
  std::vector<Addr> next_hops;
};

struct TopologySpec {
  std::vector<SimNode> nodes;
  std::vector<SimLink> links;
  std::vector<EcmpGroup> ecmp_groups;
  std::optional<Addr> ixp_node;
  std::vector<Addr> foreign_segment;
  std::map<Addr, std::vector<RouteEntry>> routes;
  std::uint64_t seed = 0;
  std::int64_t last_hop_penalty_us = 0;      // models NAT-inflated final hops
  std::vector<IpPrefix> unresponsive_prefixes;  // hosts that never answer

  const SimNode* find_node(Addr a) const {
    for (const auto& n : nodes)
      if (n.addr == a) return &n;
    return nullptr;
  }

  const SimLink* find_link(Addr x, Addr y) const {
    for (const auto& l : links)
      if ((l.a == x && l.b == y) || (l.a == y && l.b == x)) return &l;
    return nullptr;
  }

  bool host_responds(Addr dst) const {
    for (const auto& p : unresponsive_prefixes)
      if (p.contains(dst)) return false;
    return true;
  }
};

namespace detail {

struct WalkStep {
  Addr node = 0;  // router at this position, or the destination on the last step
  std::int64_t delay_us = 0;
  std::int64_t jitter_us = 0;
};

// Forwarding decision at `node` for `dst`: longest prefix wins across plain
// routes and ECMP groups; an ECMP group beats a plain route of equal length.
inline std::optional<Addr> resolve_next_hop(const TopologySpec& spec, Addr node,
                                            Addr dst, int flow_id) {
  int best_len = -1;
  std::optional<Addr> next;
  if (auto it = spec.routes.find(node); it != spec.routes.end()) {
    for (const auto& r : it->second) {
      if (r.prefix.contains(dst) && r.prefix.length > best_len) {
        best_len = r.prefix.length;
        next = r.next_hop;
      }
    }
  }
  for (const auto& g : spec.ecmp_groups) {
    if (g.node == node && !g.next_hops.empty() && g.prefix.contains(dst) &&
        g.prefix.length >= best_len) {
      best_len = g.prefix.length;
      next = g.next_hops[static_cast<std::size_t>(flow_id) % g.next_hops.size()];
    }
  }
  return next;
}

// The forward path src -> dst as traversed (router, link) steps; the last
// step is the destination host itself when it is delivered via an access leg.
inline std::vector<WalkStep> walk(const TopologySpec& spec, Addr src, Addr dst,
                                  int flow_id) {
  std::vector<WalkStep> steps;
  Addr cur = src;
  for (int i = 0; i < 128; ++i) {
    if (cur == dst) return steps;
    auto next = resolve_next_hop(spec, cur, dst, flow_id);
    if (!next)
      throw std::runtime_error("simnet: no route from " + format_ipv4(cur) + " to " +
                               format_ipv4(dst));
    if (*next == cur) {  // attached: deliver over the access leg
      const SimNode* n = spec.find_node(cur);
      steps.push_back(WalkStep{dst, n ? n->access_delay_us : 0,
                               n ? n->access_jitter_us : 0});
      return steps;
    }
    const SimLink* link = spec.find_link(cur, *next);
    if (!link)
      throw std::runtime_error("simnet: no link " + format_ipv4(cur) + " - " +
                               format_ipv4(*next));
    steps.push_back(WalkStep{*next, link->one_way_delay_us, link->jitter_us});
    cur = *next;
  }
  throw std::runtime_error("simnet: routing loop towards " + format_ipv4(dst));
}

}  // namespace detail

// Answers one probe. Fully deterministic: identical (spec, src, dst, ttl,
// flow_id) give identical replies on any thread or run.
inline ProbeReply answer_probe(const TopologySpec& spec, Addr src, Addr dst, int ttl,
                               int flow_id) {
  if (ttl < 1) throw std::invalid_argument("answer_probe: ttl must be >= 1");
  const auto steps = detail::walk(spec, src, dst, flow_id);
  const std::size_t path_len = steps.size();
  const std::size_t reach = std::min<std::size_t>(static_cast<std::size_t>(ttl), path_len);

  std::seed_seq sseq{static_cast<std::uint32_t>(spec.seed),
                     static_cast<std::uint32_t>(spec.seed >> 32), src, dst,
                     static_cast<std::uint32_t>(flow_id),
                     static_cast<std::uint32_t>(ttl)};
  std::mt19937_64 rng(sseq);
  std::int64_t rtt = 0;
  for (std::size_t i = 0; i < reach; ++i) {
    rtt += 2 * steps[i].delay_us;
    if (steps[i].jitter_us > 0)
      rtt += static_cast<std::int64_t>(rng() % (static_cast<std::uint64_t>(steps[i].jitter_us) + 1));
  }

  if (path_len == 0 || static_cast<std::size_t>(ttl) >= path_len) {
    if (!spec.host_responds(dst)) return ProbeReply{0, 0, ReplyKind::Timeout};
    return ProbeReply{dst, rtt + spec.last_hop_penalty_us, ReplyKind::DestinationReply};
  }
  const Addr router = steps[static_cast<std::size_t>(ttl) - 1].node;
  const SimNode* n = spec.find_node(router);
  if (n && n->has_label("silent")) return ProbeReply{0, 0, ReplyKind::Timeout};
  return ProbeReply{router, rtt, ReplyKind::TtlExceeded};
}

class SimnetBackend : public ProbingBackend {
 public:
  SimnetBackend(const TopologySpec& spec, Addr src) : spec_(spec), src_(src) {}
  ProbeReply send_probe(Addr dst, int ttl, int flow_id) override {
    return answer_probe(spec_, src_, dst, ttl, flow_id);
  }
  Addr source_addr() const override { return src_; }

 private:
  const TopologySpec& spec_;
  Addr src_;
};

inline std::vector<Addr> probe_sources(const TopologySpec& spec) {
  std::vector<Addr> out;
  for (const auto& n : spec.nodes)
    if (n.has_label("probe")) out.push_back(n.addr);
  return out;
}

// Checks structural consistency and that every probe can reach a
// representative of every configured destination prefix on every ECMP branch
// without looping.
inline void validate_topology(const TopologySpec& spec) {
  auto require_node = [&](Addr a, const char* what) {
    if (!spec.find_node(a))
      throw std::runtime_error(std::string("topology: unknown node in ") + what + ": " +
                               format_ipv4(a));
  };
  for (const auto& l : spec.links) {
    require_node(l.a, "links");
    require_node(l.b, "links");
    if (l.one_way_delay_us < 0 || l.jitter_us < 0)
      throw std::runtime_error("topology: negative link delay or jitter");
  }
  if (spec.ixp_node) require_node(*spec.ixp_node, "ixp_node");
  for (Addr a : spec.foreign_segment) require_node(a, "foreign_segment");
  std::size_t max_branches = 1;
  for (const auto& g : spec.ecmp_groups) {
    require_node(g.node, "ecmp_groups");
    if (g.next_hops.empty()) throw std::runtime_error("topology: empty ECMP group");
    max_branches = std::max(max_branches, g.next_hops.size());
    for (Addr nh : g.next_hops) require_node(nh, "ecmp_groups");
  }
  for (const auto& [node, entries] : spec.routes) {
    require_node(node, "routes");
    for (const auto& r : entries)
      if (r.next_hop != node) require_node(r.next_hop, "routes");
  }

  std::vector<IpPrefix> dests;
  for (const auto& [node, entries] : spec.routes)
    for (const auto& r : entries)
      if (r.prefix.length > 0) dests.push_back(r.prefix);
  for (const auto& g : spec.ecmp_groups)
    if (g.prefix.length > 0) dests.push_back(g.prefix);
  std::sort(dests.begin(), dests.end());
  dests.erase(std::unique(dests.begin(), dests.end()), dests.end());

  for (Addr probe : probe_sources(spec)) {
    for (const auto& p : dests) {
      const Addr rep = p.length >= 31 ? p.base : p.base + 1;
      for (std::size_t flow = 0; flow < max_branches; ++flow)
        detail::walk(spec, probe, rep, static_cast<int>(flow));  // throws on loop
    }
  }
}

// --- JSON form -------------------------------------------------------------

inline nlohmann::json to_json(const TopologySpec& spec) {
  nlohmann::json j;
  j["nodes"] = nlohmann::json::array();
  for (const auto& n : spec.nodes) {
    nlohmann::json nj;
    nj["addr"] = format_ipv4(n.addr);
    nj["labels"] = n.labels;
    nj["access_delay_us"] = n.access_delay_us;
    nj["access_jitter_us"] = n.access_jitter_us;
    j["nodes"].push_back(std::move(nj));
  }
  j["links"] = nlohmann::json::array();
  for (const auto& l : spec.links) {
    nlohmann::json lj;
    lj["a"] = format_ipv4(l.a);
    lj["b"] = format_ipv4(l.b);
    lj["one_way_delay_us"] = l.one_way_delay_us;
    lj["jitter_us"] = l.jitter_us;
    j["links"].push_back(std::move(lj));
  }
  j["ecmp_groups"] = nlohmann::json::array();
  for (const auto& g : spec.ecmp_groups) {
    nlohmann::json gj;
    gj["node"] = format_ipv4(g.node);
    gj["prefix"] = format_prefix(g.prefix);
    gj["next_hops"] = nlohmann::json::array();
    for (Addr nh : g.next_hops) gj["next_hops"].push_back(format_ipv4(nh));
    j["ecmp_groups"].push_back(std::move(gj));
  }
  j["ixp_node"] =
      spec.ixp_node ? nlohmann::json(format_ipv4(*spec.ixp_node)) : nlohmann::json(nullptr);
  j["foreign_segment"] = nlohmann::json::array();
  for (Addr a : spec.foreign_segment) j["foreign_segment"].push_back(format_ipv4(a));
  j["routes"] = nlohmann::json::object();
  for (const auto& [node, entries] : spec.routes) {
    nlohmann::json ej = nlohmann::json::array();
    for (const auto& r : entries) {
      nlohmann::json rj;
      rj["prefix"] = format_prefix(r.prefix);
      rj["next_hop"] = format_ipv4(r.next_hop);
      ej.push_back(std::move(rj));
    }
    j["routes"][format_ipv4(node)] = std::move(ej);
  }
  j["seed"] = spec.seed;
  j["last_hop_penalty_us"] = spec.last_hop_penalty_us;
  j["unresponsive_prefixes"] = nlohmann::json::array();
  for (const auto& p : spec.unresponsive_prefixes)
    j["unresponsive_prefixes"].push_back(format_prefix(p));
  return j;
}

inline Addr parse_addr_or_throw(const std::string& s) {
  auto a = parse_ipv4(s);
  if (!a) throw std::runtime_error("topology: malformed address '" + s + "'");
  return *a;
}

inline TopologySpec topology_from_json(const nlohmann::json& j) {
  TopologySpec spec;
  try {
    for (const auto& nj : j.at("nodes")) {
      SimNode n;
      n.addr = parse_addr_or_throw(nj.at("addr").get<std::string>());
      for (const auto& l : nj.value("labels", nlohmann::json::array()))
        n.labels.push_back(l.get<std::string>());
      n.access_delay_us = nj.value("access_delay_us", std::int64_t{0});
      n.access_jitter_us = nj.value("access_jitter_us", std::int64_t{0});
      spec.nodes.push_back(std::move(n));
    }
    for (const auto& lj : j.at("links")) {
      SimLink l;
      l.a = parse_addr_or_throw(lj.at("a").get<std::string>());
      l.b = parse_addr_or_throw(lj.at("b").get<std::string>());
      l.one_way_delay_us = lj.at("one_way_delay_us").get<std::int64_t>();
      l.jitter_us = lj.value("jitter_us", std::int64_t{0});
      spec.links.push_back(l);
    }
    for (const auto& gj : j.value("ecmp_groups", nlohmann::json::array())) {
      EcmpGroup g;
      g.node = parse_addr_or_throw(gj.at("node").get<std::string>());
      g.prefix = parse_prefix(gj.at("prefix").get<std::string>());
      for (const auto& nh : gj.at("next_hops"))
        g.next_hops.push_back(parse_addr_or_throw(nh.get<std::string>()));
      spec.ecmp_groups.push_back(std::move(g));
    }
    if (j.contains("ixp_node") && !j["ixp_node"].is_null())
      spec.ixp_node = parse_addr_or_throw(j["ixp_node"].get<std::string>());
    for (const auto& a : j.value("foreign_segment", nlohmann::json::array()))
      spec.foreign_segment.push_back(parse_addr_or_throw(a.get<std::string>()));
    for (const auto& [node, ej] : j.at("routes").items()) {
      std::vector<RouteEntry> entries;
      for (const auto& rj : ej) {
        RouteEntry r;
        r.prefix = parse_prefix(rj.at("prefix").get<std::string>());
        r.next_hop = parse_addr_or_throw(rj.at("next_hop").get<std::string>());
        entries.push_back(r);
      }
      spec.routes[parse_addr_or_throw(node)] = std::move(entries);
    }
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.last_hop_penalty_us = j.value("last_hop_penalty_us", std::int64_t{0});
    for (const auto& p : j.value("unresponsive_prefixes", nlohmann::json::array()))
      spec.unresponsive_prefixes.push_back(parse_prefix(p.get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("bad topology document: ") + e.what());
  }
  validate_topology(spec);
  return spec;
}

// --- Canned scenarios -------------------------------------------------------

namespace scenarios {

inline Addr ip(const char* s) { return parse_addr_or_throw(s); }

// probe -> r1 -> r2 -> host; 1 ms per link, attached everywhere at r2.
inline TopologySpec linear() {
  TopologySpec spec;
  spec.seed = 11;
  const Addr probe = ip("10.0.0.1"), r1 = ip("10.0.1.1"), r2 = ip("10.0.2.1");
  spec.nodes = {SimNode{probe, {"probe"}, 0, 0}, SimNode{r1, {}, 0, 0},
                SimNode{r2, {}, 1000, 0}};
  spec.links = {SimLink{probe, r1, 1000, 0}, SimLink{r1, r2, 1000, 0}};
  spec.routes[probe] = {RouteEntry{IpPrefix{0, 0}, r1}};
  spec.routes[r1] = {RouteEntry{IpPrefix{0, 0}, r2}};
  spec.routes[r2] = {RouteEntry{IpPrefix{0, 0}, r2}};
  return spec;
}

// probe -> r1 -> {r2a | r2b} -> r3 -> host; two equal-cost branches.
inline TopologySpec ecmp() {
  TopologySpec spec;
  spec.seed = 12;
  const Addr probe = ip("10.1.0.1"), r1 = ip("10.1.1.1"), r2a = ip("10.1.2.1"),
             r2b = ip("10.1.3.1"), r3 = ip("10.1.4.1");
  spec.nodes = {SimNode{probe, {"probe"}, 0, 0}, SimNode{r1, {}, 0, 0},
                SimNode{r2a, {}, 0, 0}, SimNode{r2b, {}, 0, 0},
                SimNode{r3, {}, 1000, 0}};
  spec.links = {SimLink{probe, r1, 1000, 0}, SimLink{r1, r2a, 1000, 0},
                SimLink{r1, r2b, 1000, 0}, SimLink{r2a, r3, 1000, 0},
                SimLink{r2b, r3, 1000, 0}};
  spec.routes[probe] = {RouteEntry{IpPrefix{0, 0}, r1}};
  spec.ecmp_groups = {EcmpGroup{r1, IpPrefix{0, 0}, {r2a, r2b}}};
  spec.routes[r2a] = {RouteEntry{IpPrefix{0, 0}, r3}};
  spec.routes[r2b] = {RouteEntry{IpPrefix{0, 0}, r3}};
  spec.routes[r3] = {RouteEntry{IpPrefix{0, 0}, r3}};
  return spec;
}

// Six domestic ASes meshed through one IXP switch, one P2P link, a foreign
// transit chain of ~100 ms, and a 4G-like high-jitter access leg on the
// second probe site.
inline TopologySpec bolivia_like() {
  TopologySpec spec;
  spec.seed = 20140622;
  const Addr lapaz = ip("200.0.0.10"), santacruz = ip("200.16.0.10");
  const Addr as1edge = ip("200.0.1.1"), as1core = ip("200.0.2.1"),
             as1border = ip("200.0.3.1");
  const Addr as2border = ip("200.16.1.1"), as2core = ip("200.16.2.1");
  const Addr as3border = ip("200.32.1.1"), as3core = ip("200.32.2.1");
  const Addr as4border = ip("200.64.1.1"), as4core = ip("200.64.2.1");
  const Addr as5border = ip("200.96.1.1"), as5core = ip("200.96.2.1");
  const Addr as6border = ip("200.112.1.1"), as6core = ip("200.112.2.1");
  const Addr ixp = ip("200.200.200.1");
  const Addr f1 = ip("8.10.1.1"), f2 = ip("8.10.2.1"), f3 = ip("8.10.3.1");

  const IpPrefix as1 = parse_prefix("200.0.0.0/16"), as2 = parse_prefix("200.16.0.0/15"),
                 as3 = parse_prefix("200.32.0.0/14"), as4 = parse_prefix("200.64.0.0/14"),
                 as5 = parse_prefix("200.96.0.0/16"), as6 = parse_prefix("200.112.0.0/16");
  const IpPrefix all{0, 0};

  spec.nodes = {
      SimNode{lapaz, {"probe", "site:lapaz"}, 0, 0},
      SimNode{santacruz, {"probe", "site:santacruz"}, 0, 0},
      SimNode{as1edge, {}, 0, 0},
      SimNode{as1core, {}, 1000, 300},
      SimNode{as1border, {}, 0, 0},
      SimNode{as2border, {}, 0, 0},
      SimNode{as2core, {}, 1000, 300},
      SimNode{as3border, {}, 0, 0},
      SimNode{as3core, {}, 1000, 300},
      SimNode{as4border, {}, 0, 0},
      SimNode{as4core, {}, 1000, 300},
      SimNode{as5border, {}, 0, 0},
      SimNode{as5core, {}, 1000, 300},
      SimNode{as6border, {}, 0, 0},
      SimNode{as6core, {}, 1000, 300},
      SimNode{ixp, {"ixp"}, 0, 0},
      SimNode{f1, {"foreign"}, 0, 0},
      SimNode{f2, {"foreign"}, 0, 0},
      SimNode{f3, {"foreign"}, 0, 0},
  };
  spec.links = {
      SimLink{lapaz, as1edge, 2000, 300},
      SimLink{as1edge, as1core, 1000, 200},
      SimLink{as1core, as1border, 1000, 200},
      SimLink{as1border, ixp, 5000, 300},
      SimLink{ixp, as2border, 5000, 300},
      SimLink{ixp, as5border, 6000, 300},
      SimLink{ixp, as6border, 7000, 300},
      SimLink{as1border, as3border, 20000, 1500},  // older private peering
      SimLink{as1border, f1, 25000, 1000},
      SimLink{as2border, f1, 30000, 1000},
      SimLink{f1, f2, 15000, 800},
      SimLink{f2, f3, 10000, 800},
      SimLink{f3, as4border, 5000, 500},
      SimLink{as2border, as2core, 1000, 200},
      SimLink{as3border, as3core, 1000, 200},
      SimLink{as4border, as4core, 1000, 200},
      SimLink{as5border, as5core, 1000, 200},
      SimLink{as6border, as6core, 1000, 200},
      SimLink{santacruz, as2border, 8000, 30000},  // 4G-LTE access
  };
  spec.ixp_node = ixp;
  spec.foreign_segment = {f1, f2, f3};

  spec.routes[lapaz] = {RouteEntry{all, as1edge}};
  spec.routes[santacruz] = {RouteEntry{all, as2border}};
  spec.routes[as1edge] = {RouteEntry{all, as1core}};
  spec.routes[as1core] = {RouteEntry{as1, as1core}, RouteEntry{all, as1border}};
  spec.routes[as1border] = {RouteEntry{as1, as1core}, RouteEntry{as3, as3border},
                            RouteEntry{as4, f1}, RouteEntry{all, ixp}};
  spec.routes[as2border] = {RouteEntry{as2, as2core}, RouteEntry{as4, f1},
                            RouteEntry{all, ixp}};
  spec.routes[as2core] = {RouteEntry{as2, as2core}};
  spec.routes[as3border] = {RouteEntry{as3, as3core}, RouteEntry{all, as1border}};
  spec.routes[as3core] = {RouteEntry{as3, as3core}};
  spec.routes[as4border] = {RouteEntry{as4, as4core}, RouteEntry{all, f3}};
  spec.routes[as4core] = {RouteEntry{as4, as4core}};
  spec.routes[as5border] = {RouteEntry{as5, as5core}, RouteEntry{all, ixp}};
  spec.routes[as5core] = {RouteEntry{as5, as5core}};
  spec.routes[as6border] = {RouteEntry{as6, as6core}, RouteEntry{all, ixp}};
  spec.routes[as6core] = {RouteEntry{as6, as6core}};
  spec.routes[ixp] = {RouteEntry{as1, as1border}, RouteEntry{as2, as2border},
                      RouteEntry{as3, as1border}, RouteEntry{as5, as5border},
                      RouteEntry{as6, as6border}};
  spec.routes[f1] = {RouteEntry{as4, f2}};
  spec.routes[f2] = {RouteEntry{as4, f3}};
  spec.routes[f3] = {RouteEntry{as4, as4border}};
  return spec;
}

// A small net where half the destination space transits the IXP and then
// leaves the country before coming back: misbehaving routes.
inline TopologySpec misbehavior() {
  TopologySpec spec;
  spec.seed = 13;
  const Addr probe = ip("10.2.0.1"), b1 = ip("10.2.1.1"), ixp = ip("10.200.0.1"),
             f1 = ip("8.8.1.1"), b2 = ip("10.3.1.1");
  const IpPrefix home = parse_prefix("10.2.0.0/16");
  const IpPrefix other = parse_prefix("10.3.0.0/16");
  const IpPrefix other_low = parse_prefix("10.3.0.0/17");    // via IXP then abroad
  const IpPrefix other_high = parse_prefix("10.3.128.0/17"); // clean IXP path

  spec.nodes = {SimNode{probe, {"probe"}, 0, 0}, SimNode{b1, {}, 1000, 0},
                SimNode{ixp, {"ixp"}, 0, 0}, SimNode{f1, {"foreign"}, 0, 0},
                SimNode{b2, {}, 1000, 0}};
  spec.links = {SimLink{probe, b1, 1000, 0}, SimLink{b1, ixp, 2000, 0},
                SimLink{ixp, f1, 30000, 0}, SimLink{f1, b2, 30000, 0},
                SimLink{ixp, b2, 2000, 0}};
  spec.ixp_node = ixp;
  spec.foreign_segment = {f1};
  spec.routes[probe] = {RouteEntry{IpPrefix{0, 0}, b1}};
  spec.routes[b1] = {RouteEntry{home, b1}, RouteEntry{other, ixp}};
  spec.routes[ixp] = {RouteEntry{other_low, f1}, RouteEntry{other_high, b2}};
  spec.routes[f1] = {RouteEntry{other, b2}};
  spec.routes[b2] = {RouteEntry{other, b2}};
  return spec;
}

}  // namespace scenarios

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"linear", "ecmp", "bolivia-like",
                                                 "misbehavior"};
  return names;
}

inline TopologySpec scenario(const std::string& name) {
  TopologySpec spec;
  if (name == "linear")
    spec = scenarios::linear();
  else if (name == "ecmp")
    spec = scenarios::ecmp();
  else if (name == "bolivia-like")
    spec = scenarios::bolivia_like();
  else if (name == "misbehavior")
    spec = scenarios::misbehavior();
  else
    throw std::invalid_argument("unknown scenario '" + name +
                                "' (have: linear, ecmp, bolivia-like, misbehavior)");
  validate_topology(spec);
  return spec;
}

// Matching address scopes for the canned scenarios, so classification can be
// run against simulated sweeps without hand-written prefix files.
inline std::vector<IpPrefix> scenario_country_prefixes(const std::string& name) {
  if (name == "linear" || name == "ecmp") return {parse_prefix("10.0.0.0/8")};
  if (name == "misbehavior")
    return {parse_prefix("10.2.0.0/16"), parse_prefix("10.3.0.0/16")};
  if (name == "bolivia-like")
    return {parse_prefix("200.0.0.0/16"),   parse_prefix("200.16.0.0/15"),
            parse_prefix("200.32.0.0/14"),  parse_prefix("200.64.0.0/14"),
            parse_prefix("200.96.0.0/16"),  parse_prefix("200.112.0.0/16")};
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

inline std::vector<IpPrefix> scenario_ixp_prefixes(const std::string& name) {
  if (name == "linear" || name == "ecmp") return {parse_prefix("192.0.2.0/24")};
  if (name == "misbehavior") return {parse_prefix("10.200.0.0/24")};
  if (name == "bolivia-like") return {parse_prefix("200.200.200.0/24")};
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

}  // namespace ixptk
