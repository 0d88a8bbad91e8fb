#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ixptk/ip.hpp"
#include "ixptk/scope.hpp"

namespace ixptk {

// An (address, port) pair with a currently active service on it.
using ServicePair = std::pair<Addr, std::uint16_t>;
using ServiceSet = std::set<ServicePair>;

enum class TargetMode { Service, Random };

inline const char* to_string(TargetMode m) {
  return m == TargetMode::Service ? "service" : "random";
}

// One probe destination per /24 network.
struct Target {
  IpPrefix network;  // always length 24
  Addr addr = 0;
  TargetMode mode = TargetMode::Random;

  bool operator==(const Target&) const = default;
};

inline std::vector<IpPrefix> split_to_slash24(const IpPrefix& prefix) {
  if (prefix.length > 24)
    throw std::invalid_argument("split_to_slash24: prefix longer than /24: " +
                                format_prefix(prefix));
  std::vector<IpPrefix> out;
  out.reserve(std::size_t{1} << (24 - prefix.length));
  for (std::uint64_t base = prefix.first(); base <= prefix.last(); base += 256)
    out.push_back(IpPrefix{static_cast<Addr>(base), 24});
  return out;
}

// Picks the probe target for one /24: the lowest active-service address when
// one exists, otherwise a seeded-PRNG host address. Network and broadcast
// addresses are never chosen. Pure function of its arguments.
inline Target choose_target(const IpPrefix& network, const ServiceSet& active,
                            std::uint64_t seed) {
  if (network.length != 24)
    throw std::invalid_argument("choose_target: network must be a /24, got " +
                                format_prefix(network));
  for (auto it = active.lower_bound({network.first(), 0});
       it != active.end() && it->first <= network.last(); ++it) {
    const Addr a = it->first;
    if (a != network.first() && a != network.last())
      return Target{network, a, TargetMode::Service};
  }
  std::seed_seq sseq{static_cast<std::uint32_t>(seed),
                     static_cast<std::uint32_t>(seed >> 32), network.base};
  std::mt19937 rng(sseq);
  const Addr a = network.base + 1 + rng() % 254;  // .1 .. .254
  return Target{network, a, TargetMode::Random};
}

inline std::vector<Target> build_targets(const std::vector<IpPrefix>& netblocks,
                                         const ServiceSet& active, std::uint64_t seed) {
  std::set<IpPrefix> networks;
  for (const auto& block : netblocks)
    for (const auto& p : split_to_slash24(block)) networks.insert(p);
  std::vector<Target> out;
  out.reserve(networks.size());
  for (const auto& network : networks) out.push_back(choose_target(network, active, seed));
  return out;
}

// One target per /24 of the netblock file's union, ascending by network.
inline std::vector<Target> build_target_list(const std::filesystem::path& country_file,
                                             const ServiceSet& active,
                                             std::uint64_t seed) {
  return build_targets(load_prefix_file(country_file), active, seed);
}

inline nlohmann::json to_json(const Target& t) {
  nlohmann::json j;
  j["network"] = format_prefix(t.network);
  j["addr"] = format_ipv4(t.addr);
  j["mode"] = to_string(t.mode);
  return j;
}

inline Target target_from_json(const nlohmann::json& j) {
  Target t;
  t.network = parse_prefix(j.at("network").get<std::string>());
  auto a = parse_ipv4(j.at("addr").get<std::string>());
  if (!a) throw std::runtime_error("bad target addr");
  t.addr = *a;
  const auto mode = j.at("mode").get<std::string>();
  if (mode == "service")
    t.mode = TargetMode::Service;
  else if (mode == "random")
    t.mode = TargetMode::Random;
  else
    throw std::runtime_error("bad target mode '" + mode + "'");
  return t;
}

}  // namespace ixptk
