#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <istream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ixptk/ip.hpp"

namespace ixptk {

// Where an address sits relative to the measured country and its IXP.
// Precedence when sets overlap: Ixp > Private > Domestic > Foreign.
enum class Membership { Ixp, Domestic, Private, Foreign };

inline const char* to_string(Membership m) {
  switch (m) {
    case Membership::Ixp: return "ixp";
    case Membership::Domestic: return "domestic";
    case Membership::Private: return "private";
    case Membership::Foreign: return "foreign";
  }
  return "?";
}

// A set of prefixes with union semantics (covering/overlapping blocks are
// fine, as RIR delegation files contain them). Normalized to disjoint address
// ranges so membership is a binary search.
class PrefixSet {
 public:
  PrefixSet() = default;

  explicit PrefixSet(std::vector<IpPrefix> prefixes) : prefixes_(std::move(prefixes)) {
    std::sort(prefixes_.begin(), prefixes_.end());
    prefixes_.erase(std::unique(prefixes_.begin(), prefixes_.end()), prefixes_.end());
    for (const auto& p : prefixes_) {
      const Addr lo = p.first(), hi = p.last();
      // Sorted input: lo never decreases, so ranges only extend at the back.
      const bool joins_back =
          !ranges_.empty() && (lo <= ranges_.back().second ||
                               lo - ranges_.back().second == 1);
      if (joins_back)
        ranges_.back().second = std::max(ranges_.back().second, hi);
      else
        ranges_.emplace_back(lo, hi);
    }
  }

  bool contains(Addr addr) const {
    auto it = std::upper_bound(ranges_.begin(), ranges_.end(), addr,
                               [](Addr a, const auto& r) { return a < r.first; });
    return it != ranges_.begin() && addr <= std::prev(it)->second;
  }

  bool empty() const { return prefixes_.empty(); }
  const std::vector<IpPrefix>& prefixes() const { return prefixes_; }

 private:
  std::vector<IpPrefix> prefixes_;
  std::vector<std::pair<Addr, Addr>> ranges_;
};

inline const std::vector<IpPrefix>& private_prefixes() {
  // The three RFC-1918 blocks, exactly.
  static const std::vector<IpPrefix> blocks = {
      IpPrefix{0x0a000000u, 8},    // 10.0.0.0/8
      IpPrefix{0xac100000u, 12},   // 172.16.0.0/12
      IpPrefix{0xc0a80000u, 16}};  // 192.168.0.0/16
  return blocks;
}

// The country's RIR allocation plus the IXP subnet. Immutable after
// construction; membership queries are safe from any number of threads.
class AddressScope {
 public:
  AddressScope(std::vector<IpPrefix> country, std::vector<IpPrefix> ixp)
      : country_(std::move(country)), ixp_(std::move(ixp)), private_(private_prefixes()) {
    if (country_.empty()) throw std::invalid_argument("AddressScope: empty country prefix set");
    if (ixp_.empty()) throw std::invalid_argument("AddressScope: empty IXP prefix set");
  }

  Membership membership(Addr addr) const {
    if (ixp_.contains(addr)) return Membership::Ixp;
    if (private_.contains(addr)) return Membership::Private;
    if (country_.contains(addr)) return Membership::Domestic;
    return Membership::Foreign;
  }

  const PrefixSet& country() const { return country_; }
  const PrefixSet& ixp() const { return ixp_; }

 private:
  PrefixSet country_;
  PrefixSet ixp_;
  PrefixSet private_;
};

inline Membership scope_membership(const AddressScope& scope, Addr addr) {
  return scope.membership(addr);
}

// Netblock file format: one CIDR per line, '#' comments, blank lines ignored.
inline std::vector<IpPrefix> parse_prefix_lines(std::istream& in,
                                                const std::string& source_name) {
  std::vector<IpPrefix> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto begin = line.find_first_not_of(" \t\r");
    if (begin == std::string::npos) continue;
    auto end = line.find_last_not_of(" \t\r");
    try {
      out.push_back(parse_prefix(std::string_view(line).substr(begin, end - begin + 1)));
    } catch (const std::exception& e) {
      throw std::runtime_error(source_name + ":" + std::to_string(line_no) + ": " +
                               e.what());
    }
  }
  return out;
}

inline std::vector<IpPrefix> load_prefix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open netblock file: " + path.string());
  return parse_prefix_lines(in, path.filename().string());
}

}  // namespace ixptk
