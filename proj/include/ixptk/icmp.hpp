#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <array>
#include <chrono>
#include <cstdint>
#include <cstring>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "ixptk/ip.hpp"
#include "ixptk/tracer.hpp"

namespace ixptk {

// --- ICMP echo packets with a pinned checksum -------------------------------
//
// Load balancers hash the first four bytes of the ICMP header, which include
// the checksum. Holding the checksum constant per trace (the Paris technique
// for ICMP) therefore pins the path. The last payload word is chosen so the
// packet checksums to exactly the requested flow value.

inline std::uint16_t icmp_checksum(const std::uint8_t* data, std::size_t len) {
  std::uint32_t sum = 0;
  for (std::size_t i = 0; i + 1 < len; i += 2)
    sum += static_cast<std::uint32_t>(data[i]) << 8 | data[i + 1];
  if (len % 2) sum += static_cast<std::uint32_t>(data[len - 1]) << 8;
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  return static_cast<std::uint16_t>(~sum & 0xffff);
}

// 8-byte header + 4-byte payload: [filler][flow tag]. The filler makes the
// ones-complement sum match `flow_checksum`.
inline std::array<std::uint8_t, 12> build_echo_request(std::uint16_t ident,
                                                       std::uint16_t seq,
                                                       std::uint16_t flow_checksum) {
  std::array<std::uint8_t, 12> pkt{};
  pkt[0] = 8;  // echo request
  pkt[1] = 0;
  pkt[2] = static_cast<std::uint8_t>(flow_checksum >> 8);
  pkt[3] = static_cast<std::uint8_t>(flow_checksum & 0xff);
  pkt[4] = static_cast<std::uint8_t>(ident >> 8);
  pkt[5] = static_cast<std::uint8_t>(ident & 0xff);
  pkt[6] = static_cast<std::uint8_t>(seq >> 8);
  pkt[7] = static_cast<std::uint8_t>(seq & 0xff);
  // Sum everything but the filler, then solve for it.
  std::uint32_t sum = 0;
  for (std::size_t i = 0; i < pkt.size(); i += 2)
    if (i != 8) sum += static_cast<std::uint32_t>(pkt[i]) << 8 | pkt[i + 1];
  while (sum >> 16) sum = (sum & 0xffff) + (sum >> 16);
  const std::uint16_t filler = static_cast<std::uint16_t>(~sum & 0xffff);
  pkt[8] = static_cast<std::uint8_t>(filler >> 8);
  pkt[9] = static_cast<std::uint8_t>(filler & 0xff);
  return pkt;
}

struct ParsedReply {
  enum class Kind { EchoReply, TtlExceeded, Other } kind = Kind::Other;
  Addr responder = 0;
  std::uint16_t ident = 0;
  std::uint16_t seq = 0;
};

// Parses a raw IPv4 datagram carrying an ICMP reply. For time-exceeded the
// ident/seq come from the quoted original probe.
inline ParsedReply parse_icmp_reply(const std::uint8_t* data, std::size_t len) {
  ParsedReply out;
  if (len < 20) return out;
  const std::size_t ihl = (data[0] & 0x0f) * 4;
  if (len < ihl + 8) return out;
  out.responder = static_cast<Addr>(data[12]) << 24 | static_cast<Addr>(data[13]) << 16 |
                  static_cast<Addr>(data[14]) << 8 | data[15];
  const std::uint8_t* icmp = data + ihl;
  const std::uint8_t type = icmp[0];
  if (type == 0) {  // echo reply
    out.kind = ParsedReply::Kind::EchoReply;
    out.ident = static_cast<std::uint16_t>(icmp[4] << 8 | icmp[5]);
    out.seq = static_cast<std::uint16_t>(icmp[6] << 8 | icmp[7]);
  } else if (type == 11) {  // time exceeded: quoted IP header + 8 bytes follow
    const std::size_t inner_off = ihl + 8;
    if (len < inner_off + 20) return out;
    const std::size_t inner_ihl = (data[inner_off] & 0x0f) * 4;
    if (len < inner_off + inner_ihl + 8) return out;
    const std::uint8_t* quoted = data + inner_off + inner_ihl;
    out.kind = ParsedReply::Kind::TtlExceeded;
    out.ident = static_cast<std::uint16_t>(quoted[4] << 8 | quoted[5]);
    out.seq = static_cast<std::uint16_t>(quoted[6] << 8 | quoted[7]);
  }
  return out;
}

// --- Raw-socket backend -----------------------------------------------------

// Sends real ICMP echo probes. Needs CAP_NET_RAW (or root); construction
// fails with an actionable message otherwise. Probes are serialized per
// backend instance; demultiplexing uses the ident field.
class RealIcmpBackend : public ProbingBackend {
 public:
  explicit RealIcmpBackend(int per_probe_timeout_ms = 2000)
      : timeout_ms_(per_probe_timeout_ms) {
    fd_ = ::socket(AF_INET, SOCK_RAW, IPPROTO_ICMP);
    if (fd_ < 0)
      throw std::runtime_error(
          "raw ICMP socket unavailable (need root or CAP_NET_RAW); "
          "use --backend simnet:<scenario> or replay:<file> instead");
    ident_ = static_cast<std::uint16_t>(::getpid() & 0xffff);
  }

  ~RealIcmpBackend() override {
    if (fd_ >= 0) ::close(fd_);
  }

  RealIcmpBackend(const RealIcmpBackend&) = delete;
  RealIcmpBackend& operator=(const RealIcmpBackend&) = delete;

  ProbeReply send_probe(Addr dst, int ttl, int flow_id) override {
    std::scoped_lock lock(m_);
    if (::setsockopt(fd_, IPPROTO_IP, IP_TTL, &ttl, sizeof ttl) < 0)
      throw std::runtime_error("setsockopt(IP_TTL) failed");
    const std::uint16_t seq = static_cast<std::uint16_t>(++seq_counter_);
    const auto pkt = build_echo_request(
        ident_, seq, static_cast<std::uint16_t>(flow_id & 0xffff));
    sockaddr_in to{};
    to.sin_family = AF_INET;
    to.sin_addr.s_addr = htonl(dst);
    const auto sent_at = std::chrono::steady_clock::now();
    if (::sendto(fd_, pkt.data(), pkt.size(), 0,
                 reinterpret_cast<const sockaddr*>(&to), sizeof to) < 0)
      throw std::runtime_error("sendto failed for " + format_ipv4(dst));

    for (;;) {
      const auto waited = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - sent_at)
                              .count();
      const int remaining = timeout_ms_ - static_cast<int>(waited);
      if (remaining <= 0) return ProbeReply{0, 0, ReplyKind::Timeout};
      pollfd pfd{fd_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, remaining);
      if (ready <= 0) return ProbeReply{0, 0, ReplyKind::Timeout};
      std::uint8_t buf[1500];
      const ssize_t n = ::recv(fd_, buf, sizeof buf, 0);
      if (n <= 0) continue;
      const ParsedReply reply = parse_icmp_reply(buf, static_cast<std::size_t>(n));
      if (reply.kind == ParsedReply::Kind::Other || reply.ident != ident_ ||
          reply.seq != seq)
        continue;  // someone else's packet
      const auto rtt = std::chrono::duration_cast<std::chrono::microseconds>(
                           std::chrono::steady_clock::now() - sent_at)
                           .count();
      const bool at_dst =
          reply.kind == ParsedReply::Kind::EchoReply && reply.responder == dst;
      return ProbeReply{reply.responder, rtt,
                        at_dst ? ReplyKind::DestinationReply : ReplyKind::TtlExceeded};
    }
  }

  Addr source_addr() const override { return source_; }

  // Best-effort local address discovery via a connected UDP socket.
  void discover_source(Addr dst) {
    const int fd = ::socket(AF_INET, SOCK_DGRAM, 0);
    if (fd < 0) return;
    sockaddr_in to{};
    to.sin_family = AF_INET;
    to.sin_port = htons(33434);
    to.sin_addr.s_addr = htonl(dst);
    if (::connect(fd, reinterpret_cast<const sockaddr*>(&to), sizeof to) == 0) {
      sockaddr_in local{};
      socklen_t len = sizeof local;
      if (::getsockname(fd, reinterpret_cast<sockaddr*>(&local), &len) == 0)
        source_ = ntohl(local.sin_addr.s_addr);
    }
    ::close(fd);
  }

 private:
  int fd_ = -1;
  int timeout_ms_;
  std::uint16_t ident_ = 0;
  std::uint32_t seq_counter_ = 0;
  Addr source_ = 0;
  std::mutex m_;
};

}  // namespace ixptk
