#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <variant>

#include "sdnbench/sim.hpp"

namespace sdnbench {

using PortId = std::uint32_t;
using SwitchId = std::uint32_t;  // 1-based, doubles as bridge id
using HostId = std::uint32_t;    // 1-based

struct MacAddr {
  std::uint64_t value = 0;

  static constexpr std::uint64_t kBroadcast = 0xFFFF'FFFF'FFFFULL;
  static constexpr MacAddr broadcast() { return MacAddr{kBroadcast}; }
  /// Host i gets MAC i in the low 48 bits.
  static constexpr MacAddr for_host(HostId i) { return MacAddr{i}; }

  constexpr bool is_broadcast() const { return value == kBroadcast; }
  std::string str() const;
  auto operator<=>(const MacAddr&) const = default;
};

struct Ipv4Addr {
  std::uint32_t value = 0;

  /// Host i gets 10.0.0.0 + i, i.e. 10.0.0.i for i <= 254.
  static constexpr Ipv4Addr for_host(HostId i) { return Ipv4Addr{(10U << 24) + i}; }
  std::string str() const;
  auto operator<=>(const Ipv4Addr&) const = default;
};

struct ArpRequest {
  Ipv4Addr sender_ip;
  Ipv4Addr target_ip;
};
struct ArpReply {
  Ipv4Addr sender_ip;
  Ipv4Addr target_ip;
};
struct EchoRequest {
  std::uint32_t ident = 0;
  std::uint32_t seq = 0;
  SimTime send_time = 0.0;
};
struct EchoReply {
  std::uint32_t ident = 0;
  std::uint32_t seq = 0;
  SimTime send_time = 0.0;
};
struct Data {
  std::uint32_t stream_id = 0;
  std::uint64_t packet_seq = 0;
};
struct DataAck {
  std::uint32_t stream_id = 0;
  std::uint64_t packet_seq = 0;
};
/// Link-discovery probe emitted by a switch on behalf of the controller.
struct Probe {
  SwitchId origin_switch = 0;
  PortId origin_port = 0;
};

using Payload = std::variant<ArpRequest, ArpReply, EchoRequest, EchoReply, Data, DataAck, Probe>;

inline constexpr std::uint32_t kControlFrameBytes = 64;
inline constexpr std::uint32_t kDefaultMtuBytes = 1500;

struct Frame {
  MacAddr src_mac;
  MacAddr dst_mac;
  Payload payload;
  std::uint32_t size_bytes = kControlFrameBytes;

  template <typename T>
  bool is() const {
    return std::holds_alternative<T>(payload);
  }
  template <typename T>
  const T& as() const {
    return std::get<T>(payload);
  }
};

/// Builds a frame with the fixed size for its kind: Data frames are mtu-sized,
/// everything else is 64 bytes.
Frame make_frame(MacAddr src, MacAddr dst, Payload payload, std::uint32_t mtu = kDefaultMtuBytes);

const char* kind_name(const Payload& payload);

}  // namespace sdnbench
