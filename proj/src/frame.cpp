#include "sdnbench/frame.hpp"

#include <fmt/format.h>

namespace sdnbench {

std::string MacAddr::str() const {
  return fmt::format("{:02x}:{:02x}:{:02x}:{:02x}:{:02x}:{:02x}", (value >> 40) & 0xff,
                     (value >> 32) & 0xff, (value >> 24) & 0xff, (value >> 16) & 0xff,
                     (value >> 8) & 0xff, value & 0xff);
}

std::string Ipv4Addr::str() const {
  return fmt::format("{}.{}.{}.{}", value >> 24, (value >> 16) & 0xff, (value >> 8) & 0xff,
                     value & 0xff);
}

Frame make_frame(MacAddr src, MacAddr dst, Payload payload, std::uint32_t mtu) {
  const bool data = std::holds_alternative<Data>(payload);
  return Frame{src, dst, std::move(payload), data ? mtu : kControlFrameBytes};
}

const char* kind_name(const Payload& payload) {
  static constexpr const char* kNames[] = {"arp-request", "arp-reply", "echo-request",
                                           "echo-reply",  "data",      "data-ack",
                                           "probe"};
  return kNames[payload.index()];
}

}  // namespace sdnbench
