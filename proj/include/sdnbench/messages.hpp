#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "sdnbench/frame.hpp"

namespace sdnbench {

enum class PortState : std::uint8_t { Forwarding, Blocked };

struct FlowEntry {
  MacAddr match_dst_mac;
  PortId out_port = 0;
  SimTime installed_at = 0.0;
};

using BufferRef = std::uint64_t;

struct PacketIn {
  SwitchId switch_id = 0;
  PortId in_port = 0;
  Frame frame;
  /// Empty for frames the switch did not buffer (discovery probes).
  std::optional<BufferRef> buffer_ref;
};

struct OutputAction {
  PortId port = 0;
};
struct FloodAction {};
using PacketOutAction = std::variant<OutputAction, FloodAction>;

/// Releases a buffered frame, or emits `frame` when no buffer is referenced.
struct PacketOut {
  SwitchId switch_id = 0;
  std::optional<BufferRef> buffer_ref;
  std::optional<Frame> frame;
  /// Ingress port for unbuffered frames (flood exclusion); 0 = none.
  PortId in_port = 0;
  PacketOutAction action;
};

struct FlowMod {
  SwitchId switch_id = 0;
  FlowEntry entry;
};

struct PortMod {
  SwitchId switch_id = 0;
  PortId port = 0;
  PortState state = PortState::Forwarding;
};

struct SwitchFeatures {
  SwitchId switch_id = 0;
  std::vector<PortId> ports;
};

using ToController = std::variant<PacketIn, SwitchFeatures>;
using ToSwitch = std::variant<PacketOut, FlowMod, PortMod>;

inline SwitchId target_switch(const ToSwitch& msg) {
  return std::visit([](const auto& m) { return m.switch_id; }, msg);
}
inline SwitchId source_switch(const ToController& msg) {
  return std::visit([](const auto& m) { return m.switch_id; }, msg);
}

}  // namespace sdnbench
