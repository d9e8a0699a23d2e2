#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <vector>

#include "sdnbench/messages.hpp"
#include "sdnbench/network.hpp"

namespace sdnbench {

class ControlChannel;

/// A controller program. Runs in the simulator's event loop with zero compute time.
class ControllerApp {
 public:
  virtual ~ControllerApp() = default;
  virtual void on_switch_features(ControlChannel& channel, const SwitchFeatures& features) {
    (void)channel;
    (void)features;
  }
  virtual void on_packet_in(ControlChannel& channel, const PacketIn& msg) = 0;
};

struct ChannelCounters {
  std::uint64_t to_controller = 0;
  std::uint64_t to_switch = 0;
  std::uint64_t flow_mods = 0;
  std::uint64_t packet_outs = 0;
  std::uint64_t port_mods = 0;
};

/// Switch <-> controller message fabric. Every message takes a fixed one-way
/// latency, so per-switch order is preserved in both directions.
class ControlChannel final : public ControlPlane {
 public:
  ControlChannel(Simulator& sim, Network& net, double latency_ms = 10.0);
  ~ControlChannel() override;
  ControlChannel(const ControlChannel&) = delete;
  ControlChannel& operator=(const ControlChannel&) = delete;

  void set_app(ControllerApp* app) { app_ = app; }
  double latency_ms() const { return latency_ms_; }
  const ChannelCounters& counters() const { return counters_; }
  Simulator& sim() { return sim_; }

  void to_controller(ToController msg, double extra_delay_ms) override;

  void send_flow_mod(FlowMod msg) { send(std::move(msg)); }
  void send_packet_out(PacketOut msg) { send(std::move(msg)); }
  void send_port_mod(PortMod msg) { send(std::move(msg)); }
  void send(ToSwitch msg);

 private:
  Simulator& sim_;
  Network& net_;
  double latency_ms_;
  ControllerApp* app_ = nullptr;
  ChannelCounters counters_;
};

/// Switch-to-switch link as seen by the controller; normalized so that a < b
/// (or a == b with a_port < b_port).
struct SwitchLink {
  SwitchId a = 0;
  PortId a_port = 0;
  SwitchId b = 0;
  PortId b_port = 0;
  auto operator<=>(const SwitchLink&) const = default;
};

struct Adjacency {
  /// Every port of every switch that reported features.
  std::map<SwitchId, std::vector<PortId>> ports;
  std::set<SwitchLink> links;
  /// Ports on which no probe arrived.
  std::map<SwitchId, std::vector<PortId>> host_ports;
};

/// Controller-side link discovery: on SwitchFeatures it emits a probe out of
/// every port; a probe PacketIn records the link it crossed.
class LinkDiscovery {
 public:
  void on_switch_features(ControlChannel& channel, const SwitchFeatures& features);
  /// Returns true when msg carried a probe (and was consumed).
  bool on_packet_in(const PacketIn& msg);
  Adjacency result() const;

 private:
  std::map<SwitchId, std::vector<PortId>> ports_;
  std::set<SwitchLink> links_;
};

/// Runs discovery alone on a fresh control channel until quiescence.
Adjacency discover_links(Simulator& sim, Network& net, double control_latency_ms);

}  // namespace sdnbench
