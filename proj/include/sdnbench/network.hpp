#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "sdnbench/messages.hpp"
#include "sdnbench/sim.hpp"
#include "sdnbench/topology.hpp"

namespace sdnbench {

struct DataplaneConfig {
  std::size_t buffer_cap = 64;
  double switch_proc_ms = 0.05;
  double host_proc_ms = 0.05;
  /// Broadcast frames alive before a storm is declared; defaults to 10 x nodes.
  std::optional<std::size_t> storm_cap;
  std::uint32_t mtu_bytes = kDefaultMtuBytes;
};

/// Frame copies on links. At every instant:
/// transmitted = delivered + dropped_loss + dropped_buffer + dropped_blocked + in_flight.
struct DataplaneCounters {
  std::uint64_t transmitted = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped_loss = 0;
  std::uint64_t dropped_buffer = 0;
  std::uint64_t dropped_blocked = 0;
  std::uint64_t in_flight = 0;

  std::uint64_t packet_ins = 0;
  std::uint64_t flow_hits = 0;
  std::uint64_t stale_packet_outs = 0;

  bool conserved() const {
    return transmitted == delivered + dropped_loss + dropped_buffer + dropped_blocked + in_flight;
  }
};

struct HostState {
  HostId id = 0;
  MacAddr mac;
  Ipv4Addr ip;
  std::map<Ipv4Addr, MacAddr> arp_cache;
};

struct PendingFrame {
  Frame frame;
  PortId in_port = 0;
};

struct SwitchState {
  SwitchId id = 0;
  /// Indexed by port id; slot 0 unused.
  std::vector<PortState> port_state;
  std::map<MacAddr, FlowEntry> flow_table;
  std::map<BufferRef, PendingFrame> pending_buffer;
  BufferRef next_buffer_ref = 1;
  std::uint64_t packet_ins = 0;

  std::size_t port_count() const { return port_state.size() - 1; }
  const FlowEntry* lookup(MacAddr dst) const {
    auto it = flow_table.find(dst);
    return it == flow_table.end() ? nullptr : &it->second;
  }
};

/// Switch side of the control channel.
class ControlPlane {
 public:
  virtual ~ControlPlane() = default;
  /// Delivers msg to the controller after `extra_delay_ms` plus channel latency.
  virtual void to_controller(ToController msg, double extra_delay_ms) = 0;
};

/// Runtime dataplane: hosts, switches and links animated on a Simulator.
class Network {
 public:
  using Receiver = std::function<void(HostId, const Frame&)>;
  using ArpListener = std::function<void(Ipv4Addr, MacAddr)>;

  Network(Simulator& sim, NetworkModel model, DataplaneConfig config = {});
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  void attach_control(ControlPlane* control) { control_ = control; }
  /// Every switch announces its port list to the controller.
  void announce_switches();

  Simulator& sim() { return sim_; }
  const NetworkModel& model() const { return model_; }
  const DataplaneConfig& config() const { return config_; }
  const DataplaneCounters& counters() const { return counters_; }

  HostState& host(HostId h) { return hosts_.at(h); }
  const HostState& host(HostId h) const { return hosts_.at(h); }
  SwitchState& sw(SwitchId s) { return switches_.at(s); }
  const SwitchState& sw(SwitchId s) const { return switches_.at(s); }

  /// Puts a frame on the link attached to `from`. Serialization starts at
  /// max(earliest, link free) and delivery follows after the link delay; the
  /// frame may be dropped with the link's loss rate.
  void transmit(const Endpoint& from, Frame frame, SimTime earliest);
  void host_send(HostId h, Frame frame) { transmit({NodeRef::host(h), 0}, std::move(frame), sim_.now()); }

  /// Switch ingress for a frame arriving now on in_port.
  void switch_handle_frame(SwitchId s, PortId in_port, Frame frame);
  /// Copies the frame to every Forwarding port except exclude_in_port, starting
  /// no earlier than `earliest`; returns the number of copies.
  std::size_t flood(SwitchId s, const Frame& frame, PortId exclude_in_port, SimTime earliest);
  /// Host protocol reaction to a frame it has finished receiving.
  void host_handle_frame(HostId h, const Frame& frame);
  /// Applies a controller message that has arrived at its switch.
  void apply(const ToSwitch& msg);

  /// App-level frames (echo replies, data, acks) addressed to the host.
  void add_receiver(HostId h, Receiver receiver);
  std::uint64_t add_arp_listener(HostId h, ArpListener listener);
  void remove_arp_listener(HostId h, std::uint64_t token);

  /// Identifier for traffic applications (ping ident, stream id), unique per network.
  std::uint32_t next_app_id() { return next_app_id_++; }

  std::size_t storm_cap() const { return storm_cap_; }
  std::size_t broadcast_alive() const { return broadcast_alive_; }
  /// Time the storm was detected; the simulator is stopped at that instant.
  std::optional<SimTime> storm_detected_at() const { return storm_at_; }

 private:
  void arrive(const Endpoint& to, Frame frame, bool lost);
  void raise_packet_in(SwitchState& sw, PortId in_port, const Frame& frame, std::optional<BufferRef> ref);
  void emit(SwitchState& sw, const Frame& frame, PortId in_port, const PacketOutAction& action, bool probe);
  void track_broadcast(const Frame& frame, int delta);
  void learn(HostState& host, Ipv4Addr ip, MacAddr mac);

  Simulator& sim_;
  NetworkModel model_;
  DataplaneConfig config_;
  ControlPlane* control_ = nullptr;

  std::vector<HostState> hosts_;
  std::vector<SwitchState> switches_;
  std::vector<std::array<SimTime, 2>> busy_until_;
  std::vector<std::vector<Receiver>> receivers_;
  std::vector<std::vector<std::pair<std::uint64_t, ArpListener>>> arp_listeners_;
  std::uint64_t next_listener_ = 1;
  std::uint32_t next_app_id_ = 1;

  DataplaneCounters counters_;
  std::size_t storm_cap_ = 0;
  std::size_t broadcast_alive_ = 0;
  std::optional<SimTime> storm_at_;
};

/// True once the network has declared a broadcast storm.
inline bool detect_storm(const Network& net) { return net.storm_detected_at().has_value(); }

}  // namespace sdnbench
