#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>

#include "sdnbench/control.hpp"
#include "sdnbench/errors.hpp"

namespace sdnbench {

enum class AppKind { L2, L2Stp };

/// "l2" or "l2-stp".
std::string app_name(AppKind app);
/// Throws std::invalid_argument for unknown names.
AppKind parse_app(const std::string& name);

struct MacTableEntry {
  PortId port = 0;
  SimTime learned_at = 0.0;
};
using MacTable = std::map<SwitchId, std::map<MacAddr, MacTableEntry>>;

/// Reactive L2 learning switch: learn the source port, then install a flow and
/// forward if the destination is known, otherwise flood. Broadcast
/// destinations always flood and never install flows.
class LearningSwitch : public ControllerApp {
 public:
  void on_packet_in(ControlChannel& channel, const PacketIn& msg) override;
  const MacTable& mac_table() const { return table_; }

 protected:
  void learn_and_forward(ControlChannel& channel, const PacketIn& msg);

 private:
  MacTable table_;
};

struct SpanningTree {
  SwitchId root = 0;
  /// Role of every switch port; host-facing ports are always Forwarding.
  std::map<SwitchId, std::map<PortId, PortState>> roles;
  std::set<SwitchLink> tree_links;
  std::set<SwitchLink> blocked_links;
  SimTime converged_at = 0.0;

  PortState role(SwitchId s, PortId p) const { return roles.at(s).at(p); }
};

/// Centralized STP: root is the lowest switch id; every other switch keeps the
/// link to its breadth-first parent, chosen among neighbours one level closer
/// to the root by (lowest neighbour id, lowest local port). All other
/// switch-to-switch ports are Blocked. Throws ConfigError when disconnected.
SpanningTree stp_compute(const Adjacency& adjacency);

/// Learning switch behind a spanning tree. Discovery starts when switches
/// announce themselves; the tree is computed `discovery_wait_ms` after the first
/// announcement and pushed to the switches with PortMods.
class StpLearningSwitch : public LearningSwitch {
 public:
  explicit StpLearningSwitch(double discovery_wait_ms) : discovery_wait_ms_(discovery_wait_ms) {}

  void on_switch_features(ControlChannel& channel, const SwitchFeatures& features) override;
  void on_packet_in(ControlChannel& channel, const PacketIn& msg) override;

  const std::optional<SpanningTree>& tree() const { return tree_; }
  /// Time the last PortMod takes effect at the switches.
  std::optional<SimTime> converged_at() const {
    return tree_ ? std::optional<SimTime>(tree_->converged_at) : std::nullopt;
  }

 private:
  void compute(ControlChannel& channel);

  double discovery_wait_ms_;
  bool scheduled_ = false;
  LinkDiscovery discovery_;
  std::optional<SpanningTree> tree_;
};

}  // namespace sdnbench
