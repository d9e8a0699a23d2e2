#pragma once

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "sdnbench/frame.hpp"

namespace sdnbench {

enum class NodeKind : std::uint8_t { Host, Switch };

struct NodeRef {
  NodeKind kind = NodeKind::Host;
  std::uint32_t id = 0;

  static constexpr NodeRef host(HostId h) { return {NodeKind::Host, h}; }
  static constexpr NodeRef sw(SwitchId s) { return {NodeKind::Switch, s}; }
  bool is_host() const { return kind == NodeKind::Host; }
  bool is_switch() const { return kind == NodeKind::Switch; }
  std::string name() const;
  auto operator<=>(const NodeRef&) const = default;
};

/// A node's attachment point. Hosts have the single port 0 (eth0); switch
/// ports are numbered from 1.
struct Endpoint {
  NodeRef node;
  PortId port = 0;
  std::string name() const;  // e.g. "s1-eth2"
  auto operator<=>(const Endpoint&) const = default;
};

/// TCLink-style parameters. 1 Mbps = 10^6 bit/s.
struct LinkParams {
  double bandwidth_mbps = 100.0;
  double delay_ms = 1.0;
  double loss_rate = 0.0;

  /// Throws std::invalid_argument unless bandwidth > 0, delay >= 0, loss in [0, 1].
  void validate() const;
  /// Serialization time in ms for a frame of the given size.
  double serialization_ms(std::uint32_t size_bytes) const {
    return static_cast<double>(size_bytes) * 8.0 / (bandwidth_mbps * 1e3);
  }
};

struct Link {
  Endpoint a;
  Endpoint b;
  LinkParams params;

  bool is_switch_link() const { return a.node.is_switch() && b.node.is_switch(); }
};

namespace topo {
struct Linear {
  std::uint32_t n_hosts = 0;
};
struct Star {
  std::uint32_t n_hosts = 0;
};
struct BinaryTree {
  std::uint32_t n_hosts = 0;
};
struct FatTree {
  std::uint32_t k = 0;
};
struct SpineLeaf {
  std::uint32_t spines = 0;
  std::uint32_t leaves = 0;
  std::uint32_t hosts_per_leaf = 0;
};
}  // namespace topo

using TopologySpec =
    std::variant<topo::Linear, topo::Star, topo::BinaryTree, topo::FatTree, topo::SpineLeaf>;

/// Violated topology rule; the message names it.
class TopologyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// CLI/CSV name of the topology family: linear, star, binary-tree, fat-tree, spine-leaf.
std::string kind_name(const TopologySpec& spec);
/// Human-readable spec, e.g. "fat-tree(k=4)".
std::string describe(const TopologySpec& spec);
/// Throws TopologyError if the spec breaks a structural rule.
void validate(const TopologySpec& spec);
/// True for the families that contain switch loops.
bool has_loops(const TopologySpec& spec);

/// Spine-leaf shape used when a sweep gives only a host count: two spines,
/// clamp(n/2, 1, 4) hosts per leaf.
topo::SpineLeaf spine_leaf_for_hosts(std::uint32_t n_hosts);
/// Fat tree with exactly n hosts (n = k^3/4); throws TopologyError otherwise.
topo::FatTree fat_tree_for_hosts(std::uint32_t n_hosts);

/// Immutable network description produced by build().
struct NetworkModel {
  TopologySpec spec;
  std::uint32_t host_count = 0;
  std::uint32_t switch_count = 0;
  /// Host links first (by host id), then switch links sorted by switch ids.
  std::vector<Link> links;
  /// host_link[h] is the index of host h's only link; index 0 unused.
  std::vector<std::size_t> host_link;
  /// switch_ports[s][p] is the link on port p of switch s; both index 0 unused.
  std::vector<std::vector<std::size_t>> switch_ports;

  std::size_t port_count(SwitchId s) const { return switch_ports.at(s).size() - 1; }
  std::size_t switch_link_count() const;
  /// Link index attached to (node, port).
  std::size_t link_at(const Endpoint& ep) const;
  /// The far end of the link attached to ep.
  Endpoint peer(const Endpoint& ep) const;
  bool is_host_port(SwitchId s, PortId p) const;
};

/// Builds the topology. Port numbering: host-facing ports first, then peer
/// links in construction order.
NetworkModel build(const TopologySpec& spec, const LinkParams& params = {});

/// One line per node, hosts then switches in numeric order.
std::string dump(const NetworkModel& net);
/// One line per link in NetworkModel::links order.
std::string links(const NetworkModel& net);
/// Graphviz description; hosts are ellipses, switches boxes.
std::string export_dot(const NetworkModel& net);

}  // namespace sdnbench
