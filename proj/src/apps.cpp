#include "sdnbench/apps.hpp"

#include <algorithm>
#include <deque>

namespace sdnbench {

std::string app_name(AppKind app) { return app == AppKind::L2 ? "l2" : "l2-stp"; }

AppKind parse_app(const std::string& name) {
  if (name == "l2") return AppKind::L2;
  if (name == "l2-stp") return AppKind::L2Stp;
  throw std::invalid_argument("unknown controller app '" + name + "' (expected l2 or l2-stp)");
}

void LearningSwitch::on_packet_in(ControlChannel& channel, const PacketIn& msg) {
  if (msg.frame.is<Probe>()) return;
  learn_and_forward(channel, msg);
}

void LearningSwitch::learn_and_forward(ControlChannel& channel, const PacketIn& msg) {
  auto& table = table_[msg.switch_id];
  const Frame& frame = msg.frame;
  if (!frame.src_mac.is_broadcast())
    table.insert_or_assign(frame.src_mac, MacTableEntry{msg.in_port, channel.sim().now()});

  PacketOut out;
  out.switch_id = msg.switch_id;
  out.buffer_ref = msg.buffer_ref;
  if (!msg.buffer_ref) {
    out.frame = frame;
    out.in_port = msg.in_port;
  }
  auto known = frame.dst_mac.is_broadcast() ? table.end() : table.find(frame.dst_mac);
  if (known == table.end()) {
    out.action = FloodAction{};
  } else {
    const PortId port = known->second.port;
    channel.send_flow_mod(FlowMod{msg.switch_id, FlowEntry{frame.dst_mac, port, 0.0}});
    out.action = OutputAction{port};
  }
  channel.send_packet_out(std::move(out));
}

SpanningTree stp_compute(const Adjacency& adjacency) {
  SpanningTree tree;
  if (adjacency.ports.empty()) throw ConfigError("stp: no switches discovered");
  tree.root = adjacency.ports.begin()->first;

  // neighbours[s] = (neighbour id, local port, neighbour port)
  struct Hop {
    SwitchId peer;
    PortId local;
    PortId remote;
  };
  std::map<SwitchId, std::vector<Hop>> neighbours;
  for (const auto& l : adjacency.links) {
    if (l.a == l.b) continue;  // self-loop never carries tree traffic
    neighbours[l.a].push_back({l.b, l.a_port, l.b_port});
    neighbours[l.b].push_back({l.a, l.b_port, l.a_port});
  }

  std::map<SwitchId, std::size_t> depth{{tree.root, 0}};
  std::deque<SwitchId> queue{tree.root};
  while (!queue.empty()) {
    const SwitchId s = queue.front();
    queue.pop_front();
    for (const Hop& h : neighbours[s])
      if (depth.emplace(h.peer, depth[s] + 1).second) queue.push_back(h.peer);
  }
  if (depth.size() != adjacency.ports.size())
    throw ConfigError("stp: switch graph is disconnected");

  for (const auto& [s, ports] : adjacency.ports)
    for (PortId p : ports) tree.roles[s][p] = PortState::Forwarding;

  for (const auto& [s, d] : depth) {
    if (s == tree.root) continue;
    std::optional<Hop> parent;
    for (const Hop& h : neighbours[s]) {
      if (depth.at(h.peer) + 1 != d) continue;
      if (!parent || std::pair(h.peer, h.local) < std::pair(parent->peer, parent->local)) parent = h;
    }
    SwitchLink l{s, parent->local, parent->peer, parent->remote};
    if (std::pair(l.b, l.b_port) < std::pair(l.a, l.a_port)) {
      std::swap(l.a, l.b);
      std::swap(l.a_port, l.b_port);
    }
    tree.tree_links.insert(l);
  }
  for (const auto& l : adjacency.links) {
    if (tree.tree_links.contains(l)) continue;
    tree.blocked_links.insert(l);
    tree.roles[l.a][l.a_port] = PortState::Blocked;
    tree.roles[l.b][l.b_port] = PortState::Blocked;
  }
  return tree;
}

void StpLearningSwitch::on_switch_features(ControlChannel& channel, const SwitchFeatures& features) {
  discovery_.on_switch_features(channel, features);
  if (scheduled_) return;
  scheduled_ = true;
  channel.sim().schedule(discovery_wait_ms_, [this, &channel] { compute(channel); });
}

void StpLearningSwitch::compute(ControlChannel& channel) {
  SpanningTree tree = stp_compute(discovery_.result());
  for (const auto& [s, ports] : tree.roles)
    for (const auto& [p, role] : ports)
      if (role == PortState::Blocked) channel.send_port_mod(PortMod{s, p, PortState::Blocked});
  tree.converged_at = channel.sim().now() + channel.latency_ms();
  tree_ = std::move(tree);
}

void StpLearningSwitch::on_packet_in(ControlChannel& channel, const PacketIn& msg) {
  if (discovery_.on_packet_in(msg)) return;
  if (tree_ && tree_->roles.at(msg.switch_id).at(msg.in_port) == PortState::Blocked) return;
  learn_and_forward(channel, msg);
}

}  // namespace sdnbench
