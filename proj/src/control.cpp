#include "sdnbench/control.hpp"

#include <algorithm>

namespace sdnbench {

ControlChannel::ControlChannel(Simulator& sim, Network& net, double latency_ms)
    : sim_(sim), net_(net), latency_ms_(latency_ms) {
  if (!(latency_ms >= 0.0)) throw std::invalid_argument("control latency must be >= 0");
  net_.attach_control(this);
}

ControlChannel::~ControlChannel() { net_.attach_control(nullptr); }

void ControlChannel::to_controller(ToController msg, double extra_delay_ms) {
  ++counters_.to_controller;
  sim_.schedule(extra_delay_ms + latency_ms_, [this, m = std::move(msg)] {
    if (app_ == nullptr) return;
    if (const auto* pin = std::get_if<PacketIn>(&m))
      app_->on_packet_in(*this, *pin);
    else
      app_->on_switch_features(*this, std::get<SwitchFeatures>(m));
  });
}

void ControlChannel::send(ToSwitch msg) {
  ++counters_.to_switch;
  std::visit(
      [this](const auto& m) {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, FlowMod>) ++counters_.flow_mods;
        if constexpr (std::is_same_v<T, PacketOut>) ++counters_.packet_outs;
        if constexpr (std::is_same_v<T, PortMod>) ++counters_.port_mods;
      },
      msg);
  sim_.schedule(latency_ms_, [this, m = std::move(msg)] { net_.apply(m); });
}

void LinkDiscovery::on_switch_features(ControlChannel& channel, const SwitchFeatures& features) {
  ports_[features.switch_id] = features.ports;
  for (PortId p : features.ports) {
    PacketOut out;
    out.switch_id = features.switch_id;
    out.frame = make_frame(MacAddr{}, MacAddr{}, Probe{features.switch_id, p});
    out.action = OutputAction{p};
    channel.send_packet_out(std::move(out));
  }
}

bool LinkDiscovery::on_packet_in(const PacketIn& msg) {
  const auto* probe = std::get_if<Probe>(&msg.frame.payload);
  if (probe == nullptr) return false;
  SwitchLink link{probe->origin_switch, probe->origin_port, msg.switch_id, msg.in_port};
  if (std::pair(link.b, link.b_port) < std::pair(link.a, link.a_port)) {
    std::swap(link.a, link.b);
    std::swap(link.a_port, link.b_port);
  }
  links_.insert(link);
  return true;
}

Adjacency LinkDiscovery::result() const {
  Adjacency adj;
  adj.ports = ports_;
  adj.links = links_;
  std::set<std::pair<SwitchId, PortId>> linked;
  for (const auto& l : links_) {
    linked.emplace(l.a, l.a_port);
    linked.emplace(l.b, l.b_port);
  }
  for (const auto& [s, ports] : ports_) {
    auto& host = adj.host_ports[s];
    for (PortId p : ports)
      if (!linked.contains({s, p})) host.push_back(p);
  }
  return adj;
}

namespace {
class DiscoveryOnly final : public ControllerApp {
 public:
  void on_switch_features(ControlChannel& channel, const SwitchFeatures& features) override {
    discovery.on_switch_features(channel, features);
  }
  void on_packet_in(ControlChannel&, const PacketIn& msg) override { discovery.on_packet_in(msg); }
  LinkDiscovery discovery;
};
}  // namespace

Adjacency discover_links(Simulator& sim, Network& net, double control_latency_ms) {
  ControlChannel channel(sim, net, control_latency_ms);
  DiscoveryOnly app;
  channel.set_app(&app);
  net.announce_switches();
  sim.run();
  return app.discovery.result();
}

}  // namespace sdnbench
