#include "sdnbench/network.hpp"

#include <algorithm>
#include <stdexcept>

namespace sdnbench {

Network::Network(Simulator& sim, NetworkModel model, DataplaneConfig config)
    : sim_(sim), model_(std::move(model)), config_(config) {
  hosts_.resize(model_.host_count + 1);
  for (HostId h = 1; h <= model_.host_count; ++h)
    hosts_[h] = HostState{h, MacAddr::for_host(h), Ipv4Addr::for_host(h), {}};
  switches_.resize(model_.switch_count + 1);
  for (SwitchId s = 1; s <= model_.switch_count; ++s) {
    switches_[s].id = s;
    switches_[s].port_state.assign(model_.port_count(s) + 1, PortState::Forwarding);
  }
  busy_until_.assign(model_.links.size(), {0.0, 0.0});
  receivers_.resize(model_.host_count + 1);
  arp_listeners_.resize(model_.host_count + 1);
  storm_cap_ = config_.storm_cap.value_or(10 * (model_.host_count + model_.switch_count));
}

void Network::announce_switches() {
  if (control_ == nullptr) return;
  for (SwitchId s = 1; s <= model_.switch_count; ++s) {
    SwitchFeatures features{s, {}};
    for (PortId p = 1; p <= switches_[s].port_count(); ++p) features.ports.push_back(p);
    control_->to_controller(std::move(features), 0.0);
  }
}

void Network::transmit(const Endpoint& from, Frame frame, SimTime earliest) {
  if (sim_.stopped()) return;
  if (frame.size_bytes == 0) throw std::invalid_argument("transmit: frame size must be positive");
  const std::size_t li = model_.link_at(from);
  const Link& link = model_.links[li];
  const int dir = link.a == from ? 0 : 1;
  const Endpoint to = dir == 0 ? link.b : link.a;

  SimTime& busy = busy_until_[li][dir];
  const SimTime start = std::max({earliest, busy, sim_.now()});
  busy = start + link.params.serialization_ms(frame.size_bytes);
  const SimTime arrival = busy + link.params.delay_ms;
  const bool lost = sim_.rng().bernoulli(link.params.loss_rate);

  ++counters_.transmitted;
  ++counters_.in_flight;
  track_broadcast(frame, +1);
  sim_.schedule_at(arrival, [this, to, lost, f = std::move(frame)]() mutable { arrive(to, std::move(f), lost); });
}

void Network::arrive(const Endpoint& to, Frame frame, bool lost) {
  --counters_.in_flight;
  track_broadcast(frame, -1);
  if (lost) {
    ++counters_.dropped_loss;
    return;
  }
  if (to.node.is_host()) {
    ++counters_.delivered;
    const HostId h = to.node.id;
    sim_.schedule(config_.host_proc_ms, [this, h, f = std::move(frame)] { host_handle_frame(h, f); });
    return;
  }
  switch_handle_frame(to.node.id, to.port, std::move(frame));
}

void Network::switch_handle_frame(SwitchId s, PortId in_port, Frame frame) {
  SwitchState& sw = switches_.at(s);
  const bool probe = frame.is<Probe>();
  if (sw.port_state.at(in_port) == PortState::Blocked && !probe) {
    ++counters_.dropped_blocked;
    return;
  }
  if (probe) {
    ++counters_.delivered;
    raise_packet_in(sw, in_port, frame, std::nullopt);
    return;
  }
  const SimTime ready = sim_.now() + config_.switch_proc_ms;
  if (!frame.dst_mac.is_broadcast()) {
    if (const FlowEntry* entry = sw.lookup(frame.dst_mac)) {
      ++counters_.delivered;
      ++counters_.flow_hits;
      const PortId out = entry->out_port;
      if (out != in_port && sw.port_state[out] == PortState::Forwarding)
        transmit({NodeRef::sw(s), out}, std::move(frame), ready);
      return;
    }
  }
  if (sw.pending_buffer.size() >= config_.buffer_cap) {
    ++counters_.dropped_buffer;
    return;
  }
  ++counters_.delivered;
  const BufferRef ref = sw.next_buffer_ref++;
  track_broadcast(frame, +1);
  auto [it, inserted] = sw.pending_buffer.emplace(ref, PendingFrame{std::move(frame), in_port});
  raise_packet_in(sw, in_port, it->second.frame, ref);
}

void Network::raise_packet_in(SwitchState& sw, PortId in_port, const Frame& frame,
                              std::optional<BufferRef> ref) {
  if (control_ == nullptr) return;
  ++counters_.packet_ins;
  ++sw.packet_ins;
  control_->to_controller(PacketIn{sw.id, in_port, frame, ref}, config_.switch_proc_ms);
}

std::size_t Network::flood(SwitchId s, const Frame& frame, PortId exclude_in_port, SimTime earliest) {
  const SwitchState& sw = switches_.at(s);
  std::size_t copies = 0;
  for (PortId p = 1; p <= sw.port_count(); ++p) {
    if (p == exclude_in_port || sw.port_state[p] != PortState::Forwarding) continue;
    transmit({NodeRef::sw(s), p}, frame, earliest);
    ++copies;
  }
  return copies;
}

void Network::emit(SwitchState& sw, const Frame& frame, PortId in_port, const PacketOutAction& action,
                   bool probe) {
  if (const auto* out = std::get_if<OutputAction>(&action)) {
    if (out->port < 1 || out->port > sw.port_count()) throw std::out_of_range("packet-out: invalid port");
    // Probes ignore port roles so discovery sees blocked links too.
    if (out->port == in_port) return;
    if (!probe && sw.port_state[out->port] != PortState::Forwarding) return;
    transmit({NodeRef::sw(sw.id), out->port}, frame, sim_.now());
  } else {
    flood(sw.id, frame, in_port, sim_.now());
  }
}

void Network::apply(const ToSwitch& msg) {
  SwitchState& sw = switches_.at(target_switch(msg));
  if (const auto* mod = std::get_if<FlowMod>(&msg)) {
    if (mod->entry.out_port < 1 || mod->entry.out_port > sw.port_count())
      throw std::out_of_range("flow-mod: invalid out port");
    FlowEntry entry = mod->entry;
    entry.installed_at = sim_.now();
    sw.flow_table.insert_or_assign(entry.match_dst_mac, entry);
  } else if (const auto* pm = std::get_if<PortMod>(&msg)) {
    sw.port_state.at(pm->port) = pm->state;
  } else {
    const auto& po = std::get<PacketOut>(msg);
    if (po.buffer_ref) {
      auto it = sw.pending_buffer.find(*po.buffer_ref);
      if (it == sw.pending_buffer.end()) {
        ++counters_.stale_packet_outs;
        return;
      }
      PendingFrame pending = std::move(it->second);
      sw.pending_buffer.erase(it);
      track_broadcast(pending.frame, -1);
      emit(sw, pending.frame, pending.in_port, po.action, false);
    } else if (po.frame) {
      emit(sw, *po.frame, po.in_port, po.action, po.frame->is<Probe>());
    }
  }
}

void Network::host_handle_frame(HostId h, const Frame& frame) {
  HostState& host = hosts_.at(h);
  if (frame.dst_mac != host.mac && !frame.dst_mac.is_broadcast()) return;

  if (const auto* req = std::get_if<ArpRequest>(&frame.payload)) {
    if (req->target_ip != host.ip) return;
    learn(host, req->sender_ip, frame.src_mac);
    host_send(h, make_frame(host.mac, frame.src_mac, ArpReply{host.ip, req->sender_ip}));
  } else if (const auto* rep = std::get_if<ArpReply>(&frame.payload)) {
    if (frame.dst_mac == host.mac) learn(host, rep->sender_ip, frame.src_mac);
  } else if (const auto* echo = std::get_if<EchoRequest>(&frame.payload)) {
    if (frame.dst_mac != host.mac) return;
    host_send(h, make_frame(host.mac, frame.src_mac, EchoReply{echo->ident, echo->seq, echo->send_time}));
  } else if (frame.is<Probe>()) {
    return;
  } else {
    if (frame.dst_mac != host.mac) return;
    // Copy: a receiver may register further receivers.
    const auto receivers = receivers_[h];
    for (const auto& r : receivers) r(h, frame);
  }
}

void Network::learn(HostState& host, Ipv4Addr ip, MacAddr mac) {
  host.arp_cache.insert_or_assign(ip, mac);
  const auto listeners = arp_listeners_[host.id];
  for (const auto& [token, fn] : listeners) fn(ip, mac);
}

void Network::add_receiver(HostId h, Receiver receiver) { receivers_.at(h).push_back(std::move(receiver)); }

std::uint64_t Network::add_arp_listener(HostId h, ArpListener listener) {
  const std::uint64_t token = next_listener_++;
  arp_listeners_.at(h).emplace_back(token, std::move(listener));
  return token;
}

void Network::remove_arp_listener(HostId h, std::uint64_t token) {
  auto& v = arp_listeners_.at(h);
  std::erase_if(v, [token](const auto& e) { return e.first == token; });
}

void Network::track_broadcast(const Frame& frame, int delta) {
  if (!frame.dst_mac.is_broadcast()) return;
  if (delta < 0) {
    --broadcast_alive_;
    return;
  }
  ++broadcast_alive_;
  if (broadcast_alive_ > storm_cap_ && !storm_at_) {
    storm_at_ = sim_.now();
    sim_.stop();
  }
}

}  // namespace sdnbench
