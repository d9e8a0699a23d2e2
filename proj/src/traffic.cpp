#include "sdnbench/traffic.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

namespace sdnbench {

void TrafficConfig::validate() const {
  if (!(arp_timeout_ms > 0) || !(echo_timeout_ms > 0) || !(ping_interval_ms > 0) || !(rto_ms > 0))
    throw std::invalid_argument("traffic timeouts and intervals must be > 0");
  if (ping_arp_attempts < 1) throw std::invalid_argument("ping needs at least one ARP attempt");
  if (window_packets < 1) throw std::invalid_argument("window must be >= 1 packet");
  if (mtu_bytes < kControlFrameBytes) throw std::invalid_argument("mtu must be >= 64 bytes");
}

std::string status_name(RunStatus status) {
  switch (status) {
    case RunStatus::Ok:
      return "ok";
    case RunStatus::NoRoute:
      return "no_route";
    case RunStatus::Storm:
      return "storm";
  }
  return "?";
}

void arp_resolve(Network& net, HostId src, Ipv4Addr dst_ip, double timeout_ms,
                 std::function<void(std::optional<MacAddr>)> done) {
  const auto& model = net.model();
  const bool owned = dst_ip.value > Ipv4Addr::for_host(0).value &&
                     dst_ip.value <= Ipv4Addr::for_host(model.host_count).value;
  if (!owned) throw std::invalid_argument("arp_resolve: no host owns " + dst_ip.str());

  HostState& host = net.host(src);
  if (auto it = host.arp_cache.find(dst_ip); it != host.arp_cache.end()) {
    done(it->second);
    return;
  }

  struct Pending {
    bool settled = false;
    std::uint64_t listener = 0;
    EventId timer;
    std::function<void(std::optional<MacAddr>)> done;
  };
  auto pending = std::make_shared<Pending>();
  pending->done = std::move(done);
  Simulator& sim = net.sim();

  pending->listener = net.add_arp_listener(src, [&net, &sim, src, dst_ip, pending](Ipv4Addr ip, MacAddr mac) {
    if (pending->settled || ip != dst_ip) return;
    pending->settled = true;
    net.remove_arp_listener(src, pending->listener);
    sim.cancel(pending->timer);
    pending->done(mac);
  });
  pending->timer = sim.schedule(timeout_ms, [&net, src, pending] {
    if (pending->settled) return;
    pending->settled = true;
    net.remove_arp_listener(src, pending->listener);
    pending->done(std::nullopt);
  });
  net.host_send(src, make_frame(host.mac, MacAddr::broadcast(), ArpRequest{host.ip, dst_ip}));
}

// ---------------------------------------------------------------------------

struct Ping::State : std::enable_shared_from_this<Ping::State> {
  Network& net;
  HostId src;
  HostId dst;
  TrafficConfig config;
  std::uint32_t ident;
  PingReport report;
  MacAddr dst_mac;
  bool finished = false;
  std::uint32_t arp_attempts = 0;
  // Outstanding echoes keyed by seq: send time and timeout event.
  std::map<std::uint32_t, std::pair<SimTime, EventId>> outstanding;
  std::uint32_t settled_subsequent = 0;

  State(Network& n, HostId s, HostId d, TrafficConfig c, std::uint32_t id)
      : net(n), src(s), dst(d), config(c), ident(id) {}

  void resolve() {
    ++arp_attempts;
    std::weak_ptr<State> weak = weak_from_this();
    arp_resolve(net, src, Ipv4Addr::for_host(dst), config.arp_timeout_ms, [weak](std::optional<MacAddr> mac) {
      if (auto self = weak.lock()) self->on_resolved(mac);
    });
  }

  void on_resolved(std::optional<MacAddr> mac) {
    if (mac) {
      dst_mac = *mac;
      send_echo(0);
      return;
    }
    if (arp_attempts < config.ping_arp_attempts) {
      resolve();
      return;
    }
    report.status = RunStatus::NoRoute;
    report.losses = config.ping_count;
    report.samples.assign(config.ping_count, std::nullopt);
    finished = true;
  }

  void send_echo(std::uint32_t seq) {
    Simulator& sim = net.sim();
    std::weak_ptr<State> weak = weak_from_this();
    const SimTime sent = sim.now();
    const EventId timer = sim.schedule(config.echo_timeout_ms, [weak, seq] {
      if (auto self = weak.lock()) self->settle(seq, std::nullopt);
    });
    outstanding[seq] = {sent, timer};
    const HostState& h = net.host(src);
    net.host_send(src, make_frame(h.mac, dst_mac, EchoRequest{ident, seq, sent}));
  }

  void on_frame(const Frame& frame) {
    const auto* reply = std::get_if<EchoReply>(&frame.payload);
    if (reply == nullptr || reply->ident != ident) return;
    auto it = outstanding.find(reply->seq);
    if (it == outstanding.end() || it->second.first != reply->send_time) return;
    net.sim().cancel(it->second.second);
    settle(reply->seq, net.sim().now() - reply->send_time);
  }

  void settle(std::uint32_t seq, std::optional<double> rtt) {
    if (outstanding.erase(seq) == 0) return;
    if (seq == 0) {
      report.first_rtt_ms = rtt;
      start_subsequent();
      return;
    }
    report.samples[seq - 1] = rtt;
    if (++settled_subsequent == config.ping_count) complete();
  }

  void start_subsequent() {
    report.samples.assign(config.ping_count, std::nullopt);
    if (config.ping_count == 0) {
      complete();
      return;
    }
    std::weak_ptr<State> weak = weak_from_this();
    for (std::uint32_t seq = 1; seq <= config.ping_count; ++seq)
      net.sim().schedule(config.ping_interval_ms * seq, [weak, seq] {
        if (auto self = weak.lock()) self->send_echo(seq);
      });
  }

  void complete() {
    report.rtts_ms.clear();
    report.losses = 0;
    for (const auto& s : report.samples) {
      if (s)
        report.rtts_ms.push_back(*s);
      else
        ++report.losses;
    }
    finished = true;
  }
};

Ping::Ping(Network& net, HostId src, HostId dst, TrafficConfig config) {
  config.validate();
  if (src == dst) throw std::invalid_argument("ping: source and destination must differ");
  state_ = std::make_shared<State>(net, src, dst, config, net.next_app_id());
}

void Ping::start() {
  std::weak_ptr<State> weak = state_;
  state_->net.add_receiver(state_->src, [weak](HostId, const Frame& f) {
    if (auto self = weak.lock()) self->on_frame(f);
  });
  const HostState& h = state_->net.host(state_->src);
  state_->report.arp_performed = !h.arp_cache.contains(Ipv4Addr::for_host(state_->dst));
  state_->resolve();
}

bool Ping::finished() const { return state_->finished; }
const PingReport& Ping::report() const { return state_->report; }

PingReport ping(Network& net, HostId src, HostId dst, const TrafficConfig& config) {
  Ping p(net, src, dst, config);
  p.start();
  net.sim().run_while([&p] { return !p.finished(); });
  PingReport report = p.report();
  if (!p.finished()) {
    report.status = detect_storm(net) ? RunStatus::Storm : RunStatus::NoRoute;
    report.first_rtt_ms.reset();
    report.samples.assign(config.ping_count, std::nullopt);
    report.rtts_ms.clear();
    report.losses = config.ping_count;
  }
  return report;
}

// ---------------------------------------------------------------------------

double throughput_of(std::uint64_t transfer_bytes, double elapsed_s) {
  if (!(elapsed_s > 0.0)) throw std::invalid_argument("throughput_of: elapsed time must be > 0");
  return static_cast<double>(transfer_bytes) * 8.0 / (elapsed_s * 1e6);
}

struct BandwidthTest::State : std::enable_shared_from_this<BandwidthTest::State> {
  Network& net;
  HostId client;
  HostId server;
  std::vector<double> durations_s;
  TrafficConfig config;
  std::uint32_t stream_id;

  SimTime started = 0.0;
  std::vector<BandwidthReport> reports;
  std::size_t next_checkpoint = 0;
  bool finished = false;
  std::optional<SimTime> resolved_at;
  std::optional<SimTime> first_delivery_at;

  // client
  MacAddr server_mac;
  std::uint64_t base = 0;
  std::uint64_t next_seq = 0;
  std::set<std::uint64_t> acked;
  // Holes resent early, with next_seq at the time of the resend.
  std::map<std::uint64_t, std::uint64_t> fast_resent;
  double rto = 0.0;
  std::optional<EventId> rto_timer;

  // server
  std::uint64_t expected = 0;
  std::set<std::uint64_t> ahead;
  std::uint64_t bytes = 0;

  State(Network& n, HostId c, HostId s, std::vector<double> d, TrafficConfig cfg, std::uint32_t id)
      : net(n), client(c), server(s), durations_s(std::move(d)), config(cfg), stream_id(id), rto(cfg.rto_ms) {}

  std::weak_ptr<State> weak() { return weak_from_this(); }

  void resolve() {
    if (finished) return;
    auto w = weak();
    arp_resolve(net, client, Ipv4Addr::for_host(server), config.arp_timeout_ms, [w](std::optional<MacAddr> mac) {
      auto self = w.lock();
      if (!self || self->finished) return;
      if (!mac) {
        self->resolve();
        return;
      }
      self->server_mac = *mac;
      self->resolved_at = self->net.sim().now();
      self->fill_window();
    });
  }

  void send_data(std::uint64_t seq) {
    const HostState& h = net.host(client);
    net.host_send(client, make_frame(h.mac, server_mac, Data{stream_id, seq}, config.mtu_bytes));
  }

  void fill_window() {
    while (next_seq < base + config.window_packets) send_data(next_seq++);
    arm_timer();
  }

  void arm_timer() {
    Simulator& sim = net.sim();
    if (rto_timer) sim.cancel(*rto_timer);
    rto_timer.reset();
    if (base == next_seq || finished) return;
    auto w = weak();
    rto_timer = sim.schedule(rto, [w] {
      if (auto self = w.lock()) self->on_timeout();
    });
  }

  void on_timeout() {
    rto_timer.reset();
    if (finished || base == next_seq) return;
    send_data(base);
    rto = std::min(rto * 2.0, config.max_rto_ms);
    arm_timer();
  }

  void on_client_frame(const Frame& frame) {
    const auto* ack = std::get_if<DataAck>(&frame.payload);
    if (ack == nullptr || ack->stream_id != stream_id || finished) return;
    if (ack->packet_seq < base || ack->packet_seq >= next_seq) return;
    acked.insert(ack->packet_seq);
    const std::uint64_t before = base;
    while (!acked.empty() && *acked.begin() == base) {
      acked.erase(acked.begin());
      fast_resent.erase(base);
      ++base;
    }
    resend_holes();
    if (base != before) {
      rto = config.rto_ms;
      fill_window();
    }
  }

  // A frame with three or more acknowledged successors is presumed lost and
  // resent without waiting for the timeout. It is resent again only once three
  // frames sent after the previous copy have been acknowledged.
  void resend_holes() {
    if (acked.size() < 3) return;
    const std::uint64_t limit = *std::prev(acked.end(), 3);
    for (std::uint64_t seq = base; seq < limit; ++seq) {
      if (acked.contains(seq)) continue;
      auto it = fast_resent.find(seq);
      if (it != fast_resent.end() && limit < it->second) continue;
      fast_resent[seq] = next_seq;
      send_data(seq);
    }
  }

  void on_server_frame(const Frame& frame) {
    const auto* data = std::get_if<Data>(&frame.payload);
    if (data == nullptr || data->stream_id != stream_id || finished) return;
    bool fresh = false;
    if (data->packet_seq == expected) {
      fresh = true;
      ++expected;
      while (!ahead.empty() && *ahead.begin() == expected) {
        ahead.erase(ahead.begin());
        ++expected;
      }
    } else if (data->packet_seq > expected) {
      fresh = ahead.insert(data->packet_seq).second;
    }
    if (fresh) {
      bytes += frame.size_bytes;
      if (!first_delivery_at) first_delivery_at = net.sim().now();
    }
    const HostState& h = net.host(server);
    net.host_send(server, make_frame(h.mac, frame.src_mac, DataAck{stream_id, data->packet_seq}));
  }

  void checkpoint() {
    const double d = durations_s[next_checkpoint++];
    BandwidthReport r;
    r.start_s = 0.0;
    r.end_s = d;
    r.transfer_bytes = bytes;
    r.bandwidth_mbps = throughput_of(bytes, d);
    r.status = bytes > 0 ? RunStatus::Ok : RunStatus::NoRoute;
    reports.push_back(r);
    if (next_checkpoint == durations_s.size()) {
      finished = true;
      if (rto_timer) net.sim().cancel(*rto_timer);
      rto_timer.reset();
    }
  }
};

BandwidthTest::BandwidthTest(Network& net, HostId client, HostId server, std::vector<double> durations_s,
                             TrafficConfig config) {
  config.validate();
  if (client == server) throw std::invalid_argument("bandwidth test: client and server must differ");
  if (durations_s.empty()) throw std::invalid_argument("bandwidth test: no durations given");
  for (double d : durations_s)
    if (!(d > 0.0)) throw std::invalid_argument("bandwidth test: duration must be > 0");
  std::sort(durations_s.begin(), durations_s.end());
  state_ = std::make_shared<State>(net, client, server, std::move(durations_s), config, net.next_app_id());
}

void BandwidthTest::start() {
  State& s = *state_;
  Simulator& sim = s.net.sim();
  s.started = sim.now();
  std::weak_ptr<State> w = state_;
  s.net.add_receiver(s.client, [w](HostId, const Frame& f) {
    if (auto self = w.lock()) self->on_client_frame(f);
  });
  s.net.add_receiver(s.server, [w](HostId, const Frame& f) {
    if (auto self = w.lock()) self->on_server_frame(f);
  });
  // Checkpoints go in first so they precede same-instant traffic events.
  for (double d : s.durations_s)
    sim.schedule(d * 1000.0, [w] {
      if (auto self = w.lock()) self->checkpoint();
    });
  s.resolve();
}

bool BandwidthTest::finished() const { return state_->finished; }

void BandwidthTest::finalize() {
  State& s = *state_;
  const bool storm = detect_storm(s.net);
  if (storm) {
    // A storm aborts every run whose interval covers it.
    while (s.next_checkpoint < s.durations_s.size()) {
      BandwidthReport r;
      r.end_s = s.durations_s[s.next_checkpoint++];
      r.status = RunStatus::Storm;
      s.reports.push_back(r);
    }
    s.finished = true;
  }
}

const std::vector<BandwidthReport>& BandwidthTest::reports() const { return state_->reports; }
std::optional<SimTime> BandwidthTest::resolved_at() const { return state_->resolved_at; }
std::optional<SimTime> BandwidthTest::first_delivery_at() const { return state_->first_delivery_at; }
std::uint64_t BandwidthTest::server_bytes() const { return state_->bytes; }

std::vector<BandwidthReport> bandwidth_test(Network& net, HostId client, HostId server,
                                            const std::vector<double>& durations_s, const TrafficConfig& config) {
  BandwidthTest test(net, client, server, durations_s, config);
  test.start();
  Simulator& sim = net.sim();
  const double last = *std::max_element(durations_s.begin(), durations_s.end());
  sim.run(sim.now() + last * 1000.0);
  test.finalize();
  return test.reports();
}

BandwidthReport bandwidth_test(Network& net, HostId client, HostId server, double duration_s,
                               const TrafficConfig& config) {
  return bandwidth_test(net, client, server, std::vector<double>{duration_s}, config).front();
}

}  // namespace sdnbench
