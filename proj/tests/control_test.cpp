#include <doctest.h>

#include <string>
#include <vector>

#include "sdnbench/control.hpp"
#include "support/graph.hpp"

using namespace sdnbench;

namespace {

struct LoggingApp final : ControllerApp {
  Simulator& sim;
  std::vector<std::pair<SimTime, PacketIn>> seen;
  std::string* order = nullptr;
  explicit LoggingApp(Simulator& s) : sim(s) {}
  void on_packet_in(ControlChannel&, const PacketIn& msg) override {
    seen.emplace_back(sim.now(), msg);
    if (order != nullptr) *order += 'C';
  }
};

Frame unicast(HostId from, HostId to, std::uint32_t seq = 0) {
  return make_frame(MacAddr::for_host(from), MacAddr::for_host(to), EchoRequest{1, seq, 0.0});
}

PacketIn pin(PortId port, std::uint32_t seq) { return PacketIn{1, port, unicast(1, 2, seq), std::nullopt}; }

}  // namespace

TEST_CASE("packet-in reaches the controller after the channel latency") {
  Simulator sim;
  Network net(sim, build(topo::Star{2}));
  ControlChannel channel(sim, net, 10.0);
  LoggingApp app(sim);
  channel.set_app(&app);

  SUBCASE("single miss at t=5") {
    sim.schedule(5, [&] { channel.to_controller(pin(1, 0), 0.0); });
    sim.run();
    REQUIRE(app.seen.size() == 1);
    CHECK(app.seen[0].first == 15.0);
  }
  SUBCASE("order is preserved") {
    sim.schedule(5, [&] { channel.to_controller(pin(1, 1), 0.0); });
    sim.schedule(6, [&] { channel.to_controller(pin(1, 2), 0.0); });
    sim.run();
    REQUIRE(app.seen.size() == 2);
    CHECK(app.seen[0].first == 15.0);
    CHECK(app.seen[1].first == 16.0);
    CHECK(app.seen[0].second.frame.as<EchoRequest>().seq == 1);
    CHECK(app.seen[1].second.frame.as<EchoRequest>().seq == 2);
  }
}

TEST_CASE("a switch miss at t=5 is seen by the controller at t=15") {
  Simulator sim;
  DataplaneConfig dp;
  dp.switch_proc_ms = 0.0;
  Network net(sim, build(topo::Star{2}), dp);
  ControlChannel channel(sim, net, 10.0);
  LoggingApp app(sim);
  channel.set_app(&app);
  sim.schedule(5, [&] { net.switch_handle_frame(1, 1, unicast(1, 2)); });
  sim.run();
  REQUIRE(app.seen.size() == 1);
  CHECK(app.seen[0].first == 15.0);
  CHECK(app.seen[0].second.buffer_ref.has_value());
}

TEST_CASE("zero latency delivers at the same instant after the trigger") {
  Simulator sim;
  Network net(sim, build(topo::Star{2}));
  ControlChannel channel(sim, net, 0.0);
  LoggingApp app(sim);
  std::string order;
  app.order = &order;
  channel.set_app(&app);
  sim.schedule(5, [&] {
    order += 'A';
    channel.to_controller(pin(1, 0), 0.0);
  });
  sim.schedule(5, [&] { order += 'B'; });
  sim.run();
  CHECK(order == "ABC");
  CHECK(app.seen.at(0).first == 5.0);
}

TEST_CASE("controller-to-switch messages") {
  Simulator sim;
  Network net(sim, build(topo::Star{5}));
  ControlChannel channel(sim, net, 10.0);
  LoggingApp app(sim);
  channel.set_app(&app);

  SUBCASE("flow-mod installs an entry after the latency") {
    channel.send_flow_mod(FlowMod{1, FlowEntry{MacAddr::for_host(1), 3, 0}});
    sim.run(9.0);
    CHECK(net.sw(1).lookup(MacAddr::for_host(1)) == nullptr);
    sim.run();
    REQUIRE(net.sw(1).lookup(MacAddr::for_host(1)) != nullptr);
    CHECK(net.sw(1).lookup(MacAddr::for_host(1))->out_port == 3);
    CHECK(net.sw(1).lookup(MacAddr::for_host(1))->installed_at == 10.0);
  }
  SUBCASE("flood packet-out releases a buffered broadcast") {
    net.switch_handle_frame(1, 1, make_frame(MacAddr::for_host(1), MacAddr::broadcast(),
                                             ArpRequest{Ipv4Addr::for_host(1), Ipv4Addr::for_host(200)}));
    sim.run();
    REQUIRE(app.seen.size() == 1);
    channel.send_packet_out(PacketOut{1, app.seen[0].second.buffer_ref, std::nullopt, 0, FloodAction{}});
    sim.run();
    CHECK(net.counters().transmitted == 4);
    CHECK(net.sw(1).pending_buffer.empty());
  }
  SUBCASE("packet-out naming a missing buffer slot is a counted no-op") {
    channel.send_packet_out(PacketOut{1, BufferRef{999}, std::nullopt, 0, FloodAction{}});
    sim.run();
    CHECK(net.counters().transmitted == 0);
    CHECK(net.counters().stale_packet_outs == 1);
  }
  SUBCASE("flow-mod with an invalid port is rejected") {
    channel.send_flow_mod(FlowMod{1, FlowEntry{MacAddr::for_host(1), 9, 0}});
    CHECK_THROWS_AS(sim.run(), std::out_of_range);
  }
}

TEST_CASE("table-miss forwarding resumes no earlier than two latencies later") {
  Simulator sim;
  Network net(sim, build(topo::Star{2}));
  ControlChannel channel(sim, net, 10.0);
  struct Forwarder final : ControllerApp {
    void on_packet_in(ControlChannel& ch, const PacketIn& msg) override {
      ch.send_packet_out(PacketOut{msg.switch_id, msg.buffer_ref, std::nullopt, 0, OutputAction{2}});
    }
  } app;
  channel.set_app(&app);
  SimTime got = -1;
  net.add_receiver(2, [&](HostId, const Frame&) { got = sim.now(); });
  net.switch_handle_frame(1, 1, make_frame(MacAddr::for_host(1), MacAddr::for_host(2), Data{}));
  sim.run();
  CHECK(got >= 20.0);
}

TEST_CASE("link discovery") {
  SUBCASE("linear(3) is a chain with one host port per switch") {
    Simulator sim;
    Network net(sim, build(topo::Linear{3}));
    const auto adj = discover_links(sim, net, 10.0);
    CHECK(adj.links.size() == 2);
    std::set<std::pair<SwitchId, SwitchId>> pairs;
    for (const auto& l : adj.links) pairs.insert({l.a, l.b});
    CHECK(pairs == std::set<std::pair<SwitchId, SwitchId>>{{1, 2}, {2, 3}});
    for (SwitchId s = 1; s <= 3; ++s) CHECK(adj.host_ports.at(s).size() == 1);
  }
  SUBCASE("star(5) has no switch links") {
    Simulator sim;
    Network net(sim, build(topo::Star{5}));
    const auto adj = discover_links(sim, net, 10.0);
    CHECK(adj.links.empty());
    CHECK(adj.host_ports.at(1).size() == 5);
  }
  SUBCASE("spine-leaf(2,3,2) is bipartite with six edges") {
    Simulator sim;
    Network net(sim, build(topo::SpineLeaf{2, 3, 2}));
    const auto adj = discover_links(sim, net, 10.0);
    CHECK(adj.links.size() == 6);
    for (const auto& l : adj.links) {
      CHECK(l.a <= 2);
      CHECK(l.b >= 3);
    }
  }
}

TEST_CASE("discovery matches the builder on every topology") {
  const std::vector<TopologySpec> specs = {topo::Linear{1},        topo::Linear{16},   topo::Star{4},
                                           topo::BinaryTree{16},   topo::FatTree{2},   topo::FatTree{4},
                                           topo::FatTree{6},       topo::SpineLeaf{2, 3, 2},
                                           topo::SpineLeaf{4, 6, 1}};
  for (const auto& spec : specs) {
    CAPTURE(describe(spec));
    Simulator sim;
    Network net(sim, build(spec));
    const auto adj = discover_links(sim, net, 7.0);
    std::set<std::pair<std::uint32_t, std::uint32_t>> found;
    for (const auto& l : adj.links) {
      found.insert({l.a, l.b});
      // Ports must be the builder's ports for that link.
      CHECK(net.model().peer({NodeRef::sw(l.a), l.a_port}) == Endpoint{NodeRef::sw(l.b), l.b_port});
    }
    CHECK(found == graph::switch_edges(net.model()));
    CHECK(adj.links.size() == net.model().switch_link_count());
    for (SwitchId s = 1; s <= net.model().switch_count; ++s)
      for (PortId p : adj.host_ports.at(s)) CHECK(net.model().is_host_port(s, p));
  }
}
