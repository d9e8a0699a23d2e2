#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <optional>

#include "acceptance/oracles.hpp"
#include "sdnbench/traffic.hpp"
#include "support/testbed.hpp"

using namespace sdnbench;

namespace {

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

}  // namespace

TEST_CASE("ARP resolution across one switch") {
  Testbed tb(topo::Star{2}, AppKind::L2);
  std::optional<MacAddr> got;
  bool called = false;
  arp_resolve(tb.net, 1, Ipv4Addr::for_host(2), 3000.0, [&](std::optional<MacAddr> mac) {
    called = true;
    got = mac;
  });
  tb.sim.run_while([&] { return !called; });
  REQUIRE(got.has_value());
  CHECK(*got == MacAddr::for_host(2));
  CHECK(tb.net.counters().packet_ins == 2);
  CHECK(tb.sim.now() == doctest::Approx(oracle::linear_arp_round_trip_ms({}, 1)));

  SUBCASE("a cached mapping resolves synchronously with no frames") {
    tb.sim.run();
    const auto sent = tb.net.counters().transmitted;
    bool again = false;
    arp_resolve(tb.net, 1, Ipv4Addr::for_host(2), 3000.0, [&](std::optional<MacAddr> mac) {
      again = mac.has_value();
    });
    CHECK(again);
    CHECK(tb.net.counters().transmitted == sent);
  }
}

TEST_CASE("ARP for an address nobody owns is rejected") {
  Testbed tb(topo::Star{2}, AppKind::L2);
  CHECK_THROWS_AS(arp_resolve(tb.net, 1, Ipv4Addr::for_host(3), 3000.0, [](auto) {}), std::invalid_argument);
}

TEST_CASE("ARP on linear(128) with 75 ms control latency times out") {
  oracle::Params p;
  p.control_latency_ms = 75.0;
  REQUIRE(oracle::linear_arp_round_trip_ms(p, 128) > 3000.0);
  Testbed tb(topo::Linear{128}, AppKind::L2, 75.0);
  bool called = false;
  std::optional<MacAddr> got;
  arp_resolve(tb.net, 1, Ipv4Addr::for_host(128), 3000.0, [&](std::optional<MacAddr> mac) {
    called = true;
    got = mac;
  });
  tb.sim.run_while([&] { return !called; });
  CHECK(called);
  CHECK_FALSE(got.has_value());
  CHECK(tb.sim.now() == doctest::Approx(3000.0));
}

TEST_CASE("star(2) ping matches the closed form") {
  Testbed tb(topo::Star{2}, AppKind::L2);
  const auto r = ping(tb.net, 1, 2);
  REQUIRE(r.status == RunStatus::Ok);
  CHECK(r.arp_performed);
  REQUIRE(r.first_rtt_ms.has_value());
  CHECK(*r.first_rtt_ms == doctest::Approx(oracle::star2_first_rtt_ms({})).epsilon(1e-9));
  REQUIRE(r.rtts_ms.size() == 10);
  for (double rtt : r.rtts_ms) CHECK(rtt == doctest::Approx(oracle::star2_steady_rtt_ms({})).epsilon(1e-9));

  SUBCASE("a second ping needs no ARP and sees steady timing") {
    const auto again = ping(tb.net, 1, 2);
    CHECK_FALSE(again.arp_performed);
    REQUIRE(again.first_rtt_ms.has_value());
    CHECK(*again.first_rtt_ms == doctest::Approx(oracle::star2_steady_rtt_ms({})).epsilon(1e-9));
  }
}

TEST_CASE("first contact costs at least two control latencies") {
  const std::vector<std::pair<TopologySpec, AppKind>> cases = {
      {topo::Linear{8}, AppKind::L2},       {topo::Star{8}, AppKind::L2},
      {topo::BinaryTree{16}, AppKind::L2},  {topo::FatTree{4}, AppKind::L2Stp},
      {topo::SpineLeaf{2, 3, 2}, AppKind::L2Stp}};
  for (double latency : {0.5, 10.0, 40.0}) {
    for (const auto& [spec, kind] : cases) {
      CAPTURE(describe(spec));
      CAPTURE(latency);
      Testbed tb(spec, kind, latency);
      tb.settle();
      const auto r = ping(tb.net, 1, tb.net.model().host_count);
      REQUIRE(r.first_rtt_ms.has_value());
      REQUIRE(r.rtts_ms.size() + r.losses == 10);
      CHECK(r.losses == 0);
      CHECK(*r.first_rtt_ms > *std::max_element(r.rtts_ms.begin(), r.rtts_ms.end()));
      CHECK(*r.first_rtt_ms - mean(r.rtts_ms) >= 2.0 * latency);
      for (double rtt : r.rtts_ms) CHECK(rtt > 0.0);
    }
  }
}

TEST_CASE("concurrent pings only accept their own replies") {
  Testbed tb(topo::Star{2}, AppKind::L2);
  Ping a(tb.net, 1, 2, {});
  Ping b(tb.net, 2, 1, {});
  a.start();
  b.start();
  tb.sim.run_while([&] { return !(a.finished() && b.finished()); });
  for (const Ping* p : {&a, &b}) {
    CHECK(p->report().rtts_ms.size() == 10);
    CHECK(p->report().losses == 0);
    for (double rtt : p->report().rtts_ms) CHECK(rtt < 10.0);
  }
}

TEST_CASE("an unreachable destination reports every echo lost") {
  Testbed tb(topo::Star{2}, AppKind::L2, 10.0, LinkParams{100, 1, 1.0});
  const auto r = ping(tb.net, 1, 2);
  CHECK(r.status == RunStatus::NoRoute);
  CHECK_FALSE(r.first_rtt_ms.has_value());
  CHECK(r.losses == 10);
  CHECK(r.rtts_ms.empty());
  CHECK(tb.sim.now() == doctest::Approx(9000.0));
}

TEST_CASE("throughput arithmetic") {
  CHECK(throughput_of(12'500'000, 1.0) == doctest::Approx(100.0));
  CHECK(throughput_of(0, 10.0) == 0.0);
  CHECK_THROWS_AS(throughput_of(1, 0.0), std::invalid_argument);
}

TEST_CASE("traffic config validation") {
  TrafficConfig c;
  c.window_packets = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.mtu_bytes = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.echo_timeout_ms = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  CHECK_NOTHROW(TrafficConfig{}.validate());
}

TEST_CASE("window-limited stream across one switch") {
  for (unsigned window : {1u, 4u, 8u, 64u}) {
    CAPTURE(window);
    Testbed tb(topo::Star{2}, AppKind::L2);
    TrafficConfig cfg;
    cfg.window_packets = window;
    const auto r = bandwidth_test(tb.net, 1, 2, 20.0, cfg);
    REQUIRE(r.status == RunStatus::Ok);
    const double expect = oracle::window_rate_mbps({}, window, 1500);
    CHECK(std::abs(r.bandwidth_mbps - expect) <= 0.1 * expect);
    CHECK(r.bandwidth_mbps == doctest::Approx(r.transfer_bytes * 8.0 / (20.0 * 1e6)));
  }
}

TEST_CASE("a long chain with slow control reports no route before setup completes") {
  oracle::Params p;
  p.control_latency_ms = 75.0;
  Testbed tb(topo::Linear{32}, AppKind::L2, 75.0);
  BandwidthTest test(tb.net, 1, 32, {5.0, 20.0}, {});
  test.start();
  tb.sim.run_while([&] { return !test.finished(); });
  const auto& reports = test.reports();
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].status == RunStatus::NoRoute);
  CHECK(reports[0].transfer_bytes == 0);
  CHECK(reports[0].bandwidth_mbps == 0.0);
  CHECK(reports[1].status == RunStatus::Ok);
  REQUIRE(test.resolved_at().has_value());
  REQUIRE(test.first_delivery_at().has_value());
  CHECK(*test.resolved_at() == doctest::Approx(oracle::linear_arp_round_trip_ms(p, 32)));
  CHECK(*test.first_delivery_at() == doctest::Approx(oracle::linear_setup_ms(p, 32, 1500)));
}

TEST_CASE("bytes reported equal bytes received on a lossless loop-free network") {
  for (const TopologySpec& spec : {TopologySpec{topo::Linear{4}}, TopologySpec{topo::BinaryTree{8}}}) {
    Testbed tb(spec, AppKind::L2);
    BandwidthTest test(tb.net, 1, tb.net.model().host_count, {3.0}, {});
    test.start();
    tb.sim.run_while([&] { return !test.finished(); });
    REQUIRE(test.reports().size() == 1);
    CHECK(test.reports()[0].transfer_bytes == test.server_bytes());
    CHECK(test.server_bytes() % 1500 == 0);
    CHECK(tb.net.counters().dropped_loss == 0);
  }
}

TEST_CASE("the stream recovers from random loss") {
  Testbed tb(topo::Linear{3}, AppKind::L2, 10.0, LinkParams{100, 1, 0.01}, {}, 3);
  const auto r = bandwidth_test(tb.net, 1, 3, 10.0);
  CHECK(r.status == RunStatus::Ok);
  CHECK(tb.net.counters().dropped_loss > 0);
  // Lost frames cost at most one timeout each, so data keeps flowing.
  CHECK(r.bandwidth_mbps > 1.0);
}

TEST_CASE("one run yields a report per duration, each from time zero") {
  Testbed tb(topo::Star{2}, AppKind::L2);
  const auto reports = bandwidth_test(tb.net, 1, 2, std::vector<double>{10.0, 5.0, 15.0});
  REQUIRE(reports.size() == 3);
  CHECK(reports[0].end_s == 5.0);
  CHECK(reports[2].end_s == 15.0);
  for (const auto& r : reports) CHECK(r.start_s == 0.0);
  CHECK(reports[0].transfer_bytes < reports[1].transfer_bytes);
  CHECK(reports[1].transfer_bytes < reports[2].transfer_bytes);
}

TEST_CASE("bandwidth is non-increasing in hop count on linear chains") {
  double previous = 1e9;
  for (std::uint32_t n : {2u, 4u, 8u, 16u}) {
    Testbed tb(topo::Linear{n}, AppKind::L2);
    const auto r = bandwidth_test(tb.net, 1, n, 5.0);
    CAPTURE(n);
    CHECK(r.bandwidth_mbps <= previous);
    previous = r.bandwidth_mbps;
  }
}

TEST_CASE("a storm aborts the bandwidth test") {
  Testbed tb(topo::FatTree{4}, AppKind::L2);
  const auto reports = bandwidth_test(tb.net, 1, 16, std::vector<double>{5.0, 10.0});
  REQUIRE(reports.size() == 2);
  for (const auto& r : reports) {
    CHECK(r.status == RunStatus::Storm);
    CHECK(r.transfer_bytes == 0);
  }
}
