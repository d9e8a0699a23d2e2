#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sdnbench/network.hpp"

namespace sdnbench {

struct TrafficConfig {
  /// Window of one ARP attempt (a single broadcast request).
  double arp_timeout_ms = 3000.0;
  /// ARP attempts a ping makes before reporting every echo lost.
  std::uint32_t ping_arp_attempts = 3;
  double echo_timeout_ms = 3000.0;
  double ping_interval_ms = 1000.0;
  /// Echoes after the separately measured first one.
  std::uint32_t ping_count = 10;

  std::uint32_t window_packets = 64;
  std::uint32_t mtu_bytes = kDefaultMtuBytes;
  double rto_ms = 1000.0;
  double max_rto_ms = 60000.0;

  /// Throws std::invalid_argument on non-positive timeouts, window or mtu.
  void validate() const;
};

enum class RunStatus { Ok, NoRoute, Storm };
std::string status_name(RunStatus status);

/// Resolves dst_ip from src with one broadcast ArpRequest. `done` receives the
/// MAC when a reply is learned within timeout_ms, std::nullopt otherwise. A
/// cached mapping completes synchronously without sending anything. Throws
/// std::invalid_argument if no host owns dst_ip.
void arp_resolve(Network& net, HostId src, Ipv4Addr dst_ip, double timeout_ms,
                 std::function<void(std::optional<MacAddr>)> done);

struct PingReport {
  RunStatus status = RunStatus::Ok;
  /// Whether the ping had to resolve the destination first.
  bool arp_performed = false;
  std::optional<double> first_rtt_ms;
  /// Per subsequent echo (seq 1..count); nullopt = lost.
  std::vector<std::optional<double>> samples;
  /// Received subsequent RTTs in send order.
  std::vector<double> rtts_ms;
  std::uint32_t losses = 0;
};

/// ICMP-style ping: resolve, one separately measured echo, then `ping_count`
/// echoes at ping_interval_ms starting one interval after the first finished.
class Ping {
 public:
  Ping(Network& net, HostId src, HostId dst, TrafficConfig config);
  void start();
  bool finished() const;
  const PingReport& report() const;

 private:
  struct State;
  std::shared_ptr<State> state_;
};

/// Runs a ping to completion (or until a storm stops the simulator).
PingReport ping(Network& net, HostId src, HostId dst, const TrafficConfig& config = {});

struct BandwidthReport {
  double start_s = 0.0;
  double end_s = 0.0;
  std::uint64_t transfer_bytes = 0;
  double bandwidth_mbps = 0.0;
  RunStatus status = RunStatus::Ok;
};

/// Payload megabits per second; throws std::invalid_argument if elapsed_s <= 0.
double throughput_of(std::uint64_t transfer_bytes, double elapsed_s);

/// Window-limited stream from client to server. The server acknowledges every
/// data frame; the client keeps at most window_packets unacknowledged frames
/// and retransmits the oldest one on timeout. One report per requested
/// duration, each covering [0, duration] from start().
class BandwidthTest {
 public:
  BandwidthTest(Network& net, HostId client, HostId server, std::vector<double> durations_s,
                TrafficConfig config);
  void start();
  bool finished() const;
  /// Fills reports not reached before a storm stopped the simulator.
  void finalize();
  const std::vector<BandwidthReport>& reports() const;
  std::optional<SimTime> resolved_at() const;
  std::optional<SimTime> first_delivery_at() const;
  std::uint64_t server_bytes() const;

 private:
  struct State;
  std::shared_ptr<State> state_;
};

std::vector<BandwidthReport> bandwidth_test(Network& net, HostId client, HostId server,
                                            const std::vector<double>& durations_s,
                                            const TrafficConfig& config = {});
BandwidthReport bandwidth_test(Network& net, HostId client, HostId server, double duration_s,
                               const TrafficConfig& config = {});

}  // namespace sdnbench
