#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sdnbench/apps.hpp"
#include "sdnbench/errors.hpp"
#include "sdnbench/traffic.hpp"

namespace sdnbench {

enum class Metric { Bandwidth, Rtt };
std::string metric_name(Metric metric);
Metric parse_metric(const std::string& name);

struct NetworkKnobs {
  LinkParams link;
  double control_latency_ms = 10.0;
  std::size_t buffer_cap = 64;
  double switch_proc_ms = 0.05;
  double host_proc_ms = 0.05;
  std::optional<std::size_t> storm_cap;
  double stp_settle_ms = 1000.0;
  TrafficConfig traffic;
};

/// Durations 5, 10, ..., 115 s.
std::vector<double> default_durations();

struct ExperimentConfig {
  TopologySpec spec = topo::Linear{2};
  AppKind app = AppKind::L2;
  Metric metric = Metric::Rtt;
  /// Bandwidth only; empty means default_durations().
  std::vector<double> durations_s;
  std::uint32_t trials = 3;
  std::uint64_t seed = 1;
  NetworkKnobs knobs;
  /// Lets a looped family run with the plain learning switch.
  bool allow_storm = false;
  /// Measurement endpoints; default first and last host.
  std::optional<HostId> src;
  std::optional<HostId> dst;

  /// Throws ConfigError (or TopologyError) when the experiment cannot run.
  void validate() const;
  std::vector<double> effective_durations() const;
};

/// Everything observed in one trial, for callers that need more than CSV rows.
struct TrialOutcome {
  std::uint64_t trial_seed = 0;
  std::uint32_t hosts = 0;
  std::uint32_t switches = 0;
  HostId src = 0;
  HostId dst = 0;
  SimTime traffic_start = 0.0;
  std::optional<PingReport> ping;
  std::vector<BandwidthReport> bandwidth;
  DataplaneCounters counters;
  std::vector<std::uint64_t> packet_ins_per_switch;  // index by switch id
  std::optional<SimTime> storm_at;
  std::optional<SpanningTree> tree;
};

/// Per-trial simulator seed derived from the experiment seed.
std::uint64_t trial_seed(std::uint64_t seed, std::uint32_t trial);
/// Discovery settles 3 channel latencies plus one worst-case probe hop after start.
double stp_discovery_wait_ms(const NetworkModel& model, const NetworkKnobs& knobs);

TrialOutcome run_trial(const ExperimentConfig& config, std::uint32_t trial);

struct BandwidthRecord {
  std::string topology;
  std::string controller_app;
  std::uint32_t hosts = 0;
  std::uint32_t switches = 0;
  double duration_s = 0.0;
  std::optional<std::uint32_t> trial;  // nullopt = aggregate ("avg")
  double transfer_bytes = 0.0;
  double bandwidth_mbps = 0.0;
  double throughput_mbps = 0.0;
  RunStatus status = RunStatus::Ok;
  std::uint64_t seed = 0;
};

struct RttRecord {
  std::string topology;
  std::string controller_app;
  std::uint32_t hosts = 0;
  std::uint32_t switches = 0;
  std::optional<std::uint32_t> trial;  // nullopt = aggregate ("avg")
  std::uint32_t seq = 0;               // 0 = first echo
  double rtt_ms = 0.0;                 // kLostRtt when the echo was lost
  bool is_first = false;
  std::uint64_t seed = 0;
};

inline constexpr double kLostRtt = -1.0;

using MeasurementRecord = std::variant<BandwidthRecord, RttRecord>;

/// Trial rows (by trial, then duration or seq) followed by aggregate rows.
std::vector<MeasurementRecord> run_experiment(const ExperimentConfig& config);
/// Runs every config, up to `jobs` at once; output order is config order.
std::vector<MeasurementRecord> run_matrix(const std::vector<ExperimentConfig>& configs, unsigned jobs = 1);

std::string csv_header(Metric metric);
std::string to_csv(const std::vector<MeasurementRecord>& records, Metric metric);
/// Throws std::runtime_error naming the path on I/O failure, ConfigError if a
/// record does not match the metric's schema.
void write_csv(const std::vector<MeasurementRecord>& records, Metric metric, const std::string& path);

/// Flag-style key/value settings (keys are CLI flag names without dashes).
using Settings = std::map<std::string, std::string>;

/// Topologies named by kind and size settings (hosts/k lists, spine/leaf shape).
std::vector<TopologySpec> specs_from_settings(const Settings& settings);

/// Expands settings into experiments. `hosts`, `k` and `duration` accept
/// comma-separated lists; one experiment per topology size.
std::vector<ExperimentConfig> expand_settings(const Settings& settings);

struct SweepSection {
  std::string name;
  std::string out;
  Metric metric = Metric::Rtt;
  std::vector<ExperimentConfig> experiments;
};

/// Parses a sweep file: `key = value` lines, `#` comments, `[name]` sections.
/// Keys before the first section are defaults for every section.
std::vector<SweepSection> parse_sweep(const std::string& text);

/// Names of the keys accepted by expand_settings.
const std::vector<std::string>& setting_keys();

}  // namespace sdnbench
