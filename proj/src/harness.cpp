#include "sdnbench/harness.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <thread>

namespace sdnbench {

std::string metric_name(Metric metric) { return metric == Metric::Bandwidth ? "bandwidth" : "rtt"; }

Metric parse_metric(const std::string& name) {
  if (name == "bandwidth") return Metric::Bandwidth;
  if (name == "rtt") return Metric::Rtt;
  throw ConfigError("unknown metric '" + name + "' (expected bandwidth or rtt)");
}

std::vector<double> default_durations() {
  std::vector<double> d;
  for (int s = 5; s <= 115; s += 5) d.push_back(s);
  return d;
}

std::vector<double> ExperimentConfig::effective_durations() const {
  return durations_s.empty() ? default_durations() : durations_s;
}

void ExperimentConfig::validate() const {
  sdnbench::validate(spec);
  knobs.link.validate();
  knobs.traffic.validate();
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (!(knobs.control_latency_ms >= 0.0)) throw ConfigError("control latency must be >= 0");
  if (!(knobs.switch_proc_ms >= 0.0) || !(knobs.host_proc_ms >= 0.0))
    throw ConfigError("processing delays must be >= 0");
  if (knobs.buffer_cap < 1) throw ConfigError("buffer cap must be >= 1");
  if (!(knobs.stp_settle_ms >= 0.0)) throw ConfigError("stp settle time must be >= 0");
  for (double d : durations_s)
    if (!(d > 0.0)) throw ConfigError("durations must be > 0");
  const bool looped_family =
      std::holds_alternative<topo::FatTree>(spec) || std::holds_alternative<topo::SpineLeaf>(spec);
  if (looped_family && app == AppKind::L2 && !allow_storm)
    throw ConfigError(describe(spec) + " has loops: use --controller l2-stp or pass --allow-storm");
  const NetworkModel model = build(spec, knobs.link);
  if (model.host_count < 2) throw ConfigError("experiments need at least two hosts");
  const HostId s = src.value_or(1);
  const HostId d = dst.value_or(model.host_count);
  if (s < 1 || s > model.host_count || d < 1 || d > model.host_count)
    throw ConfigError("measurement endpoint out of range");
  if (s == d) throw ConfigError("measurement endpoints must differ");
}

std::uint64_t trial_seed(std::uint64_t seed, std::uint32_t trial) {
  // splitmix64 finalizer over (seed, trial)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(trial) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double stp_discovery_wait_ms(const NetworkModel& model, const NetworkKnobs& knobs) {
  double worst_hop = 0.0;
  for (const Link& l : model.links)
    worst_hop = std::max(worst_hop, l.params.delay_ms + l.params.serialization_ms(kControlFrameBytes));
  // features -> controller, probe packet-out -> switch, probe packet-in -> controller
  return 2.0 * knobs.control_latency_ms + worst_hop + knobs.switch_proc_ms + 1.0;
}

TrialOutcome run_trial(const ExperimentConfig& config, std::uint32_t trial) {
  config.validate();
  TrialOutcome out;
  out.trial_seed = trial_seed(config.seed, trial);

  Simulator sim(out.trial_seed);
  NetworkModel model = build(config.spec, config.knobs.link);
  out.hosts = model.host_count;
  out.switches = model.switch_count;
  out.src = config.src.value_or(1);
  out.dst = config.dst.value_or(model.host_count);

  DataplaneConfig dp;
  dp.buffer_cap = config.knobs.buffer_cap;
  dp.switch_proc_ms = config.knobs.switch_proc_ms;
  dp.host_proc_ms = config.knobs.host_proc_ms;
  dp.storm_cap = config.knobs.storm_cap;
  dp.mtu_bytes = config.knobs.traffic.mtu_bytes;
  const double wait = stp_discovery_wait_ms(model, config.knobs);
  Network net(sim, std::move(model), dp);
  ControlChannel channel(sim, net, config.knobs.control_latency_ms);

  std::unique_ptr<ControllerApp> app;
  StpLearningSwitch* stp = nullptr;
  if (config.app == AppKind::L2) {
    app = std::make_unique<LearningSwitch>();
  } else {
    auto s = std::make_unique<StpLearningSwitch>(wait);
    stp = s.get();
    app = std::move(s);
  }
  channel.set_app(app.get());
  net.announce_switches();

  if (stp != nullptr) {
    sim.run(config.knobs.stp_settle_ms);
    sim.run_while([stp] { return !stp->converged_at(); });
    if (!stp->converged_at()) throw ConfigError("spanning tree did not converge");
    sim.run(std::max(sim.now(), *stp->converged_at()));
    out.tree = stp->tree();
  }
  out.traffic_start = sim.now();

  if (config.metric == Metric::Rtt)
    out.ping = ping(net, out.src, out.dst, config.knobs.traffic);
  else
    out.bandwidth = bandwidth_test(net, out.src, out.dst, config.effective_durations(), config.knobs.traffic);

  out.counters = net.counters();
  out.storm_at = net.storm_detected_at();
  out.packet_ins_per_switch.assign(net.model().switch_count + 1, 0);
  for (SwitchId s = 1; s <= net.model().switch_count; ++s) out.packet_ins_per_switch[s] = net.sw(s).packet_ins;
  return out;
}

namespace {

RunStatus aggregate_status(const std::vector<RunStatus>& statuses) {
  if (std::all_of(statuses.begin(), statuses.end(), [](RunStatus s) { return s == RunStatus::Ok; }))
    return RunStatus::Ok;
  if (std::any_of(statuses.begin(), statuses.end(), [](RunStatus s) { return s == RunStatus::Storm; }))
    return RunStatus::Storm;
  return RunStatus::NoRoute;
}

}  // namespace

std::vector<MeasurementRecord> run_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::string topology = kind_name(config.spec);
  const std::string app = app_name(config.app);
  std::vector<MeasurementRecord> rows;

  if (config.metric == Metric::Bandwidth) {
    const auto durations = config.effective_durations();
    std::vector<std::vector<BandwidthRecord>> per_trial;
    for (std::uint32_t t = 0; t < config.trials; ++t) {
      const TrialOutcome o = run_trial(config, t);
      auto& trial_rows = per_trial.emplace_back();
      for (const BandwidthReport& r : o.bandwidth) {
        trial_rows.push_back(BandwidthRecord{topology, app, o.hosts, o.switches, r.end_s, t + 1,
                                             static_cast<double>(r.transfer_bytes), r.bandwidth_mbps,
                                             throughput_of(r.transfer_bytes, r.end_s - r.start_s), r.status,
                                             config.seed});
        rows.emplace_back(trial_rows.back());
      }
    }
    for (std::size_t i = 0; i < per_trial.front().size(); ++i) {
      BandwidthRecord avg = per_trial.front()[i];
      avg.trial.reset();
      avg.transfer_bytes = avg.bandwidth_mbps = avg.throughput_mbps = 0.0;
      std::vector<RunStatus> statuses;
      for (const auto& tr : per_trial) {
        avg.transfer_bytes += tr[i].transfer_bytes;
        avg.bandwidth_mbps += tr[i].bandwidth_mbps;
        avg.throughput_mbps += tr[i].throughput_mbps;
        statuses.push_back(tr[i].status);
      }
      const double n = static_cast<double>(per_trial.size());
      avg.transfer_bytes /= n;
      avg.bandwidth_mbps /= n;
      avg.throughput_mbps /= n;
      avg.status = aggregate_status(statuses);
      rows.emplace_back(avg);
    }
    return rows;
  }

  const std::uint32_t count = config.knobs.traffic.ping_count;
  std::vector<double> sums(count + 1, 0.0);
  std::vector<std::uint32_t> received(count + 1, 0);
  std::uint32_t hosts = 0;
  std::uint32_t switches = 0;
  for (std::uint32_t t = 0; t < config.trials; ++t) {
    const TrialOutcome o = run_trial(config, t);
    hosts = o.hosts;
    switches = o.switches;
    const PingReport& p = *o.ping;
    for (std::uint32_t seq = 0; seq <= count; ++seq) {
      const std::optional<double> rtt = seq == 0 ? p.first_rtt_ms : p.samples.at(seq - 1);
      rows.emplace_back(RttRecord{topology, app, o.hosts, o.switches, t + 1, seq, rtt.value_or(kLostRtt), seq == 0,
                                  config.seed});
      if (rtt) {
        sums[seq] += *rtt;
        ++received[seq];
      }
    }
  }
  for (std::uint32_t seq = 0; seq <= count; ++seq) {
    const double mean = received[seq] > 0 ? sums[seq] / received[seq] : kLostRtt;
    rows.emplace_back(RttRecord{topology, app, hosts, switches, std::nullopt, seq, mean, seq == 0, config.seed});
  }
  return rows;
}

std::vector<MeasurementRecord> run_matrix(const std::vector<ExperimentConfig>& configs, unsigned jobs) {
  for (const auto& c : configs) c.validate();
  std::vector<std::vector<MeasurementRecord>> results(configs.size());
  jobs = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(configs.size())));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < configs.size(); ++i) results[i] = run_experiment(configs[i]);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(configs.size());
    std::vector<std::thread> workers;
    for (unsigned j = 0; j < jobs; ++j)
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < configs.size(); i = next++) {
          try {
            results[i] = run_experiment(configs[i]);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    for (auto& w : workers) w.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }
  std::vector<MeasurementRecord> all;
  for (auto& r : results) all.insert(all.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
  return all;
}

// ---------------------------------------------------------------------------

std::string csv_header(Metric metric) {
  if (metric == Metric::Bandwidth)
    return "topology,controller_app,hosts,switches,duration_s,trial,transfer_bytes,bandwidth_mbps,throughput_mbps,"
           "status,seed";
  return "topology,controller_app,hosts,switches,trial,seq,rtt_ms,is_first,seed";
}

namespace {
std::string trial_field(const std::optional<std::uint32_t>& trial) {
  return trial ? std::to_string(*trial) : std::string("avg");
}
}  // namespace

std::string to_csv(const std::vector<MeasurementRecord>& records, Metric metric) {
  std::string out = csv_header(metric) + "\n";
  for (const auto& rec : records) {
    if (metric == Metric::Bandwidth) {
      const auto* r = std::get_if<BandwidthRecord>(&rec);
      if (r == nullptr) throw ConfigError("rtt record in a bandwidth csv");
      out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r->topology, r->controller_app, r->hosts, r->switches,
                         r->duration_s, trial_field(r->trial), r->transfer_bytes, r->bandwidth_mbps,
                         r->throughput_mbps, status_name(r->status), r->seed);
    } else {
      const auto* r = std::get_if<RttRecord>(&rec);
      if (r == nullptr) throw ConfigError("bandwidth record in an rtt csv");
      out += fmt::format("{},{},{},{},{},{},{},{},{}\n", r->topology, r->controller_app, r->hosts, r->switches,
                         trial_field(r->trial), r->seq, r->rtt_ms, r->is_first ? 1 : 0, r->seed);
    }
  }
  return out;
}

void write_csv(const std::vector<MeasurementRecord>& records, Metric metric, const std::string& path) {
  const std::string text = to_csv(records, metric);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error(fmt::format("cannot open '{}' for writing: {}", path, std::strerror(errno)));
  f << text;
  f.flush();
  if (!f) throw std::runtime_error(fmt::format("write to '{}' failed", path));
}

// ---------------------------------------------------------------------------

const std::vector<std::string>& setting_keys() {
  static const std::vector<std::string> keys = {
      "kind",          "hosts",          "k",              "spine",          "leaf",
      "hosts-per-leaf", "controller",    "metric",         "duration",       "trials",
      "seed",          "out",            "allow-storm",    "src",            "dst",
      "bw-mbps",       "delay-ms",       "loss",           "control-latency-ms", "window",
      "mtu",           "buffer-cap",     "stp-settle-ms",  "switch-proc-ms", "host-proc-ms",
      "arp-timeout-ms", "echo-timeout-ms", "storm-cap",    "ping-count",     "rto-ms"};
  return keys;
}

namespace {

std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  s.erase(0, s.find_first_not_of(ws));
  const auto end = s.find_last_not_of(ws);
  s.erase(end == std::string::npos ? 0 : end + 1);
  return s;
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size()) throw ConfigError(fmt::format("invalid number for {}: '{}'", key, v));
  return out;
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size())
    throw ConfigError(fmt::format("invalid non-negative integer for {}: '{}'", key, v));
  return out;
}

std::uint32_t to_u32(const std::string& key, const std::string& v) {
  const auto x = to_uint(key, v);
  if (x > UINT32_MAX) throw ConfigError(fmt::format("value for {} out of range: '{}'", key, v));
  return static_cast<std::uint32_t>(x);
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
  if (v == "0" || v == "false" || v == "no" || v == "off") return false;
  throw ConfigError(fmt::format("invalid boolean for {}: '{}'", key, v));
}

}  // namespace

std::vector<TopologySpec> specs_from_settings(const Settings& settings) {
  auto get = [&](const std::string& key) -> std::optional<std::string> {
    auto it = settings.find(key);
    return it == settings.end() ? std::nullopt : std::optional<std::string>(it->second);
  };
  const auto kind = get("kind");
  if (!kind) throw ConfigError("missing --kind");
  std::vector<TopologySpec> specs;
  auto host_list = [&]() {
    const auto v = get("hosts");
    if (!v) throw ConfigError(*kind + " needs --hosts");
    std::vector<std::uint32_t> out;
    for (const auto& h : split_list(*v)) out.push_back(to_u32("hosts", h));
    if (out.empty()) throw ConfigError("empty --hosts list");
    return out;
  };
  if (*kind == "linear") {
    for (auto n : host_list()) specs.emplace_back(topo::Linear{n});
  } else if (*kind == "star") {
    for (auto n : host_list()) specs.emplace_back(topo::Star{n});
  } else if (*kind == "binary-tree") {
    for (auto n : host_list()) specs.emplace_back(topo::BinaryTree{n});
  } else if (*kind == "fat-tree") {
    if (auto v = get("k")) {
      for (const auto& x : split_list(*v)) specs.emplace_back(topo::FatTree{to_u32("k", x)});
    } else {
      for (auto n : host_list()) specs.emplace_back(fat_tree_for_hosts(n));
    }
  } else if (*kind == "spine-leaf") {
    if (get("spine") || get("leaf") || get("hosts-per-leaf")) {
      auto need = [&](const char* key) {
        auto v = get(key);
        if (!v) throw ConfigError(fmt::format("spine-leaf needs --spine, --leaf and --hosts-per-leaf (missing --{})", key));
        return to_u32(key, *v);
      };
      specs.emplace_back(topo::SpineLeaf{need("spine"), need("leaf"), need("hosts-per-leaf")});
    } else {
      for (auto n : host_list()) specs.emplace_back(spine_leaf_for_hosts(n));
    }
  } else {
    throw ConfigError("unknown topology kind '" + *kind + "'");
  }

  return specs;
}

std::vector<ExperimentConfig> expand_settings(const Settings& settings) {
  const auto& known = setting_keys();
  for (const auto& [key, value] : settings)
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("unknown setting '" + key + "'");

  auto get = [&](const std::string& key) -> std::optional<std::string> {
    auto it = settings.find(key);
    return it == settings.end() ? std::nullopt : std::optional<std::string>(it->second);
  };

  ExperimentConfig base;
  if (auto v = get("controller")) {
    try {
      base.app = parse_app(*v);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }
  if (auto v = get("metric")) base.metric = parse_metric(*v);
  if (auto v = get("duration"))
    for (const auto& d : split_list(*v)) base.durations_s.push_back(to_double("duration", d));
  if (auto v = get("trials")) base.trials = to_u32("trials", *v);
  if (auto v = get("seed")) {
    base.seed = to_uint("seed", *v);
  } else if (const char* env = std::getenv("SDNBENCH_SEED"); env != nullptr && *env != '\0') {
    base.seed = to_uint("SDNBENCH_SEED", env);
  }
  if (auto v = get("allow-storm")) base.allow_storm = to_bool("allow-storm", *v);
  if (auto v = get("src")) base.src = to_u32("src", *v);
  if (auto v = get("dst")) base.dst = to_u32("dst", *v);

  NetworkKnobs& k = base.knobs;
  if (auto v = get("bw-mbps")) k.link.bandwidth_mbps = to_double("bw-mbps", *v);
  if (auto v = get("delay-ms")) k.link.delay_ms = to_double("delay-ms", *v);
  if (auto v = get("loss")) k.link.loss_rate = to_double("loss", *v);
  if (auto v = get("control-latency-ms")) k.control_latency_ms = to_double("control-latency-ms", *v);
  if (auto v = get("window")) k.traffic.window_packets = to_u32("window", *v);
  if (auto v = get("mtu")) k.traffic.mtu_bytes = to_u32("mtu", *v);
  if (auto v = get("buffer-cap")) k.buffer_cap = to_uint("buffer-cap", *v);
  if (auto v = get("stp-settle-ms")) k.stp_settle_ms = to_double("stp-settle-ms", *v);
  if (auto v = get("switch-proc-ms")) k.switch_proc_ms = to_double("switch-proc-ms", *v);
  if (auto v = get("host-proc-ms")) k.host_proc_ms = to_double("host-proc-ms", *v);
  if (auto v = get("arp-timeout-ms")) k.traffic.arp_timeout_ms = to_double("arp-timeout-ms", *v);
  if (auto v = get("echo-timeout-ms")) k.traffic.echo_timeout_ms = to_double("echo-timeout-ms", *v);
  if (auto v = get("storm-cap")) k.storm_cap = to_uint("storm-cap", *v);
  if (auto v = get("ping-count")) k.traffic.ping_count = to_u32("ping-count", *v);
  if (auto v = get("rto-ms")) k.traffic.rto_ms = to_double("rto-ms", *v);

  const std::vector<TopologySpec> specs = specs_from_settings(settings);

  std::vector<ExperimentConfig> out;
  for (const auto& spec : specs) {
    ExperimentConfig c = base;
    c.spec = spec;
    c.validate();
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<SweepSection> parse_sweep(const std::string& text) {
  Settings defaults;
  std::vector<std::pair<std::string, Settings>> sections;
  std::stringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(fmt::format("sweep line {}: unterminated section header", lineno));
      const std::string name = trim(line.substr(1, line.size() - 2));
      if (name.empty()) throw ConfigError(fmt::format("sweep line {}: empty section name", lineno));
      sections.emplace_back(name, Settings{});
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("sweep line {}: expected key = value", lineno));
    std::string key = trim(line.substr(0, eq));
    if (key.rfind("--", 0) == 0) key.erase(0, 2);
    const std::string value = trim(line.substr(eq + 1));
    Settings& target = sections.empty() ? defaults : sections.back().second;
    target[key] = value;
  }
  if (sections.empty()) throw ConfigError("sweep file defines no [section]");

  std::vector<SweepSection> out;
  std::map<std::string, Metric> out_metric;
  for (auto& [name, own] : sections) {
    Settings merged = defaults;
    for (const auto& [k, v] : own) merged[k] = v;
    SweepSection section;
    section.name = name;
    section.out = merged.count("out") ? merged["out"] : name + ".csv";
    try {
      section.experiments = expand_settings(merged);
    } catch (const std::exception& e) {
      throw ConfigError(fmt::format("sweep section [{}]: {}", name, e.what()));
    }
    section.metric = section.experiments.front().metric;
    auto [it, inserted] = out_metric.emplace(section.out, section.metric);
    if (!inserted && it->second != section.metric)
      throw ConfigError(fmt::format("sweep section [{}]: {} already holds {} rows", name, section.out,
                                    metric_name(it->second)));
    out.push_back(std::move(section));
  }
  return out;
}

}  // namespace sdnbench
