#include "sdnbench/cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "sdnbench/harness.hpp"

namespace sdnbench {

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error(fmt::format("cannot open '{}' for writing", path));
  f << text;
  if (!f) throw std::runtime_error(fmt::format("write to '{}' failed", path));
}

const std::map<std::string, std::string>& setting_help() {
  static const std::map<std::string, std::string> help = {
      {"kind", "Topology: linear, star, binary-tree, fat-tree, spine-leaf"},
      {"hosts", "Host count; comma-separated list for several sizes"},
      {"k", "Fat-tree arity (even); comma-separated list allowed"},
      {"spine", "Spine switches (spine-leaf)"},
      {"leaf", "Leaf switches (spine-leaf)"},
      {"hosts-per-leaf", "Hosts on each leaf (spine-leaf)"},
      {"controller", "Controller app: l2 or l2-stp (default l2)"},
      {"metric", "bandwidth or rtt (default rtt)"},
      {"duration", "Bandwidth durations in s (default 5,10,...,115)"},
      {"trials", "Trials per configuration (default 3)"},
      {"seed", "Experiment seed (default $SDNBENCH_SEED, else 1)"},
      {"src", "Client/ping source host (default 1)"},
      {"dst", "Server/ping target host (default last host)"},
      {"bw-mbps", "Link bandwidth in Mbps (default 100)"},
      {"delay-ms", "Link delay in ms (default 1)"},
      {"loss", "Link loss rate in [0,1] (default 0)"},
      {"control-latency-ms", "One-way switch-controller latency (default 10)"},
      {"window", "Sender window in frames (default 64)"},
      {"mtu", "Data frame size in bytes (default 1500)"},
      {"buffer-cap", "Frames a switch buffers awaiting the controller (default 64)"},
      {"stp-settle-ms", "Earliest traffic start with l2-stp (default 1000)"},
      {"switch-proc-ms", "Switch processing per frame (default 0.05)"},
      {"host-proc-ms", "Host processing per received frame (default 0.05)"},
      {"arp-timeout-ms", "Wait per ARP attempt (default 3000)"},
      {"echo-timeout-ms", "Wait per echo (default 3000)"},
      {"storm-cap", "Live broadcast frames that declare a storm (default 10 x nodes)"},
      {"ping-count", "Echoes after the first (default 10)"},
      {"rto-ms", "Initial retransmission timeout (default 1000)"},
  };
  return help;
}

// Registers every setting key as a string option bound into `store`.
void add_setting_options(CLI::App* cmd, Settings& store, const std::vector<std::string>& keys) {
  for (const auto& key : keys) {
    auto it = setting_help().find(key);
    cmd->add_option("--" + key, store[key], it == setting_help().end() ? std::string() : it->second);
  }
}

Settings given(const CLI::App* cmd, const Settings& store) {
  Settings out;
  for (const auto& [key, value] : store)
    if (cmd->count("--" + key) > 0) out[key] = value;
  return out;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Packet-level SDN simulator and benchmark harness", "sdnbench"};
  app.require_subcommand(1);

  Settings topo_store;
  auto* topo_cmd = app.add_subcommand("topo", "Build a topology and inspect it");
  add_setting_options(topo_cmd, topo_store,
                      {"kind", "hosts", "k", "spine", "leaf", "hosts-per-leaf", "bw-mbps", "delay-ms", "loss"});
  bool want_dump = false;
  bool want_links = false;
  std::string dot_path;
  topo_cmd->add_flag("--dump", want_dump, "List nodes");
  topo_cmd->add_flag("--links", want_links, "List links");
  topo_cmd->add_option("--dot", dot_path, "Write a Graphviz file");

  Settings run_store;
  auto* run_cmd = app.add_subcommand("run", "Run one experiment configuration");
  std::vector<std::string> run_keys;
  for (const auto& k : setting_keys())
    if (k != "allow-storm" && k != "out") run_keys.push_back(k);
  add_setting_options(run_cmd, run_store, run_keys);
  bool allow_storm = false;
  std::string run_out;
  unsigned jobs = 1;
  run_cmd->add_flag("--allow-storm", allow_storm, "Allow the plain learning switch on looped topologies");
  run_cmd->add_option("--out", run_out, "CSV output path (default: stdout)");
  run_cmd->add_option("--jobs", jobs, "Experiments run concurrently")->check(CLI::PositiveNumber);

  std::string sweep_path;
  std::string out_dir;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run an experiment matrix from a config file");
  sweep_cmd->add_option("--config", sweep_path, "Sweep definition")->required();
  sweep_cmd->add_option("--out-dir", out_dir, "Directory for relative output paths");
  sweep_cmd->add_option("--jobs", jobs, "Experiments run concurrently")->check(CLI::PositiveNumber);

  std::vector<std::string> argv_store{"sdnbench"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
  }

  try {
    if (*topo_cmd) {
      const auto specs = specs_from_settings(given(topo_cmd, topo_store));
      if (specs.size() != 1) throw ConfigError("topo takes a single topology size");
      LinkParams params;
      Settings s = given(topo_cmd, topo_store);
      auto number = [&](const std::string& key, double& dst) {
        if (!s.count(key)) return;
        std::size_t used = 0;
        try {
          dst = std::stod(s[key], &used);
        } catch (const std::exception&) {
          used = 0;
        }
        if (used == 0 || used != s[key].size()) throw ConfigError(fmt::format("--{}: '{}' is not a number", key, s[key]));
      };
      number("bw-mbps", params.bandwidth_mbps);
      number("delay-ms", params.delay_ms);
      number("loss", params.loss_rate);
      const NetworkModel net = build(specs.front(), params);
      if (want_dump) out << dump(net);
      if (want_links) out << links(net);
      if (!dot_path.empty()) write_text(dot_path, export_dot(net));
      if (!want_dump && !want_links && dot_path.empty())
        out << fmt::format("{}: {} hosts, {} switches, {} links ({} switch-switch)\n", describe(net.spec),
                           net.host_count, net.switch_count, net.links.size(), net.switch_link_count());
      return 0;
    }

    if (*run_cmd) {
      Settings s = given(run_cmd, run_store);
      if (allow_storm) s["allow-storm"] = "true";
      const auto configs = expand_settings(s);
      const Metric metric = configs.front().metric;
      const auto records = run_matrix(configs, jobs);
      if (run_out.empty())
        out << to_csv(records, metric);
      else
        write_csv(records, metric, run_out);
      return 0;
    }

    std::ifstream f(sweep_path);
    if (!f) throw ConfigError(fmt::format("cannot read sweep config '{}'", sweep_path));
    std::stringstream text;
    text << f.rdbuf();
    const auto sections = parse_sweep(text.str());

    std::vector<std::string> order;
    std::map<std::string, std::pair<Metric, std::vector<MeasurementRecord>>> outputs;
    for (const auto& section : sections) {
      auto records = run_matrix(section.experiments, jobs);
      auto [it, inserted] = outputs.try_emplace(section.out, section.metric, std::vector<MeasurementRecord>{});
      if (inserted) order.push_back(section.out);
      auto& dst = it->second.second;
      dst.insert(dst.end(), std::make_move_iterator(records.begin()), std::make_move_iterator(records.end()));
      err << fmt::format("[{}] {} experiment(s) -> {}\n", section.name, section.experiments.size(), section.out);
    }
    for (const auto& path : order) {
      std::filesystem::path p(path);
      if (!out_dir.empty() && p.is_relative()) {
        std::filesystem::create_directories(out_dir);
        p = std::filesystem::path(out_dir) / p;
      }
      write_csv(outputs[path].second, outputs[path].first, p.string());
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace sdnbench
