#include "sdnbench/topology.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <bit>
#include <utility>

namespace sdnbench {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Edge lists in construction order; ports are assigned from these.
struct Wiring {
  std::uint32_t hosts = 0;
  std::uint32_t switches = 0;
  std::vector<std::pair<HostId, SwitchId>> host_edges;
  std::vector<std::pair<SwitchId, SwitchId>> switch_edges;
};

Wiring wire(const topo::Linear& t) {
  Wiring w{t.n_hosts, t.n_hosts, {}, {}};
  for (std::uint32_t i = 1; i <= t.n_hosts; ++i) w.host_edges.emplace_back(i, i);
  for (std::uint32_t i = 1; i < t.n_hosts; ++i) w.switch_edges.emplace_back(i, i + 1);
  return w;
}

Wiring wire(const topo::Star& t) {
  Wiring w{t.n_hosts, 1, {}, {}};
  for (std::uint32_t i = 1; i <= t.n_hosts; ++i) w.host_edges.emplace_back(i, 1);
  return w;
}

// Heap-ordered complete tree: s1 is the root, children of si are s2i and s2i+1,
// and the n/2 terminal switches each carry two hosts.
Wiring wire(const topo::BinaryTree& t) {
  const std::uint32_t n = t.n_hosts;
  Wiring w{n, n - 1, {}, {}};
  const std::uint32_t first_leaf = n / 2;
  for (std::uint32_t h = 1; h <= n; ++h) w.host_edges.emplace_back(h, first_leaf + (h - 1) / 2);
  for (std::uint32_t s = 1; s < first_leaf; ++s) {
    w.switch_edges.emplace_back(s, 2 * s);
    w.switch_edges.emplace_back(s, 2 * s + 1);
  }
  return w;
}

// Cores are s1..s(k^2/4); pod p then holds k/2 aggregation switches followed by
// k/2 edge switches. Core c (0-based) attaches to aggregation c/(k/2) of every pod.
Wiring wire(const topo::FatTree& t) {
  const std::uint32_t k = t.k;
  const std::uint32_t half = k / 2;
  const std::uint32_t cores = k * k / 4;
  Wiring w{k * k * k / 4, cores + k * k, {}, {}};
  auto agg = [&](std::uint32_t pod, std::uint32_t a) { return cores + pod * k + a + 1; };
  auto edge = [&](std::uint32_t pod, std::uint32_t e) { return cores + pod * k + half + e + 1; };

  HostId h = 1;
  for (std::uint32_t pod = 0; pod < k; ++pod)
    for (std::uint32_t e = 0; e < half; ++e)
      for (std::uint32_t j = 0; j < half; ++j) w.host_edges.emplace_back(h++, edge(pod, e));

  for (std::uint32_t pod = 0; pod < k; ++pod)
    for (std::uint32_t e = 0; e < half; ++e)
      for (std::uint32_t a = 0; a < half; ++a) w.switch_edges.emplace_back(edge(pod, e), agg(pod, a));
  for (std::uint32_t c = 0; c < cores; ++c)
    for (std::uint32_t pod = 0; pod < k; ++pod) w.switch_edges.emplace_back(agg(pod, c / half), c + 1);
  return w;
}

Wiring wire(const topo::SpineLeaf& t) {
  Wiring w{t.leaves * t.hosts_per_leaf, t.spines + t.leaves, {}, {}};
  HostId h = 1;
  for (std::uint32_t l = 0; l < t.leaves; ++l)
    for (std::uint32_t j = 0; j < t.hosts_per_leaf; ++j) w.host_edges.emplace_back(h++, t.spines + l + 1);
  for (std::uint32_t l = 0; l < t.leaves; ++l)
    for (std::uint32_t s = 0; s < t.spines; ++s) w.switch_edges.emplace_back(t.spines + l + 1, s + 1);
  return w;
}

std::string fmt_num(double v) { return fmt::format("{}", v); }

}  // namespace

std::string NodeRef::name() const {
  return fmt::format("{}{}", is_host() ? 'h' : 's', id);
}

std::string Endpoint::name() const {
  return fmt::format("{}-eth{}", node.name(), port);
}

void LinkParams::validate() const {
  if (!(bandwidth_mbps > 0.0)) throw std::invalid_argument("link bandwidth must be > 0");
  if (!(delay_ms >= 0.0)) throw std::invalid_argument("link delay must be >= 0");
  if (!(loss_rate >= 0.0 && loss_rate <= 1.0))
    throw std::invalid_argument("link loss rate must be within [0, 1]");
}

std::string kind_name(const TopologySpec& spec) {
  return std::visit(Overloaded{[](const topo::Linear&) { return "linear"; },
                               [](const topo::Star&) { return "star"; },
                               [](const topo::BinaryTree&) { return "binary-tree"; },
                               [](const topo::FatTree&) { return "fat-tree"; },
                               [](const topo::SpineLeaf&) { return "spine-leaf"; }},
                    spec);
}

std::string describe(const TopologySpec& spec) {
  return std::visit(
      Overloaded{[](const topo::Linear& t) { return fmt::format("linear({})", t.n_hosts); },
                 [](const topo::Star& t) { return fmt::format("star({})", t.n_hosts); },
                 [](const topo::BinaryTree& t) { return fmt::format("binary-tree({})", t.n_hosts); },
                 [](const topo::FatTree& t) { return fmt::format("fat-tree(k={})", t.k); },
                 [](const topo::SpineLeaf& t) {
                   return fmt::format("spine-leaf({},{},{})", t.spines, t.leaves, t.hosts_per_leaf);
                 }},
      spec);
}

void validate(const TopologySpec& spec) {
  std::visit(Overloaded{
                 [](const topo::Linear& t) {
                   if (t.n_hosts < 1) throw TopologyError("linear: host count must be >= 1");
                 },
                 [](const topo::Star& t) {
                   if (t.n_hosts < 1) throw TopologyError("star: host count must be >= 1");
                 },
                 [](const topo::BinaryTree& t) {
                   if (t.n_hosts < 2 || !std::has_single_bit(t.n_hosts))
                     throw TopologyError("binary-tree: host count must be a power of two >= 2");
                 },
                 [](const topo::FatTree& t) {
                   if (t.k < 2 || t.k % 2 != 0) throw TopologyError("fat-tree: k must be even and >= 2");
                 },
                 [](const topo::SpineLeaf& t) {
                   if (t.spines < 1 || t.leaves < 1 || t.hosts_per_leaf < 1)
                     throw TopologyError("spine-leaf: spines, leaves and hosts per leaf must be >= 1");
                 }},
             spec);
}

bool has_loops(const TopologySpec& spec) {
  return std::visit(Overloaded{[](const topo::FatTree& t) { return t.k >= 4; },
                               [](const topo::SpineLeaf& t) { return t.spines > 1 && t.leaves > 1; },
                               [](const auto&) { return false; }},
                    spec);
}

topo::SpineLeaf spine_leaf_for_hosts(std::uint32_t n_hosts) {
  if (n_hosts < 1) throw TopologyError("spine-leaf: host count must be >= 1");
  const std::uint32_t per_leaf = std::clamp<std::uint32_t>(n_hosts / 2, 1, 4);
  if (n_hosts % per_leaf != 0)
    throw TopologyError(fmt::format("spine-leaf: {} hosts do not split into leaves of {}", n_hosts, per_leaf));
  return topo::SpineLeaf{2, n_hosts / per_leaf, per_leaf};
}

topo::FatTree fat_tree_for_hosts(std::uint32_t n_hosts) {
  for (std::uint32_t k = 2; k * k * k / 4 <= n_hosts; k += 2)
    if (k * k * k / 4 == n_hosts) return topo::FatTree{k};
  throw TopologyError(fmt::format("fat-tree: {} hosts is not k^3/4 for an even k", n_hosts));
}

std::size_t NetworkModel::switch_link_count() const {
  return static_cast<std::size_t>(
      std::count_if(links.begin(), links.end(), [](const Link& l) { return l.is_switch_link(); }));
}

std::size_t NetworkModel::link_at(const Endpoint& ep) const {
  if (ep.node.is_host()) return host_link.at(ep.node.id);
  return switch_ports.at(ep.node.id).at(ep.port);
}

Endpoint NetworkModel::peer(const Endpoint& ep) const {
  const Link& l = links.at(link_at(ep));
  return l.a == ep ? l.b : l.a;
}

bool NetworkModel::is_host_port(SwitchId s, PortId p) const {
  return links.at(switch_ports.at(s).at(p)).a.node.is_host();
}

NetworkModel build(const TopologySpec& spec, const LinkParams& params) {
  validate(spec);
  params.validate();
  const Wiring w = std::visit([](const auto& t) { return wire(t); }, spec);

  NetworkModel net;
  net.spec = spec;
  net.host_count = w.hosts;
  net.switch_count = w.switches;

  std::vector<PortId> next_port(w.switches + 1, 1);
  std::vector<Link> host_links;
  for (auto [h, s] : w.host_edges)
    host_links.push_back(Link{{NodeRef::host(h), 0}, {NodeRef::sw(s), next_port[s]++}, params});
  std::vector<Link> switch_links;
  for (auto [x, y] : w.switch_edges) {
    Endpoint ex{NodeRef::sw(x), next_port[x]++};
    Endpoint ey{NodeRef::sw(y), next_port[y]++};
    if (y < x) std::swap(ex, ey);
    switch_links.push_back(Link{ex, ey, params});
  }
  std::sort(host_links.begin(), host_links.end(),
            [](const Link& l, const Link& r) { return l.a.node.id < r.a.node.id; });
  std::stable_sort(switch_links.begin(), switch_links.end(), [](const Link& l, const Link& r) {
    return std::pair(l.a.node.id, l.b.node.id) < std::pair(r.a.node.id, r.b.node.id);
  });

  net.links = std::move(host_links);
  net.links.insert(net.links.end(), switch_links.begin(), switch_links.end());

  net.host_link.assign(w.hosts + 1, 0);
  net.switch_ports.assign(w.switches + 1, {});
  for (SwitchId s = 1; s <= w.switches; ++s) net.switch_ports[s].assign(next_port[s], 0);
  for (std::size_t i = 0; i < net.links.size(); ++i) {
    for (const Endpoint* ep : {&net.links[i].a, &net.links[i].b}) {
      if (ep->node.is_host())
        net.host_link[ep->node.id] = i;
      else
        net.switch_ports[ep->node.id][ep->port] = i;
    }
  }
  return net;
}

std::string dump(const NetworkModel& net) {
  std::string out;
  for (HostId h = 1; h <= net.host_count; ++h)
    out += fmt::format("<Host h{}: ip={} mac={}>\n", h, Ipv4Addr::for_host(h).str(),
                       MacAddr::for_host(h).str());
  for (SwitchId s = 1; s <= net.switch_count; ++s) {
    std::string ports;
    for (PortId p = 1; p <= net.port_count(s); ++p) {
      if (p > 1) ports += ',';
      ports += Endpoint{NodeRef::sw(s), p}.name();
    }
    out += fmt::format("<Switch s{}: ports=[{}]>\n", s, ports);
  }
  return out;
}

std::string links(const NetworkModel& net) {
  std::string out;
  for (const Link& l : net.links)
    out += fmt::format("{}<->{} (bw={}Mbps,delay={}ms,loss={}%)\n", l.a.name(), l.b.name(),
                       fmt_num(l.params.bandwidth_mbps), fmt_num(l.params.delay_ms),
                       fmt_num(l.params.loss_rate * 100.0));
  return out;
}

std::string export_dot(const NetworkModel& net) {
  std::string out = fmt::format("graph \"{}\" {{\n", describe(net.spec));
  for (HostId h = 1; h <= net.host_count; ++h)
    out += fmt::format("  h{} [shape=ellipse, label=\"h{}\\n{}\"];\n", h, h, Ipv4Addr::for_host(h).str());
  for (SwitchId s = 1; s <= net.switch_count; ++s) out += fmt::format("  s{} [shape=box];\n", s);
  for (const Link& l : net.links)
    out += fmt::format("  {} -- {} [taillabel=\"{}\", headlabel=\"{}\"];\n", l.a.node.name(), l.b.node.name(),
                       l.a.port, l.b.port);
  out += "}\n";
  return out;
}

}  // namespace sdnbench
