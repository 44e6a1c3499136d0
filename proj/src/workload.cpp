#include "procache/workload.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <queue>
#include <sstream>
#include <stdexcept>

namespace procache {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over the pair
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::string to_string(Skewness skew) {
  switch (skew) {
    case Skewness::SKD50: return "SKD50";
    case Skewness::SKD70: return "SKD70";
    case Skewness::SKD90: return "SKD90";
  }
  return "unknown";
}

Skewness parse_skewness(std::string_view text) {
  std::string t;
  for (char c : text)
    if (std::isdigit(static_cast<unsigned char>(c))) t += c;
  if (t == "50") return Skewness::SKD50;
  if (t == "70") return Skewness::SKD70;
  if (t == "90") return Skewness::SKD90;
  throw std::invalid_argument("unknown skewness '" + std::string(text) + "'");
}

std::vector<double> skew_vector(Skewness skew) {
  switch (skew) {
    case Skewness::SKD50: return {0.50, 0.20, 0.10, 0.075, 0.05, 0.025, 0.025, 0.025};
    case Skewness::SKD70: return {0.70, 0.10, 0.10, 0.025, 0.025, 0.025, 0.0125, 0.0125};
    case Skewness::SKD90: return {0.90, 0.02, 0.02, 0.02, 0.01, 0.01, 0.01, 0.01};
  }
  throw std::invalid_argument("unknown skewness");
}

std::vector<double> MobilityProfile::rotated() const {
  const std::size_t n = base.size();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[(peak_rotation + i) % n] = base[i];
  return out;
}

std::vector<double> MobilityProfile::realize(Rng& rng) const {
  auto v = rotated();
  if (perturbation_sd <= 0.0) return v;
  return perturb_profile(v, perturbation_sd, rng);
}

std::vector<double> perturb_profile(std::span<const double> base, double sd, Rng& rng) {
  std::vector<double> out(base.begin(), base.end());
  if (out.empty()) return out;
  if (sd < 0.0) throw std::invalid_argument("perturbation sd must be nonnegative");
  if (sd == 0.0) return out;

  std::normal_distribution<double> noise(0.0, 1.0);
  for (auto& v : out) v *= std::max(0.0, 1.0 + sd * noise(rng));

  const std::size_t peak = static_cast<std::size_t>(std::max_element(base.begin(), base.end()) - base.begin());
  const double peak_value = std::clamp(out[peak], 0.0, 1.0);
  double rest = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (i != peak) rest += out[i];

  if (rest <= 0.0) {
    // every other entry vanished; spread the remainder over them like the base does
    double base_rest = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i)
      if (i != peak) base_rest += base[i];
    for (std::size_t i = 0; i < out.size(); ++i)
      if (i != peak) out[i] = base_rest > 0.0 ? base[i] / base_rest * (1.0 - peak_value) : 0.0;
    out[peak] = base_rest > 0.0 ? peak_value : 1.0;
    return out;
  }
  for (std::size_t i = 0; i < out.size(); ++i)
    if (i != peak) out[i] *= (1.0 - peak_value) / rest;
  out[peak] = peak_value;
  return out;
}

std::size_t sample_destination(std::span<const double> probs, Rng& rng) {
  if (probs.empty()) throw std::invalid_argument("empty distribution");
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  double r = u(rng) * total;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (r < probs[i]) return i;
    r -= probs[i];
  }
  // rounding: last index with positive mass
  for (std::size_t i = probs.size(); i-- > 0;)
    if (probs[i] > 0.0) return i;
  return probs.size() - 1;
}

void Graph::add_edge(NodeId u, NodeId v) {
  if (u == v) return;
  const std::size_t need = static_cast<std::size_t>(std::max(u, v)) + 1;
  if (adjacency_.size() < need) adjacency_.resize(need);
  auto& nu = adjacency_[u];
  if (std::find(nu.begin(), nu.end(), v) != nu.end()) return;
  nu.push_back(v);
  adjacency_[v].push_back(u);
  ++edges_;
}

std::vector<int> Graph::bfs(NodeId source) const {
  std::vector<int> dist(adjacency_.size(), -1);
  std::queue<NodeId> frontier;
  dist.at(source) = 0;
  frontier.push(source);
  while (!frontier.empty()) {
    NodeId n = frontier.front();
    frontier.pop();
    for (NodeId m : adjacency_[n]) {
      if (dist[m] >= 0) continue;
      dist[m] = dist[n] + 1;
      frontier.push(m);
    }
  }
  return dist;
}

bool Graph::connected() const {
  if (adjacency_.empty()) return true;
  auto d = bfs(0);
  return std::none_of(d.begin(), d.end(), [](int x) { return x < 0; });
}

Graph read_edge_list(std::istream& in) {
  Graph g;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    long long u = 0, v = 0;
    if (!(fields >> u)) continue;
    if (!(fields >> v) || u < 0 || v < 0)
      throw std::invalid_argument("edge list line " + std::to_string(lineno) + ": expected 'u v'");
    g.add_edge(static_cast<NodeId>(u), static_cast<NodeId>(v));
  }
  return g;
}

Graph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open topology file " + path);
  return read_edge_list(in);
}

void write_edge_list(const Graph& graph, std::ostream& out) {
  for (NodeId u = 0; u < graph.node_count(); ++u)
    for (NodeId v : graph.neighbors(u))
      if (u < v) out << u << ' ' << v << '\n';
}

Graph synthesize_as_graph(std::size_t node_count, Rng& rng, double extra_edge_prob) {
  if (node_count < 3) throw std::invalid_argument("synthetic topology needs at least 3 nodes");
  Graph g(node_count);
  std::vector<NodeId> endpoints;  // one entry per edge end: degree-proportional sampling
  auto link = [&](NodeId a, NodeId b) {
    g.add_edge(a, b);
    endpoints.push_back(a);
    endpoints.push_back(b);
  };
  link(0, 1);
  link(1, 2);
  link(0, 2);
  std::bernoulli_distribution second(extra_edge_prob);
  for (NodeId v = 3; v < node_count; ++v) {
    std::uniform_int_distribution<std::size_t> pick(0, endpoints.size() - 1);
    const NodeId first = endpoints[pick(rng)];
    link(v, first);
    if (second(rng)) {
      NodeId other = first;
      while (other == first) other = endpoints[pick(rng)];
      link(v, other);
    }
  }
  return g;
}

std::size_t Topology::attachment_points() const {
  std::size_t n = 0;
  for (const auto& hood : neighborhoods) n += hood.size();
  return n;
}

int Topology::hops_from_member(NodeId member, NodeId node) const {
  for (std::size_t i = 0; i < member_index.size(); ++i)
    if (member_index[i] == member) return member_distances[i].at(node);
  throw std::invalid_argument("node " + std::to_string(member) + " is not a neighborhood member");
}

namespace {

// Articulation points, iterative Tarjan low-link.
std::vector<char> cut_vertices(const Graph& g) {
  const std::size_t n = g.node_count();
  std::vector<int> disc(n, -1), low(n, 0);
  std::vector<NodeId> parent(n, static_cast<NodeId>(-1));
  std::vector<char> cut(n, 0);
  int timer = 0;
  for (NodeId root = 0; root < n; ++root) {
    if (disc[root] >= 0) continue;
    int root_children = 0;
    std::vector<std::pair<NodeId, std::size_t>> stack{{root, 0}};
    disc[root] = low[root] = timer++;
    while (!stack.empty()) {
      auto& [v, next] = stack.back();
      const auto& nb = g.neighbors(v);
      if (next < nb.size()) {
        const NodeId w = nb[next++];
        if (disc[w] < 0) {
          parent[w] = v;
          if (v == root) ++root_children;
          disc[w] = low[w] = timer++;
          stack.push_back({w, 0});
        } else if (w != parent[v]) {
          low[v] = std::min(low[v], disc[w]);
        }
        continue;
      }
      const NodeId done = v;
      stack.pop_back();
      if (stack.empty()) break;
      const NodeId up = stack.back().first;
      low[up] = std::min(low[up], low[done]);
      if (up != root && low[done] >= disc[up]) cut[up] = 1;
    }
    if (root_children > 1) cut[root] = 1;
  }
  return cut;
}

}  // namespace

Topology build_internet_topology(Graph graph, std::size_t min_stubs) {
  if (!graph.connected()) throw std::invalid_argument("topology graph is disconnected");
  Topology t;
  t.kind = Topology::Kind::InternetScaled;
  // Stubs have one or two links and carry no transit traffic.
  const auto cut = cut_vertices(graph);
  for (NodeId n = 0; n < graph.node_count(); ++n)
    if (graph.degree(n) >= 1 && graph.degree(n) <= 2 && !cut[n]) t.stubs.push_back(n);
  if (t.stubs.size() < min_stubs)
    throw std::invalid_argument("topology has " + std::to_string(t.stubs.size()) + " stub nodes, need " +
                                std::to_string(min_stubs));
  t.graph = std::move(graph);
  return t;
}

void form_neighborhoods(Topology& topology, std::size_t count, std::size_t size, Rng& rng) {
  const auto& g = topology.graph;
  std::vector<char> assigned(g.node_count(), 0);
  std::vector<NodeId> free_stubs = topology.stubs;
  topology.neighborhoods.clear();

  for (std::size_t k = 0; k < count; ++k) {
    if (free_stubs.size() < size)
      throw std::invalid_argument("not enough unassigned stubs for neighborhood " + std::to_string(k));
    std::uniform_int_distribution<std::size_t> pick(0, free_stubs.size() - 1);
    const NodeId initial = free_stubs[pick(rng)];
    const auto dist = g.bfs(initial);

    std::vector<NodeId> order;
    for (NodeId s : free_stubs)
      if (s != initial) order.push_back(s);
    std::sort(order.begin(), order.end(), [&](NodeId a, NodeId b) {
      if (dist[a] != dist[b]) return dist[a] < dist[b];
      return a < b;
    });
    std::vector<NodeId> hood{initial};
    for (std::size_t i = 0; hood.size() < size; ++i) hood.push_back(order[i]);
    for (NodeId n : hood) assigned[n] = 1;
    free_stubs.erase(std::remove_if(free_stubs.begin(), free_stubs.end(), [&](NodeId n) { return assigned[n]; }),
                     free_stubs.end());
    topology.neighborhoods.push_back(std::move(hood));
  }

  std::vector<char> stub(g.node_count(), 0);
  for (NodeId s : topology.stubs) stub[s] = 1;
  topology.sources.clear();
  for (NodeId n = 0; n < g.node_count(); ++n)
    if (!stub[n] && !assigned[n]) topology.sources.push_back(n);
  if (topology.sources.empty()) throw std::invalid_argument("topology leaves no candidate source nodes");

  topology.member_index.clear();
  topology.member_distances.clear();
  for (const auto& hood : topology.neighborhoods)
    for (NodeId n : hood) {
      topology.member_index.push_back(n);
      topology.member_distances.push_back(g.bfs(n));
    }
}

double remote_delay_ratio(int hops) {
  if (hops < 1) throw std::invalid_argument("hop count must be at least 1");
  return 9.0 / 5.0 * (hops - 1) + 1.0;
}

double assign_remote_delay(NodeId source, NodeId receiver, const Graph& graph) {
  const auto dist = graph.bfs(receiver);
  const int hops = dist.at(source);
  if (hops < 0) throw std::invalid_argument("source and receiver are not connected");
  return remote_delay_ratio(hops);
}

}  // namespace procache
