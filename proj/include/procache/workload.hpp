#pragma once

// Mobility profiles, AS-level topologies, neighborhoods and hop-based
// remote delays.

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace procache {

using Rng = std::mt19937_64;
using NodeId = std::uint32_t;

/// Derives an independent stream seed from a run seed and a stream index.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

enum class Skewness { SKD50, SKD70, SKD90 };

std::string to_string(Skewness skew);
/// Accepts "SKD50", "skd70", "90", ...
Skewness parse_skewness(std::string_view text);
/// Transition probabilities sorted by decreasing mass over 8 attachment points.
std::vector<double> skew_vector(Skewness skew);

/// Per-mobile transition distribution: a skew set rotated so that the peak
/// lands on `peak_rotation`, plus relative perturbation.
struct MobilityProfile {
  std::vector<double> base;
  std::size_t peak_rotation = 0;
  double perturbation_sd = 0.0;

  std::vector<double> rotated() const;
  /// Rotated vector with one draw of perturbation applied.
  std::vector<double> realize(Rng& rng) const;
};

/// Multiplicative noise: every entry is scaled by max(0, 1 + sd z). The
/// largest entry keeps its perturbed value (clipped to [0, 1]) and the other
/// entries are rescaled to carry the remaining mass, so the peak's relative
/// spread is `sd`. Output sums to 1.
std::vector<double> perturb_profile(std::span<const double> base, double sd, Rng& rng);

/// Draws an index from a categorical distribution.
std::size_t sample_destination(std::span<const double> probs, Rng& rng);

/// Undirected simple graph with 0-based node ids.
class Graph {
 public:
  explicit Graph(std::size_t nodes = 0) : adjacency_(nodes) {}

  std::size_t node_count() const { return adjacency_.size(); }
  std::size_t edge_count() const { return edges_; }
  /// Ignores self loops and duplicates; grows the node set as needed.
  void add_edge(NodeId u, NodeId v);
  const std::vector<NodeId>& neighbors(NodeId n) const { return adjacency_.at(n); }
  std::size_t degree(NodeId n) const { return adjacency_.at(n).size(); }
  /// Hop distances from `source`; -1 for unreachable nodes.
  std::vector<int> bfs(NodeId source) const;
  bool connected() const;

 private:
  std::vector<std::vector<NodeId>> adjacency_;
  std::size_t edges_ = 0;
};

/// Parses "u v" lines (0-based ids, undirected, duplicates ignored, '#'
/// comments and blank lines skipped).
Graph read_edge_list(std::istream& in);
Graph load_edge_list(const std::string& path);
void write_edge_list(const Graph& graph, std::ostream& out);

/// Preferential-attachment AS-like graph: a triangle seed, then every new
/// node links to one existing node chosen proportionally to degree, plus a
/// second distinct one with probability `extra_edge_prob`.
Graph synthesize_as_graph(std::size_t node_count, Rng& rng, double extra_edge_prob = 0.0);

struct Topology {
  enum class Kind { FixedDelay, InternetScaled };

  Kind kind = Kind::FixedDelay;
  Graph graph;
  /// Degree-1-or-2 nodes that are not articulation points.
  std::vector<NodeId> stubs;
  /// Disjoint groups of attachment-point ASes; each hosts one mid-level cache.
  std::vector<std::vector<NodeId>> neighborhoods;
  /// Candidate object sources: neither stub nor neighborhood member.
  std::vector<NodeId> sources;
  /// Hop distances from every neighborhood member, keyed by member node.
  std::vector<std::vector<int>> member_distances;
  std::vector<NodeId> member_index;

  std::size_t attachment_points() const;
  /// Hops from a neighborhood member to any node.
  int hops_from_member(NodeId member, NodeId node) const;
};

/// Identifies stubs (one or two links, no transit role) of a connected graph. Throws std::invalid_argument if the
/// graph is disconnected or has fewer than `min_stubs` stubs.
Topology build_internet_topology(Graph graph, std::size_t min_stubs = 80);

/// Random initial stub, then its nearest unassigned stubs by hop distance
/// (ties by lowest node id), repeated `count` times without overlap. Fills
/// `neighborhoods`, `sources` and the distance tables of the topology.
void form_neighborhoods(Topology& topology, std::size_t count, std::size_t size, Rng& rng);

/// D_R / D_L = (9/5)(hops - 1) + 1. Throws for hops < 1.
double remote_delay_ratio(int hops);
/// Ratio for a source and an attachment point; throws if unreachable.
double assign_remote_delay(NodeId source, NodeId receiver, const Graph& graph);

}  // namespace procache
