#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace coverlab {

// Sorted list of distinct vertex ids.
using VertexSet = std::vector<int>;

// Simple regular graph with a flat adjacency table: row v holds the `degree`
// neighbors of v in increasing order. Everything downstream (walk kernels,
// dense spectral code) assumes this layout.
struct Graph {
  int n = 0;
  int degree = 0;
  std::vector<int32_t> adj;
  std::string label;
  bool transitive_hint = false;

  std::span<const int32_t> neighbors(int v) const {
    return {adj.data() + size_t(v) * size_t(degree), size_t(degree)};
  }
};

// Weighted graph in CSR form; self loops allowed (nbr[k] == row). Produced by
// collapse() and consumed by the weighted-chain spectral/hitting code.
// vertex_weight[v] counts each incident edge weight once, loops included once.
struct WeightedGraph {
  int n = 0;
  std::vector<int> offsets;  // size n+1
  std::vector<int32_t> nbr;
  std::vector<double> w;
  std::vector<double> vertex_weight;
  std::string label;
};

Graph build_cycle(int m);                             // m >= 3
Graph build_torus(const std::vector<int>& sides);     // every side >= 3
Graph build_complete(int n);                          // n >= 2

// Strong product: (a1,b1) ~ (a2,b2) iff each coordinate is equal or adjacent,
// excluding the pair itself. Vertex id is a_id * b.n + b_id.
Graph strong_product(const Graph& a, const Graph& b);

struct ExpanderResult {
  Graph graph;
  double gap = 0.0;   // 1 - max(|mu_2|, |mu_n|) of the transition matrix
  int attempts = 0;
  bool certified = false;
};

// Random regular graph by stub matching, resampled until simple, connected,
// and with two-sided spectral gap >= gap_floor. Throws if max_attempts draws
// all fail; the error names the best gap seen.
ExpanderResult build_expander(int size, int degree, uint64_t seed,
                              double gap_floor, int max_attempts = 64);

std::vector<int> bfs_distances(const Graph& g, int source);
int diameter(const Graph& g);
int ball_volume(const Graph& g, int v, int r);

// Minimum pairwise graph distance within a; requires |a| >= 2.
int mindist(const Graph& g, const VertexSet& a);

// Partition of a into groups whose pairwise distance is <= delta
// (transitive closure of the "within delta" relation). Groups come back
// sorted by smallest member.
std::vector<VertexSet> skeleton(const Graph& g, const VertexSet& a, int delta);

// Text format: header "n degree label", then one line of neighbors per vertex.
void save_graph(const Graph& g, const std::string& path);
Graph load_graph(const std::string& path);

// Throws std::runtime_error naming the violated invariant: rows sorted and
// duplicate-free, no self loops, symmetric, uniform degree, connected.
void validate(const Graph& g);

// For graphs flagged vertex-transitive: BFS distance multiset from vertex 0
// must match a handful of other sources. Used by builders and tests.
void check_transitive_signature(const Graph& g);

}  // namespace coverlab
