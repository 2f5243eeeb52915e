#include "coverlab/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

#include "coverlab/rng.hpp"

namespace coverlab {

namespace {

void sort_rows(Graph& g) {
  for (int v = 0; v < g.n; ++v) {
    auto* row = g.adj.data() + size_t(v) * g.degree;
    std::sort(row, row + g.degree);
  }
}

}  // namespace

Graph build_cycle(int m) {
  if (m < 3) throw std::invalid_argument("build_cycle: need m >= 3");
  Graph g;
  g.n = m;
  g.degree = 2;
  g.adj.resize(size_t(m) * 2);
  for (int v = 0; v < m; ++v) {
    g.adj[size_t(v) * 2 + 0] = int32_t((v + m - 1) % m);
    g.adj[size_t(v) * 2 + 1] = int32_t((v + 1) % m);
  }
  sort_rows(g);
  g.label = "cycle:" + std::to_string(m);
  g.transitive_hint = true;
  return g;
}

Graph build_torus(const std::vector<int>& sides) {
  if (sides.empty()) throw std::invalid_argument("build_torus: no sides");
  long long n = 1;
  for (int s : sides) {
    if (s < 3) throw std::invalid_argument("build_torus: every side must be >= 3");
    n *= s;
    if (n > (1 << 28)) throw std::invalid_argument("build_torus: too large");
  }
  int dims = int(sides.size());
  Graph g;
  g.n = int(n);
  g.degree = 2 * dims;
  g.adj.resize(size_t(g.n) * g.degree);
  std::vector<int> stride(dims, 1);
  for (int d = dims - 2; d >= 0; --d) stride[d] = stride[d + 1] * sides[d + 1];
  std::vector<int> c(dims, 0);
  for (int v = 0; v < g.n; ++v) {
    int32_t* row = g.adj.data() + size_t(v) * g.degree;
    int k = 0;
    for (int d = 0; d < dims; ++d) {
      int up = (c[d] + 1) % sides[d];
      int dn = (c[d] + sides[d] - 1) % sides[d];
      row[k++] = int32_t(v + (up - c[d]) * stride[d]);
      row[k++] = int32_t(v + (dn - c[d]) * stride[d]);
    }
    for (int d = dims - 1; d >= 0; --d) {
      if (++c[d] < sides[d]) break;
      c[d] = 0;
    }
  }
  sort_rows(g);
  std::string lab = "torus:";
  for (int d = 0; d < dims; ++d) lab += (d ? "x" : "") + std::to_string(sides[d]);
  g.label = lab;
  g.transitive_hint = true;
  return g;
}

Graph build_complete(int n) {
  if (n < 2) throw std::invalid_argument("build_complete: need n >= 2");
  Graph g;
  g.n = n;
  g.degree = n - 1;
  g.adj.resize(size_t(n) * (n - 1));
  for (int v = 0; v < n; ++v) {
    int k = 0;
    for (int u = 0; u < n; ++u)
      if (u != v) g.adj[size_t(v) * (n - 1) + k++] = int32_t(u);
  }
  g.label = "complete:" + std::to_string(n);
  g.transitive_hint = true;
  return g;
}

Graph strong_product(const Graph& a, const Graph& b) {
  Graph g;
  long long n = (long long)a.n * b.n;
  if (n > (1 << 28)) throw std::invalid_argument("strong_product: too large");
  g.n = int(n);
  g.degree = (a.degree + 1) * (b.degree + 1) - 1;
  g.adj.resize(size_t(g.n) * g.degree);
  std::vector<int32_t> ua(a.degree + 1), ub(b.degree + 1);
  for (int va = 0; va < a.n; ++va) {
    ua[0] = int32_t(va);
    std::copy(a.neighbors(va).begin(), a.neighbors(va).end(), ua.begin() + 1);
    for (int vb = 0; vb < b.n; ++vb) {
      ub[0] = int32_t(vb);
      std::copy(b.neighbors(vb).begin(), b.neighbors(vb).end(), ub.begin() + 1);
      int v = va * b.n + vb;
      int32_t* row = g.adj.data() + size_t(v) * g.degree;
      int k = 0;
      for (int32_t xa : ua)
        for (int32_t xb : ub) {
          int u = int(xa) * b.n + int(xb);
          if (u != v) row[k++] = int32_t(u);
        }
    }
  }
  sort_rows(g);
  g.label = "product:" + a.label + "|" + b.label;
  g.transitive_hint = a.transitive_hint && b.transitive_hint;
  return g;
}

namespace {

// One stub-matching draw. Returns false if the multigraph is not simple.
bool draw_regular(int n, int d, Rng& rng, std::vector<int32_t>& adj) {
  // Pairing model with pair-level repair: join two random unsaturated,
  // distinct, non-adjacent vertices and only restart the whole pairing
  // when the remainder is stuck. Full rejection on the first collision
  // would fail a constant fraction of draws even for modest d.
  std::vector<int32_t> stubs;
  std::vector<std::set<int32_t>> nb(n);
  for (int restart = 0; restart < 40; ++restart) {
    stubs.clear();
    for (int v = 0; v < n; ++v)
      for (int k = 0; k < d; ++k) stubs.push_back(int32_t(v));
    for (auto& s : nb) s.clear();
    bool stuck = false;
    while (!stubs.empty() && !stuck) {
      bool placed = false;
      for (int probe = 0; probe < 200 && !placed; ++probe) {
        uint32_t i = rng.below(uint32_t(stubs.size()));
        uint32_t j = rng.below(uint32_t(stubs.size()));
        if (i == j) continue;
        int32_t u = stubs[i], v = stubs[j];
        if (u == v || nb[u].count(v)) continue;
        nb[u].insert(v);
        nb[v].insert(u);
        if (i < j) std::swap(i, j);  // pop the larger index first
        stubs[i] = stubs.back();
        stubs.pop_back();
        stubs[j] = stubs.back();
        stubs.pop_back();
        placed = true;
      }
      stuck = !placed;
    }
    if (!stuck) {
      adj.assign(size_t(n) * d, 0);
      for (int v = 0; v < n; ++v) {
        int k = 0;
        for (int32_t u : nb[v]) adj[size_t(v) * d + k++] = u;
      }
      return true;
    }
  }
  return false;
}

bool is_connected(int n, int d, const std::vector<int32_t>& adj) {
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int k = 0; k < d; ++k) {
      int32_t u = adj[size_t(v) * d + k];
      if (!seen[u]) {
        seen[u] = 1;
        ++count;
        stack.push_back(int(u));
      }
    }
  }
  return count == n;
}

double two_sided_gap(int n, int d, const std::vector<int32_t>& adj) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (int v = 0; v < n; ++v)
    for (int k = 0; k < d; ++k) A(v, adj[size_t(v) * d + k]) = 1.0 / d;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  const auto& mu = es.eigenvalues();  // ascending
  return 1.0 - std::max(std::abs(mu(0)), std::abs(mu(n - 2)));
}

}  // namespace

ExpanderResult build_expander(int size, int degree, uint64_t seed,
                              double gap_floor, int max_attempts) {
  if (size <= degree || degree < 3)
    throw std::invalid_argument("build_expander: need size > degree >= 3");
  if ((long long)size * degree % 2 != 0)
    throw std::invalid_argument("build_expander: size * degree must be even");
  Rng rng(seed, 0xE0);
  ExpanderResult res;
  double best_gap = -1.0;
  std::vector<int32_t> adj;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    res.attempts = attempt;
    if (!draw_regular(size, degree, rng, adj)) continue;
    if (!is_connected(size, degree, adj)) continue;
    double gap = two_sided_gap(size, degree, adj);
    best_gap = std::max(best_gap, gap);
    if (gap >= gap_floor) {
      res.graph.n = size;
      res.graph.degree = degree;
      res.graph.adj = std::move(adj);
      res.graph.label = "expander:" + std::to_string(size) + "x" +
                        std::to_string(degree);
      res.graph.transitive_hint = false;
      res.gap = gap;
      res.certified = true;
      validate(res.graph);
      return res;
    }
  }
  std::ostringstream msg;
  msg << "build_expander: no draw reached gap_floor " << gap_floor << " in "
      << max_attempts << " attempts (best two-sided gap " << best_gap << ")";
  throw std::runtime_error(msg.str());
}

std::vector<int> bfs_distances(const Graph& g, int source) {
  std::vector<int> dist(g.n, -1);
  std::vector<int> frontier{source}, next;
  dist[source] = 0;
  int level = 0;
  while (!frontier.empty()) {
    ++level;
    next.clear();
    for (int v : frontier)
      for (int32_t u : g.neighbors(v))
        if (dist[u] < 0) {
          dist[u] = level;
          next.push_back(int(u));
        }
    frontier.swap(next);
  }
  return dist;
}

int diameter(const Graph& g) {
  auto ecc = [&](int v) {
    auto d = bfs_distances(g, v);
    int e = 0;
    for (int x : d) {
      if (x < 0) throw std::runtime_error("diameter: graph is disconnected");
      e = std::max(e, x);
    }
    return e;
  };
  if (g.transitive_hint) return ecc(0);  // all eccentricities agree
  if (g.n > 8192)
    throw std::runtime_error("diameter: all-pairs sweep refused for n > 8192");
  int d = 0;
  for (int v = 0; v < g.n; ++v) d = std::max(d, ecc(v));
  return d;
}

int ball_volume(const Graph& g, int v, int r) {
  auto dist = bfs_distances(g, v);
  int c = 0;
  for (int x : dist)
    if (x >= 0 && x <= r) ++c;
  return c;
}

int mindist(const Graph& g, const VertexSet& a) {
  if (a.size() < 2) throw std::invalid_argument("mindist: need |a| >= 2");
  int best = g.n;
  for (size_t i = 0; i < a.size(); ++i) {
    auto dist = bfs_distances(g, a[i]);
    for (size_t j = i + 1; j < a.size(); ++j)
      if (dist[a[j]] >= 0) best = std::min(best, dist[a[j]]);
  }
  return best;
}

std::vector<VertexSet> skeleton(const Graph& g, const VertexSet& a,
                                int delta) {
  int k = int(a.size());
  std::vector<int> parent(k);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (int i = 0; i < k; ++i) {
    auto dist = bfs_distances(g, a[i]);
    for (int j = i + 1; j < k; ++j)
      if (dist[a[j]] >= 0 && dist[a[j]] <= delta) parent[find(i)] = find(j);
  }
  std::map<int, VertexSet> groups;
  for (int i = 0; i < k; ++i) groups[find(i)].push_back(a[i]);
  std::vector<VertexSet> out;
  for (auto& [root, members] : groups) {
    std::sort(members.begin(), members.end());
    out.push_back(std::move(members));
  }
  std::sort(out.begin(), out.end(),
            [](const VertexSet& x, const VertexSet& y) { return x[0] < y[0]; });
  return out;
}

void save_graph(const Graph& g, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_graph: cannot open " + path);
  f << g.n << " " << g.degree << " " << (g.label.empty() ? "-" : g.label)
    << "\n";
  for (int v = 0; v < g.n; ++v) {
    auto row = g.neighbors(v);
    for (int k = 0; k < g.degree; ++k) f << (k ? " " : "") << row[k];
    f << "\n";
  }
  if (!f) throw std::runtime_error("save_graph: write failed for " + path);
}

Graph load_graph(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_graph: cannot open " + path);
  Graph g;
  std::string header;
  if (!std::getline(f, header))
    throw std::runtime_error("load_graph: missing header in " + path);
  std::istringstream hs(header);
  if (!(hs >> g.n >> g.degree >> g.label))
    throw std::runtime_error("load_graph: bad header in " + path);
  if (g.label == "-") g.label.clear();
  if (g.n <= 0 || g.degree <= 0)
    throw std::runtime_error("load_graph: bad sizes in " + path);
  g.adj.resize(size_t(g.n) * g.degree);
  for (int v = 0; v < g.n; ++v)
    for (int k = 0; k < g.degree; ++k) {
      long long u;
      if (!(f >> u) || u < 0 || u >= g.n)
        throw std::runtime_error("load_graph: bad neighbor entry in " + path);
      g.adj[size_t(v) * g.degree + k] = int32_t(u);
    }
  validate(g);
  return g;
}

void validate(const Graph& g) {
  if (g.n <= 0 || g.degree <= 0 || g.adj.size() != size_t(g.n) * g.degree)
    throw std::runtime_error("graph invariant violated: adjacency size");
  for (int v = 0; v < g.n; ++v) {
    auto row = g.neighbors(v);
    for (int k = 0; k < g.degree; ++k) {
      if (row[k] < 0 || row[k] >= g.n)
        throw std::runtime_error("graph invariant violated: id out of range");
      if (row[k] == v)
        throw std::runtime_error("graph invariant violated: self loop");
      if (k > 0 && row[k] <= row[k - 1])
        throw std::runtime_error(
            "graph invariant violated: row not strictly sorted");
      auto back = g.neighbors(row[k]);
      if (!std::binary_search(back.begin(), back.end(), int32_t(v)))
        throw std::runtime_error("graph invariant violated: asymmetric edge");
    }
  }
  auto dist = bfs_distances(g, 0);
  for (int x : dist)
    if (x < 0) throw std::runtime_error("graph invariant violated: disconnected");
}

void check_transitive_signature(const Graph& g) {
  if (!g.transitive_hint) return;
  auto signature = [&](int v) {
    auto d = bfs_distances(g, v);
    std::sort(d.begin(), d.end());
    return d;
  };
  auto ref = signature(0);
  int probes = std::min(g.n - 1, 8);
  for (int i = 1; i <= probes; ++i) {
    int v = int((long long)i * (g.n - 1) / probes);
    if (signature(v) != ref)
      throw std::runtime_error(
          "graph invariant violated: distance multiset differs between "
          "sources on a graph flagged vertex-transitive");
  }
}

}  // namespace coverlab
