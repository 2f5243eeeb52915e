#include "coverlab/hitting.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "coverlab/spectral.hpp"

namespace coverlab {

namespace {

void require_proper_subset(const Graph& g, const VertexSet& a) {
  if (a.empty()) throw std::invalid_argument("target set is empty");
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i] < 0 || a[i] >= g.n)
      throw std::invalid_argument("target set: id out of range");
    if (i > 0 && a[i] <= a[i - 1])
      throw std::invalid_argument("target set must be sorted and distinct");
  }
  if (int(a.size()) >= g.n)
    throw std::invalid_argument("target set must be a proper subset");
}

}  // namespace

double hitting_expectation_pi(const Graph& g, int j) {
  auto all = hitting_times_pi(transition(g), stationary(g));
  return all(j);
}

WeightedGraph collapse(const Graph& g, const VertexSet& a) {
  require_proper_subset(g, a);
  std::vector<char> in_a(g.n, 0);
  for (int v : a) in_a[v] = 1;
  std::vector<int> id(g.n, -1);
  int nb = 0;
  for (int v = 0; v < g.n; ++v)
    if (!in_a[v]) id[v] = nb++;
  const int merged = nb;

  WeightedGraph w;
  w.n = nb + 1;
  w.offsets.assign(w.n + 1, 0);
  w.label = g.label + "/collapsed";

  long long interior_edges = 0;
  std::vector<double> into_merged(nb, 0.0);
  for (int v : a)
    for (int32_t u : g.neighbors(v)) {
      if (in_a[u]) {
        if (u > v) ++interior_edges;
      } else {
        into_merged[id[u]] += 1.0;
      }
    }

  for (int v = 0; v < g.n; ++v) {
    if (in_a[v]) continue;
    int row = id[v];
    for (int32_t u : g.neighbors(v))
      if (!in_a[u]) {
        w.nbr.push_back(int32_t(id[u]));
        w.w.push_back(1.0);
      }
    if (into_merged[row] > 0) {
      w.nbr.push_back(int32_t(merged));
      w.w.push_back(into_merged[row]);
    }
    w.offsets[row + 1] = int(w.nbr.size());
  }
  for (int x = 0; x < nb; ++x)
    if (into_merged[x] > 0) {
      w.nbr.push_back(int32_t(x));
      w.w.push_back(into_merged[x]);
    }
  if (interior_edges > 0) {
    w.nbr.push_back(int32_t(merged));
    w.w.push_back(2.0 * double(interior_edges));
  }
  w.offsets[merged + 1] = int(w.nbr.size());
  for (int r = 1; r <= w.n; ++r) w.offsets[r] = std::max(w.offsets[r], w.offsets[r - 1]);

  w.vertex_weight.assign(w.n, 0.0);
  for (int r = 0; r < w.n; ++r)
    for (int k = w.offsets[r]; k < w.offsets[r + 1]; ++k)
      w.vertex_weight[r] += w.w[k];
  return w;
}

double hitting_expectation_set(const Graph& g, const VertexSet& a) {
  if (a.size() == 1) return hitting_expectation_pi(g, a[0]);
  WeightedGraph w = collapse(g, a);
  auto all = hitting_times_pi(transition(w), stationary(w));
  return all(w.n - 1);  // merged vertex sits last
}

double q_ratio(const Graph& g, const VertexSet& a) {
  return hitting_expectation_pi(g, 0) / hitting_expectation_set(g, a);
}

HittingMixture mixture(const Graph& g, const VertexSet& a) {
  require_proper_subset(g, a);
  HittingMixture mx;
  mx.n = g.n;
  mx.a = a;
  mx.b_index.assign(g.n, -1);
  for (int v = 0; v < g.n; ++v)
    if (!std::binary_search(a.begin(), a.end(), v)) {
      mx.b_index[v] = int(mx.b_ids.size());
      mx.b_ids.push_back(v);
    }
  const int nb = int(mx.b_ids.size());

  // survivors may split into pieces; refuse ambiguous decompositions
  {
    std::vector<int> comp(nb, -1);
    std::vector<int> sizes;
    for (int s = 0; s < nb; ++s) {
      if (comp[s] >= 0) continue;
      int c = int(sizes.size());
      sizes.push_back(0);
      std::vector<int> stack{s};
      comp[s] = c;
      while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        ++sizes[c];
        for (int32_t u : g.neighbors(mx.b_ids[x])) {
          int bu = mx.b_index[u];
          if (bu >= 0 && comp[bu] < 0) {
            comp[bu] = c;
            stack.push_back(bu);
          }
        }
      }
    }
    if (sizes.size() > 1) {
      std::sort(sizes.rbegin(), sizes.rend());
      if (sizes[1] > nb / 4) {
        std::ostringstream msg;
        msg << "mixture: removing the target set splits the survivors into "
            << "pieces of sizes " << sizes[0] << " and " << sizes[1]
            << "; the quasi-stationary description is ambiguous";
        throw std::runtime_error(msg.str());
      }
    }
  }

  // uniform pi makes the killed kernel symmetric as-is
  Eigen::MatrixXd pb = Eigen::MatrixXd::Zero(nb, nb);
  for (int x = 0; x < nb; ++x)
    for (int32_t u : g.neighbors(mx.b_ids[x])) {
      int bu = mx.b_index[u];
      if (bu >= 0) pb(x, bu) = 1.0 / g.degree;
    }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(pb);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("mixture: eigensolver failed");

  const double sqn = std::sqrt(double(g.n));
  mx.lambda.resize(nb);
  mx.c.resize(nb);
  mx.fB.resize(nb, nb);
  for (int i = 0; i < nb; ++i) {
    int j = nb - 1 - i;  // gamma descending -> lambda ascending
    mx.lambda(i) = 1.0 - es.eigenvalues()(j);
    Eigen::VectorXd f = es.eigenvectors().col(j) * sqn;  // f = v / sqrt(pi)
    double ci = f.sum() / g.n;
    if (ci < 0) {
      f = -f;
      ci = -ci;
    }
    mx.fB.col(i) = f;
    mx.c(i) = ci;
  }
  mx.lambda1 = mx.lambda(0);
  mx.pi_b = mx.c.squaredNorm();
  mx.p = mx.pi_b - mx.c(0) * mx.c(0);

  mx.alpha = Eigen::VectorXd::Zero(g.n);
  double norm = 0;
  for (int x = 0; x < nb; ++x) {
    double val = mx.fB(x, 0) / g.n;  // f_1 * pi
    mx.alpha(mx.b_ids[x]) = val;
    norm += val;
  }
  mx.alpha /= norm;
  mx.alpha_pi_l2 = 0;
  for (int x = 0; x < nb; ++x)
    mx.alpha_pi_l2 += mx.alpha(mx.b_ids[x]) * mx.alpha(mx.b_ids[x]) * g.n;
  return mx;
}

double HittingMixture::tail(double t) const {
  double s = 0;
  for (int i = 0; i < c.size(); ++i)
    s += c(i) * c(i) * std::exp(-lambda(i) * t);
  return s;
}

double HittingMixture::tail_from(int x, double t) const {
  int bx = b_index[x];
  if (bx < 0) return 0.0;
  double s = 0;
  for (int i = 0; i < c.size(); ++i)
    s += c(i) * fB(bx, i) * std::exp(-lambda(i) * t);
  return s;
}

double HittingMixture::e_pi() const {
  double s = 0;
  for (int i = 0; i < c.size(); ++i) s += c(i) * c(i) / lambda(i);
  return s;
}

double HittingMixture::e_alpha() const { return 1.0 / lambda1; }

QuasiStationary quasi_stationary(const Graph& g, const VertexSet& a) {
  auto mx = mixture(g, a);
  QuasiStationary qs;
  qs.alpha = mx.alpha;
  qs.lambda1 = mx.lambda1;
  qs.e_alpha = mx.e_alpha();
  qs.alpha_pi_l2 = mx.alpha_pi_l2;
  return qs;
}

ABReport ab_bounds(const HittingMixture& mx, double t_rel,
                   const std::vector<double>& t_grid) {
  constexpr double kTol = 1e-10;
  ABReport rep;
  rep.e_pi = mx.e_pi();
  rep.e_alpha = mx.e_alpha();
  rep.alpha_pi_l2 = mx.alpha_pi_l2;
  rep.p = mx.p;
  rep.t_rel = t_rel;

  double pi_a = 1.0 - mx.pi_b;
  double c1sq = 1.0 / mx.alpha_pi_l2;
  auto fail = [](const std::string& name, double viol) {
    std::ostringstream msg;
    msg << "ab_bounds: " << name << " violated by " << viol;
    throw std::runtime_error(msg.str());
  };

  for (double t : t_grid) {
    double tail = mx.tail(t);
    double pa = std::exp(-mx.lambda1 * t);
    double clo = pa * (1.0 - t_rel / rep.e_alpha);
    double chi = pa * (1.0 - pi_a);
    double rlo = c1sq * pa;
    double rhi = rlo + mx.p * std::exp(-t / t_rel);
    rep.t.push_back(t);
    rep.p_pi.push_back(tail);
    rep.classic_lo.push_back(clo);
    rep.classic_hi.push_back(chi);
    rep.refined_lo.push_back(rlo);
    rep.refined_hi.push_back(rhi);
    double v;
    if ((v = clo - tail) > rep.max_classic_violation)
      rep.max_classic_violation = v;
    if ((v = tail - chi) > rep.max_classic_violation)
      rep.max_classic_violation = v;
    if ((v = rlo - tail) > rep.max_refined_violation)
      rep.max_refined_violation = v;
    if ((v = tail - rhi) > rep.max_refined_violation)
      rep.max_refined_violation = v;
  }
  if (rep.max_classic_violation > kTol)
    fail("classic exponential-approximation bound", rep.max_classic_violation);
  if (rep.max_refined_violation > kTol)
    fail("refined exponential-approximation bound", rep.max_refined_violation);

  rep.integrated_gap = rep.e_pi - rep.e_alpha / mx.alpha_pi_l2;
  if (rep.integrated_gap < -kTol)
    fail("integrated lower bound", -rep.integrated_gap);
  if (rep.integrated_gap > mx.p * t_rel + kTol)
    fail("integrated upper bound", rep.integrated_gap - mx.p * t_rel);

  double drop = rep.e_alpha - rep.e_pi;
  double drop_cap = (mx.alpha_pi_l2 - 1.0) / mx.alpha_pi_l2 * rep.e_alpha;
  if (drop < -kTol) fail("expectation ordering", -drop);
  if (drop > drop_cap + kTol) fail("expectation drop cap", drop - drop_cap);

  double cheap = (mx.alpha_pi_l2 - 1.0) / mx.alpha_pi_l2;
  if (cheap > t_rel / rep.e_alpha + kTol)
    fail("norm-vs-relaxation bound", cheap - t_rel / rep.e_alpha);

  if (mx.lambda.size() > 1 && mx.lambda(1) < 1.0 / t_rel - kTol)
    fail("secondary-rate interlacing", 1.0 / t_rel - mx.lambda(1));
  return rep;
}

double t_med(const HittingMixture& mx) {
  if (mx.p <= 0) return 0.0;
  auto lhs = [&](double t) {
    double s = 0;
    for (int i = 1; i < mx.c.size(); ++i) {
      double e = 1.0 - std::exp(-mx.lambda(i) * t);
      s += mx.c(i) * mx.c(i) * e * e;
    }
    return s;
  };
  double target = mx.p / 2.0;
  double hi = 1.0 / mx.lambda(mx.lambda.size() - 1);
  while (lhs(hi) < target) hi *= 2.0;
  double lo = 0.0;
  while (hi - lo > 1e-12 * hi) {
    double mid = 0.5 * (lo + hi);
    (lhs(mid) < target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double dsep_residual(const HittingMixture& mx) {
  double tm = t_med(mx);
  double mass = 0;
  for (int x : mx.b_ids) {
    double hit = 1.0 - mx.tail_from(x, tm);
    mass += hit * hit / mx.n;
  }
  double e1 = 1.0 - std::exp(-mx.lambda1 * tm);
  double rhs = 2.0 * mass - 2.0 / mx.alpha_pi_l2 * e1 * e1;
  return std::abs(rhs - mx.p);
}

VtBoundReport vt_bound_check(const Graph& g, const VertexSet& a, int m,
                             double R) {
  check_transitive_signature(g);
  auto mx = mixture(g, a);
  VtBoundReport rep;
  rep.R =
      R > 0 ? R : (a.size() >= 2 ? double(mindist(g, a)) : double(diameter(g)));
  double d = diameter(g);
  double n = g.n;
  double k = double(a.size());
  double deg = g.degree;
  if (m != 0 && m < 2)
    throw std::invalid_argument("vt_bound_check: shape exponent m must be >= 2");
  // diameter-1 graphs carry no shape scale; treat them as high-dimensional
  int derived = 5;
  if (d > 1.0)
    derived = std::max(2, int(std::lround(std::log(n / rep.R) / std::log(d))));
  rep.m = m >= 2 ? m : derived;
  double e_to = hitting_expectation_pi(g, 0);
  switch (rep.m) {
    case 2:
      rep.bracket = (deg * deg * std::pow(d, 4.0) +
                     n * (d * d - rep.R * rep.R)) /
                    (rep.R * e_to * e_to);
      break;
    case 3:
      rep.bracket = (deg * deg * std::pow(d, 4.0) +
                     n * (std::log1p(rep.R) + d / rep.R)) /
                    (e_to * e_to);
      break;
    case 4:
      rep.bracket = (n * std::log(d / rep.R) / rep.R +
                     deg * deg * std::pow(d, 4.0)) /
                    (e_to * e_to);
      break;
    default:
      rep.bracket = 1.0 / n;
  }
  rep.lhs = mx.p;
  rep.implied_c = rep.lhs / ((deg * k) * (deg * k) * rep.bracket);
  if (!(rep.implied_c >= 0) || !std::isfinite(rep.implied_c))
    throw std::runtime_error(
        "vt_bound_check: implied constant is not a finite nonnegative number");
  return rep;
}

Eigen::VectorXd first_hit_probs(const Graph& g, const Eigen::VectorXd& start,
                                const VertexSet& a) {
  require_proper_subset(g, a);
  if (start.size() != g.n)
    throw std::invalid_argument("first_hit_probs: start length != n");
  std::vector<int> b_index(g.n, -1);
  std::vector<int> b_ids;
  for (int v = 0; v < g.n; ++v)
    if (!std::binary_search(a.begin(), a.end(), v)) {
      b_index[v] = int(b_ids.size());
      b_ids.push_back(v);
    }
  const int nb = int(b_ids.size());
  Eigen::MatrixXd sys = Eigen::MatrixXd::Identity(nb, nb);
  for (int x = 0; x < nb; ++x)
    for (int32_t u : g.neighbors(b_ids[x]))
      if (b_index[u] >= 0) sys(x, b_index[u]) -= 1.0 / g.degree;
  auto lu = sys.partialPivLu();

  Eigen::VectorXd out(a.size());
  for (size_t j = 0; j < a.size(); ++j) {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nb);
    for (int x = 0; x < nb; ++x)
      for (int32_t u : g.neighbors(b_ids[x]))
        if (u == a[j]) rhs(x) += 1.0 / g.degree;
    Eigen::VectorXd h = lu.solve(rhs);
    double prob = start(a[j]);  // starting on the target itself
    for (int x = 0; x < nb; ++x) prob += h(x) * start(b_ids[x]);
    out(j) = prob;
  }
  return out;
}

Eigen::VectorXd first_hit_probs(const Graph& g, const VertexSet& a) {
  return first_hit_probs(g, Eigen::VectorXd::Constant(g.n, 1.0 / g.n), a);
}

}  // namespace coverlab
