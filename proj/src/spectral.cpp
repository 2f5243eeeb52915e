#include "coverlab/spectral.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "coverlab/rng.hpp"

namespace coverlab {

Eigen::VectorXd stationary(const Graph& g) {
  return Eigen::VectorXd::Constant(g.n, 1.0 / g.n);
}

Eigen::VectorXd stationary(const WeightedGraph& g) {
  Eigen::VectorXd pi(g.n);
  double total = 0;
  for (int v = 0; v < g.n; ++v) total += g.vertex_weight[v];
  for (int v = 0; v < g.n; ++v) pi(v) = g.vertex_weight[v] / total;
  return pi;
}

Eigen::MatrixXd transition(const Graph& g) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(g.n, g.n);
  for (int v = 0; v < g.n; ++v)
    for (int32_t u : g.neighbors(v)) P(v, u) = 1.0 / g.degree;
  return P;
}

Eigen::MatrixXd transition(const WeightedGraph& g) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(g.n, g.n);
  for (int v = 0; v < g.n; ++v)
    for (int k = g.offsets[v]; k < g.offsets[v + 1]; ++k)
      P(v, g.nbr[k]) += g.w[k] / g.vertex_weight[v];
  return P;
}

SpectralCache eigensystem(const Eigen::MatrixXd& P,
                          const Eigen::VectorXd& pi) {
  const int n = int(P.rows());
  if (P.cols() != n || pi.size() != n)
    throw std::invalid_argument("eigensystem: shape mismatch");

  Eigen::MatrixXd Q(n, n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) Q(x, y) = pi(x) * P(x, y);
  double db = (Q - Q.transpose()).cwiseAbs().maxCoeff();
  if (db > 1e-12) {
    std::ostringstream msg;
    msg << "eigensystem: detailed balance violated, max asymmetry " << db;
    throw std::runtime_error(msg.str());
  }
  Q = ((Q + Q.transpose()) / 2.0).eval();

  Eigen::VectorXd sqrt_pi = pi.cwiseSqrt();
  Eigen::MatrixXd S(n, n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) S(x, y) = Q(x, y) / (sqrt_pi(x) * sqrt_pi(y));

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("eigensystem: eigensolver failed");

  SpectralCache sc;
  sc.n = n;
  sc.pi = pi;
  sc.beta.resize(n);
  sc.f.resize(n, n);
  // solver returns eigenvalues ascending; rates 1 - mu go in ascending order
  for (int i = 0; i < n; ++i) {
    int j = n - 1 - i;
    sc.beta(i) = 1.0 - es.eigenvalues()(j);
    sc.f.col(i) = es.eigenvectors().col(j).cwiseQuotient(sqrt_pi);
    int arg = 0;
    sc.f.col(i).cwiseAbs().maxCoeff(&arg);
    if (sc.f(arg, i) < 0) sc.f.col(i) = -sc.f.col(i);
  }
  if (std::abs(sc.beta(0)) > 1e-9)
    throw std::runtime_error("eigensystem: zero mode missing");
  sc.beta(0) = 0.0;
  if ((sc.f.col(0) - Eigen::VectorXd::Ones(n)).cwiseAbs().maxCoeff() > 1e-8)
    throw std::runtime_error("eigensystem: constant mode is not constant");
  sc.f.col(0).setOnes();

  Eigen::MatrixXd R = P * sc.f;
  for (int i = 0; i < n; ++i) R.col(i) -= (1.0 - sc.beta(i)) * sc.f.col(i);
  double resid = R.cwiseAbs().maxCoeff();
  if (resid > 1e-10) {
    std::ostringstream msg;
    msg << "eigensystem: eigen residual " << resid << " exceeds 1e-10";
    throw std::runtime_error(msg.str());
  }
  return sc;
}

SpectralCache spectral_cache(const Graph& g, int cap) {
  if (g.n > cap) {
    std::ostringstream msg;
    msg << "spectral_cache: n = " << g.n << " exceeds cap " << cap
        << "; use the torus closed forms or sampling estimators";
    throw std::runtime_error(msg.str());
  }
  return eigensystem(transition(g), stationary(g));
}

SpectralCache spectral_cache(const WeightedGraph& g, int cap) {
  if (g.n > cap)
    throw std::runtime_error("spectral_cache: weighted graph exceeds cap");
  return eigensystem(transition(g), stationary(g));
}

double heat_kernel(const SpectralCache& sc, double t, int x, int y) {
  double s = 0;
  for (int i = 0; i < sc.n; ++i)
    s += sc.f(x, i) * sc.f(y, i) * std::exp(-sc.beta(i) * t);
  return s * sc.pi(y);
}

double green(const SpectralCache& sc, int x, int y) {
  double s = 0;
  for (int i = 1; i < sc.n; ++i)
    s += sc.f(x, i) * sc.f(y, i) / sc.beta(i);
  return s * sc.pi(y);
}

double relaxation_time(const SpectralCache& sc) { return 1.0 / sc.beta(1); }

double eigentime(const SpectralCache& sc) {
  double s = 0;
  for (int i = 1; i < sc.n; ++i) s += 1.0 / sc.beta(i);
  return s;
}

Eigen::VectorXd hitting_times_pi(const Eigen::MatrixXd& P,
                                 const Eigen::VectorXd& pi) {
  const int n = int(P.rows());
  // Lazy chain (I + P) / 2 is aperiodic, so the fundamental-matrix identity
  // applies; the continuous-time rate-1 walk runs the lazy chain at rate 2,
  // whence the factor one half.
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) -
                      0.5 * (Eigen::MatrixXd::Identity(n, n) + P) +
                      Eigen::VectorXd::Ones(n) * pi.transpose();
  Eigen::MatrixXd Z = A.partialPivLu().solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::VectorXd out(n);
  for (int j = 0; j < n; ++j) out(j) = 0.5 * (Z(j, j) - pi(j)) / pi(j);
  return out;
}

Eigen::MatrixXd hitting_times_pairwise(const Eigen::MatrixXd& P,
                                       const Eigen::VectorXd& pi) {
  const int n = int(P.rows());
  Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n) -
                      0.5 * (Eigen::MatrixXd::Identity(n, n) + P) +
                      Eigen::VectorXd::Ones(n) * pi.transpose();
  Eigen::MatrixXd Z = A.partialPivLu().solve(Eigen::MatrixXd::Identity(n, n));
  Eigen::MatrixXd M(n, n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y) M(x, y) = 0.5 * (Z(y, y) - Z(x, y)) / pi(y);
  return M;
}

ConductanceRecord conductance(const Graph& g, const VertexSet& s) {
  std::vector<char> in(g.n, 0);
  for (int v : s) in[v] = 1;
  long long cut = 0;
  for (int v : s)
    for (int32_t u : g.neighbors(v))
      if (!in[u]) ++cut;
  ConductanceRecord r;
  r.pi_s = double(s.size()) / g.n;
  r.q = double(cut) / (double(g.n) * g.degree);
  r.phi = r.q / r.pi_s;
  return r;
}

double ConductanceProfile::at(double x) const {
  if (u.empty()) throw std::runtime_error("conductance profile is empty");
  if (x <= u.front()) return phi.front();
  size_t i = size_t(std::upper_bound(u.begin(), u.end(), x) - u.begin());
  return phi[std::min(i - 1, phi.size() - 1)];
}

ConductanceProfile conductance_profile(const Graph& g) {
  if (g.n > 18)
    throw std::runtime_error(
        "conductance_profile: exhaustive enumeration refused for n > 18");
  int half = g.n / 2;
  std::vector<double> best(half + 1, std::numeric_limits<double>::infinity());
  uint32_t full = uint32_t(1) << g.n;
  for (uint32_t mask = 1; mask < full; ++mask) {
    int k = std::popcount(mask);
    if (k > half) continue;
    long long cut = 0;
    for (uint32_t rest = mask; rest;) {
      int v = std::countr_zero(rest);
      rest &= rest - 1;
      for (int32_t nb : g.neighbors(v))
        if (!(mask >> nb & 1)) ++cut;
    }
    best[k] = std::min(best[k], double(cut) / (double(g.degree) * k));
  }
  ConductanceProfile p;
  p.exhaustive = true;
  double run = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= half; ++k) {
    run = std::min(run, best[k]);
    p.u.push_back(double(k) / g.n);
    p.phi.push_back(run);
  }
  return p;
}

ConductanceProfile conductance_profile_sampled(const Graph& g, uint64_t seed,
                                               int samples) {
  int half = g.n / 2;
  std::vector<double> best(half + 1, std::numeric_limits<double>::infinity());
  auto record = [&](const VertexSet& s) {
    if (s.empty() || int(s.size()) > half) return;
    auto r = conductance(g, s);
    best[s.size()] = std::min(best[s.size()], r.phi);
  };
  // balls around 0 capture the smooth part of the profile
  auto dist = bfs_distances(g, 0);
  int dmax = *std::max_element(dist.begin(), dist.end());
  for (int r = 0; r <= dmax; ++r) {
    VertexSet ball;
    for (int v = 0; v < g.n; ++v)
      if (dist[v] <= r) ball.push_back(v);
    record(ball);
  }
  Rng rng(seed, 0xC0);
  for (int it = 0; it < samples; ++it) {
    int k = 1 + int(rng.below(uint32_t(half)));
    VertexSet s;
    std::vector<char> in(g.n, 0);
    int v = int(rng.below(uint32_t(g.n)));
    s.push_back(v);
    in[v] = 1;
    while (int(s.size()) < k) {  // random connected set by frontier growth
      int from = s[rng.below(uint32_t(s.size()))];
      int u = g.neighbors(from)[rng.below(uint32_t(g.degree))];
      if (!in[u]) {
        in[u] = 1;
        s.push_back(u);
      }
    }
    std::sort(s.begin(), s.end());
    record(s);
  }
  ConductanceProfile p;
  p.exhaustive = false;
  double run = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= half; ++k) {
    run = std::min(run, best[k]);
    if (std::isfinite(run)) {
      p.u.push_back(double(k) / g.n);
      p.phi.push_back(run);
    }
  }
  return p;
}

EvolvingSetReport evolving_set_check(const Graph& g, const SpectralCache& sc,
                                     const ConductanceProfile& profile,
                                     double eps) {
  if (eps < 8.0 - 1e-12 || eps > double(g.n) + 1e-12)
    throw std::invalid_argument(
        "evolving_set_check: eps must lie in [8, n]");
  double a = 4.0 / g.n, b = 4.0 / eps;
  // piecewise-constant profile makes the integral a sum of logarithms
  double t = 0, lo = a;
  while (lo < b) {
    double phi = profile.at(lo);
    auto it = std::upper_bound(profile.u.begin(), profile.u.end(), lo);
    double hi = (it == profile.u.end()) ? b : std::min(*it, b);
    if (hi <= lo) break;
    t += 8.0 / (phi * phi) * std::log(hi / lo);
    lo = hi;
  }
  EvolvingSetReport rep;
  rep.eps = eps;
  rep.t = t;
  rep.p_t = heat_kernel(sc, t, 0, 0);
  rep.bound = (1.0 + eps) * sc.pi(0);
  rep.pass = rep.p_t <= rep.bound + 1e-12;
  return rep;
}

HkFitReport hk_bound_fit(const SpectralCache& sc, int m, double R,
                         double d2) {
  if (m < 2)
    throw std::invalid_argument("hk_bound_fit: shape exponent m must be >= 2");
  if (R < 1.0 || d2 <= 0)
    throw std::invalid_argument("hk_bound_fit: need R >= 1 and d2 > 0");
  HkFitReport rep;
  rep.m = m;
  rep.R = R;
  double t0 = 1.0, t1 = std::max(d2, 1.0);
  const int steps = 128;
  for (int i = 0; i <= steps; ++i) {
    double t = t0 * std::pow(t1 / t0, double(i) / steps);
    double envelope = std::max(std::pow(t, -0.5 * (m + 1)),
                               1.0 / (R * std::pow(t, 0.5 * m)));
    double ratio = heat_kernel(sc, t, 0, 0) / envelope;
    if (ratio > rep.c) {
      rep.c = ratio;
      rep.t_at_max = t;
    }
  }
  return rep;
}

double effective_resistance(const Graph& g, int x, int y) {
  if (x == y) return 0.0;
  const int n = g.n;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (int v = 0; v < n; ++v) {
    L(v, v) = g.degree;
    for (int32_t u : g.neighbors(v)) L(v, u) -= 1.0;
  }
  // ground y: drop its row/column, push unit current at x
  std::vector<int> keep;
  keep.reserve(n - 1);
  for (int v = 0; v < n; ++v)
    if (v != y) keep.push_back(v);
  Eigen::MatrixXd Lr(n - 1, n - 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n - 1);
  for (int i = 0; i < n - 1; ++i) {
    for (int j = 0; j < n - 1; ++j) Lr(i, j) = L(keep[i], keep[j]);
    if (keep[i] == x) rhs(i) = 1.0;
  }
  Eigen::VectorXd v = Lr.ldlt().solve(rhs);
  for (int i = 0; i < n - 1; ++i)
    if (keep[i] == x) return v(i);
  return 0.0;
}

std::vector<PoincareReport> poincare_decay(const SpectralCache& sc, int diam,
                                           int degree) {
  std::vector<PoincareReport> out;
  double d2 = double(diam) * diam;
  double anchor = heat_kernel(sc, d2, 0, 0);
  for (double t : {d2, 2 * d2, 4 * d2}) {
    PoincareReport r;
    r.t = t;
    r.lhs = heat_kernel(sc, t, 0, 0) - 1.0 / sc.n;
    r.rhs = std::exp(-(t - d2) / (degree * d2)) * anchor;
    r.pass = r.lhs <= r.rhs + 1e-12;
    out.push_back(r);
  }
  return out;
}

double torus_epi_to(const std::vector<int>& sides) {
  const int dims = int(sides.size());
  long long n = 1;
  for (int s : sides) n *= s;
  std::vector<std::vector<double>> c(dims);
  for (int d = 0; d < dims; ++d) {
    c[d].resize(sides[d]);
    for (int k = 0; k < sides[d]; ++k)
      c[d][k] = std::cos(2.0 * std::numbers::pi * k / sides[d]);
  }
  double sum = 0;
  std::vector<int> k(dims, 0);
  for (long long idx = 1; idx < n; ++idx) {
    for (int d = dims - 1; d >= 0; --d) {
      if (++k[d] < sides[d]) break;
      k[d] = 0;
    }
    double mu = 0;
    for (int d = 0; d < dims; ++d) mu += c[d][k[d]];
    sum += 1.0 / (1.0 - mu / dims);
  }
  return sum;
}

std::vector<double> torus_green_row(const std::vector<int>& sides) {
  const int dims = int(sides.size());
  long long n = 1;
  for (int s : sides) n *= s;
  if (n > 40000)
    throw std::runtime_error("torus_green_row: quadratic sweep refused");
  // spectral sum over frequency vectors; sine parts cancel by k -> -k
  std::vector<int> k(dims, 0);
  std::vector<double> rate(n), freq(size_t(n) * dims);
  for (long long idx = 0; idx < n; ++idx) {
    double mu = 0;
    for (int d = 0; d < dims; ++d) {
      freq[size_t(idx) * dims + d] =
          2.0 * std::numbers::pi * k[d] / sides[d];
      mu += std::cos(freq[size_t(idx) * dims + d]);
    }
    rate[idx] = 1.0 - mu / dims;
    for (int d = dims - 1; d >= 0; --d) {
      if (++k[d] < sides[d]) break;
      k[d] = 0;
    }
  }
  std::vector<double> row(n, 0.0);
  std::vector<int> y(dims, 0);
  for (long long vy = 0; vy < n; ++vy) {
    double s = 0;
    for (long long idx = 1; idx < n; ++idx) {
      double angle = 0;
      for (int d = 0; d < dims; ++d)
        angle += freq[size_t(idx) * dims + d] * y[d];
      s += std::cos(angle) / rate[idx];
    }
    row[vy] = s / double(n);
    for (int d = dims - 1; d >= 0; --d) {
      if (++y[d] < sides[d]) break;
      y[d] = 0;
    }
  }
  return row;
}

std::string cache_to_json(const SpectralCache& sc) {
  if (sc.n > 32)
    throw std::runtime_error("cache_to_json: export refused for n > 32");
  nlohmann::json j;
  j["n"] = sc.n;
  j["pi"] = std::vector<double>(sc.pi.data(), sc.pi.data() + sc.n);
  j["beta"] = std::vector<double>(sc.beta.data(), sc.beta.data() + sc.n);
  auto modes = nlohmann::json::array();
  for (int i = 0; i < sc.n; ++i) {
    std::vector<double> col(sc.f.col(i).data(), sc.f.col(i).data() + sc.n);
    modes.push_back(col);
  }
  j["f"] = modes;
  return j.dump(2);
}

}  // namespace coverlab
