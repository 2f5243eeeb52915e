#include "coverlab/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "coverlab/hitting.hpp"
#include "coverlab/rng.hpp"
#include "coverlab/spectral.hpp"
#include "coverlab/stats.hpp"

namespace coverlab {

double psi(double u) {
  u -= std::floor(u);
  return 2.0 * (u * u - u + 1.0 / 6.0);
}

double psi_series(double u, long long terms) {
  double s = 0;
  for (long long k = terms; k >= 1; --k)  // ascending magnitude
    s += std::cos(2.0 * std::numbers::pi * double(k) * u) /
         (double(k) * double(k));
  return s * 2.0 / (std::numbers::pi * std::numbers::pi);
}

double c2_integral(double theta_a) {
  if (theta_a <= 0)
    throw std::invalid_argument("c2_integral: scale must be positive");
  auto f = [theta_a](double u) { return std::exp(psi(0.5 * u) / theta_a); };
  double err = 0;
  double v = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, 0.0, 1.0, 12, 1e-10, &err);
  return v;
}

double TimeWindow::t(double s, int n) const {
  return epi_to * (std::log(double(n)) + s);
}

TimeWindow window_exact(const Graph& g, int cap) {
  if (g.n > cap)
    throw std::runtime_error(
        "window_exact: graph exceeds the dense cap; use the torus closed "
        "form or the sampling estimator");
  TimeWindow w;
  w.epi_to = hitting_expectation_pi(g, 0);
  w.provenance = "exact-fundamental-matrix";
  return w;
}

TimeWindow window_torus(const std::vector<int>& sides) {
  TimeWindow w;
  w.epi_to = torus_epi_to(sides);
  w.provenance = "exact-torus-closed-form";
  return w;
}

TimeWindow window_mc(const Graph& g, int trials, uint64_t seed, int workers) {
  if (trials < 2000)
    throw std::invalid_argument(
        "window_mc: at least 2000 trials required for a usable scale");
  auto hits = hitting_first(g, -1, {0}, trials, seed, workers);
  MeanVar mv;
  for (const auto& h : hits) mv.add(h.time);
  TimeWindow w;
  w.epi_to = mv.mean();
  w.se = mv.stderr_mean();
  w.provenance = "mc-hitting-from-uniform";
  return w;
}

GumbelReport gumbel_experiment(const Graph& g, const TimeWindow& w,
                               int trials, uint64_t seed, int workers) {
  WalkConfig cfg;
  cfg.start_vertex = 0;
  cfg.until_cover = true;
  cfg.master_seed = seed;
  cfg.epi_to_hint = w.epi_to;
  auto samples = run_trials(g, cfg, trials, workers);

  GumbelReport rep;
  rep.n = g.n;
  rep.trials = trials;
  rep.epi_to = w.epi_to;
  rep.provenance = w.provenance;
  const double ln_n = std::log(double(g.n));
  MeanVar mv;
  int incomplete = 0;
  for (const auto& s : samples) {
    if (!s.complete) {
      ++incomplete;
      continue;
    }
    double y = s.cover_time / w.epi_to - ln_n;
    rep.y.push_back(y);
    mv.add(y);
  }
  rep.incomplete_fraction = double(incomplete) / trials;
  rep.mean_y = mv.mean();
  rep.var_y = mv.variance();
  rep.ks = ks_statistic(rep.y,
                        [](double y) { return std::exp(-std::exp(-y)); });
  rep.ks_p = ks_p_value(rep.ks, rep.y.size());
  for (double sv : rep.cdf_s) {
    int64_t below = 0;
    for (double y : rep.y)
      if (y <= sv) ++below;
    rep.cdf_at_s.push_back(rep.y.empty() ? 0.0
                                         : double(below) / rep.y.size());
  }
  return rep;
}

namespace {

SnapshotStats stats_for_snapshot(const std::vector<CoverSample>& samples,
                                 size_t idx, double s, double t, int k_max) {
  SnapshotStats st;
  st.s = s;
  st.t = t;
  std::vector<MeanVar> mom(k_max);
  int64_t empty = 0;
  st.pmf.assign(13, 0);
  for (const auto& smp : samples) {
    double z = double(smp.snapshots[idx].z);
    for (int k = 1; k <= k_max; ++k)
      mom[k - 1].add(falling_factorial(z, k) * std::exp(k * s));
    if (smp.snapshots[idx].z == 0) ++empty;
    ++st.pmf[std::min<size_t>(size_t(smp.snapshots[idx].z), st.pmf.size() - 1)];
  }
  for (int k = 1; k <= k_max; ++k)
    st.moments.push_back({k, mom[k - 1].mean(), mom[k - 1].stderr_mean()});
  double pe = double(empty) / samples.size();
  st.p_empty = pe;
  st.p_empty_se = std::sqrt(std::max(pe * (1 - pe), 1e-12) / samples.size());
  st.predicted_empty = std::exp(-std::exp(-s));
  return st;
}

}  // namespace

PoissonReport uncovered_poisson(const Graph& g, const TimeWindow& w,
                                const std::vector<double>& s_values, int k_max,
                                int trials, uint64_t seed, int workers,
                                const std::vector<double>* green_row) {
  if (s_values.empty())
    throw std::invalid_argument("uncovered_poisson: no s values");
  if (k_max < 1 || k_max > 4)
    throw std::invalid_argument("uncovered_poisson: k_max must be in [1, 4]");
  for (size_t i = 1; i < s_values.size(); ++i)
    if (s_values[i] <= s_values[i - 1])
      throw std::invalid_argument(
          "uncovered_poisson: s values must be strictly increasing");

  WalkConfig cfg;
  cfg.start_vertex = 0;
  cfg.master_seed = seed;
  cfg.epi_to_hint = w.epi_to;
  for (double s : s_values) cfg.snapshot_times.push_back(w.t(s, g.n));
  auto samples = run_trials(g, cfg, trials, workers);

  PoissonReport rep;
  rep.graph = g.label;
  rep.n = g.n;
  rep.trials = trials;
  rep.epi_to = w.epi_to;
  rep.provenance = w.provenance;
  for (size_t i = 0; i < s_values.size(); ++i) {
    auto st = stats_for_snapshot(samples, i, s_values[i],
                                 cfg.snapshot_times[i], k_max);
    if (green_row) {
      // finite-n pair sum: each ordered pair (o, y) survives with rate ratio
      // q = 2 / (1 + G(o,y) / G(o,o)), so
      // E[Z(Z-1)] e^{2s} ~ e^{2s} n sum_y exp(-q (log n + s)).
      const auto& row = *green_row;
      double lognps = std::log(double(g.n)) + s_values[i];
      double sum = 0;
      for (int y = 1; y < g.n; ++y) {
        double q = 2.0 / (1.0 + row[y] / row[0]);
        sum += std::exp(-q * lognps);
      }
      st.pred_pair = std::exp(2.0 * s_values[i]) * double(g.n) * sum;
    }
    rep.at_s.push_back(std::move(st));
  }
  return rep;
}

namespace {

int torus_distance(const std::vector<int>& sides, int u, int v) {
  int d = 0;
  for (int i = int(sides.size()) - 1; i >= 0; --i) {
    int cu = u % sides[i], cv = v % sides[i];
    u /= sides[i];
    v /= sides[i];
    int delta = std::abs(cu - cv);
    d += std::min(delta, sides[i] - delta);
  }
  return d;
}

}  // namespace

ProductLawReport product_law_checks(const Graph& g,
                                    const std::vector<int>& sides,
                                    const TimeWindow& w, double s, int delta,
                                    int trials, uint64_t seed, int workers) {
  if (!sides.empty()) {
    long long n = 1;
    for (int x : sides) n *= x;
    if (n != g.n)
      throw std::invalid_argument("product_law_checks: sides do not match n");
  }
  ProductLawReport rep;
  rep.s = s;
  rep.t = w.t(s, g.n);
  rep.trials = trials;
  rep.delta = delta;

  WalkConfig cfg;
  cfg.start_vertex = 0;
  cfg.master_seed = seed;
  cfg.epi_to_hint = w.epi_to;
  cfg.snapshot_times = {rep.t};
  cfg.record_uncovered = true;
  cfg.record_position = true;
  auto samples = run_trials(g, cfg, trials, workers);

  // pairs at distance >= delta, counted once per unordered pair
  auto dist_ge_delta = [&](int x, int y) {
    if (!sides.empty()) return torus_distance(sides, x, y) >= delta;
    auto d = bfs_distances(g, x);
    return d[y] >= delta;
  };
  {
    auto d0 = bfs_distances(g, 0);
    int64_t near = 0;
    for (int v = 0; v < g.n; ++v)
      if (d0[v] < delta) ++near;  // includes the origin
    rep.sep_pairs_possible = int64_t(g.n) * (g.n - near) / 2;
  }

  std::vector<int64_t> vertex_counts(g.n, 0);
  MeanVar z_norm, pairs_mv;
  for (const auto& smp : samples) {
    const auto& u = smp.snapshots[0].uncovered;
    for (int32_t x : u) ++vertex_counts[x];
    z_norm.add(double(u.size()) * std::exp(s));
    int64_t w_pairs = 0;
    for (size_t i = 0; i < u.size(); ++i)
      for (size_t j = i + 1; j < u.size(); ++j)
        if (dist_ge_delta(u[i], u[j])) ++w_pairs;
    pairs_mv.add(double(w_pairs));
  }

  rep.vertex_rate_norm = z_norm.mean();
  rep.vertex_rate_sigma =
      std::abs(z_norm.mean() - 1.0) / std::max(z_norm.stderr_mean(), 1e-300);

  const int bins = 16;
  std::vector<double> obs(bins, 0);
  for (int v = 0; v < g.n; ++v)
    obs[size_t(v) * bins / g.n] += double(vertex_counts[v]);
  double total = std::accumulate(obs.begin(), obs.end(), 0.0);
  double chi2 = 0;
  for (int b = 0; b < bins; ++b) {
    double e = total / bins;
    chi2 += (obs[b] - e) * (obs[b] - e) / e;
  }
  rep.chi2_bins_p = chi_square_p(chi2, bins - 1);

  double per_pair = std::exp(-2.0 * s) / (double(g.n) * double(g.n));
  double expected = double(rep.sep_pairs_possible) * per_pair;
  rep.mean_pairs_per_trial = pairs_mv.mean();
  rep.pair_rate_norm = pairs_mv.mean() / expected;
  rep.pair_rate_sigma = std::abs(pairs_mv.mean() - expected) /
                        std::max(pairs_mv.stderr_mean(), 1e-300);

  // independence of the walker position from the uncovered count: the
  // id-binned position histogram should look uniform both over all trials
  // and restricted to the most common nonzero Z value
  {
    std::map<int64_t, int64_t> z_freq;
    for (const auto& smp : samples)
      if (smp.snapshots[0].z > 0) ++z_freq[smp.snapshots[0].z];
    int64_t best = 0;
    for (const auto& [z, c] : z_freq)
      if (c > best) {
        best = c;
        rep.cond_k = z;
      }
    auto chi2_uniform = [&](const std::vector<double>& h) {
      double tot = std::accumulate(h.begin(), h.end(), 0.0);
      if (tot < double(2 * bins)) return -1.0;  // too sparse to test
      double c2 = 0;
      for (double o : h) c2 += (o - tot / bins) * (o - tot / bins) /
                               (tot / bins);
      return chi_square_p(c2, bins - 1);
    };
    std::vector<double> pos_all(bins, 0), pos_cond(bins, 0);
    for (const auto& smp : samples) {
      size_t b = size_t(smp.snapshots[0].position) * bins / g.n;
      pos_all[b] += 1.0;
      if (smp.snapshots[0].z == rep.cond_k) {
        pos_cond[b] += 1.0;
        ++rep.cond_trials;
      }
    }
    rep.pos_chi2_p = chi2_uniform(pos_all);
    rep.pos_chi2_p_cond = chi2_uniform(pos_cond);
  }
  return rep;
}

LastKReport last_k_experiment(const Graph& g, int k, int trials,
                              uint64_t seed, int workers, double epi_hint) {
  LastKReport rep;
  rep.k = k;
  rep.trials = trials;
  if (k < 2)
    throw std::invalid_argument("last_k_experiment: need k >= 2");
  if (g.n < 8 * k) {
    rep.skipped = true;
    std::ostringstream why;
    why << "n = " << g.n << " is too small for k = " << k
        << ": the last-" << k << " set is not in the sparse regime";
    rep.skip_reason = why.str();
    return rep;
  }

  WalkConfig cfg;
  cfg.start_vertex = 0;
  cfg.master_seed = seed;
  cfg.k_targets = {k, k - 1};
  cfg.epi_to_hint = epi_hint;
  auto samples = run_trials(g, cfg, trials, workers);

  std::vector<double> rank_hits(k, 0.0);
  std::vector<double> pair_dists, base_dists;
  Rng base_rng(seed ^ 0xBA5Eull, 7);
  for (const auto& smp : samples) {
    const auto& at_k = smp.tau_k.at(0);
    const auto& at_k1 = smp.tau_k.at(1);
    // next covered vertex = first hit of the tau_k survivor set
    int hit = -1;
    for (int32_t x : at_k.uncovered)
      if (!std::binary_search(at_k1.uncovered.begin(),
                              at_k1.uncovered.end(), x))
        hit = x;
    auto dist = bfs_distances(g, at_k.position);
    std::vector<std::pair<int, int>> order;  // (distance, vertex)
    for (int32_t x : at_k.uncovered) order.push_back({dist[x], int(x)});
    std::sort(order.begin(), order.end());
    size_t lo = 0;
    while (lo < order.size()) {
      size_t hi = lo;
      bool contains_hit = false;
      while (hi < order.size() && order[hi].first == order[lo].first) {
        if (order[hi].second == hit) contains_hit = true;
        ++hi;
      }
      if (contains_hit) {  // split credit across tied ranks
        for (size_t r = lo; r < hi; ++r)
          rank_hits[r] += 1.0 / double(hi - lo);
        break;
      }
      lo = hi;
    }
    if (k == 2) {
      int a = at_k.uncovered[0], b = at_k.uncovered[1];
      auto da = bfs_distances(g, a);
      pair_dists.push_back(double(da[b]));
      int x = int(base_rng.below(uint32_t(g.n)));
      int y = x;
      while (y == x) y = int(base_rng.below(uint32_t(g.n)));
      auto dx = bfs_distances(g, x);
      base_dists.push_back(double(dx[y]));
    }
  }
  double chi2 = 0;
  for (int r = 0; r < k; ++r) {
    double f = rank_hits[r] / trials;
    rep.rank_freq.push_back(f);
    rep.rank_se.push_back(std::sqrt(f * (1 - f) / trials));
    double e = double(trials) / k;
    chi2 += (rank_hits[r] - e) * (rank_hits[r] - e) / e;
  }
  rep.chi2_ranks_p = chi_square_p(chi2, k - 1);
  if (k == 2)
    rep.pair_ks = ks_two_sample(pair_dists, base_dists, &rep.pair_ks_p);
  return rep;
}

ThetaEstimate theta_estimate(const CycleStrongProduct& g, double horizon,
                             int trials, uint64_t seed, int workers) {
  double m2 = double(g.m) * g.m;
  if (horizon < m2)
    throw std::invalid_argument(
        "theta_estimate: horizon below the cycle mixing scale m^2");
  auto full = local_time(g, 0, 0, horizon, trials, seed + 1, workers);
  auto half = local_time(g, 0, 0, horizon / 2, trials, seed + 2, workers);
  ThetaEstimate est;
  est.horizon = horizon;
  est.trials = trials;
  est.value = full.mean - horizon / g.n();
  est.se = full.se;
  double half_value = half.mean - horizon / 2 / g.n();
  est.doubling_delta = est.value - half_value;
  est.doubling_sigma = std::sqrt(full.se * full.se + half.se * half.se);
  est.converged = std::abs(est.doubling_delta) <= 2.0 * est.doubling_sigma;
  return est;
}

CounterexampleReport counterexample_experiment(double a, int m, int degree,
                                               double s, int trials,
                                               uint64_t seed, int workers) {
  if (a <= 0 || m < 3)
    throw std::invalid_argument("counterexample: need a > 0 and m >= 3");
  CounterexampleReport rep;
  rep.a = a;
  rep.m = m;
  rep.expander_degree = degree;
  rep.trials = trials;

  int nf = int(std::lround(a * m * std::log(double(m))));
  if ((long long)nf * degree % 2 != 0) ++nf;
  auto ex = build_expander(nf, degree, seed ^ 0x5EEDull, 0.08);
  rep.expander_n = nf;
  rep.expander_gap = ex.gap;
  rep.expander_attempts = ex.attempts;

  CycleStrongProduct prod{m, &ex.graph};
  rep.n = prod.n();
  rep.degree = prod.degree();

  // exact stationary hitting scale from the factorized spectrum: product
  // transition eigenvalues are ((lam_cycle + 1)(lam_factor + 1) - 1) / deg
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(nf, nf);
  for (int v = 0; v < nf; ++v)
    for (int32_t u : ex.graph.neighbors(v)) A(v, u) = 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
  double epi = 0;
  for (int j = 0; j < m; ++j) {
    double lc = 2.0 * std::cos(2.0 * std::numbers::pi * j / m);
    for (int kf = 0; kf < nf; ++kf) {
      if (j == 0 && kf == nf - 1) continue;  // top factor mode = zero mode
      double mu = ((lc + 1.0) * (es.eigenvalues()(kf) + 1.0) - 1.0) /
                  rep.degree;
      epi += 1.0 / (1.0 - mu);
    }
  }
  rep.epi_to = epi;

  int theta_trials = std::clamp(trials / 2, 2000, 4000);
  rep.theta = theta_estimate(prod, double(m) * m, theta_trials,
                             seed ^ 0x7E7Aull, workers);
  rep.c2 = c2_integral(rep.theta.value * a);
  rep.jensen_gap = rep.c2 - 1.0;

  TimeWindow w;
  w.epi_to = epi;
  w.provenance = "exact-product-factorization";
  WalkConfig cfg;
  cfg.start_vertex = 0;
  cfg.master_seed = seed;
  cfg.epi_to_hint = epi;
  cfg.record_uncovered = true;
  cfg.snapshot_times = {w.t(s, rep.n), w.t(s + 1.0, rep.n)};
  auto samples = run_trials(prod, cfg, trials, workers);

  rep.at_s.push_back(
      stats_for_snapshot(samples, 0, s, cfg.snapshot_times[0], 3));
  rep.at_s.push_back(
      stats_for_snapshot(samples, 1, s + 1.0, cfg.snapshot_times[1], 3));

  rep.pair_cycle_dist_hist.assign(12, 0);
  for (const auto& smp : samples) {
    const auto& u = smp.snapshots[0].uncovered;
    for (size_t i = 0; i < u.size(); ++i)
      for (size_t j = i + 1; j < u.size(); ++j) {
        int ci = int(u[i]) / nf, cj = int(u[j]) / nf;
        int dc = std::abs(ci - cj);
        dc = std::min(dc, m - dc);
        ++rep.pair_cycle_dist_hist[std::min<size_t>(
            size_t(dc), rep.pair_cycle_dist_hist.size() - 1)];
      }
  }

  const auto& m2row = rep.at_s[0].moments.at(1);
  rep.excess_sigma = (m2row.value - 1.0) / std::max(m2row.se, 1e-300);
  rep.consistency_sigma =
      std::abs(m2row.value - rep.c2) / std::max(m2row.se, 1e-300);
  return rep;
}

MatthewsReport matthews_sanity(const Graph& g, int trials, uint64_t seed,
                               int workers) {
  MatthewsReport rep;
  rep.n = g.n;
  rep.trials = trials;
  auto M = hitting_times_pairwise(transition(g), stationary(g));
  for (int x = 0; x < g.n; ++x)
    for (int y = 0; y < g.n; ++y) rep.t_hit_max = std::max(rep.t_hit_max, M(x, y));
  rep.bound = 1.1 * rep.t_hit_max * (1.0 + std::log(double(g.n)));

  WalkConfig cfg;
  cfg.start_vertex = 0;
  cfg.until_cover = true;
  cfg.master_seed = seed;
  cfg.epi_to_hint = rep.t_hit_max;
  auto samples = run_trials(g, cfg, trials, workers);
  MeanVar mv;
  for (const auto& smp : samples)
    if (smp.complete) mv.add(smp.cover_time);
  rep.mean_cover = mv.mean();
  rep.se = mv.stderr_mean();
  rep.pass = rep.mean_cover <= rep.bound;
  return rep;
}

}  // namespace coverlab
