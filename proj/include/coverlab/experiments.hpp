#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coverlab/graph.hpp"
#include "coverlab/walker.hpp"

namespace coverlab {

// Second periodic Bernoulli polynomial, normalized so psi(0) = 1/3,
// psi(1/2) = -1/6, integral zero: psi(u) = 2(u^2 - u + 1/6) on [0,1].
double psi(double u);

// Fourier evaluation (2/pi^2) sum_{k<=terms} cos(2 pi k u) / k^2.
double psi_series(double u, long long terms);

// Pair-correlation constant for the cycle component: the integral
// int_0^1 exp(psi(u/2) / x) du with x = theta * a. Strictly greater than 1
// (Jensen: the exponent integrates to zero) and decreasing in x.
double c2_integral(double theta_a);

// E_pi(T_o) together with where the number came from. The t(s) map gives the
// cover-window time scale t_s = E_pi(T_o) (log n + s).
struct TimeWindow {
  double epi_to = 0;
  double se = 0;  // zero for exact routes
  std::string provenance;
  double t(double s, int n) const;
};
TimeWindow window_exact(const Graph& g, int cap = 1500);  // dense spectral sum
TimeWindow window_torus(const std::vector<int>& sides);   // closed form
TimeWindow window_mc(const Graph& g, int trials, uint64_t seed, int workers);

// Fluctuation law of the cover time: y = tau_cov / E_pi(T_o) - log n is
// compared against the double-exponential law exp(-e^{-y}).
struct GumbelReport {
  int n = 0, trials = 0;
  double epi_to = 0;
  std::string provenance;
  double ks = 0, ks_p = 0;
  double mean_y = 0, var_y = 0;
  double incomplete_fraction = 0;
  std::vector<double> cdf_s{-1.0, 0.0, 1.0, 2.0};
  std::vector<double> cdf_at_s;  // empirical P(y <= s) at the points above
  std::vector<double> y;  // one normalized value per completed trial
};
GumbelReport gumbel_experiment(const Graph& g, const TimeWindow& w,
                               int trials, uint64_t seed, int workers);

// Normalized falling moments of the uncovered count at t_s; the k-th row
// holds mean of Z(Z-1)...(Z-k+1) e^{ks} with its standard error (limit 1).
struct MomentRow {
  int k = 0;
  double value = 0, se = 0;
};
struct SnapshotStats {
  double s = 0, t = 0;
  std::vector<MomentRow> moments;
  double p_empty = 0, p_empty_se = 0, predicted_empty = 0;  // exp(-e^{-s})
  std::vector<int64_t> pmf;  // histogram of Z, truncated tail in last bin
  double pred_pair = -1;     // finite-n pair prediction when available
};
struct PoissonReport {
  std::string graph;
  int n = 0, trials = 0;
  double epi_to = 0;
  std::string provenance;
  std::vector<SnapshotStats> at_s;
};
// green_row: optional exact Green row from the origin, used for the
// finite-n pair prediction sum; pass nullptr to skip.
PoissonReport uncovered_poisson(const Graph& g, const TimeWindow& w,
                                const std::vector<double>& s_values, int k_max,
                                int trials, uint64_t seed, int workers,
                                const std::vector<double>* green_row);

// Bernoulli structure of the uncovered set at t_s: aggregate per-vertex rate,
// id-bin uniformity, and the count of uncovered pairs at distance >= delta
// against e^{-2s}/n^2 per pair. sides nonempty switches pair distances to the
// torus closed form; otherwise BFS.
struct ProductLawReport {
  double s = 0, t = 0;
  int trials = 0, delta = 0;
  int64_t sep_pairs_possible = 0;
  double vertex_rate_norm = 0, vertex_rate_sigma = 0;  // E[Z] e^s / 1
  double chi2_bins_p = 0;  // uncovered-vertex ids vs uniform bins
  double pair_rate_norm = 0, pair_rate_sigma = 0;
  double mean_pairs_per_trial = 0;
  // walker-position uniformity, overall and conditioned on the most common
  // nonzero uncovered count (independence of X_t from Z); -1 = too sparse
  double pos_chi2_p = -1, pos_chi2_p_cond = -1;
  int64_t cond_k = 0, cond_trials = 0;
};
ProductLawReport product_law_checks(const Graph& g,
                                    const std::vector<int>& sides,
                                    const TimeWindow& w, double s, int delta,
                                    int trials, uint64_t seed, int workers);

// Last-k uniformity: rank the k survivors at tau_k by distance from the
// walker, then see which rank is covered next. Each rank should win with
// frequency 1/k. Pair distances of the survivors are compared against
// uniformly drawn pairs by a two-sample KS test when k = 2.
struct LastKReport {
  int k = 0, trials = 0;
  bool skipped = false;
  std::string skip_reason;
  std::vector<double> rank_freq, rank_se;
  double chi2_ranks_p = 0;
  double pair_ks = -1, pair_ks_p = -1;  // k = 2 only
};
LastKReport last_k_experiment(const Graph& g, int k, int trials,
                              uint64_t seed, int workers, double epi_hint);

// theta = lim (E_o L_o(T) - T/n): excess local time at the origin. The
// estimate subtracts the stationary drift; the half-horizon value is kept as
// a convergence diagnostic.
struct ThetaEstimate {
  double value = 0, se = 0;
  double horizon = 0;
  double doubling_delta = 0, doubling_sigma = 0;
  int trials = 0;
  bool converged = false;
};
ThetaEstimate theta_estimate(const CycleStrongProduct& g, double horizon,
                             int trials, uint64_t seed, int workers);

// Cycle (x) expander: exact E_pi(T_o) from the product eigenvalue
// factorization, theta from simulation, c2 from the integral, and the
// normalized uncovered moments at s and s+1 from one snapshot run.
struct CounterexampleReport {
  double a = 0;
  int m = 0, expander_n = 0, expander_degree = 0;
  int n = 0, degree = 0;
  double expander_gap = 0;
  int expander_attempts = 0;
  double epi_to = 0;
  ThetaEstimate theta;
  double c2 = 0, jensen_gap = 0;
  int trials = 0;
  std::vector<SnapshotStats> at_s;  // s and s+1
  std::vector<int64_t> pair_cycle_dist_hist;  // |dc| in [0, 10], overflow last
  double excess_sigma = 0;       // (m2 - 1) / se at the base s
  double consistency_sigma = 0;  // |m2 - c2| / se at the base s
};
CounterexampleReport counterexample_experiment(double a, int m, int degree,
                                               double s, int trials,
                                               uint64_t seed, int workers);

// Mean cover time against the pairwise-hitting ceiling
// max_xy E_x(T_y) * (1 + log n), with 10% slack.
struct MatthewsReport {
  int n = 0, trials = 0;
  double mean_cover = 0, se = 0;
  double t_hit_max = 0, bound = 0;
  bool pass = false;
};
MatthewsReport matthews_sanity(const Graph& g, int trials, uint64_t seed,
                               int workers);

}  // namespace coverlab
