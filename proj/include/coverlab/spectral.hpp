#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "coverlab/graph.hpp"

namespace coverlab {

inline constexpr int kSpectralCapDefault = 1500;

// Eigensystem of a reversible transition matrix P in the pi-weighted inner
// product. beta holds the continuous-time rates 1 - mu sorted ascending, so
// beta(0) == 0 and f.col(0) is the all-ones vector. Columns of f are
// pi-orthonormal: sum_x pi(x) f_i(x) f_j(x) = delta_ij.
struct SpectralCache {
  int n = 0;
  Eigen::VectorXd pi;
  Eigen::VectorXd beta;
  Eigen::MatrixXd f;
};

Eigen::VectorXd stationary(const Graph& g);          // uniform
Eigen::VectorXd stationary(const WeightedGraph& g);  // vertex_weight / total
Eigen::MatrixXd transition(const Graph& g);
Eigen::MatrixXd transition(const WeightedGraph& g);

// Checks detailed balance to 1e-12 and eigen residuals ||P f - mu f||_inf
// to 1e-10; throws on violation.
SpectralCache eigensystem(const Eigen::MatrixXd& P, const Eigen::VectorXd& pi);

// Dense solve; refuses n > cap (use the torus closed forms or sampling
// estimators beyond that).
SpectralCache spectral_cache(const Graph& g, int cap = kSpectralCapDefault);
SpectralCache spectral_cache(const WeightedGraph& g,
                             int cap = kSpectralCapDefault);

// p_t(x,y) = sum_i f_i(x) f_i(y) pi(y) exp(-beta_i t)
double heat_kernel(const SpectralCache& sc, double t, int x, int y);

// G(x,y) = sum_{i>=2} f_i(x) f_i(y) pi(y) / beta_i  (zero mode excluded)
double green(const SpectralCache& sc, int x, int y);

double relaxation_time(const SpectralCache& sc);  // 1 / beta(1)
double eigentime(const SpectralCache& sc);        // sum_{i>=2} 1 / beta_i

// E_pi(T_j) for every target j via the lazy-chain fundamental matrix,
// converted to the continuous-time rate-1 walk. Works for any reversible P.
Eigen::VectorXd hitting_times_pi(const Eigen::MatrixXd& P,
                                 const Eigen::VectorXd& pi);

// Pairwise continuous-time expectations M(x,y) = E_x(T_y).
Eigen::MatrixXd hitting_times_pairwise(const Eigen::MatrixXd& P,
                                       const Eigen::VectorXd& pi);

struct ConductanceRecord {
  double pi_s = 0;   // stationary mass of the set
  double q = 0;      // edge measure Q(S, S^c)
  double phi = 0;    // Q / pi_s
};
ConductanceRecord conductance(const Graph& g, const VertexSet& s);

// phi(u) = min{ Phi(S) : pi(S) <= u }. Exhaustive enumeration for n <= 18;
// breakpoints at u = k/n with the running minimum over sizes <= k.
struct ConductanceProfile {
  std::vector<double> u;    // ascending, u.back() ~ 1/2
  std::vector<double> phi;  // value on [u[i], u[i+1])
  bool exhaustive = false;
  double at(double x) const;  // evaluate, clamped to the covered range
};
ConductanceProfile conductance_profile(const Graph& g);

// Upper-bound-only profile from balls around vertex 0 plus random sets.
// Not a certified minimum; for reporting on large graphs.
ConductanceProfile conductance_profile_sampled(const Graph& g, uint64_t seed,
                                               int samples);

// Heat-kernel decay from the isoperimetric profile: with
// T = int_{4 pi(x)}^{4/eps} 8 / (u phi(u)^2) du  (valid for 8 <= eps <= n),
// the return-probability satisfies p_T(x,x) <= (1 + eps) pi(x).
struct EvolvingSetReport {
  double eps = 0, t = 0, p_t = 0, bound = 0;
  bool pass = false;
};
EvolvingSetReport evolving_set_check(const Graph& g, const SpectralCache& sc,
                                     const ConductanceProfile& profile,
                                     double eps);

// Fit of p_t(o,o) <= c * max(t^{-(m+1)/2}, 1/(R t^{m/2})) over t in
// (0, D^2]; returns the smallest admissible c and where it is attained.
struct HkFitReport {
  double c = 0, t_at_max = 0;
  int m = 0;
  double R = 0;
};
HkFitReport hk_bound_fit(const SpectralCache& sc, int m, double R, double d2);

// Unit conductance per edge; solves the grounded Laplacian system.
double effective_resistance(const Graph& g, int x, int y);

// Return-probability decay past the diameter scale, checked at
// t in {D^2, 2 D^2, 4 D^2}:
//   p_t(o,o) - 1/n <= exp(-(t - D^2)/(d D^2)) p_{D^2}(o,o).
struct PoincareReport {
  double t = 0, lhs = 0, rhs = 0;
  bool pass = false;
};
std::vector<PoincareReport> poincare_decay(const SpectralCache& sc, int diam,
                                           int degree);

// Exact closed forms for products of cycles (discrete tori); usable far
// beyond the dense cap. Rates are beta_k = 1 - (1/D) sum_d cos(2 pi k_d / L_d).
double torus_epi_to(const std::vector<int>& sides);
std::vector<double> torus_green_row(const std::vector<int>& sides);

// Serialized eigensystem for offline inspection; refuses n > 32.
std::string cache_to_json(const SpectralCache& sc);

}  // namespace coverlab
