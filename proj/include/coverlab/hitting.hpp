#pragma once

#include <vector>

#include <Eigen/Dense>

#include "coverlab/graph.hpp"

namespace coverlab {

// E_pi(T_j) for the continuous-time rate-1 walk.
double hitting_expectation_pi(const Graph& g, int j);

// Collapse the target set into one vertex: edges between survivors keep
// weight 1, parallel edges into the merged vertex accumulate, and each edge
// interior to the set becomes a loop of weight 2 (counted once in the vertex
// weight, so the merged vertex keeps total weight |a| * degree and the
// stationary mass of the set is preserved).
WeightedGraph collapse(const Graph& g, const VertexSet& a);

// E_pi(T_A) through the collapsed chain. Exact: the walk restricted to the
// complement is unchanged by the collapse.
double hitting_expectation_set(const Graph& g, const VertexSet& a);

// q_A = E_pi(T_o) / E_pi(T_A); the graph must be vertex-transitive for the
// numerator to be independent of o.
double q_ratio(const Graph& g, const VertexSet& a);

// Spectral data of the chain killed on a. Rates lambda are 1 - gamma sorted
// ascending; c_i = <1_B, f_i>_pi with signs flipped so c_i >= 0; rows of fB
// follow b_ids. If removing a splits the graph and the second-largest piece
// holds more than a quarter of the survivors, the decomposition is refused
// as ambiguous.
struct HittingMixture {
  int n = 0;
  VertexSet a;
  std::vector<int> b_ids;
  std::vector<int> b_index;  // size n, -1 on a
  Eigen::VectorXd lambda;
  Eigen::VectorXd c;
  Eigen::MatrixXd fB;
  Eigen::VectorXd alpha;  // quasi-stationary law, zero on a
  double lambda1 = 0;
  double alpha_pi_l2 = 0;  // ||alpha/pi||^2 in L^2(pi)
  double pi_b = 0;         // sum of c_i^2
  double p = 0;            // secondary mass sum_{i>=2} c_i^2

  double tail(double t) const;            // P_pi(T_A > t)
  double tail_from(int x, double t) const;  // P_x(T_A > t), x not in a
  double e_pi() const;                    // E_pi(T_A) = sum c_i^2 / lambda_i
  double e_alpha() const;                 // 1 / lambda_1
};

HittingMixture mixture(const Graph& g, const VertexSet& a);

struct QuasiStationary {
  Eigen::VectorXd alpha;
  double lambda1 = 0;
  double e_alpha = 0;
  double alpha_pi_l2 = 0;
};
QuasiStationary quasi_stationary(const Graph& g, const VertexSet& a);

// Exponential-approximation bounds for P_pi(T_A > t), checked on a grid.
// Violations beyond 1e-10 throw, naming the bound. t_rel belongs to the
// full (unkilled) chain.
struct ABReport {
  std::vector<double> t, p_pi, classic_lo, classic_hi, refined_lo, refined_hi;
  double e_pi = 0, e_alpha = 0, alpha_pi_l2 = 0, p = 0, t_rel = 0;
  double max_classic_violation = 0, max_refined_violation = 0;
  double integrated_gap = 0;  // E_pi - E_alpha / ||alpha/pi||^2, in [0, p*t_rel]
};
ABReport ab_bounds(const HittingMixture& mx, double t_rel,
                   const std::vector<double>& t_grid);

// Root of sum_{i>=2} c_i^2 (1 - e^{-lambda_i t})^2 = p / 2, by bisection to
// relative tolerance 1e-12. Returns 0 when p = 0 (pure exponential tail).
double t_med(const HittingMixture& mx);

// Residual of the separation identity at t_med:
//   p = 2 sum_x pi(x) P_x(T_A <= t_med)^2
//       - 2 (1/||alpha/pi||^2)(1 - e^{-lambda_1 t_med})^2,
// with the middle term evaluated pointwise over the survivors.
double dsep_residual(const HittingMixture& mx);

// Diagnostic for the transitive-graph improvement: reports the ratio of the
// secondary mass p to the shape bracket obtained from (n, degree, |a|,
// diameter, mindist); only positivity and finiteness are asserted.
struct VtBoundReport {
  int m = 0;
  double R = 0, bracket = 0, lhs = 0, implied_c = 0;
};
// m = 0 / R = 0 derive the shape exponent and scale from the graph
// (R = mindist(a), or the diameter for singletons; m from n ~ D^m R).
VtBoundReport vt_bound_check(const Graph& g, const VertexSet& a, int m = 0,
                             double R = 0);

// P(T_A = T_x) for each x in a, by harmonic extension from the start law.
Eigen::VectorXd first_hit_probs(const Graph& g, const Eigen::VectorXd& start,
                                const VertexSet& a);
// Stationary (uniform) start.
Eigen::VectorXd first_hit_probs(const Graph& g, const VertexSet& a);

}  // namespace coverlab
