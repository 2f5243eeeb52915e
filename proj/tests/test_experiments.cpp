#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "coverlab/experiments.hpp"
#include "coverlab/graph.hpp"
#include "coverlab/spectral.hpp"
#include "coverlab/walker.hpp"

using namespace coverlab;

namespace {

double simpson(double (*f)(double), double a, double b, int steps) {
  double h = (b - a) / steps, acc = f(a) + f(b);
  for (int i = 1; i < steps; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

double psi_sq(double u) { return psi(u) * psi(u); }

}  // namespace

TEST_CASE("green profile of the cycle: values, symmetry, zero mean") {
  CHECK(psi(0.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(psi(1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(psi(0.5) == doctest::Approx(-1.0 / 6.0).epsilon(1e-14));
  CHECK(psi(0.25) == doctest::Approx(-1.0 / 24.0).epsilon(1e-14));
  for (int i = 0; i <= 50; ++i) {
    double u = i / 50.0;
    CHECK(psi(u) == doctest::Approx(psi(1.0 - u)).epsilon(1e-14));
    CHECK(std::abs(psi(u)) <= 1.0 / 3.0 + 1e-14);
  }
  CHECK(std::abs(simpson(&psi, 0.0, 1.0, 100000)) < 1e-10);
  CHECK(simpson(&psi_sq, 0.0, 1.0, 100000) ==
        doctest::Approx(1.0 / 45.0).epsilon(1e-8));
}

TEST_CASE("fourier series converges to the closed form") {
  for (int i = 0; i <= 20; ++i) {
    double u = i / 20.0;
    CHECK(std::abs(psi_series(u, 200000) - psi(u)) < 2e-6);
  }
  for (double u : {0.0, 0.1, 0.37, 0.5, 0.93})
    CHECK(std::abs(psi_series(u, 1000000) - psi(u)) < 1e-6);
}

TEST_CASE("pair-correlation integral: above one, decreasing, vanishing") {
  double prev = c2_integral(0.3);
  CHECK(prev > 1.0);
  for (double x : {0.5, 1.0, 2.0, 4.0, 10.0}) {
    double c = c2_integral(x);
    CHECK(c > 1.0);
    CHECK(c < prev);
    prev = c;
  }
  // second-order shape: c2(x) - 1 ~ (1/90) x^{-2}
  CHECK(std::abs(c2_integral(10.0) - 1.0 - 1.0 / 9000.0) < 1e-6);
  CHECK(c2_integral(1000.0) - 1.0 < 3.4e-4);
  CHECK_THROWS_AS(c2_integral(0.0), std::invalid_argument);
}

TEST_CASE("time windows from the three routes agree") {
  auto we = window_exact(build_cycle(4));
  CHECK(we.epi_to == doctest::Approx(2.5).epsilon(1e-10));
  CHECK(we.se == 0.0);
  CHECK_FALSE(we.provenance.empty());
  CHECK(we.t(1.0, 4) ==
        doctest::Approx(2.5 * (std::log(4.0) + 1.0)).epsilon(1e-12));

  auto wt = window_torus({4, 5});
  CHECK(wt.epi_to ==
        doctest::Approx(window_exact(build_torus({4, 5})).epi_to)
            .epsilon(1e-8));

  auto wm = window_mc(build_cycle(64), 4000, 5, 1);
  CHECK(wm.se > 0);
  double exact = (64.0 * 64.0 - 1.0) / 6.0;
  CHECK(std::abs(wm.epi_to - exact) < 3.5 * wm.se);
}

TEST_CASE("cover fluctuation report is deterministic and well formed") {
  auto g = build_cycle(12);
  auto w = window_exact(g);
  auto r1 = gumbel_experiment(g, w, 300, 77, 1);
  auto r2 = gumbel_experiment(g, w, 300, 77, 2);
  CHECK(r1.n == 12);
  CHECK(r1.epi_to == doctest::Approx(143.0 / 6.0).epsilon(1e-10));
  CHECK(r1.ks >= 0.0);
  CHECK(r1.ks <= 1.0);
  CHECK(r1.ks_p >= 0.0);
  CHECK(r1.ks_p <= 1.0);
  CHECK(r1.incomplete_fraction >= 0.0);
  REQUIRE(r1.cdf_s.size() == 4);
  REQUIRE(r1.cdf_at_s.size() == 4);
  for (size_t i = 1; i < 4; ++i)
    CHECK(r1.cdf_at_s[i] >= r1.cdf_at_s[i - 1] - 1e-12);
  CHECK(r1.y.size() + size_t(r1.incomplete_fraction * 300 + 0.5) == 300);
  CHECK(r1.ks == r2.ks);
  CHECK(r1.mean_y == r2.mean_y);
  CHECK(r1.y == r2.y);
}

TEST_CASE("uncovered-count moments and tail probabilities") {
  auto g = build_torus({5, 5});
  auto w = window_torus({5, 5});
  auto row = torus_green_row({5, 5});
  auto rep = uncovered_poisson(g, w, {0.0, 1.0}, 3, 400, 13, 1, &row);
  REQUIRE(rep.at_s.size() == 2);
  CHECK(rep.at_s[0].s == 0.0);
  CHECK(rep.at_s[1].s == 1.0);
  for (const auto& snap : rep.at_s) {
    REQUIRE(snap.moments.size() == 3);
    for (const auto& m : snap.moments) {
      CHECK(m.value >= 0.0);
      CHECK(m.se >= 0.0);
    }
    CHECK(snap.p_empty >= 0.0);
    CHECK(snap.p_empty <= 1.0);
    CHECK(snap.predicted_empty ==
          doctest::Approx(std::exp(-std::exp(-snap.s))).epsilon(1e-12));
    int64_t total = 0;
    for (int64_t c : snap.pmf) total += c;
    CHECK(total == 400);
    CHECK(snap.pred_pair > 0.0);
  }
  CHECK_THROWS_AS(uncovered_poisson(g, w, {0.0}, 5, 10, 13, 1, nullptr),
                  std::invalid_argument);
  CHECK_THROWS_AS(uncovered_poisson(g, w, {0.0}, 0, 10, 13, 1, nullptr),
                  std::invalid_argument);
}

TEST_CASE("bernoulli structure of the uncovered set") {
  auto g = build_torus({4, 4});
  auto w = window_torus({4, 4});
  auto r1 = product_law_checks(g, {4, 4}, w, 0.0, 2, 500, 19, 1);
  auto r2 = product_law_checks(g, {4, 4}, w, 0.0, 2, 500, 19, 1);
  CHECK(r1.sep_pairs_possible > 0);
  CHECK(r1.vertex_rate_norm > 0.0);
  CHECK(r1.vertex_rate_sigma >= 0.0);
  CHECK(r1.pair_rate_sigma >= 0.0);
  CHECK(r1.trials == 500);
  CHECK(r1.delta == 2);
  CHECK(r1.vertex_rate_norm == r2.vertex_rate_norm);
  CHECK(r1.pair_rate_norm == r2.pair_rate_norm);
  if (r1.pos_chi2_p >= 0.0) CHECK(r1.pos_chi2_p <= 1.0);
}

TEST_CASE("last-two analysis and its degenerate skip") {
  auto rep = last_k_experiment(build_cycle(64), 2, 300, 29, 1, 0.0);
  REQUIRE_FALSE(rep.skipped);
  REQUIRE(rep.rank_freq.size() == 2);
  double sum = rep.rank_freq[0] + rep.rank_freq[1];
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.chi2_ranks_p >= 0.0);
  CHECK(rep.chi2_ranks_p <= 1.0);
  CHECK(rep.pair_ks >= 0.0);
  CHECK(rep.pair_ks <= 1.0);
  CHECK(rep.pair_ks_p >= 0.0);

  auto skip = last_k_experiment(build_complete(4), 2, 10, 29, 1, 0.0);
  CHECK(skip.skipped);
  CHECK_FALSE(skip.skip_reason.empty());

  CHECK_THROWS_AS(last_k_experiment(build_cycle(64), 1, 10, 29, 1, 0.0),
                  std::invalid_argument);
}

TEST_CASE("excess local time at the origin of a cycle-expander product") {
  auto k4 = build_complete(4);
  CycleStrongProduct p{30, &k4};
  auto est = theta_estimate(p, 900.0, 200, 37, 1);
  CHECK(est.value > 0.5);
  CHECK(est.value < 3.0);
  CHECK(est.se > 0.0);
  CHECK(est.horizon == 900.0);
  CHECK(est.trials == 200);
  CHECK_THROWS_AS(theta_estimate(p, 100.0, 10, 37, 1), std::invalid_argument);
}

TEST_CASE("cycle-expander pipeline smoke run") {
  auto rep = counterexample_experiment(0.6, 12, 4, 1.0, 250, 43, 1);
  CHECK(rep.expander_n == 18);  // round(0.6 * 12 * log 12), parity kept
  CHECK(rep.n == 216);
  CHECK(rep.degree == 14);
  CHECK(rep.expander_gap >= 0.08);
  CHECK(rep.epi_to > 0.0);
  CHECK(rep.theta.value > 0.5);
  CHECK(rep.c2 > 1.0);
  CHECK(rep.jensen_gap == doctest::Approx(rep.c2 - 1.0).epsilon(1e-14));
  REQUIRE(rep.at_s.size() == 2);
  CHECK(rep.at_s[0].s == doctest::Approx(1.0));
  CHECK(rep.at_s[1].s == doctest::Approx(2.0));
  REQUIRE(rep.pair_cycle_dist_hist.size() == 12);
  CHECK(std::isfinite(rep.excess_sigma));
  CHECK(std::isfinite(rep.consistency_sigma));
  CHECK_THROWS_AS(counterexample_experiment(0.0, 12, 4, 1.0, 10, 43, 1),
                  std::invalid_argument);
}

TEST_CASE("mean cover sits under the pairwise-hitting ceiling") {
  auto r1 = matthews_sanity(build_complete(4), 2000, 53, 1);
  CHECK(r1.pass);
  CHECK(r1.t_hit_max == doctest::Approx(3.0).epsilon(1e-9));
  CHECK(r1.bound ==
        doctest::Approx(1.1 * 3.0 * (1.0 + std::log(4.0))).epsilon(1e-9));
  CHECK(std::abs(r1.mean_cover - 5.5) < 3.5 * r1.se);

  auto r2 = matthews_sanity(build_cycle(8), 500, 54, 1);
  CHECK(r2.pass);
}
