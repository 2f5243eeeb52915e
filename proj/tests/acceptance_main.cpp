// Acceptance battery. One line per check, [PASS]/[FAIL] plus the measured
// numbers; lines tagged [statistical, exit-neutral] are Monte Carlo checks
// whose outcome never affects the exit status. Exit is 0 iff every exact
// (deterministic) check passed. All tolerances are pinned here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "coverlab/experiments.hpp"
#include "coverlab/graph.hpp"
#include "coverlab/hitting.hpp"
#include "coverlab/rng.hpp"
#include "coverlab/spectral.hpp"
#include "coverlab/stats.hpp"
#include "coverlab/walker.hpp"

using namespace coverlab;

namespace {

constexpr double kRelTol = 1e-8;     // exact identities, relative
constexpr double kAbsTol = 1e-8;     // exact identities, absolute
constexpr double kTightTol = 1e-12;  // closed forms that should be exact
constexpr double kGreenRelTol = 1e-6;
constexpr double kSoftSigma = 3.0;   // Monte Carlo moment checks
constexpr double kSoftP = 0.01;      // Monte Carlo p-value checks

int g_hard_failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

std::string fmt(double x, int prec = 4) {
  std::ostringstream o;
  o << std::setprecision(prec) << x;
  return o.str();
}

void line(int idx, bool pass, bool exact, const std::string& name,
          const std::string& detail) {
  if (exact && !pass) ++g_hard_failures;
  std::cout << (pass ? "[PASS] " : "[FAIL] ") << idx << ". " << name << ": "
            << detail << (exact ? "" : " [statistical, exit-neutral]") << "\n"
            << std::flush;
}

void context(const std::string& s) { std::cout << "         " << s << "\n"; }

// 20 (graph, target set) draws shared by the exact-identity checks. Families:
// cycles, 2d tori, complete graphs, strong products of two cycles; target
// sets of size 1..3. Draws whose survivor set splits into comparable pieces
// are rejected inside mixture() and redrawn.
struct PopEntry {
  Graph g;
  VertexSet a;
  HittingMixture mx;
};

std::vector<PopEntry> draw_population() {
  Rng rng(20250825, 7);
  std::vector<PopEntry> out;
  int attempts = 0;
  while (out.size() < 20 && attempts < 400) {
    ++attempts;
    int fam = int(rng.below(4));
    Graph g;
    switch (fam) {
      case 0: g = build_cycle(5 + int(rng.below(36))); break;
      case 1:
        g = build_torus({3 + int(rng.below(12)), 3 + int(rng.below(12))});
        break;
      case 2: g = build_complete(4 + int(rng.below(11))); break;
      default:
        g = strong_product(build_cycle(3 + int(rng.below(4))),
                           build_cycle(3 + int(rng.below(4))));
    }
    if (g.n > 200) continue;
    int k = 1 + int(rng.below(3));
    VertexSet a;
    while (int(a.size()) < k) {
      int v = int(rng.below(uint32_t(g.n)));
      if (std::find(a.begin(), a.end(), v) == a.end()) a.push_back(v);
    }
    std::sort(a.begin(), a.end());
    PopEntry e;
    try {
      e.mx = mixture(g, a);
    } catch (const std::exception&) {
      continue;
    }
    e.g = std::move(g);
    e.a = std::move(a);
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> t(points);
  for (int i = 0; i < points; ++i)
    t[i] = lo * std::pow(hi / lo, double(i) / (points - 1));
  return t;
}

int counterexample_trials() {
  if (const char* s = std::getenv("COVERLAB_CE_TRIALS")) {
    long v = std::strtol(s, nullptr, 10);
    if (v > 0) return int(v);
  }
  return 5000;
}

}  // namespace

int main() {
  auto wall0 = std::chrono::steady_clock::now();
  std::cout << std::setprecision(6);

  // ---- exact checks ------------------------------------------------------

  auto t0 = std::chrono::steady_clock::now();
  std::vector<PopEntry> pop;
  try {
    pop = draw_population();
  } catch (const std::exception& e) {
    line(1, false, true, "killed-chain weight identities",
         std::string("population draw threw: ") + e.what());
  }

  // 1. For each draw: sum of squared mixture weights equals the survivor
  //    mass, the leading weight equals 1 / ||alpha/pi||^2, and the weighted
  //    rate sum reproduces the collapsed-chain hitting expectation.
  if (!pop.empty()) {
    double r_mass = 0, r_lead = 0, r_epi = 0;
    for (const auto& e : pop) {
      double pi_b = double(e.g.n - int(e.a.size())) / e.g.n;
      double lead = 1.0 / e.mx.alpha_pi_l2;
      double e_set = hitting_expectation_set(e.g, e.a);
      r_mass = std::max(r_mass, std::abs(e.mx.c.squaredNorm() - pi_b) / pi_b);
      r_lead =
          std::max(r_lead, std::abs(e.mx.c(0) * e.mx.c(0) - lead) / lead);
      r_epi = std::max(r_epi, std::abs(e.mx.e_pi() - e_set) / e_set);
    }
    double el = seconds_since(t0);
    bool pass = pop.size() == 20 && r_mass < kRelTol && r_lead < kRelTol &&
                r_epi < kRelTol && el < 60.0;
    line(1, pass, true, "killed-chain weight identities",
         "20 draws; worst rel residuals: weight mass " + fmt(r_mass, 2) +
             ", leading weight " + fmt(r_lead, 2) + ", hitting expectation " +
             fmt(r_epi, 2) + "; " + fmt(el, 2) + " s (cap 60)");
  }

  // 2. Exponential-approximation sandwich on a 50-point log grid per draw
  //    (any violation beyond 1e-10 throws inside ab_bounds), plus the
  //    complete graph where every bound collapses to the exact tail.
  std::vector<SpectralCache> caches;
  std::vector<double> trels;
  {
    bool pass = true;
    std::string note;
    double worst_classic = 0, worst_refined = 0;
    try {
      for (const auto& e : pop) {
        caches.push_back(spectral_cache(e.g));
        trels.push_back(relaxation_time(caches.back()));
        auto grid = log_grid(trels.back() / 20.0, 8.0 * e.mx.e_alpha(), 50);
        auto rep = ab_bounds(e.mx, trels.back(), grid);
        worst_classic = std::max(worst_classic, rep.max_classic_violation);
        worst_refined = std::max(worst_refined, rep.max_refined_violation);
      }
      Graph k8 = build_complete(8);
      auto mx = mixture(k8, {0});
      auto sc = spectral_cache(k8);
      double trel = relaxation_time(sc);
      auto grid = log_grid(trel / 20.0, 8.0 * mx.e_alpha(), 50);
      auto rep = ab_bounds(mx, trel, grid);
      double dev = 0;
      for (size_t i = 0; i < rep.t.size(); ++i) {
        double closed = (7.0 / 8.0) * std::exp(-rep.t[i] / 7.0);
        dev = std::max({dev, std::abs(rep.classic_lo[i] - closed),
                        std::abs(rep.classic_hi[i] - closed),
                        std::abs(rep.refined_lo[i] - closed),
                        std::abs(rep.refined_hi[i] - closed)});
      }
      pass = dev <= kTightTol;
      note = "all 20 draws inside the sandwich (worst overshoot: classic " +
             fmt(worst_classic, 2) + ", refined " + fmt(worst_refined, 2) +
             "); complete graph n=8: all four bounds equal the exact tail to " +
             fmt(dev, 2);
    } catch (const std::exception& e) {
      pass = false;
      note = std::string("bound violated: ") + e.what();
    }
    line(2, pass, true, "tail sandwich by exponential approximations", note);
  }

  // 3. Separation identity at the median scale, and the median-time cap
  //    t_med <= log(2 + sqrt 2) t_rel (every secondary rate is >= 1/t_rel,
  //    so the squared-deficit sum reaches half its mass by then).
  {
    double worst_res = 0, worst_ratio = 0, worst_naive = 0;
    double cap_const = std::log(2.0 + std::sqrt(2.0));
    for (size_t i = 0; i < pop.size(); ++i) {
      const auto& e = pop[i];
      worst_res = std::max(worst_res, dsep_residual(e.mx));
      double tm = t_med(e.mx);
      worst_ratio = std::max(worst_ratio, tm / (cap_const * trels[i]));
      worst_naive = std::max(worst_naive, std::sqrt(2.0) * tm / trels[i]);
    }
    bool pass = worst_res < kAbsTol && worst_ratio <= 1.0 + 1e-9;
    line(3, pass, true, "separation identity and median-time cap",
         "worst identity residual " + fmt(worst_res, 2) +
             "; worst t_med / (log(2+sqrt2) t_rel) = " + fmt(worst_ratio, 4));
    context("sqrt2 t_med / t_rel reaches " + fmt(worst_naive, 4) +
            " on multi-target product draws, so the cap constant log(2+sqrt2)"
            " ~ 1.2279 cannot be tightened to 1/sqrt2 of itself");
  }

  // 4. Two-target hitting ratio against the Green-function ratio
  //    q_{x,y} = 2 / (1 + G(x,y)/G(x,x)) on transitive families.
  {
    Rng rng(20250825, 11);
    double worst = 0;
    int draws = 0;
    std::string note;
    bool pass = true;
    try {
      while (draws < 20) {
        int fam = int(rng.below(3));
        Graph g;
        switch (fam) {
          case 0: g = build_cycle(6 + int(rng.below(35))); break;
          case 1:
            g = build_torus({3 + int(rng.below(12)), 3 + int(rng.below(12))});
            break;
          default: g = build_complete(4 + int(rng.below(11)));
        }
        int x = int(rng.below(uint32_t(g.n)));
        int y = x;
        while (y == x) y = int(rng.below(uint32_t(g.n)));
        auto sc = spectral_cache(g);
        double pred = 2.0 / (1.0 + green(sc, x, y) / green(sc, x, x));
        double q = q_ratio(g, {std::min(x, y), std::max(x, y)});
        worst = std::max(worst, std::abs(q - pred));
        ++draws;
      }
      pass = worst < kAbsTol;
      note = "20 draws over cycles/tori/complete graphs; worst |q - 2/(1 + "
             "G(x,y)/G(x,x))| = " +
             fmt(worst, 2);
    } catch (const std::exception& e) {
      pass = false;
      note = std::string("threw: ") + e.what();
    }
    line(4, pass, true, "pair hitting ratio vs Green ratio", note);
  }

  // 5. Cycle Green row against the periodic Bernoulli closed form:
  //    G(0,d) + 1/(6m) = (m/2) psi(d/m) for every d, so the ratio is 1/2.
  {
    double worst = 0;
    for (int m : {16, 64, 256}) {
      auto sc = spectral_cache(build_cycle(m));
      for (int d : {1, m / 4, m / 2}) {
        double kappa =
            (green(sc, 0, d) + 1.0 / (6.0 * m)) / (m * psi(double(d) / m));
        worst = std::max(worst, std::abs(2.0 * kappa - 1.0));
      }
    }
    double psi0 = std::abs(psi(0.0) - 1.0 / 3.0);
    // composite Simpson; psi is piecewise quadratic so this is exact
    int panels = 2000;
    double h = 1.0 / panels, integral = 0;
    for (int i = 0; i < panels; ++i) {
      double a = i * h;
      integral += h / 6.0 * (psi(a) + 4.0 * psi(a + h / 2) + psi(a + h));
    }
    bool pass = worst < kGreenRelTol && psi0 < 1e-15 &&
                std::abs(integral) < 1e-10;
    line(5, pass, true, "cycle Green row closed form",
         "m in {16,64,256}, d in {1, m/4, m/2}: worst rel deviation " +
             fmt(worst, 2) + "; psi(0) off by " + fmt(psi0, 2) +
             "; |integral of psi| = " + fmt(std::abs(integral), 2));
  }

  // 6. Commute identity against effective resistance, the random-target
  //    identity, and the relaxation-time cap degree * diameter^2.
  {
    double r_comm = 0, r_eig = 0, r_target = 0, cap_margin = 0;
    for (size_t i = 0; i < pop.size(); ++i) {
      const auto& e = pop[i];
      int x = e.a[0];
      int y = e.a.size() >= 2 ? e.a[1] : int((e.a[0] + e.g.n / 2) % e.g.n);
      auto P = transition(e.g);
      auto pi = stationary(e.g);
      auto M = hitting_times_pairwise(P, pi);
      double commute = M(x, y) + M(y, x);
      double pred = double(e.g.n) * e.g.degree * effective_resistance(e.g, x, y);
      r_comm = std::max(r_comm, std::abs(commute - pred) / pred);
      double eig = eigentime(caches[i]);
      double epi = hitting_expectation_pi(e.g, 0);
      r_eig = std::max(r_eig, std::abs(eig - epi) / epi);
      double target = 0;
      for (int yy = 0; yy < e.g.n; ++yy) target += pi(yy) * M(0, yy);
      r_target = std::max(r_target, std::abs(target - eig) / eig);
      double d = diameter(e.g);
      cap_margin = std::max(cap_margin, trels[i] / (e.g.degree * d * d));
    }
    bool pass = r_comm < kRelTol && r_eig < kRelTol && r_target < kRelTol &&
                cap_margin <= 1.0 + 1e-9;
    line(6, pass, true, "commute, random-target, and relaxation identities",
         "worst rel residuals: commute vs resistance " + fmt(r_comm, 2) +
             ", eigentime vs E_pi(T_o) " + fmt(r_eig, 2) +
             ", random-target sum " + fmt(r_target, 2) +
             "; max t_rel / (degree diam^2) = " + fmt(cap_margin, 3));
  }

  // 7. Return-probability decay certified by the exhaustive conductance
  //    profile: p_T(o,o) <= (1 + eps) pi(o) with eps = 8 on every graph
  //    small enough to enumerate all sets.
  {
    std::vector<Graph> family;
    for (int m = 8; m <= 18; ++m) family.push_back(build_cycle(m));
    for (auto s : std::vector<std::vector<int>>{
             {3, 3}, {3, 4}, {3, 5}, {3, 6}, {4, 4}})
      family.push_back(build_torus(s));
    for (int n = 8; n <= 18; ++n) family.push_back(build_complete(n));
    family.push_back(strong_product(build_cycle(3), build_cycle(3)));
    family.push_back(strong_product(build_cycle(4), build_cycle(4)));
    bool pass = true;
    double worst = 0;
    std::string worst_label;
    for (const auto& g : family) {
      auto sc = spectral_cache(g);
      auto prof = conductance_profile(g);
      auto rep = evolving_set_check(g, sc, prof, 8.0);
      if (!prof.exhaustive || !rep.pass) pass = false;
      double ratio = rep.p_t / rep.bound;
      if (ratio > worst) {
        worst = ratio;
        worst_label = g.label;
      }
    }
    line(7, pass, true, "return-probability decay from conductance profiles",
         fmt(double(family.size()), 2) +
             " graphs, all exhaustive profiles; worst p_T / bound = " +
             fmt(worst, 4) + " (" + worst_label + ")");
  }

  // ---- statistical checks (never affect exit status) ---------------------

  Graph g12 = build_torus({12, 12, 12});
  TimeWindow w12 = window_torus({12, 12, 12});
  auto green12 = torus_green_row({12, 12, 12});

  // 8. Normalized cover times against the double-exponential law.
  {
    auto t8 = std::chrono::steady_clock::now();
    auto rep = gumbel_experiment(g12, w12, 2000, 101, 1);
    double el = seconds_since(t8);
    bool pass = rep.ks <= 0.08 && rep.incomplete_fraction == 0 && el < 600;
    line(8, pass, false, "cover-time fluctuation law on the 12^3 torus",
         "2000 trials: KS distance " + fmt(rep.ks, 3) + " (cap 0.08), p = " +
             fmt(rep.ks_p, 3) + "; mean y " + fmt(rep.mean_y, 3) +
             " (limit 0.5772), var y " + fmt(rep.var_y, 3) +
             " (limit 1.6449); " + fmt(el, 2) + " s (cap 600)");
  }

  // 9. Factorial moments of the uncovered count at the cover window. The
  //    limit of E[Z(Z-1)...(Z-k+1)] e^{ks} is 1; at n = 1728 the exact
  //    Green-row pair prediction sits 15-30% above it, so the k >= 2 rows
  //    test the limit against a finite-size truth and sit near 3 sigma.
  {
    auto rep =
        uncovered_poisson(g12, w12, {0.0, 1.0}, 3, 2000, 2025, 1, &green12);
    bool pass = true;
    std::ostringstream detail;
    for (const auto& snap : rep.at_s) {
      detail << "s=" << snap.s << ":";
      for (const auto& row : snap.moments) {
        double sig = row.se > 0 ? std::abs(row.value - 1.0) / row.se
                                : (row.value == 1.0 ? 0.0 : 1e9);
        if (sig >= kSoftSigma) pass = false;
        detail << " k" << row.k << " " << fmt(row.value, 3) << " ("
               << fmt(sig, 2) << "sig)";
      }
      double psig = snap.p_empty_se > 0
                        ? std::abs(snap.p_empty - snap.predicted_empty) /
                              snap.p_empty_se
                        : 0.0;
      if (psig >= kSoftSigma) pass = false;
      detail << ", empty " << fmt(snap.p_empty, 3) << " vs "
             << fmt(snap.predicted_empty, 3) << " (" << fmt(psig, 2)
             << "sig); ";
    }
    line(9, pass, false,
         "uncovered-count factorial moments on the 12^3 torus",
         detail.str() + "targets are the n->inf limit 1 and exp(-e^{-s})");
    context("finite-n pair predictions (Green row): k2 -> " +
            fmt(rep.at_s[0].pred_pair, 4) + " at s=0, " +
            fmt(rep.at_s[1].pred_pair, 4) +
            " at s=1; deviations above are the real finite-size pair "
            "clustering, not estimator noise");
  }

  // 10. Bernoulli product structure of the uncovered set: per-vertex rate,
  //     separated-pair rate, walker-position independence; then the last
  //     two uncovered vertices on the 32^3 torus against uniform pairs.
  {
    auto plr = product_law_checks(g12, {12, 12, 12}, w12, 1.0, 4, 5000, 77, 1);
    bool pass = std::abs(plr.vertex_rate_sigma) < kSoftSigma &&
                std::abs(plr.pair_rate_sigma) < kSoftSigma &&
                (plr.pos_chi2_p < 0 || plr.pos_chi2_p > kSoftP);
    std::ostringstream d;
    d << "12^3, s=1, 5000 trials: vertex rate " << fmt(plr.vertex_rate_norm, 4)
      << " (" << fmt(plr.vertex_rate_sigma, 2) << "sig), pairs at distance >= "
      << plr.delta << " rate " << fmt(plr.pair_rate_norm, 4) << " ("
      << fmt(plr.pair_rate_sigma, 2) << "sig, "
      << fmt(plr.mean_pairs_per_trial * plr.trials, 3)
      << " pair events), position uniformity p = " << fmt(plr.pos_chi2_p, 3);
    auto last = last_k_experiment(g12, 2, 1500, 31, 1, w12.epi_to);
    if (!last.skipped) {
      if (last.pair_ks_p <= kSoftP) pass = false;
      d << "; last-pair distance vs uniform pairs: KS " << fmt(last.pair_ks, 3)
        << ", p = " << fmt(last.pair_ks_p, 3) << ", next-covered rank split "
        << fmt(last.rank_freq[0], 3) << "/" << fmt(last.rank_freq[1], 3);
    } else {
      pass = false;
      d << "; last-pair check skipped: " << last.skip_reason;
    }
    line(10, pass, false, "product structure of the uncovered set", d.str());
    context("id-bin uniformity p = " + fmt(plr.chi2_bins_p, 3) +
            "; conditional position uniformity p = " +
            fmt(plr.pos_chi2_p_cond, 3) + " (conditioned on Z = " +
            std::to_string(plr.cond_k) + ", " +
            std::to_string(plr.cond_trials) + " trials)");
    // Joint-survival weights say how far the last pair sits from uniform:
    // a pair at distance d survives together with relative weight
    // (n/2)^{2 - q_d}, so nearby pairs stay heavily over-represented at any
    // size a workstation can reach (the same clustering the cycle-expander
    // family magnifies). The KS rejection above is that effect, not noise.
    {
      auto dist = bfs_distances(g12, 0);
      double wsum = 0, wnear = 0;
      int64_t base_near = 0;
      double ell = std::log(double(g12.n) / 2.0);
      for (int y = 1; y < g12.n; ++y) {
        double q = 2.0 / (1.0 + green12[y] / green12[0]);
        double w = std::exp((2.0 - q) * ell);
        wsum += w;
        if (dist[y] <= 4) {
          wnear += w;
          ++base_near;
        }
      }
      context("predicted fraction of last pairs within distance 4: " +
              fmt(wnear / wsum, 3) + " vs " +
              fmt(double(base_near) / (g12.n - 1), 3) +
              " for uniform pairs; the excess shrinks so slowly with n that "
              "the rejection persists at every size a workstation can cover");
    }
    context("certified through low-order statistics only; total-variation "
            "distance over all subsets is not reachable by simulation");
  }

  // 11. Cycle (x) expander pair correlation. Exact part: the quadrature
  //     constant c2 = int_0^1 exp(psi(u/2)/theta) du must exceed 1, which
  //     breaks the clean product limit on this family. Statistical part:
  //     the measured pair moment and the plain-torus control.
  {
    int trials = counterexample_trials();
    auto tce = std::chrono::steady_clock::now();
    bool hard_pass = false;
    std::ostringstream d;
    CounterexampleReport ce;
    try {
      ce = counterexample_experiment(1.0, 200, 4, 1.0, trials, 424243, 1);
      hard_pass = ce.c2 > 1.0 && ce.jensen_gap > 0;
      d << "n = " << ce.n << " (cycle 200 x expander " << ce.expander_n
        << ", gap " << fmt(ce.expander_gap, 3) << "): c2 = " << fmt(ce.c2, 6)
        << " > 1 by quadrature (theta = " << fmt(ce.theta.value, 4) << " +- "
        << fmt(ce.theta.se, 2) << ")";
    } catch (const std::exception& e) {
      d << "experiment threw: " << e.what();
    }
    line(11, hard_pass, true,
         "cycle-expander pair correlation exceeds the product limit",
        d.str());
    if (hard_pass) {
      const auto& m2 = ce.at_s.at(0).moments.at(1);
      int64_t events = 0;
      for (int64_t h : ce.pair_cycle_dist_hist) events += h;
      std::ostringstream s1;
      s1 << "measured pair moment at s=1: " << fmt(m2.value, 4) << " +- "
         << fmt(m2.se, 3) << " over " << trials << " trials (" << events
         << " pair events, " << fmt(seconds_since(tce), 3)
         << " s); excess over 1: " << fmt(ce.excess_sigma, 2)
         << " sigma (target >= 2)";
      if (ce.excess_sigma < 2.0)
        s1 << "; the quadrature excess c2 - 1 = " << fmt(ce.c2 - 1.0, 2)
           << " sits below the Monte Carlo resolution here (a 2-sigma read "
              "needs ~1e6 trials)";
      context(s1.str() + " [statistical, exit-neutral]");
      context("consistency with c2: " + fmt(ce.consistency_sigma, 2) +
              " sigma (cap 3) [statistical, exit-neutral]");
      auto w24 = window_torus({24, 24, 24});
      auto green24 = torus_green_row({24, 24, 24});
      auto ctrl = uncovered_poisson(build_torus({24, 24, 24}), w24, {1.0}, 2,
                                    3000, 13, 1, &green24);
      const auto& ck = ctrl.at_s.at(0).moments.at(1);
      double csig = ck.se > 0 ? std::abs(ck.value - 1.0) / ck.se : 0.0;
      context("24^3 torus control, same estimator: " + fmt(ck.value, 4) +
              " +- " + fmt(ck.se, 3) + " (" + fmt(csig, 2) +
              " sigma from 1, cap 3; finite-n prediction " +
              fmt(ctrl.at_s.at(0).pred_pair, 4) + ") " +
              (csig < kSoftSigma ? "[ok]" : "[off]") +
              " [statistical, exit-neutral]");
    }
  }

  double wall = seconds_since(wall0);
  std::cout << (g_hard_failures == 0 ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL")
            << ": " << g_hard_failures
            << " exact-check failures; statistical lines above are "
               "report-only. total "
            << fmt(wall, 4) << " s\n";
  return g_hard_failures == 0 ? 0 : 1;
}
