#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <boost/version.hpp>
#include <json.hpp>

#include "coverlab/cli_config.hpp"
#include "coverlab/experiments.hpp"
#include "coverlab/hitting.hpp"
#include "coverlab/spectral.hpp"
#include "coverlab/stats.hpp"
#include "coverlab/walker.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace coverlab;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  f << text;
}

json config_echo(const RunConfig& rc) {
  return json{{"command", rc.command},
              {"graph", rc.graph},
              {"task", rc.task},
              {"trials", rc.trials},
              {"seed", rc.seed},
              {"workers", rc.workers},
              {"out", rc.out},
              {"spectral_cap", rc.spectral_cap},
              {"emit_plotdata", rc.emit_plotdata},
              {"a", rc.a},
              {"m", rc.m},
              {"degree", rc.degree},
              {"s", rc.s},
              {"delta", rc.delta},
              {"k", rc.k},
              {"set", rc.set}};
}

json versions() {
  return json{{"compiler", __VERSION__},
              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                            std::to_string(EIGEN_MAJOR_VERSION) + "." +
                            std::to_string(EIGEN_MINOR_VERSION)},
              {"boost", BOOST_LIB_VERSION},
              {"cli11", CLI11_VERSION},
              {"json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
}

struct CheckRow {
  std::string name;
  double measured = 0, bound = 0;
  bool pass = false;
};

json rows_to_json(const std::vector<CheckRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows)
    arr.push_back(json{{"name", r.name},
                       {"measured", r.measured},
                       {"bound", r.bound},
                       {"pass", r.pass}});
  return arr;
}

void rows_to_csv(const std::vector<CheckRow>& rows, const fs::path& path) {
  std::ofstream f(path);
  f << std::setprecision(17) << "name,measured,bound,pass\n";
  for (const auto& r : rows)
    f << r.name << "," << r.measured << "," << r.bound << ","
      << (r.pass ? 1 : 0) << "\n";
}

json moment_json(const SnapshotStats& st) {
  json mom = json::array();
  for (const auto& m : st.moments)
    mom.push_back(json{{"k", m.k}, {"value", m.value}, {"se", m.se}});
  json j{{"s", st.s},
         {"t", st.t},
         {"moments", mom},
         {"p_empty", st.p_empty},
         {"p_empty_se", st.p_empty_se},
         {"predicted_empty", st.predicted_empty},
         {"pmf", st.pmf}};
  if (st.pred_pair >= 0) j["pred_pair"] = st.pred_pair;
  return j;
}

// --------------------------------------------------------------------------
// check: exact identity battery on one graph

std::vector<CheckRow> run_check(const RunConfig& rc, const BuiltGraph& built,
                                json& report) {
  const Graph& g = built.g;
  std::vector<CheckRow> rows;
  auto push = [&](const std::string& name, double measured, double bound) {
    rows.push_back({name, measured, bound, measured <= bound});
  };

  validate(g);
  check_transitive_signature(g);
  push("structural invariants", 0, 0.5);

  if (g.n > rc.spectral_cap) {
    report["note"] = "graph exceeds the spectral cap; only structural checks ran";
    return rows;
  }

  auto sc = spectral_cache(g, rc.spectral_cap);
  int diam = diameter(g);
  double trel = relaxation_time(sc);
  double e_to = hitting_expectation_pi(g, 0);

  push("eigentime vs fundamental-matrix hitting (rel)",
       std::abs(eigentime(sc) - e_to) / e_to, 1e-8);
  push("green diagonal vs pi * hitting expectation",
       std::abs(green(sc, 0, 0) - e_to / g.n), 1e-8);
  push("relaxation time vs d * D^2", trel, double(g.degree) * diam * diam + 1e-9);

  {
    double row_err = 0, green_sum = 0, diag_dom = 0;
    for (double t : {1.0, double(diam)}) {
      double row = 0;
      for (int y = 0; y < g.n; ++y) {
        double p = heat_kernel(sc, t, 0, y);
        row += p;
        diag_dom = std::max(diag_dom, p - heat_kernel(sc, t, 0, 0));
      }
      row_err = std::max(row_err, std::abs(row - 1.0));
    }
    for (int y = 0; y < g.n; ++y) green_sum += green(sc, 0, y);
    push("heat kernel rows sum to one", row_err, 1e-10);
    push("heat kernel diagonal dominance", diag_dom, 1e-12);
    push("green row sums to zero", std::abs(green_sum), 1e-8);
  }

  {
    auto M = hitting_times_pairwise(transition(g), stationary(g));
    double worst = 0;
    int probes = std::min(g.n - 1, 24);
    for (int i = 1; i <= probes; ++i) {
      int y = int((long long)i * (g.n - 1) / probes);
      double commute = M(0, y) + M(y, 0);
      double res = double(g.n) * g.degree * effective_resistance(g, 0, y);
      worst = std::max(worst, std::abs(commute - res) / res);
    }
    push("commute identity vs n d R (rel)", worst, 1e-8);
  }

  {
    double prev = 2.0, worst = -1.0;
    for (int i = 0; i <= 40; ++i) {
      double t = 0.1 * std::pow(4.0 * diam * diam / 0.1, i / 40.0);
      double p = heat_kernel(sc, t, 0, 0);
      worst = std::max(worst, p - prev);
      prev = p;
    }
    push("return probability decreasing", worst, 1e-12);
  }

  for (const auto& pr : poincare_decay(sc, diam, g.degree)) {
    std::ostringstream name;
    name << "diameter-scale return decay at t=" << pr.t;
    push(name.str(), pr.lhs, pr.rhs + 1e-12);
  }

  {
    auto d0 = bfs_distances(g, 0);
    int far = int(std::max_element(d0.begin(), d0.end()) - d0.begin());
    VertexSet pair{0, far};
    std::sort(pair.begin(), pair.end());
    double q_direct = q_ratio(g, pair);
    double q_green = 2.0 / (1.0 + green(sc, 0, far) / green(sc, 0, 0));
    push("pair hitting ratio vs green ratio (rel)",
         std::abs(q_direct - q_green) / q_direct, 1e-8);
  }

  VertexSet a = rc.set.empty() ? VertexSet{0} : parse_vertex_set(rc.set, g.n);
  auto mx = mixture(g, a);
  if (rc.inject_mixture_fault) mx.c(0) *= 1.0 + 1e-3;

  push("mixture mass vs pi(B)",
       std::abs(mx.pi_b - double(g.n - int(a.size())) / g.n), 1e-10);
  push("leading weight vs quasi-stationary norm",
       std::abs(mx.c(0) * mx.c(0) - 1.0 / mx.alpha_pi_l2), 1e-10);
  push("mixture expectation vs collapsed chain (rel)",
       std::abs(mx.e_pi() - hitting_expectation_set(g, a)) /
           hitting_expectation_set(g, a),
       1e-8);

  {
    std::vector<double> grid;
    double lo = trel / 20.0, hi = 8.0 * mx.e_alpha();
    for (int i = 0; i < 50; ++i)
      grid.push_back(lo * std::pow(hi / lo, i / 49.0));
    auto ab = ab_bounds(mx, trel, grid);  // throws when violated
    push("interval bounds max violation",
         std::max(ab.max_classic_violation, ab.max_refined_violation), 1e-10);
    report["ab"] = json{{"e_pi", ab.e_pi},
                        {"e_alpha", ab.e_alpha},
                        {"alpha_pi_l2", ab.alpha_pi_l2},
                        {"p", ab.p},
                        {"integrated_gap", ab.integrated_gap}};
    if (rc.emit_plotdata) {
      std::ofstream f(fs::path(rc.out) / "tables" / "ab_curves.csv");
      f << std::setprecision(17)
        << "t,p_pi,classic_lo,classic_hi,refined_lo,refined_hi\n";
      for (size_t i = 0; i < ab.t.size(); ++i)
        f << ab.t[i] << "," << ab.p_pi[i] << "," << ab.classic_lo[i] << ","
          << ab.classic_hi[i] << "," << ab.refined_lo[i] << ","
          << ab.refined_hi[i] << "\n";
    }
  }

  // every secondary mode decays at rate >= 1/t_rel, so the median of the
  // squared-deficit split comes before log(2+sqrt 2) t_rel
  double tm = t_med(mx);
  push("median-scale time vs log(2+sqrt2) t_rel", tm,
       std::log(2.0 + std::sqrt(2.0)) * trel + 1e-12);
  push("separation identity residual", dsep_residual(mx), 1e-8);

  if (a.size() >= 2) {
    // hitting a set is at most |a| times as likely as hitting one vertex
    auto single = mixture(g, {a[0]});
    double worst = 0;
    for (int i = 1; i <= 20; ++i) {
      double t = mx.e_pi() * i / 10.0;
      worst = std::max(worst, (1.0 - mx.tail(t)) -
                                  a.size() * (1.0 - single.tail(t)));
    }
    push("set hitting union bound", worst, 1e-10);
  }

  {
    auto vb = vt_bound_check(g, a);
    push("shape bracket constant finite",
         std::isfinite(vb.implied_c) && vb.implied_c >= 0 ? 0.0 : 1.0, 0.5);
    report["vt_bound"] = json{{"m", vb.m},
                              {"R", vb.R},
                              {"bracket", vb.bracket},
                              {"implied_c", vb.implied_c}};
  }

  {
    auto probs = first_hit_probs(g, a);
    push("first-hit split sums to one", std::abs(probs.sum() - 1.0), 1e-10);
  }

  if (g.n <= 18) {
    auto profile = conductance_profile(g);
    auto ev = evolving_set_check(g, sc, profile, 8.0);
    push("evolving-set return bound",
         ev.p_t - ev.bound, 1e-12);
    report["evolving_set"] = json{
        {"eps", ev.eps}, {"t", ev.t}, {"p_t", ev.p_t}, {"bound", ev.bound}};
  }

  if (g.n <= 32) {
    write_file(fs::path(rc.out) / "tables" / "eigensystem.json",
               cache_to_json(sc));
  }
  return rows;
}

// --------------------------------------------------------------------------
// experiment dispatch

TimeWindow pick_window(const BuiltGraph& built, const RunConfig& rc) {
  if (!built.sides.empty()) return window_torus(built.sides);
  if (built.g.n <= rc.spectral_cap) return window_exact(built.g, rc.spectral_cap);
  return window_mc(built.g, std::max(2000, rc.trials), uint64_t(rc.seed) + 777,
                   rc.workers);
}

json run_experiment(const RunConfig& rc, bool& hard_pass) {
  json rep;
  if (rc.task == "counterexample") {
    auto cx = counterexample_experiment(rc.a, rc.m, rc.degree, rc.s, rc.trials,
                                        uint64_t(rc.seed), rc.workers);
    rep = json{{"task", "counterexample"},
               {"a", cx.a},
               {"m", cx.m},
               {"n", cx.n},
               {"degree", cx.degree},
               {"expander_n", cx.expander_n},
               {"expander_degree", cx.expander_degree},
               {"expander_gap", cx.expander_gap},
               {"expander_attempts", cx.expander_attempts},
               {"epi_to", cx.epi_to},
               {"theta",
                json{{"value", cx.theta.value},
                     {"se", cx.theta.se},
                     {"horizon", cx.theta.horizon},
                     {"doubling_delta", cx.theta.doubling_delta},
                     {"doubling_sigma", cx.theta.doubling_sigma},
                     {"converged", cx.theta.converged}}},
               {"c2", cx.c2},
               {"jensen_gap", cx.jensen_gap},
               {"trials", cx.trials},
               {"pair_cycle_dist_hist", cx.pair_cycle_dist_hist},
               {"excess_sigma", cx.excess_sigma},
               {"consistency_sigma", cx.consistency_sigma}};
    json ats = json::array();
    for (const auto& st : cx.at_s) ats.push_back(moment_json(st));
    rep["at_s"] = ats;
    if (cx.c2 <= 1.0) {
      hard_pass = false;
      rep["hard_failure"] = "pair constant c2 must exceed 1";
    }
    std::ofstream f(fs::path(rc.out) / "tables" / "pair_distance_hist.csv");
    f << "cycle_distance,pairs\n";
    for (size_t i = 0; i < cx.pair_cycle_dist_hist.size(); ++i)
      f << i << "," << cx.pair_cycle_dist_hist[i] << "\n";
    return rep;
  }
  if (rc.task == "theta") {
    int nf = int(std::lround(rc.a * rc.m * std::log(double(rc.m))));
    if ((long long)nf * rc.degree % 2 != 0) ++nf;
    auto ex = build_expander(nf, rc.degree, uint64_t(rc.seed) ^ 0x5EEDull, 0.08);
    CycleStrongProduct prod{rc.m, &ex.graph};
    auto th = theta_estimate(prod, double(rc.m) * rc.m, rc.trials,
                             uint64_t(rc.seed), rc.workers);
    return json{{"task", "theta"},
                {"m", rc.m},
                {"expander_n", nf},
                {"value", th.value},
                {"se", th.se},
                {"horizon", th.horizon},
                {"doubling_delta", th.doubling_delta},
                {"doubling_sigma", th.doubling_sigma},
                {"converged", th.converged}};
  }

  auto built = build_from_spec(rc.graph, rc.seed);
  validate(built.g);
  auto w = pick_window(built, rc);

  if (rc.task == "gumbel") {
    auto gr = gumbel_experiment(built.g, w, rc.trials, uint64_t(rc.seed),
                                rc.workers);
    rep = json{{"task", "gumbel"},
               {"graph", built.g.label},
               {"n", gr.n},
               {"trials", gr.trials},
               {"epi_to", gr.epi_to},
               {"provenance", gr.provenance},
               {"ks", gr.ks},
               {"ks_p", gr.ks_p},
               {"mean_y", gr.mean_y},
               {"var_y", gr.var_y},
               {"cdf_s", gr.cdf_s},
               {"cdf_at_s", gr.cdf_at_s},
               {"incomplete_fraction", gr.incomplete_fraction}};
    {
      std::ofstream f(fs::path(rc.out) / "tables" / "gumbel_y.csv");
      f << std::setprecision(17) << "trial,y\n";
      for (size_t i = 0; i < gr.y.size(); ++i) f << i << "," << gr.y[i] << "\n";
    }
    if (rc.emit_plotdata) {
      auto ys = gr.y;
      std::sort(ys.begin(), ys.end());
      std::ofstream f(fs::path(rc.out) / "tables" / "gumbel_cdf.csv");
      f << std::setprecision(17) << "y,empirical,limit\n";
      for (size_t i = 0; i < ys.size(); ++i)
        f << ys[i] << "," << double(i + 1) / ys.size() << ","
          << std::exp(-std::exp(-ys[i])) << "\n";
    }
    // statistical outcome, so flagged rather than failed
    if (gr.incomplete_fraction > 0.01)
      rep["flagged"] = "more than 1% of trials hit the runaway cap";
    return rep;
  }
  if (rc.task == "poisson") {
    std::vector<double> green;
    const std::vector<double>* row = nullptr;
    if (!built.sides.empty() && built.g.n <= 40000) {
      green = torus_green_row(built.sides);
      row = &green;
    }
    auto pr = uncovered_poisson(built.g, w, {0.0, 1.0}, 3, rc.trials,
                                uint64_t(rc.seed), rc.workers, row);
    rep = json{{"task", "poisson"},
               {"graph", pr.graph},
               {"n", pr.n},
               {"trials", pr.trials},
               {"epi_to", pr.epi_to},
               {"provenance", pr.provenance}};
    json ats = json::array();
    for (const auto& st : pr.at_s) ats.push_back(moment_json(st));
    rep["at_s"] = ats;
    std::ofstream f(fs::path(rc.out) / "tables" / "moments.csv");
    f << std::setprecision(17) << "s,k,value,se\n";
    for (const auto& st : pr.at_s)
      for (const auto& m : st.moments)
        f << st.s << "," << m.k << "," << m.value << "," << m.se << "\n";
    return rep;
  }
  if (rc.task == "product-law") {
    auto pl = product_law_checks(built.g, built.sides, w, rc.s, rc.delta,
                                 rc.trials, uint64_t(rc.seed), rc.workers);
    return json{{"task", "product-law"},
                {"graph", built.g.label},
                {"s", pl.s},
                {"t", pl.t},
                {"trials", pl.trials},
                {"delta", pl.delta},
                {"sep_pairs_possible", pl.sep_pairs_possible},
                {"vertex_rate_norm", pl.vertex_rate_norm},
                {"vertex_rate_sigma", pl.vertex_rate_sigma},
                {"chi2_bins_p", pl.chi2_bins_p},
                {"pair_rate_norm", pl.pair_rate_norm},
                {"pair_rate_sigma", pl.pair_rate_sigma},
                {"mean_pairs_per_trial", pl.mean_pairs_per_trial},
                {"pos_chi2_p", pl.pos_chi2_p},
                {"pos_chi2_p_cond", pl.pos_chi2_p_cond},
                {"cond_k", pl.cond_k},
                {"cond_trials", pl.cond_trials},
                {"limitation",
                 "product structure is certified through low-order statistics "
                 "only (vertex marginals, separated-pair rates, conditional "
                 "position uniformity); estimating total-variation distance "
                 "over all 2^n subsets is not feasible by simulation"}};
  }
  if (rc.task == "last-k") {
    auto lk = last_k_experiment(built.g, rc.k, rc.trials, uint64_t(rc.seed),
                                rc.workers, w.epi_to);
    rep = json{{"task", "last-k"}, {"k", lk.k}, {"trials", lk.trials}};
    if (lk.skipped) {
      rep["skipped"] = true;
      rep["skip_reason"] = lk.skip_reason;
      return rep;
    }
    rep["rank_freq"] = lk.rank_freq;
    rep["rank_se"] = lk.rank_se;
    rep["chi2_ranks_p"] = lk.chi2_ranks_p;
    if (lk.pair_ks >= 0) {
      rep["pair_ks"] = lk.pair_ks;
      rep["pair_ks_p"] = lk.pair_ks_p;
    }
    std::ofstream f(fs::path(rc.out) / "tables" / "last_k_ranks.csv");
    f << std::setprecision(17) << "rank,freq,se\n";
    for (size_t i = 0; i < lk.rank_freq.size(); ++i)
      f << i << "," << lk.rank_freq[i] << "," << lk.rank_se[i] << "\n";
    return rep;
  }
  if (rc.task == "matthews") {
    auto ms = matthews_sanity(built.g, rc.trials, uint64_t(rc.seed),
                              rc.workers);
    if (!ms.pass) hard_pass = false;
    return json{{"task", "matthews"},
                {"n", ms.n},
                {"trials", ms.trials},
                {"mean_cover", ms.mean_cover},
                {"se", ms.se},
                {"t_hit_max", ms.t_hit_max},
                {"bound", ms.bound},
                {"pass", ms.pass}};
  }
  throw std::runtime_error("unknown task " + rc.task);
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig rc;
  // the config file provides defaults; explicit flags override below
  for (int i = 1; i + 1 < argc; ++i)
    if (std::string(argv[i]) == "--config") {
      try {
        rc = parse_config(read_file(argv[i + 1]));
      } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
      }
    }

  CLI::App app{"cover-time and hitting-time lab for walks on "
               "vertex-transitive graphs"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "JSON config file");

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--graph", rc.graph, "graph spec, e.g. torus:12x12x12");
    sub->add_option("--trials", rc.trials, "Monte Carlo trials");
    sub->add_option("--seed", rc.seed, "master seed (required for runs)");
    sub->add_option("--workers", rc.workers, "worker threads");
    sub->add_option("--out", rc.out, "output directory");
    sub->add_option("--spectral-cap", rc.spectral_cap,
                    "largest n for dense spectral work");
    sub->add_flag("--emit-plotdata", rc.emit_plotdata,
                  "write extra plot-ready tables");
  };
  auto* bg = app.add_subcommand("build-graph", "construct and save a graph");
  add_common(bg);
  auto* ck = app.add_subcommand("check", "exact identity battery");
  add_common(ck);
  ck->add_option("--set", rc.set, "target set, comma separated ids");
  ck->add_flag("--inject-mixture-fault", rc.inject_mixture_fault,
               "testing aid: corrupt the leading mixture weight");
  auto* ex = app.add_subcommand("experiment", "statistical experiments");
  add_common(ex);
  ex->add_option("--task", rc.task,
                 "gumbel | poisson | product-law | last-k | counterexample | "
                 "matthews | theta");
  ex->add_option("--a", rc.a, "expander size factor (counterexample)");
  ex->add_option("--m", rc.m, "cycle length (counterexample)");
  ex->add_option("--degree", rc.degree, "expander degree (counterexample)");
  ex->add_option("--s", rc.s, "window parameter s");
  ex->add_option("--delta", rc.delta, "pair separation distance");
  ex->add_option("--k", rc.k, "last-k set size");

  CLI11_PARSE(app, argc, argv);
  rc.command = bg->parsed() ? "build-graph" : ck->parsed() ? "check"
                                                           : "experiment";
  if (rc.out.empty()) {
    const char* env = std::getenv("COVERLAB_OUT");
    rc.out = env ? env : "coverlab_out";
  }

  auto t0 = std::chrono::steady_clock::now();
  bool hard_pass = true;
  json report;
  try {
    validate_config(rc);
    fs::create_directories(fs::path(rc.out) / "tables");

    if (rc.command == "build-graph") {
      auto built = build_from_spec(rc.graph, rc.seed);
      validate(built.g);
      save_graph(built.g, (fs::path(rc.out) / "graph.txt").string());
      report = json{{"command", "build-graph"},
                    {"label", built.g.label},
                    {"n", built.g.n},
                    {"degree", built.g.degree}};
      if (built.expander_gap >= 0) {
        report["expander_gap"] = built.expander_gap;
        report["expander_attempts"] = built.expander_attempts;
      }
      if (built.g.n <= 8192) report["diameter"] = diameter(built.g);
    } else if (rc.command == "check") {
      auto built = build_from_spec(rc.graph, rc.seed);
      report = json{{"command", "check"}, {"graph", built.g.label}};
      auto rows = run_check(rc, built, report);
      rows_to_csv(rows, fs::path(rc.out) / "tables" / "identities.csv");
      report["checks"] = rows_to_json(rows);
      for (const auto& r : rows)
        if (!r.pass) {
          hard_pass = false;
          report["hard_failure"] = "identity check failed: " + r.name;
        }
    } else {
      report = run_experiment(rc, hard_pass);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  json manifest{{"config", config_echo(rc)},
                {"versions", versions()},
                {"wall_time_s", wall},
                {"hard_pass", hard_pass}};
  try {
    write_file(fs::path(rc.out) / "report.json", report.dump(2) + "\n");
    write_file(fs::path(rc.out) / "manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::cout << report.dump(2) << "\n";
  return hard_pass ? 0 : 1;
}
