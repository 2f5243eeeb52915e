#include "coverlab/walker.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <thread>

#include <boost/random/gamma_distribution.hpp>
#include <boost/random/poisson_distribution.hpp>

#include "coverlab/rng.hpp"

namespace coverlab {

namespace {

// Steppers carry the walk cursor so the hot loop never re-derives it.
struct TableStepper {
  int n = 0;
  uint32_t degree = 0;
  const int32_t* adj = nullptr;
  int v = 0;

  void init(int v0) { v = v0; }
  int next(Rng& rng) {
    v = adj[size_t(v) * degree + rng.below(degree)];
    return v;
  }
};

// Walk on C_m boxtimes H without materializing the product adjacency: pick
// (dc, move) uniformly from the 3 * (deg(H) + 1) coordinate combinations
// minus the identity; the skipped index is the (stay, stay) combination.
// Only the factor table is touched, so it stays cache resident.
struct ProductStepper {
  int m = 0;
  int nf = 0;  // factor size
  uint32_t stride = 0;  // deg(H) + 1
  uint32_t degree = 0;  // 3 * stride - 1
  uint32_t fdeg = 0;
  const int32_t* fadj = nullptr;
  int n = 0;
  int c = 0, e = 0;

  void init(int v0) {
    c = v0 / nf;
    e = v0 % nf;
  }
  int next(Rng& rng) {
    uint32_t idx = rng.below(degree);
    uint32_t j = idx < stride ? idx : idx + 1;
    uint32_t b = j % stride;
    if (b) e = fadj[size_t(e) * fdeg + (b - 1)];
    c += int(j / stride) - 1;
    if (c < 0) c = m - 1;
    if (c == m) c = 0;
    return c * nf + e;
  }
};

void check_config(const WalkConfig& cfg, int n) {
  bool event_mode = cfg.until_cover || !cfg.k_targets.empty();
  if (event_mode && !cfg.snapshot_times.empty())
    throw std::invalid_argument(
        "walker: fixed-time snapshots cannot be mixed with event mode in one "
        "config");
  if (!event_mode && cfg.snapshot_times.empty())
    throw std::invalid_argument("walker: config requests nothing to record");
  for (size_t i = 0; i < cfg.snapshot_times.size(); ++i) {
    if (cfg.snapshot_times[i] <= 0)
      throw std::invalid_argument("walker: snapshot times must be positive");
    if (i && cfg.snapshot_times[i] <= cfg.snapshot_times[i - 1])
      throw std::invalid_argument(
          "walker: snapshot times must be strictly increasing");
  }
  for (size_t i = 0; i < cfg.k_targets.size(); ++i) {
    if (cfg.k_targets[i] < 1 || cfg.k_targets[i] > n - 1)
      throw std::invalid_argument("walker: k target out of range");
    if (i && cfg.k_targets[i] >= cfg.k_targets[i - 1])
      throw std::invalid_argument(
          "walker: k targets must be strictly decreasing");
  }
  if (cfg.start_vertex < -1 || cfg.start_vertex >= n)
    throw std::invalid_argument("walker: start vertex out of range");
}

int64_t jump_cap(const WalkConfig& cfg, int n) {
  double hint = cfg.epi_to_hint > 0 ? cfg.epi_to_hint : double(n) * n;
  double cap_time = cfg.cap_factor * hint * (std::log(double(n)) + 40.0);
  return int64_t(1.25 * cap_time) + 1000;
}

struct Coverage {
  std::vector<uint64_t> words;
  int64_t covered = 0;

  void reset(int n) {
    words.assign(size_t(n + 63) / 64, 0);
    covered = 0;
  }
  bool mark(int v) {  // true when v is newly covered
    uint64_t& w = words[size_t(v) >> 6];
    uint64_t bit = 1ull << (v & 63);
    if (w & bit) return false;
    w |= bit;
    ++covered;
    return true;
  }
  void collect_uncovered(int n, std::vector<int32_t>& out) const {
    out.clear();
    for (size_t wi = 0; wi < words.size(); ++wi) {
      uint64_t w = ~words[wi];
      while (w) {
        int b = std::countr_zero(w);
        w &= w - 1;
        int v = int(wi * 64 + b);
        if (v < n) out.push_back(int32_t(v));
      }
    }
  }
};

template <class Stepper>
CoverSample run_one(Stepper st, const WalkConfig& cfg, int trial,
                    Coverage& cov) {
  const int n = st.n;
  Rng rng(cfg.master_seed, uint64_t(trial) + 1);
  CoverSample s;
  s.trial = trial;
  cov.reset(n);
  int v = cfg.start_vertex >= 0 ? cfg.start_vertex
                                : int(rng.below(uint32_t(n)));
  st.init(v);
  cov.mark(v);

  if (!cfg.snapshot_times.empty()) {
    double prev = 0;
    for (double t : cfg.snapshot_times) {
      boost::random::poisson_distribution<int64_t, double> pois(t - prev);
      int64_t jumps = pois(rng);
      for (int64_t i = 0; i < jumps; ++i) {
        v = st.next(rng);
        cov.mark(v);
      }
      s.jumps += jumps;
      prev = t;
      Snapshot snap;
      snap.t = t;
      snap.z = n - cov.covered;
      if (cfg.record_position) snap.position = v;
      if (cfg.record_uncovered) cov.collect_uncovered(n, snap.uncovered);
      s.snapshots.push_back(std::move(snap));
    }
    return s;
  }

  const int64_t cap = jump_cap(cfg, n);
  double t_accum = 0;
  int64_t jumps_at_t = 0;
  auto advance_time = [&](int64_t jumps) {
    if (jumps > jumps_at_t) {
      boost::random::gamma_distribution<double> gam(double(jumps - jumps_at_t),
                                                    1.0);
      t_accum += gam(rng);
      jumps_at_t = jumps;
    }
    return t_accum;
  };
  size_t next_k = 0;
  auto record_k = [&](int64_t jumps) {
    while (next_k < cfg.k_targets.size() &&
           int64_t(cfg.k_targets[next_k]) >= n - cov.covered) {
      KRecord r;
      r.k = cfg.k_targets[next_k];
      r.time = advance_time(jumps);
      r.position = v;
      cov.collect_uncovered(n, r.uncovered);
      s.tau_k.push_back(std::move(r));
      ++next_k;
    }
  };
  record_k(0);
  int64_t jumps = 0;
  while (cov.covered < n) {
    if (!cfg.until_cover && next_k >= cfg.k_targets.size()) break;
    if (jumps >= cap) {
      s.complete = false;
      break;
    }
    v = st.next(rng);
    ++jumps;
    if (cov.mark(v)) record_k(jumps);
  }
  if (cfg.until_cover && cov.covered == n) s.cover_time = advance_time(jumps);
  s.jumps = jumps;
  return s;
}

template <class Stepper>
std::vector<CoverSample> run_all(const Stepper& st, const WalkConfig& cfg,
                                 int trials, int workers) {
  check_config(cfg, st.n);
  if (trials <= 0) throw std::invalid_argument("walker: trials must be > 0");
  if (workers <= 0) workers = 1;
  workers = std::min(workers, trials);
  std::vector<CoverSample> out(trials);
  if (workers == 1) {
    Coverage cov;
    for (int i = 0; i < trials; ++i) out[i] = run_one(st, cfg, i, cov);
    return out;
  }
  std::atomic<int> next{0};
  auto work = [&]() {
    Coverage cov;
    for (;;) {
      int i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= trials) return;
      out[i] = run_one(st, cfg, i, cov);
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  return out;
}

TableStepper make_stepper(const Graph& g) {
  return TableStepper{g.n, uint32_t(g.degree), g.adj.data()};
}

ProductStepper make_stepper(const CycleStrongProduct& g) {
  if (g.m < 3) throw std::invalid_argument("product walk: cycle length < 3");
  ProductStepper st;
  st.m = g.m;
  st.nf = g.factor->n;
  st.stride = uint32_t(g.factor->degree + 1);
  st.degree = 3 * st.stride - 1;
  st.fdeg = uint32_t(g.factor->degree);
  st.fadj = g.factor->adj.data();
  st.n = g.n();
  return st;
}

}  // namespace

std::vector<CoverSample> run_trials(const Graph& g, const WalkConfig& cfg,
                                    int trials, int workers) {
  return run_all(make_stepper(g), cfg, trials, workers);
}

std::vector<CoverSample> run_trials(const CycleStrongProduct& g,
                                    const WalkConfig& cfg, int trials,
                                    int workers) {
  return run_all(make_stepper(g), cfg, trials, workers);
}

namespace {

template <class Stepper>
LocalTimeEstimate local_time_impl(const Stepper& st, int x, int y,
                                  double horizon, int trials, uint64_t seed,
                                  int workers) {
  if (horizon <= 0) throw std::invalid_argument("local_time: horizon <= 0");
  if (workers <= 0) workers = 1;
  std::vector<double> vals(trials);
  std::atomic<int> next{0};
  auto work = [&]() {
    for (;;) {
      int i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= trials) return;
      Rng rng(seed, uint64_t(i) + 1);
      Stepper walk = st;
      walk.init(x);
      int v = x;
      double t = 0, occ = 0;
      for (;;) {
        double hold = rng.exponential();
        if (v == y) occ += std::min(hold, horizon - t);
        t += hold;
        if (t >= horizon) break;
        v = walk.next(rng);
      }
      vals[i] = occ;
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min(workers, trials); ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  LocalTimeEstimate est;
  est.horizon = horizon;
  est.trials = trials;
  double sum = 0, sum2 = 0;
  for (double v : vals) {
    sum += v;
    sum2 += v * v;
  }
  est.mean = sum / trials;
  double var = (sum2 - sum * sum / trials) / std::max(1, trials - 1);
  est.se = std::sqrt(var / trials);
  return est;
}

}  // namespace

LocalTimeEstimate local_time(const Graph& g, int x, int y, double horizon,
                             int trials, uint64_t seed, int workers) {
  return local_time_impl(make_stepper(g), x, y, horizon, trials, seed,
                         workers);
}

LocalTimeEstimate local_time(const CycleStrongProduct& g, int x, int y,
                             double horizon, int trials, uint64_t seed,
                             int workers) {
  return local_time_impl(make_stepper(g), x, y, horizon, trials, seed,
                         workers);
}

std::vector<FirstHitSample> hitting_first(const Graph& g, int start,
                                          const VertexSet& targets,
                                          int trials, uint64_t seed,
                                          int workers) {
  if (targets.empty())
    throw std::invalid_argument("hitting_first: empty target set");
  std::vector<int> member(g.n, -1);
  for (size_t i = 0; i < targets.size(); ++i) member[targets[i]] = int(i);
  if (workers <= 0) workers = 1;
  auto st = make_stepper(g);
  std::vector<FirstHitSample> out(trials);
  std::atomic<int> next{0};
  auto work = [&]() {
    for (;;) {
      int i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= trials) return;
      Rng rng(seed, uint64_t(i) + 1);
      int v = start >= 0 ? start : int(rng.below(uint32_t(g.n)));
      TableStepper walk = st;
      walk.init(v);
      int64_t jumps = 0;
      while (member[v] < 0) {
        v = walk.next(rng);
        ++jumps;
      }
      FirstHitSample smp;
      smp.member = member[v];
      if (jumps > 0) {
        boost::random::gamma_distribution<double> gam(double(jumps), 1.0);
        smp.time = gam(rng);
      }
      out[i] = smp;
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < std::min(workers, trials); ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  return out;
}

void samples_to_csv(const std::vector<CoverSample>& samples,
                    std::ostream& out) {
  if (samples.empty()) return;
  out << std::setprecision(17);
  out << "trial,complete,jumps,cover_time";
  for (const auto& r : samples.front().tau_k) out << ",tau_" << r.k;
  for (const auto& sn : samples.front().snapshots) out << ",z_at_" << sn.t;
  out << "\n";
  for (const auto& s : samples) {
    out << s.trial << "," << (s.complete ? 1 : 0) << "," << s.jumps << ","
        << s.cover_time;
    for (const auto& r : s.tau_k) out << "," << r.time;
    for (const auto& sn : s.snapshots) out << "," << sn.z;
    out << "\n";
  }
}

}  // namespace coverlab
