#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "coverlab/graph.hpp"

namespace coverlab {

// Trial semantics for the continuous-time rate-1 walk. Exactly one mode per
// config: either fixed-time snapshots (snapshot_times nonempty) or event mode
// (until_cover and/or k_targets). Snapshot jump counts are Poisson draws over
// the time increments; event times are reconstructed from Gamma(jump count)
// increments. Both are exact in law for the rate-1 walk and avoid touching
// per-jump exponentials in the hot loop.
struct WalkConfig {
  int start_vertex = 0;  // -1: draw uniformly at trial start
  bool until_cover = false;
  std::vector<int> k_targets;         // strictly decreasing, >= 1
  std::vector<double> snapshot_times;  // strictly increasing, > 0
  uint64_t master_seed = 1;
  double epi_to_hint = 0;   // scale for the runaway cap; n^2 when absent
  double cap_factor = 4.0;  // cap time = cap_factor * hint * (log n + 40)
  bool record_uncovered = false;  // copy uncovered ids at snapshots
  bool record_position = false;   // walker position at snapshots
};

struct Snapshot {
  double t = 0;
  int64_t z = 0;  // uncovered count
  int position = -1;
  std::vector<int32_t> uncovered;
};

struct KRecord {
  int k = 0;
  double time = 0;
  int position = -1;
  std::vector<int32_t> uncovered;  // always recorded; size == k
};

struct CoverSample {
  int trial = 0;
  bool complete = true;  // false iff the runaway cap fired; kept, flagged
  int64_t jumps = 0;
  double cover_time = -1;
  std::vector<KRecord> tau_k;
  std::vector<Snapshot> snapshots;
};

// Results are a pure function of (config, trials); the worker count only
// changes scheduling. Trial i runs on stream i+1 of the master seed.
std::vector<CoverSample> run_trials(const Graph& g, const WalkConfig& cfg,
                                    int trials, int workers);

// Strong product of a cycle with a small regular factor, stepped without
// materializing the product adjacency (the factor table stays cache
// resident). Same trial semantics; neighbor enumeration order differs from
// the flat-table engine, so streams agree in law, not jump for jump.
struct CycleStrongProduct {
  int m = 0;
  const Graph* factor = nullptr;
  int n() const { return m * factor->n; }
  int degree() const { return 3 * (factor->degree + 1) - 1; }
};
std::vector<CoverSample> run_trials(const CycleStrongProduct& g,
                                    const WalkConfig& cfg, int trials,
                                    int workers);

// Mean occupation time of y by time t, walk started at x. Explicit
// exponential holds; the final hold is truncated at the horizon.
struct LocalTimeEstimate {
  double mean = 0, se = 0;
  double horizon = 0;
  int trials = 0;
};
LocalTimeEstimate local_time(const Graph& g, int x, int y, double horizon,
                             int trials, uint64_t seed, int workers);
LocalTimeEstimate local_time(const CycleStrongProduct& g, int x, int y,
                             double horizon, int trials, uint64_t seed,
                             int workers);

// First hit of the target set: which member, and when. start = -1 draws the
// initial vertex uniformly (so a start inside the set hits at time zero).
struct FirstHitSample {
  int member = 0;  // index into the target set
  double time = 0;
};
std::vector<FirstHitSample> hitting_first(const Graph& g, int start,
                                          const VertexSet& targets,
                                          int trials, uint64_t seed,
                                          int workers);

void samples_to_csv(const std::vector<CoverSample>& samples,
                    std::ostream& out);

}  // namespace coverlab
