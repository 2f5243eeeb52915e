#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coverlab/graph.hpp"

namespace coverlab {

// One flat config drives every subcommand; the JSON file and the command
// line share field names, with the command line winning.
struct RunConfig {
  std::string command;  // build-graph | check | experiment
  std::string graph;    // e.g. "torus:12x12x12", "product:cycle:3|cycle:4"
  std::string task;     // gumbel | poisson | product-law | last-k |
                        // counterexample | matthews | theta
  int trials = 2000;
  long long seed = -1;  // required wherever randomness is consumed
  int workers = 1;
  std::string out;      // default: $COVERLAB_OUT, else ./coverlab_out
  int spectral_cap = 1500;
  bool emit_plotdata = false;
  double a = 0;         // counterexample: expander size factor a*m*log(m)
  int m = 0;            // counterexample: cycle length
  int degree = 4;       // counterexample: expander degree
  double s = 1.0;       // window parameter
  int delta = 4;        // separation distance for pair checks
  int k = 2;            // last-k size
  std::string set;      // target set for check, e.g. "0,4,9"
  bool inject_mixture_fault = false;  // testing aid: corrupt one weight
};

// Parses the JSON text; any key outside the RunConfig field set is an
// error naming the key.
RunConfig parse_config(const std::string& json_text);

// Cross-field validation shared by file and flag paths. Throws with a
// message naming every missing or inconsistent field.
void validate_config(const RunConfig& rc);

// Graph builders keyed by spec string. sides is filled for torus and cycle
// specs so callers can reach the closed-form routes.
struct BuiltGraph {
  Graph g;
  std::vector<int> sides;   // nonempty iff the graph is a torus/cycle
  double expander_gap = -1; // >= 0 iff an expander was drawn
  int expander_attempts = 0;
};
BuiltGraph build_from_spec(const std::string& spec, long long seed);

VertexSet parse_vertex_set(const std::string& text, int n);

}  // namespace coverlab
