#include "coverlab/cli_config.hpp"

#include <algorithm>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace coverlab {

RunConfig parse_config(const std::string& json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::runtime_error("config: expected an object");

  static const char* known[] = {
      "command", "graph", "task",  "trials", "seed",
      "workers", "out",   "spectral_cap", "emit_plotdata",
      "a",       "m",     "degree", "s",    "delta",
      "k",       "set",   "inject_mixture_fault"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (std::find_if(std::begin(known), std::end(known), [&](const char* k) {
          return it.key() == k;
        }) == std::end(known)) {
      throw std::runtime_error("config: unknown key \"" + it.key() + "\"");
    }
  }

  RunConfig rc;
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
  };
  get("command", rc.command);
  get("graph", rc.graph);
  get("task", rc.task);
  get("trials", rc.trials);
  get("seed", rc.seed);
  get("workers", rc.workers);
  get("out", rc.out);
  get("spectral_cap", rc.spectral_cap);
  get("emit_plotdata", rc.emit_plotdata);
  get("a", rc.a);
  get("m", rc.m);
  get("degree", rc.degree);
  get("s", rc.s);
  get("delta", rc.delta);
  get("k", rc.k);
  get("set", rc.set);
  get("inject_mixture_fault", rc.inject_mixture_fault);
  return rc;
}

void validate_config(const RunConfig& rc) {
  if (rc.command != "build-graph" && rc.command != "check" &&
      rc.command != "experiment")
    throw std::runtime_error(
        "config: command must be build-graph, check, or experiment");

  bool stochastic =
      rc.command == "experiment" ||
      rc.graph.rfind("expander:", 0) == 0 ||
      rc.graph.rfind("product:expander", 0) == 0;
  if (stochastic && rc.seed < 0)
    throw std::runtime_error(
        "config: seed is required for stochastic work; pass --seed or set "
        "\"seed\"");

  if (rc.command == "experiment") {
    static const char* tasks[] = {"gumbel",         "poisson", "product-law",
                                  "last-k",         "matthews", "theta",
                                  "counterexample"};
    if (std::find_if(std::begin(tasks), std::end(tasks), [&](const char* t) {
          return rc.task == t;
        }) == std::end(tasks))
      throw std::runtime_error("config: unknown task \"" + rc.task + "\"");
    bool needs_shape =
        rc.task == "counterexample" || rc.task == "theta";
    if (needs_shape && (rc.a <= 0 || rc.m <= 0))
      throw std::runtime_error(
          "config: the " + rc.task +
          " task requires both \"a\" (expander size factor) and \"m\" "
          "(cycle length)");
    if (!needs_shape && rc.graph.empty())
      throw std::runtime_error("config: experiment requires a graph spec");
    if (rc.trials <= 0) throw std::runtime_error("config: trials must be > 0");
  }
  if (rc.command == "check" && rc.graph.empty())
    throw std::runtime_error("config: check requires a graph spec");
  if (rc.command == "build-graph" && rc.graph.empty())
    throw std::runtime_error("config: build-graph requires a graph spec");
  if (rc.workers <= 0)
    throw std::runtime_error("config: workers must be > 0");
}

namespace {

std::vector<int> parse_dims(const std::string& text, const char* what) {
  std::vector<int> dims;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, 'x')) {
    try {
      dims.push_back(std::stoi(piece));
    } catch (...) {
      throw std::runtime_error(std::string("graph spec: bad ") + what +
                               " dimension \"" + piece + "\"");
    }
  }
  if (dims.empty())
    throw std::runtime_error(std::string("graph spec: empty ") + what);
  return dims;
}

BuiltGraph build_simple_spec(const std::string& spec, long long seed) {
  auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw std::runtime_error("graph spec: expected kind:params, got \"" +
                             spec + "\"");
  std::string kind = spec.substr(0, colon), rest = spec.substr(colon + 1);
  BuiltGraph b;
  if (kind == "cycle") {
    int m = std::stoi(rest);
    b.g = build_cycle(m);
    b.sides = {m};
  } else if (kind == "torus") {
    b.sides = parse_dims(rest, "torus");
    b.g = build_torus(b.sides);
  } else if (kind == "complete") {
    b.g = build_complete(std::stoi(rest));
  } else if (kind == "expander") {
    auto dims = parse_dims(rest, "expander");
    if (dims.size() != 2)
      throw std::runtime_error("graph spec: expander wants size x degree");
    if (seed < 0)
      throw std::runtime_error("graph spec: expander needs a seed");
    auto res = build_expander(dims[0], dims[1], uint64_t(seed), 0.08);
    b.g = std::move(res.graph);
    b.expander_gap = res.gap;
    b.expander_attempts = res.attempts;
  } else if (kind == "file") {
    b.g = load_graph(rest);
  } else {
    throw std::runtime_error("graph spec: unknown kind \"" + kind + "\"");
  }
  return b;
}

}  // namespace

BuiltGraph build_from_spec(const std::string& spec, long long seed) {
  if (spec.rfind("product:", 0) == 0) {
    std::string rest = spec.substr(8);
    auto bar = rest.find('|');
    if (bar == std::string::npos)
      throw std::runtime_error(
          "graph spec: product wants two factors separated by '|'");
    auto left = build_simple_spec(rest.substr(0, bar), seed);
    auto right = build_simple_spec(rest.substr(bar + 1), seed + 1);
    BuiltGraph b;
    b.g = strong_product(left.g, right.g);
    b.expander_gap = std::max(left.expander_gap, right.expander_gap);
    b.expander_attempts = left.expander_attempts + right.expander_attempts;
    return b;
  }
  return build_simple_spec(spec, seed);
}

VertexSet parse_vertex_set(const std::string& text, int n) {
  VertexSet out;
  std::stringstream ss(text);
  std::string piece;
  while (std::getline(ss, piece, ',')) {
    if (piece.empty()) continue;
    int v = std::stoi(piece);
    if (v < 0 || v >= n)
      throw std::runtime_error("target set: vertex id out of range");
    out.push_back(v);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw std::runtime_error("target set: empty");
  return out;
}

}  // namespace coverlab
