#pragma once

// Synthetic monitoring traces drawn from a static graph's edge set, with the
// exact dynamic graph they induce as ground truth.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "coupling/error.hpp"
#include "coupling/graph_io.hpp"
#include "coupling/io.hpp"
#include "coupling/model.hpp"
#include "coupling/trace.hpp"

namespace coupling {

enum class FrequencyKind { Uniform, Zipf, Explicit };
enum class CoverageMode { AllEdgesAtLeastOnce, Free };

// Explicit weights either drive sampling, or are emitted as exact
// proportional counts (largest-remainder rounding).
enum class ExplicitEmission { Sampled, Proportional };

struct FrequencyModel {
  FrequencyKind kind = FrequencyKind::Uniform;
  double zipf_exponent = 1.0;
  std::map<DependencyGraph::EdgeKey, Weight> explicit_weights;
  ExplicitEmission explicit_emission = ExplicitEmission::Sampled;
  std::uint64_t total_calls = 0;
  std::uint64_t seed = 0;
  CoverageMode coverage = CoverageMode::Free;
  std::int64_t base_timestamp = 1'500'000'000'000'000'000;
};

/// Seeded source of uniform integers and reals with a platform-independent
/// mapping from engine output (std distributions are implementation-defined).
class SimulationRng {
public:
  explicit SimulationRng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t bits() { return engine_(); }

  /// Uniform in [0, n), unbiased.
  std::uint64_t below(std::uint64_t n) {
    std::uint64_t threshold = (0 - n) % n;
    while (true) {
      std::uint64_t r = engine_();
      if (r >= threshold) return r % n;
    }
  }

  /// Uniform in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

private:
  std::mt19937_64 engine_;
};

namespace detail {

struct EdgeSampler {
  std::vector<double> cumulative;  // empty = uniform

  std::size_t draw(SimulationRng& rng, std::size_t edges) const {
    if (cumulative.empty()) return static_cast<std::size_t>(rng.below(edges));
    double u = rng.unit() * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    return std::min(static_cast<std::size_t>(it - cumulative.begin()),
                    cumulative.size() - 1);
  }
};

// Exact largest-remainder apportionment of `total` by `weights`; ties go to
// the earlier edge.
inline std::vector<std::uint64_t> apportion(std::uint64_t total,
                                            const std::vector<Weight>& weights) {
  using u128 = unsigned __int128;
  u128 sum = 0;
  for (auto w : weights) sum += w;
  std::vector<std::uint64_t> counts(weights.size());
  std::vector<std::pair<u128, std::size_t>> remainders;
  std::uint64_t assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    u128 scaled = u128{total} * weights[i];
    counts[i] = static_cast<std::uint64_t>(scaled / sum);
    assigned += counts[i];
    remainders.push_back({scaled % sum, i});
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned)
    ++counts[remainders[k].second];
  return counts;
}

}  // namespace detail

inline void validate(const FrequencyModel& model, const DependencyGraph& static_graph) {
  if (model.kind == FrequencyKind::Zipf && !(model.zipf_exponent > 0))
    throw ConfigError("zipf exponent must be > 0");
  if (model.kind == FrequencyKind::Explicit) {
    if (model.explicit_weights.empty())
      throw ConfigError("explicit model needs at least one weighted edge");
    for (const auto& [edge, w] : model.explicit_weights) {
      if (w == 0)
        throw ConfigError("explicit weight of " + edge.first + "->" + edge.second +
                          " must be positive");
      if (!static_graph.edges().contains(edge))
        throw ConfigError("explicit edge " + edge.first + "->" + edge.second +
                          " is not in the static graph");
    }
  }
  auto edges = static_graph.edge_count();
  if (model.total_calls > 0 && edges == 0)
    throw ConfigError("cannot emit calls from a graph without edges");
  if (model.coverage == CoverageMode::AllEdgesAtLeastOnce && model.total_calls < edges)
    throw ConfigError("total_calls (" + std::to_string(model.total_calls) +
                      ") is below the edge count (" + std::to_string(edges) +
                      ") required by all-edges-at-least-once coverage");
}

/// Emits `model.total_calls` records through `sink` and returns the dynamic
/// graph they induce. Same graph, model and seed give the same records.
inline DependencyGraph simulate_trace(
    const DependencyGraph& static_graph, const FrequencyModel& model,
    const std::function<void(const TraceRecordView&)>& sink) {
  if (static_graph.granularity() != Granularity::Class)
    throw GranularityError("simulation needs a class-level static graph");
  validate(model, static_graph);

  std::vector<const DependencyGraph::EdgeKey*> edges;
  edges.reserve(static_graph.edge_count());
  for (const auto& [key, w] : static_graph.edges()) edges.push_back(&key);
  std::vector<std::uint64_t> emitted(edges.size(), 0);

  SimulationRng rng(model.seed);
  std::int64_t ts = model.base_timestamp;
  auto emit = [&](std::size_t edge) {
    ++emitted[edge];
    sink(TraceRecordView{ts++, edges[edge]->first, edges[edge]->second});
  };

  std::uint64_t remaining = model.total_calls;
  if (model.coverage == CoverageMode::AllEdgesAtLeastOnce) {
    for (std::size_t i = 0; i < edges.size(); ++i) emit(i);
    remaining -= edges.size();
  }

  std::vector<Weight> weights;
  if (model.kind == FrequencyKind::Explicit) {
    weights.reserve(edges.size());
    for (const auto* e : edges) {
      auto it = model.explicit_weights.find(*e);
      weights.push_back(it == model.explicit_weights.end() ? 0 : it->second);
    }
  }

  if (model.kind == FrequencyKind::Explicit &&
      model.explicit_emission == ExplicitEmission::Proportional) {
    auto counts = detail::apportion(remaining, weights);
    for (std::size_t i = 0; i < edges.size(); ++i)
      for (std::uint64_t k = 0; k < counts[i]; ++k) emit(i);
  } else {
    detail::EdgeSampler sampler;
    if (model.kind == FrequencyKind::Zipf) {
      // Popularity rank of each edge from a seeded Fisher-Yates shuffle.
      std::vector<std::size_t> rank(edges.size());
      std::iota(rank.begin(), rank.end(), std::size_t{1});
      for (std::size_t i = rank.size(); i > 1; --i)
        std::swap(rank[i - 1], rank[rng.below(i)]);
      double acc = 0;
      for (auto r : rank) {
        acc += std::pow(static_cast<double>(r), -model.zipf_exponent);
        sampler.cumulative.push_back(acc);
      }
    } else if (model.kind == FrequencyKind::Explicit) {
      double acc = 0;
      for (auto w : weights) {
        acc += static_cast<double>(w);
        sampler.cumulative.push_back(acc);
      }
    }
    for (std::uint64_t k = 0; k < remaining; ++k) emit(sampler.draw(rng, edges.size()));
  }

  GraphBuilder truth(Granularity::Class);
  for (std::size_t i = 0; i < edges.size(); ++i)
    if (emitted[i] > 0) truth.add_edge(edges[i]->first, edges[i]->second, emitted[i]);
  return std::move(truth).build();
}

struct SimulatedTrace {
  std::vector<TraceRecord> records;
  DependencyGraph ground_truth{Granularity::Class};
};

inline SimulatedTrace simulate_trace(const DependencyGraph& static_graph,
                                     const FrequencyModel& model) {
  SimulatedTrace out;
  out.records.reserve(model.total_calls);
  out.ground_truth = simulate_trace(static_graph, model, [&](const TraceRecordView& r) {
    out.records.push_back({r.timestamp, std::string(r.caller), std::string(r.callee)});
  });
  return out;
}

/// True iff ingesting `records` reproduces `ground_truth` exactly.
inline bool replay_check(const std::vector<TraceRecord>& records,
                         const DependencyGraph& ground_truth) {
  return accumulate_trace(records).graph == ground_truth;
}

/// Random class-level static graph: `classes` nodes spread round-robin over
/// `packages` packages, `edges` distinct non-self edges with 1-4 call sites.
inline DependencyGraph random_static_graph(std::size_t classes, std::size_t edges,
                                           std::size_t packages, std::uint64_t seed) {
  if (classes == 0) throw ConfigError("random graph needs at least one class");
  if (packages == 0) packages = 1;
  if (edges > classes * (classes - 1))
    throw ConfigError("random graph cannot hold " + std::to_string(edges) +
                      " edges over " + std::to_string(classes) + " classes");
  auto name = [&](std::size_t i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "sim.p%03zu.C%05zu", i % packages, i);
    return std::string(buf);
  };
  std::vector<std::string> names;
  for (std::size_t i = 0; i < classes; ++i) names.push_back(name(i));

  SimulationRng rng(seed);
  GraphBuilder b(Granularity::Class);
  for (const auto& n : names) b.add_node(n);
  std::set<std::pair<std::size_t, std::size_t>> chosen;
  while (chosen.size() < edges) {
    auto from = static_cast<std::size_t>(rng.below(classes));
    auto to = static_cast<std::size_t>(rng.below(classes));
    if (from == to || !chosen.insert({from, to}).second) continue;
    b.add_edge(names[from], names[to], 1 + rng.below(4));
  }
  return std::move(b).build();
}

// ---- scenario files ----------------------------------------------------------

/// A simulation scenario read from `key = value` lines ('#' starts a comment).
///
/// Keys: static_graph (call-facts CSV) or random_classes / random_edges /
/// random_packages / graph_seed; model (uniform | zipf | explicit);
/// zipf_exponent; explicit_weights (call-facts CSV); explicit_emission
/// (sampled | proportional); total_calls; seed; coverage (all-edges | free);
/// base_timestamp; gzip (true | false).
struct Scenario {
  DependencyGraph static_graph{Granularity::Class};
  FrequencyModel model;
  bool gzip = false;
};

inline Scenario parse_scenario(std::istream& is,
                               const std::filesystem::path& base_dir = {}) {
  std::map<std::string, std::string> kv;
  std::map<std::string, std::size_t> where;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view text = line;
    if (auto hash = text.find('#'); hash != std::string_view::npos)
      text = text.substr(0, hash);
    text = detail::trim(text);
    if (text.empty()) continue;
    auto eq = text.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", lineno);
    std::string key(detail::trim(text.substr(0, eq)));
    std::string value(detail::trim(text.substr(eq + 1)));
    if (key.empty()) throw ParseError("empty key", lineno);
    if (!kv.emplace(key, value).second) throw ParseError("duplicate key '" + key + "'", lineno);
    where[key] = lineno;
  }

  auto take = [&](const std::string& key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    auto v = it->second;
    kv.erase(it);
    return v;
  };
  auto as_uint = [&](const std::string& key, std::uint64_t fallback) {
    auto v = take(key);
    if (!v) return fallback;
    std::uint64_t out = 0;
    if (!detail::parse_int(std::string_view(*v), out))
      throw ParseError(key + " must be a non-negative integer", where[key]);
    return out;
  };
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() ? base_dir / path : path;
  };

  Scenario s;
  auto& m = s.model;
  if (auto path = take("static_graph")) {
    s.static_graph = load_call_facts(resolve(*path));
    for (auto k : {"random_classes", "random_edges", "random_packages", "graph_seed"})
      if (kv.contains(k))
        throw ConfigError(std::string(k) + " conflicts with static_graph");
  } else {
    auto classes = as_uint("random_classes", 0);
    if (classes == 0) throw ConfigError("scenario needs static_graph or random_classes");
    auto edges = as_uint("random_edges", classes * 2);
    auto packages = as_uint("random_packages", 1);
    auto graph_seed = as_uint("graph_seed", 1);
    s.static_graph = random_static_graph(classes, edges, packages, graph_seed);
  }

  auto kind = take("model").value_or("uniform");
  if (kind == "uniform") {
    m.kind = FrequencyKind::Uniform;
  } else if (kind == "zipf") {
    m.kind = FrequencyKind::Zipf;
  } else if (kind == "explicit") {
    m.kind = FrequencyKind::Explicit;
  } else {
    throw ConfigError("unknown model '" + kind + "'");
  }
  if (auto z = take("zipf_exponent")) {
    try {
      std::size_t used = 0;
      m.zipf_exponent = std::stod(*z, &used);
      if (used != z->size()) throw std::invalid_argument("trailing characters");
    } catch (const std::logic_error&) {
      throw ConfigError("zipf_exponent must be a number");
    }
  }
  if (auto w = take("explicit_weights")) {
    auto weights = load_call_facts(resolve(*w));
    m.explicit_weights.insert(weights.edges().begin(), weights.edges().end());
  }
  if (auto e = take("explicit_emission")) {
    if (*e == "sampled") m.explicit_emission = ExplicitEmission::Sampled;
    else if (*e == "proportional") m.explicit_emission = ExplicitEmission::Proportional;
    else throw ConfigError("unknown explicit_emission '" + *e + "'");
  }
  m.total_calls = as_uint("total_calls", 0);
  m.seed = as_uint("seed", 0);
  if (auto c = take("coverage")) {
    if (*c == "all-edges") m.coverage = CoverageMode::AllEdgesAtLeastOnce;
    else if (*c == "free") m.coverage = CoverageMode::Free;
    else throw ConfigError("unknown coverage '" + *c + "'");
  }
  if (auto b = take("base_timestamp")) {
    if (!detail::parse_int(std::string_view(*b), m.base_timestamp))
      throw ConfigError("base_timestamp must be an integer");
  }
  if (auto g = take("gzip")) {
    if (*g == "true") s.gzip = true;
    else if (*g == "false") s.gzip = false;
    else throw ConfigError("gzip must be true or false");
  }
  if (!kv.empty())
    throw ParseError("unknown key '" + kv.begin()->first + "'", where[kv.begin()->first]);
  validate(m, s.static_graph);
  return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot read '" + path.string() + "'");
  try {
    return parse_scenario(is, path.parent_path());
  } catch (const ParseError& e) {
    throw ParseError::in_source(path.string(), e);
  }
}

struct SimulationOutput {
  DependencyGraph ground_truth{Granularity::Class};
  TraceStats stats;
};

/// Streams a simulated trace to `path` (gzip when asked) without holding the
/// records in memory.
inline SimulationOutput simulate_to_file(const DependencyGraph& static_graph,
                                         const FrequencyModel& model,
                                         const std::filesystem::path& path, bool gzip,
                                         char separator = ';') {
  TextSink sink(path, gzip);
  TraceAccumulator acc;
  std::string buffer;
  buffer.reserve(1 << 20);
  SimulationOutput out;
  out.ground_truth = simulate_trace(static_graph, model, [&](const TraceRecordView& r) {
    acc.add(r);
    write_trace_record(buffer, r, separator);
    if (buffer.size() >= (1 << 20) - 512) {
      sink.write(buffer);
      buffer.clear();
    }
  });
  sink.write(buffer);
  sink.close();
  out.stats = acc.stats();
  return out;
}

}  // namespace coupling
