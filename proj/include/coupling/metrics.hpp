#pragma once

// Coupling degrees CM(α,β,γ)(A) and the coupling orders they induce.

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "coupling/model.hpp"

namespace coupling {

using Degree = std::uint64_t;

/// G(α,β): the static (β = s) or dynamic (β = u, w) class graph, lifted to
/// packages when α = p, then unweighted when β is s or u. Lifting happens
/// first, so package-level unweighted degrees count distinct partner
/// packages.
inline DependencyGraph build_graph_for(Granularity granularity, Approach approach,
                                       const DependencyGraph& static_class_graph,
                                       const DependencyGraph& dynamic_class_graph) {
  const auto& source =
      approach == Approach::Static ? static_class_graph : dynamic_class_graph;
  if (source.granularity() != Granularity::Class)
    throw GranularityError("metrics expect class-level input graphs");
  DependencyGraph g = granularity == Granularity::Package ? lift_to_packages(source)
                                                          : source;
  if (approach != Approach::Weighted) g = unweight(g);
  return g;
}

inline DependencyGraph build_graph_for(const CouplingSelector& s,
                                       const DependencyGraph& static_class_graph,
                                       const DependencyGraph& dynamic_class_graph) {
  return build_graph_for(s.granularity, s.approach, static_class_graph,
                         dynamic_class_graph);
}

/// Degree of every node of one graph: out-weight (import), in-weight
/// (export) or both (combined).
struct CouplingVector {
  CouplingSelector selector;
  std::map<ModuleName, Degree> degrees;
};

inline CouplingVector degrees_of(const DependencyGraph& g, CouplingSelector selector) {
  CouplingVector v{selector, {}};
  for (const auto& node : g.nodes()) v.degrees.emplace_hint(v.degrees.end(), node, 0);
  bool out = selector.direction != Direction::Export;
  bool in = selector.direction != Direction::Import;
  for (const auto& [key, w] : g.edges()) {
    if (out) v.degrees[key.first] += w;
    if (in) v.degrees[key.second] += w;
  }
  return v;
}

inline CouplingVector coupling_vector(const CouplingSelector& selector,
                                      const DependencyGraph& static_class_graph,
                                      const DependencyGraph& dynamic_class_graph) {
  return degrees_of(build_graph_for(selector, static_class_graph, dynamic_class_graph),
                    selector);
}

/// Modules sharing one degree.
struct RankGroup {
  Degree degree = 0;
  std::vector<ModuleName> modules;  // sorted

  friend bool operator==(const RankGroup&, const RankGroup&) = default;
};

/// Coupling order: groups of equally coupled modules, by strictly
/// decreasing degree. Ties stay grouped.
struct CouplingRanking {
  CouplingSelector selector;
  std::vector<RankGroup> groups;

  std::size_t module_count() const {
    std::size_t n = 0;
    for (const auto& g : groups) n += g.modules.size();
    return n;
  }
};

inline CouplingRanking ranking(const CouplingVector& v) {
  std::map<Degree, std::vector<ModuleName>, std::greater<>> by_degree;
  for (const auto& [module, d] : v.degrees) by_degree[d].push_back(module);
  CouplingRanking r{v.selector, {}};
  r.groups.reserve(by_degree.size());
  for (auto& [d, modules] : by_degree) r.groups.push_back({d, std::move(modules)});
  return r;
}

/// All 18 coupling vectors, in selector order.
inline std::vector<CouplingVector> all_coupling_vectors(
    const DependencyGraph& static_class_graph,
    const DependencyGraph& dynamic_class_graph) {
  std::vector<CouplingVector> out;
  out.reserve(18);
  for (auto g : kGranularities)
    for (auto a : kApproaches) {
      auto graph = build_graph_for(g, a, static_class_graph, dynamic_class_graph);
      for (auto d : kDirections) out.push_back(degrees_of(graph, {g, a, d}));
    }
  return out;
}

inline void write_degrees_csv(std::ostream& os, const std::vector<CouplingVector>& vs) {
  os << "selector,module,degree\n";
  for (const auto& v : vs) {
    auto sel = to_string(v.selector);
    for (const auto& [module, d] : v.degrees)
      os << sel << ',' << module << ',' << d << '\n';
  }
}

inline void write_rankings_csv(std::ostream& os, const std::vector<CouplingRanking>& rs) {
  os << "selector,rank_group,degree,module\n";
  for (const auto& r : rs) {
    auto sel = to_string(r.selector);
    for (std::size_t i = 0; i < r.groups.size(); ++i)
      for (const auto& module : r.groups[i].modules)
        os << sel << ',' << i + 1 << ',' << r.groups[i].degree << ',' << module
           << '\n';
  }
}

}  // namespace coupling
