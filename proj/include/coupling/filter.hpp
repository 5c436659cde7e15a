#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "coupling/model.hpp"

namespace coupling {

/// Scope restriction shared by the static and dynamic pipelines.
///
/// A class is in scope iff it starts with some include prefix (or there are
/// no include prefixes) and starts with no exclude prefix. Prefixes are raw
/// string prefixes; end one with '.' to match a package boundary exactly.
struct AnalysisFilter {
  std::vector<std::string> include_prefixes;
  std::vector<std::string> exclude_prefixes;

  bool accepts(std::string_view class_name) const {
    auto matches = [&](const std::vector<std::string>& prefixes) {
      for (const auto& p : prefixes)
        if (class_name.starts_with(p)) return true;
      return false;
    };
    if (!include_prefixes.empty() && !matches(include_prefixes)) return false;
    return !matches(exclude_prefixes);
  }

  bool accepts_all() const {
    return include_prefixes.empty() && exclude_prefixes.empty();
  }
};

/// Keeps in-scope nodes and the edges between them.
inline DependencyGraph apply_filter(const DependencyGraph& g, const AnalysisFilter& f) {
  if (f.accepts_all()) return g;
  GraphBuilder b(g.granularity());
  for (const auto& n : g.nodes())
    if (f.accepts(n)) b.add_node(n);
  for (const auto& [key, w] : g.edges())
    if (f.accepts(key.first) && f.accepts(key.second)) b.add_edge(key.first, key.second, w);
  return std::move(b).build();
}

}  // namespace coupling
