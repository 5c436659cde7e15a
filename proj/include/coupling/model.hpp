#pragma once

// Core domain types: module names, weighted dependency graphs and the
// graph transformations the metrics are defined over (package lifting,
// unweighting, merging).

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>

#include "coupling/error.hpp"

namespace coupling {

enum class Granularity : char { Class = 'c', Package = 'p' };

inline std::string_view to_string(Granularity g) {
  return g == Granularity::Class ? "class" : "package";
}

enum class InnerClassMode { KeepDistinct, FoldIntoOuter };

namespace detail {

inline bool is_reserved_char(char ch) {
  return ch == ',' || ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' ||
         ch == '\v' || ch == '\f';
}

inline bool has_reserved_char(std::string_view s) {
  return std::any_of(s.begin(), s.end(), is_reserved_char);
}

}  // namespace detail

inline bool is_valid_class_name(std::string_view s) {
  return !s.empty() && !detail::has_reserved_char(s);
}

inline bool is_valid_package_name(std::string_view s) {
  return !detail::has_reserved_char(s);
}

/// Fully-qualified, dot-separated class name, e.g. "com.example.Foo$Bar".
class ClassName {
public:
  explicit ClassName(std::string value) : value_(std::move(value)) {
    if (!is_valid_class_name(value_))
      throw Error("invalid class name '" + value_ + "'");
  }

  const std::string& str() const noexcept { return value_; }

  friend auto operator<=>(const ClassName&, const ClassName&) = default;

private:
  std::string value_;
};

/// Java package name; the empty string is the default package.
class PackageName {
public:
  PackageName() = default;
  explicit PackageName(std::string value) : value_(std::move(value)) {
    if (!is_valid_package_name(value_))
      throw Error("invalid package name '" + value_ + "'");
  }

  const std::string& str() const noexcept { return value_; }
  bool is_default() const noexcept { return value_.empty(); }

  friend auto operator<=>(const PackageName&, const PackageName&) = default;

private:
  std::string value_;
};

// Unchecked form used on hot paths where the name is already validated.
inline std::string_view package_part(std::string_view class_name) {
  auto dot = class_name.rfind('.');
  return dot == std::string_view::npos ? std::string_view{}
                                       : class_name.substr(0, dot);
}

/// Package of a class: everything before the last '.'. '$' is not a package
/// separator, so the inner-class mode never changes the result.
inline PackageName package_of(const ClassName& name,
                              InnerClassMode = InnerClassMode::KeepDistinct) {
  return PackageName(std::string(package_part(name.str())));
}

/// Class identity under the inner-class mode. With FoldIntoOuter,
/// "a.b.C$D$1" becomes "a.b.C". A leading '$' in the simple name is kept.
inline std::string_view canonical_class(std::string_view class_name,
                                        InnerClassMode mode) {
  if (mode == InnerClassMode::KeepDistinct) return class_name;
  auto dot = class_name.rfind('.');
  std::size_t simple = dot == std::string_view::npos ? 0 : dot + 1;
  auto dollar = class_name.find('$', simple + 1);
  return dollar == std::string_view::npos ? class_name
                                          : class_name.substr(0, dollar);
}

inline ClassName canonical_class(const ClassName& name, InnerClassMode mode) {
  return ClassName(std::string(canonical_class(name.str(), mode)));
}

using ModuleName = std::string;
using Weight = std::uint64_t;

/// Directed module-level graph with positive integer edge weights n(A,B).
///
/// Nodes are module names at one granularity; a graph never mixes class and
/// package names. Every edge endpoint is a node, isolated nodes are allowed,
/// weights are >= 1 and self-loops do not exist. Instances are immutable;
/// use GraphBuilder to construct one.
class DependencyGraph {
public:
  using EdgeKey = std::pair<ModuleName, ModuleName>;
  using EdgeMap = std::map<EdgeKey, Weight>;
  using NodeSet = std::set<ModuleName>;

  explicit DependencyGraph(Granularity g = Granularity::Class)
      : granularity_(g) {}

  Granularity granularity() const noexcept { return granularity_; }
  const NodeSet& nodes() const noexcept { return nodes_; }
  const EdgeMap& edges() const noexcept { return edges_; }

  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }

  bool contains(std::string_view module) const {
    return nodes_.find(ModuleName(module)) != nodes_.end();
  }

  Weight weight(std::string_view caller, std::string_view callee) const {
    auto it = edges_.find(EdgeKey(caller, callee));
    return it == edges_.end() ? 0 : it->second;
  }

  Weight total_weight() const {
    Weight sum = 0;
    for (const auto& [key, w] : edges_) sum += w;
    return sum;
  }

  friend bool operator==(const DependencyGraph&,
                         const DependencyGraph&) = default;

private:
  friend class GraphBuilder;

  Granularity granularity_;
  NodeSet nodes_;
  EdgeMap edges_;
};

/// Accumulates nodes and weighted edges. Repeated edges add their weights, so
/// the result does not depend on insertion order.
class GraphBuilder {
public:
  explicit GraphBuilder(Granularity g = Granularity::Class) : graph_(g) {}

  /// Starts from an existing graph's nodes and edges.
  explicit GraphBuilder(DependencyGraph g) : graph_(std::move(g)) {}

  Granularity granularity() const noexcept { return graph_.granularity_; }

  GraphBuilder& add_node(std::string_view module) {
    check_name(module);
    graph_.nodes_.emplace(module);
    return *this;
  }

  /// Adds `weight` to edge caller->callee. Self-loops and zero weights are
  /// rejected.
  GraphBuilder& add_edge(std::string_view caller, std::string_view callee,
                         Weight weight = 1) {
    if (caller == callee)
      throw Error("self-loop on '" + std::string(caller) +
                  "' is not a dependency");
    if (weight == 0)
      throw Error("edge " + std::string(caller) + "->" + std::string(callee) +
                  " has zero weight");
    add_node(caller);
    add_node(callee);
    graph_.edges_[DependencyGraph::EdgeKey(caller, callee)] += weight;
    return *this;
  }

  DependencyGraph build() && { return std::move(graph_); }
  DependencyGraph build() const& { return graph_; }

private:
  void check_name(std::string_view module) const {
    bool ok = granularity() == Granularity::Class ? is_valid_class_name(module)
                                                  : is_valid_package_name(module);
    if (!ok)
      throw Error("invalid " + std::string(to_string(granularity())) +
                  " name '" + std::string(module) + "'");
  }

  DependencyGraph graph_;
};

/// Collapses a class-level graph onto packages. Edge weights add up; edges
/// that become intra-package are dropped.
inline DependencyGraph lift_to_packages(const DependencyGraph& g) {
  if (g.granularity() != Granularity::Class)
    throw GranularityError("lift_to_packages expects a class-level graph");
  GraphBuilder b(Granularity::Package);
  for (const auto& node : g.nodes()) b.add_node(package_part(node));
  for (const auto& [key, w] : g.edges()) {
    auto from = package_part(key.first);
    auto to = package_part(key.second);
    if (from != to) b.add_edge(from, to, w);
  }
  return std::move(b).build();
}

/// Same nodes and edges, every weight replaced by 1.
inline DependencyGraph unweight(const DependencyGraph& g) {
  GraphBuilder b(g.granularity());
  for (const auto& node : g.nodes()) b.add_node(node);
  for (const auto& [key, w] : g.edges()) b.add_edge(key.first, key.second, 1);
  return std::move(b).build();
}

/// Node union with edge-wise weight sums.
inline DependencyGraph merge(const DependencyGraph& a, const DependencyGraph& b) {
  if (a.granularity() != b.granularity())
    throw GranularityError("cannot merge a " +
                           std::string(to_string(a.granularity())) +
                           "-level graph with a " +
                           std::string(to_string(b.granularity())) +
                           "-level graph");
  GraphBuilder builder(a);
  for (const auto& node : b.nodes()) builder.add_node(node);
  for (const auto& [key, w] : b.edges())
    builder.add_edge(key.first, key.second, w);
  return std::move(builder).build();
}

/// Static, dynamic unweighted, dynamic weighted.
enum class Approach : char { Static = 's', Unweighted = 'u', Weighted = 'w' };

/// Import (outgoing calls), export (incoming calls), combined.
enum class Direction : char { Import = 'i', Export = 'e', Combined = 'c' };

/// One of the 18 coupling measures (granularity, approach, direction).
struct CouplingSelector {
  Granularity granularity = Granularity::Class;
  Approach approach = Approach::Static;
  Direction direction = Direction::Import;

  friend auto operator<=>(const CouplingSelector&,
                          const CouplingSelector&) = default;
};

inline constexpr std::array<Granularity, 2> kGranularities{
    Granularity::Class, Granularity::Package};
inline constexpr std::array<Approach, 3> kApproaches{
    Approach::Static, Approach::Unweighted, Approach::Weighted};
inline constexpr std::array<Direction, 3> kDirections{
    Direction::Import, Direction::Export, Direction::Combined};

inline std::array<CouplingSelector, 18> all_selectors() {
  std::array<CouplingSelector, 18> out{};
  std::size_t i = 0;
  for (auto g : kGranularities)
    for (auto a : kApproaches)
      for (auto d : kDirections) out[i++] = CouplingSelector{g, a, d};
  return out;
}

inline char code(Granularity g) { return static_cast<char>(g); }
inline char code(Approach a) { return static_cast<char>(a); }
inline char code(Direction d) { return static_cast<char>(d); }

inline std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Import: return "import";
    case Direction::Export: return "export";
    case Direction::Combined: return "combined";
  }
  return "?";
}

/// "c-s-i" style label used in CSV output.
inline std::string to_string(const CouplingSelector& s) {
  return {code(s.granularity), '-', code(s.approach), '-', code(s.direction)};
}

}  // namespace coupling
