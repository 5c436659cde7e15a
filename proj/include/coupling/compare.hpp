#pragma once

// Agreement between coupling orders: normalized Kendall-Tau distance over the
// modules both analyses cover, its z-score and one-sided p-value, and the
// 18-cell comparison suite.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "coupling/error.hpp"
#include "coupling/metrics.hpp"
#include "coupling/model.hpp"

namespace coupling {

/// Classification of all n(n-1)/2 unordered pairs. A pair tied in either
/// order is neither concordant nor discordant.
struct PairCounts {
  std::uint64_t concordant = 0;
  std::uint64_t discordant = 0;
  std::uint64_t tied = 0;

  std::uint64_t pairs() const { return concordant + discordant + tied; }

  /// Discordant pairs over all possible swaps; ties stay in the denominator.
  double distance() const {
    auto p = pairs();
    return p == 0 ? 0.0 : static_cast<double>(discordant) / static_cast<double>(p);
  }

  friend bool operator==(const PairCounts&, const PairCounts&) = default;
};

namespace detail {

inline std::uint64_t choose2(std::uint64_t t) { return t * (t - 1) / 2; }

// Sorts `v` ascending and returns the number of strictly inverted pairs.
template <typename T>
std::uint64_t sort_count_inversions(std::vector<T>& v, std::vector<T>& scratch) {
  const std::size_t n = v.size();
  std::uint64_t inversions = 0;
  scratch.resize(n);
  for (std::size_t width = 1; width < n; width *= 2) {
    for (std::size_t lo = 0; lo < n; lo += 2 * width) {
      std::size_t mid = std::min(lo + width, n);
      std::size_t hi = std::min(lo + 2 * width, n);
      std::size_t i = lo, j = mid, k = lo;
      while (i < mid && j < hi) {
        if (v[i] <= v[j]) {
          scratch[k++] = v[i++];
        } else {
          inversions += mid - i;
          scratch[k++] = v[j++];
        }
      }
      while (i < mid) scratch[k++] = v[i++];
      while (j < hi) scratch[k++] = v[j++];
    }
    std::swap(v, scratch);
  }
  return inversions;
}

template <typename T>
std::uint64_t tied_pairs_sorted(const std::vector<T>& sorted) {
  std::uint64_t ties = 0, run = 1;
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] == sorted[i - 1]) {
      ++run;
    } else {
      ties += choose2(run);
      run = 1;
    }
  }
  if (!sorted.empty()) ties += choose2(run);
  return ties;
}

}  // namespace detail

/// Pair classification of two keyed orders in O(n log n): sort by (x, y),
/// count strict inversions of y by merge sort, and correct for ties in x, in
/// y and in both.
template <typename Key>
PairCounts count_pairs(std::span<const Key> x, std::span<const Key> y) {
  if (x.size() != y.size()) throw Error("count_pairs: length mismatch");
  const std::size_t n = x.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return x[a] != x[b] ? x[a] < x[b] : y[a] < y[b];
  });

  std::uint64_t tied_x = 0, tied_xy = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && x[order[j]] == x[order[i]]) ++j;
    tied_x += detail::choose2(j - i);
    for (std::size_t k = i; k < j;) {
      std::size_t m = k;
      while (m < j && y[order[m]] == y[order[k]]) ++m;
      tied_xy += detail::choose2(m - k);
      k = m;
    }
    i = j;
  }

  std::vector<Key> ys(n), scratch;
  for (std::size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
  std::uint64_t discordant = detail::sort_count_inversions(ys, scratch);
  std::uint64_t tied_y = detail::tied_pairs_sorted(ys);

  PairCounts c;
  c.discordant = discordant;
  c.tied = tied_x + tied_y - tied_xy;
  c.concordant = detail::choose2(n) - c.tied - c.discordant;
  if (n < 2) c.concordant = 0;
  return c;
}

/// Kendall-Tau comparison of two rankings over `universe`.
struct TauResult {
  std::size_t n = 0;
  PairCounts counts;
  double distance = 0.0;
};

inline TauResult kendall_tau_distance(const CouplingRanking& r1,
                                      const CouplingRanking& r2,
                                      const std::set<ModuleName>& universe) {
  if (universe.size() < 2)
    throw DegenerateComparisonError("comparison over " +
                                    std::to_string(universe.size()) +
                                    " module(s); at least 2 are needed");
  auto rank_of = [](const CouplingRanking& r) {
    std::unordered_map<std::string_view, std::size_t> rank;
    for (std::size_t i = 0; i < r.groups.size(); ++i)
      for (const auto& m : r.groups[i].modules) rank.emplace(m, i);
    return rank;
  };
  auto rank1 = rank_of(r1);
  auto rank2 = rank_of(r2);
  std::vector<std::size_t> x, y;
  x.reserve(universe.size());
  y.reserve(universe.size());
  for (const auto& m : universe) {
    auto a = rank1.find(m);
    auto b = rank2.find(m);
    if (a == rank1.end() || b == rank2.end())
      throw Error("module '" + m + "' is missing from a ranking");
    x.push_back(a->second);
    y.push_back(b->second);
  }
  TauResult t;
  t.n = universe.size();
  t.counts = count_pairs<std::size_t>(x, y);
  t.distance = t.counts.distance();
  return t;
}

/// Normal approximation of Kendall's S under independence, without tie
/// correction: z = (C - D) / sqrt(n(n-1)(2n+5)/18).
inline double z_score(std::uint64_t concordant, std::uint64_t discordant,
                      std::uint64_t n) {
  if (n < 2)
    throw DegenerateComparisonError("z-score needs at least 2 modules");
  long double s = static_cast<long double>(concordant) -
                  static_cast<long double>(discordant);
  long double nn = static_cast<long double>(n);
  long double var = nn * (nn - 1) * (2 * nn + 5) / 18;
  return static_cast<double>(s / std::sqrt(var));
}

/// One-sided upper-tail probability of the standard normal at |z|, via erfc
/// in extended precision. Floors at the smallest positive long double.
inline long double p_value(double z) {
  long double x = std::fabs(static_cast<long double>(z));
  long double p = 0.5L * std::erfc(x / std::sqrt(2.0L));
  return std::max(p, std::numeric_limits<long double>::denorm_min());
}

/// Modules covered by both analyses at the requested granularity.
inline std::set<ModuleName> common_modules(const DependencyGraph& g_static,
                                           const DependencyGraph& g_dynamic,
                                           Granularity granularity) {
  if (g_static.granularity() != Granularity::Class ||
      g_dynamic.granularity() != Granularity::Class)
    throw GranularityError("common_modules expects class-level graphs");
  auto project = [&](const DependencyGraph& g) {
    if (granularity == Granularity::Class) return g.nodes();
    std::set<ModuleName> out;
    for (const auto& n : g.nodes()) out.emplace(package_part(n));
    return out;
  };
  auto a = project(g_static);
  auto b = project(g_dynamic);
  std::set<ModuleName> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::inserter(out, out.end()));
  return out;
}

/// ⟨α: β1 vs β2⟩ for one direction γ.
struct ComparisonSpec {
  Granularity granularity = Granularity::Class;
  Approach lhs = Approach::Static;
  Approach rhs = Approach::Unweighted;
  Direction direction = Direction::Import;

  bool valid() const {
    return (lhs == Approach::Static && rhs == Approach::Unweighted) ||
           (lhs == Approach::Static && rhs == Approach::Weighted) ||
           (lhs == Approach::Unweighted && rhs == Approach::Weighted);
  }

  friend auto operator<=>(const ComparisonSpec&, const ComparisonSpec&) = default;
};

inline constexpr std::array<std::pair<Approach, Approach>, 3> kPairings{{
    {Approach::Static, Approach::Unweighted},
    {Approach::Static, Approach::Weighted},
    {Approach::Unweighted, Approach::Weighted},
}};

/// The 18 specs in table order: granularity, then pairing, then direction.
inline std::array<ComparisonSpec, 18> all_comparison_specs() {
  std::array<ComparisonSpec, 18> out{};
  std::size_t i = 0;
  for (auto g : kGranularities)
    for (auto [l, r] : kPairings)
      for (auto d : kDirections) out[i++] = {g, l, r, d};
  return out;
}

/// "⟨c: s vs u⟩"
inline std::string row_label(Granularity g, Approach lhs, Approach rhs) {
  return std::string("⟨") + code(g) + ": " + code(lhs) + " vs " + code(rhs) + "⟩";
}

struct ComparisonResult {
  ComparisonSpec spec;
  std::size_t n = 0;
  std::uint64_t concordant = 0;
  std::uint64_t discordant = 0;
  std::uint64_t tied_pairs = 0;
  double tau_distance = 0.0;
  double z_score = 0.0;
  long double p_value = 0.5L;
};

inline ComparisonResult compare_rankings(const ComparisonSpec& spec,
                                         const CouplingRanking& lhs,
                                         const CouplingRanking& rhs,
                                         const std::set<ModuleName>& universe) {
  auto t = kendall_tau_distance(lhs, rhs, universe);
  ComparisonResult r;
  r.spec = spec;
  r.n = t.n;
  r.concordant = t.counts.concordant;
  r.discordant = t.counts.discordant;
  r.tied_pairs = t.counts.tied;
  r.tau_distance = t.distance;
  r.z_score = z_score(r.concordant, r.discordant, r.n);
  r.p_value = p_value(r.z_score);
  return r;
}

/// One table cell: a result, or why there is none.
struct ComparisonCell {
  ComparisonSpec spec;
  std::size_t n = 0;  // modules after the common-module restriction
  std::optional<ComparisonResult> result;
  std::string error;

  bool degenerate() const { return !result.has_value(); }
};

/// The full 18-comparison suite. Degrees come from the whole G(α,β); the
/// common-module restriction applies to the rankings being compared. A
/// degenerate cell carries its error and does not stop the others.
inline std::vector<ComparisonCell> comparison_suite(
    const DependencyGraph& static_class_graph,
    const DependencyGraph& dynamic_class_graph) {
  std::map<CouplingSelector, CouplingRanking> rankings;
  for (auto& v : all_coupling_vectors(static_class_graph, dynamic_class_graph))
    rankings.emplace(v.selector, ranking(v));
  std::map<Granularity, std::set<ModuleName>> universes;
  for (auto g : kGranularities)
    universes[g] = common_modules(static_class_graph, dynamic_class_graph, g);

  std::vector<ComparisonCell> cells;
  cells.reserve(18);
  for (const auto& spec : all_comparison_specs()) {
    ComparisonCell cell{spec, universes[spec.granularity].size(), {}, {}};
    try {
      cell.result = compare_rankings(
          spec, rankings.at({spec.granularity, spec.lhs, spec.direction}),
          rankings.at({spec.granularity, spec.rhs, spec.direction}),
          universes[spec.granularity]);
    } catch (const DegenerateComparisonError& e) {
      cell.error = e.what();
    }
    cells.push_back(std::move(cell));
  }
  return cells;
}

// ---- rendering --------------------------------------------------------------

namespace detail {

inline std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

inline std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string sci(long double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.3Le", v);
  return buf;
}

}  // namespace detail

inline constexpr std::string_view kResultsHeader =
    "granularity,lhs,rhs,direction,n,concordant,discordant,tied,tau_distance,z,p";

/// 18 rows in table order. Degenerate cells leave the statistic fields empty.
inline void write_results_csv(std::ostream& os, const std::vector<ComparisonCell>& cells) {
  os << kResultsHeader << '\n';
  for (const auto& c : cells) {
    os << code(c.spec.granularity) << ',' << code(c.spec.lhs) << ','
       << code(c.spec.rhs) << ',' << code(c.spec.direction) << ',' << c.n;
    if (c.result) {
      const auto& r = *c.result;
      os << ',' << r.concordant << ',' << r.discordant << ',' << r.tied_pairs << ','
         << detail::fixed3(r.tau_distance) << ',' << detail::fixed2(r.z_score) << ','
         << detail::sci(r.p_value);
    } else {
      os << ",,,,,,";
    }
    os << '\n';
  }
}

inline const ComparisonCell& find_cell(const std::vector<ComparisonCell>& cells,
                                       const ComparisonSpec& spec) {
  for (const auto& c : cells)
    if (c.spec == spec) return c;
  throw Error("no cell for the requested comparison");
}

/// Mean distance per direction over the three pairings of one granularity;
/// empty when every cell is degenerate.
inline std::optional<double> mean_over_pairings(const std::vector<ComparisonCell>& cells,
                                                Granularity g, Direction d) {
  double sum = 0;
  int count = 0;
  for (auto [l, r] : kPairings) {
    const auto& c = find_cell(cells, {g, l, r, d});
    if (c.result) {
      sum += c.result->tau_distance;
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / count;
}

/// Markdown report: a 6 x 3 distance table (rows ⟨α: β1 vs β2⟩, columns
/// import/export/combined), a matching table of n, z and p, and the
/// per-direction means over pairings.
inline std::string render_markdown(const std::vector<ComparisonCell>& cells) {
  std::ostringstream os;
  auto header = [&](std::string_view first) {
    os << "| " << first << " | import | export | combined |\n";
    os << "|---|---:|---:|---:|\n";
  };
  auto rows = [&](auto&& cell_text) {
    for (auto g : kGranularities)
      for (auto [l, r] : kPairings) {
        os << "| " << row_label(g, l, r) << " |";
        for (auto d : kDirections) os << ' ' << cell_text(find_cell(cells, {g, l, r, d})) << " |";
        os << '\n';
      }
  };

  os << "### Kendall-Tau distance\n\n";
  header("comparison");
  rows([](const ComparisonCell& c) {
    return c.result ? detail::fixed3(c.result->tau_distance) : std::string("n/a (n<2)");
  });

  os << "\n### Significance\n\n";
  header("comparison");
  rows([](const ComparisonCell& c) {
    if (!c.result) return "n=" + std::to_string(c.n) + ", n/a";
    return "n=" + std::to_string(c.result->n) + ", z=" + detail::fixed2(c.result->z_score) +
           ", p=" + detail::sci(c.result->p_value);
  });

  os << "\n### Mean over pairings\n\n";
  header("granularity");
  for (auto g : kGranularities) {
    os << "| mean over pairings (" << code(g) << ") |";
    for (auto d : kDirections) {
      auto m = mean_over_pairings(cells, g, d);
      os << ' ' << (m ? detail::fixed3(*m) : std::string("n/a")) << " |";
    }
    os << '\n';
  }
  os << "\nPairs tied in either order count as neither concordant nor discordant;"
        " the distance denominator is n(n-1)/2. z-scores are uncorrected for ties;"
        " p-values are one-sided.\n";
  return os.str();
}

}  // namespace coupling
