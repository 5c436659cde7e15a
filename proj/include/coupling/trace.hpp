#pragma once

// Monitoring-trace ingestion: `timestamp;caller;callee` records streamed into
// a weighted class-level dependency graph plus dataset statistics.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "coupling/error.hpp"
#include "coupling/filter.hpp"
#include "coupling/graph_io.hpp"
#include "coupling/io.hpp"
#include "coupling/model.hpp"

namespace coupling {

/// One monitored runtime call.
struct TraceRecord {
  std::int64_t timestamp = 0;
  std::string caller;
  std::string callee;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/// Non-owning form produced while streaming.
struct TraceRecordView {
  std::int64_t timestamp = 0;
  std::string_view caller;
  std::string_view callee;
};

enum class ErrorPolicy { FailFast, SkipAndCount };

// Share of malformed lines above which a skip-and-count run is a failure.
inline constexpr double kMalformedTolerance = 0.001;

namespace detail {

inline std::string_view trim(std::string_view s) {
  auto ws = [](char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' ||
           c == '\f';
  };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

// Returns an error message, or empty on success.
inline std::string_view parse_record_fields(std::string_view line, char sep,
                                            TraceRecordView& out) {
  line = trim(line);
  auto a = line.find(sep);
  if (a == std::string_view::npos) return "expected 3 fields, found 1";
  auto b = line.find(sep, a + 1);
  if (b == std::string_view::npos) return "expected 3 fields, found 2";
  if (line.find(sep, b + 1) != std::string_view::npos)
    return "expected 3 fields, found more";
  auto ts = trim(line.substr(0, a));
  out.caller = trim(line.substr(a + 1, b - a - 1));
  out.callee = trim(line.substr(b + 1));
  if (!parse_int(ts, out.timestamp)) return "timestamp is not an integer";
  if (out.caller.empty() || out.callee.empty()) return "empty class name";
  if (!is_valid_class_name(out.caller) || !is_valid_class_name(out.callee))
    return "class name contains a reserved character";
  return {};
}

}  // namespace detail

/// Parses `timestamp;caller;callee` (separator configurable). Surrounding
/// whitespace is trimmed from the line and from each field.
inline TraceRecord parse_trace_record(std::string_view line, char separator = ';',
                                      std::size_t line_number = 1) {
  TraceRecordView v;
  auto err = detail::parse_record_fields(line, separator, v);
  if (!err.empty()) throw ParseError(std::string(err), line_number);
  return {v.timestamp, std::string(v.caller), std::string(v.callee)};
}

/// Dataset statistics over in-scope records.
struct TraceStats {
  std::uint64_t total_records = 0;
  std::uint64_t inter_class_records = 0;
  std::uint64_t distinct_classes = 0;
  std::uint64_t distinct_edges = 0;
  std::optional<std::int64_t> first_timestamp;
  std::optional<std::int64_t> last_timestamp;

  friend bool operator==(const TraceStats&, const TraceStats&) = default;
};

/// Stats of two shards of one trace, given the merged graph.
inline TraceStats merge_stats(const TraceStats& a, const TraceStats& b,
                              const DependencyGraph& merged) {
  TraceStats s;
  s.total_records = a.total_records + b.total_records;
  s.inter_class_records = a.inter_class_records + b.inter_class_records;
  s.distinct_classes = merged.node_count();
  s.distinct_edges = merged.edge_count();
  auto pick = [](auto x, auto y, auto better) -> std::optional<std::int64_t> {
    if (!x) return y;
    if (!y) return x;
    return better(*x, *y);
  };
  s.first_timestamp = pick(a.first_timestamp, b.first_timestamp,
                           [](auto x, auto y) { return std::min(x, y); });
  s.last_timestamp = pick(a.last_timestamp, b.last_timestamp,
                          [](auto x, auto y) { return std::max(x, y); });
  return s;
}

/// Single-pass accumulator. State grows with distinct classes and distinct
/// edges, never with the number of records.
class TraceAccumulator {
public:
  explicit TraceAccumulator(AnalysisFilter filter = {},
                            InnerClassMode inner = InnerClassMode::KeepDistinct)
      : filter_(std::move(filter)), inner_(inner) {}

  void add(const TraceRecordView& r) {
    auto caller = intern(canonical_class(r.caller, inner_));
    auto callee = intern(canonical_class(r.callee, inner_));
    if (!classes_[caller].in_scope || !classes_[callee].in_scope) return;
    classes_[caller].seen = true;
    classes_[callee].seen = true;
    ++total_;
    if (!first_ || r.timestamp < *first_) first_ = r.timestamp;
    if (!last_ || r.timestamp > *last_) last_ = r.timestamp;
    if (caller == callee) return;
    ++inter_class_;
    ++edges_[std::uint64_t{caller} << 32 | callee];
  }

  void add(const TraceRecord& r) {
    add(TraceRecordView{r.timestamp, r.caller, r.callee});
  }

  /// Feeds one raw line. Blank lines are ignored. Malformed lines throw under
  /// FailFast and are counted under SkipAndCount.
  void add_line(std::string_view line, char separator, ErrorPolicy policy,
                std::size_t line_number) {
    if (detail::trim(line).empty()) return;
    ++lines_;
    TraceRecordView v;
    auto err = detail::parse_record_fields(line, separator, v);
    if (!err.empty()) {
      if (policy == ErrorPolicy::FailFast)
        throw ParseError(std::string(err), line_number);
      ++malformed_;
      return;
    }
    add(v);
  }

  std::uint64_t malformed_lines() const noexcept { return malformed_; }
  std::uint64_t record_lines() const noexcept { return lines_; }

  /// Number of entries held: distinct class names plus distinct edges.
  std::size_t state_size() const noexcept {
    return classes_.size() + edges_.size();
  }

  DependencyGraph graph() const {
    GraphBuilder b(Granularity::Class);
    for (const auto& c : classes_)
      if (c.seen) b.add_node(c.name);
    for (const auto& [key, w] : edges_)
      b.add_edge(classes_[key >> 32].name, classes_[key & 0xFFFFFFFFu].name, w);
    return std::move(b).build();
  }

  TraceStats stats() const {
    TraceStats s;
    s.total_records = total_;
    s.inter_class_records = inter_class_;
    s.distinct_classes = static_cast<std::uint64_t>(
        std::count_if(classes_.begin(), classes_.end(),
                      [](const ClassSlot& c) { return c.seen; }));
    s.distinct_edges = edges_.size();
    s.first_timestamp = first_;
    s.last_timestamp = last_;
    return s;
  }

private:
  struct ClassSlot {
    std::string name;
    bool in_scope = false;
    bool seen = false;
  };

  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };

  std::uint32_t intern(std::string_view name) {
    auto it = ids_.find(name);
    if (it != ids_.end()) return it->second;
    auto id = static_cast<std::uint32_t>(classes_.size());
    classes_.push_back({std::string(name), filter_.accepts(name), false});
    ids_.emplace(std::string(name), id);
    return id;
  }

  AnalysisFilter filter_;
  InnerClassMode inner_;
  std::vector<ClassSlot> classes_;
  std::unordered_map<std::string, std::uint32_t, StringHash, std::equal_to<>> ids_;
  std::unordered_map<std::uint64_t, Weight> edges_;
  std::uint64_t total_ = 0;
  std::uint64_t inter_class_ = 0;
  std::uint64_t lines_ = 0;
  std::uint64_t malformed_ = 0;
  std::optional<std::int64_t> first_, last_;
};

struct IngestResult {
  DependencyGraph graph{Granularity::Class};
  TraceStats stats;
  std::uint64_t record_lines = 0;  // non-blank lines seen
  std::uint64_t malformed_lines = 0;

  double malformed_fraction() const {
    return record_lines == 0 ? 0.0
                             : static_cast<double>(malformed_lines) /
                                   static_cast<double>(record_lines);
  }

  bool exceeds_malformed_tolerance() const {
    return malformed_fraction() > kMalformedTolerance;
  }
};

/// Accumulates in-memory records: weight(A,B) counts in-scope records with
/// caller A and callee B, A != B.
template <typename Records>
IngestResult accumulate_trace(const Records& records,
                              const AnalysisFilter& filter = {}) {
  TraceAccumulator acc(filter);
  for (const auto& r : records) acc.add(r);
  IngestResult out;
  out.graph = acc.graph();
  out.stats = acc.stats();
  out.record_lines = out.stats.total_records;
  return out;
}

struct IngestOptions {
  AnalysisFilter filter;
  char separator = ';';
  ErrorPolicy error_policy = ErrorPolicy::SkipAndCount;
  InnerClassMode inner_classes = InnerClassMode::KeepDistinct;
};

inline void ingest_lines(LineReader& reader, TraceAccumulator& acc,
                         const IngestOptions& options) {
  std::string_view line;
  std::size_t lineno = 0;
  try {
    while (reader.next(line))
      acc.add_line(line, options.separator, options.error_policy, ++lineno);
  } catch (const ParseError& e) {
    throw ParseError::in_source(reader.name(), e);
  }
}

/// Streams one or more trace files (plain or gzip, "-" for stdin) into one
/// graph.
inline IngestResult ingest_trace_files(const std::vector<std::string>& paths,
                                       const IngestOptions& options = {}) {
  TraceAccumulator acc(options.filter, options.inner_classes);
  for (const auto& p : paths) {
    LineReader reader(p);
    ingest_lines(reader, acc, options);
  }
  IngestResult out;
  out.graph = acc.graph();
  out.stats = acc.stats();
  out.record_lines = acc.record_lines();
  out.malformed_lines = acc.malformed_lines();
  return out;
}

inline IngestResult ingest_trace_stream(std::istream& is,
                                        const IngestOptions& options = {}) {
  TraceAccumulator acc(options.filter, options.inner_classes);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line))
    acc.add_line(line, options.separator, options.error_policy, ++lineno);
  IngestResult out;
  out.graph = acc.graph();
  out.stats = acc.stats();
  out.record_lines = acc.record_lines();
  out.malformed_lines = acc.malformed_lines();
  return out;
}

inline void write_trace_record(std::string& out, const TraceRecordView& r,
                               char separator = ';') {
  out += std::to_string(r.timestamp);
  out += separator;
  out += r.caller;
  out += separator;
  out += r.callee;
  out += '\n';
}

// ---- statistics files and reports -----------------------------------------

inline constexpr std::string_view kStatsHeader =
    "label,total_records,inter_class_records,distinct_classes,distinct_edges,"
    "first_ts,last_ts";

struct LabeledStats {
  std::string label;
  TraceStats stats;
};

inline void write_stats_csv(std::ostream& os,
                            const std::vector<LabeledStats>& rows) {
  os << kStatsHeader << '\n';
  auto ts = [](const std::optional<std::int64_t>& t) {
    return t ? std::to_string(*t) : std::string();
  };
  for (const auto& [label, s] : rows)
    os << label << ',' << s.total_records << ',' << s.inter_class_records << ','
       << s.distinct_classes << ',' << s.distinct_edges << ','
       << ts(s.first_timestamp) << ',' << ts(s.last_timestamp) << '\n';
}

inline std::vector<LabeledStats> read_stats_csv(std::istream& is) {
  std::vector<LabeledStats> rows;
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(is, line) || detail::chomp(line) != kStatsHeader)
    throw ParseError("expected header '" + std::string(kStatsHeader) + "'", 1);
  ++lineno;
  while (std::getline(is, line)) {
    ++lineno;
    auto text = detail::chomp(line);
    if (text.empty()) continue;
    auto f = detail::split(text, ',');
    if (f.size() != 7)
      throw ParseError("expected 7 fields, found " + std::to_string(f.size()),
                       lineno);
    LabeledStats row{std::string(f[0]), {}};
    auto& s = row.stats;
    if (!detail::parse_int(f[1], s.total_records) ||
        !detail::parse_int(f[2], s.inter_class_records) ||
        !detail::parse_int(f[3], s.distinct_classes) ||
        !detail::parse_int(f[4], s.distinct_edges))
      throw ParseError("malformed count", lineno);
    for (int i : {5, 6}) {
      if (f[i].empty()) continue;
      std::int64_t t = 0;
      if (!detail::parse_int(f[i], t)) throw ParseError("malformed timestamp", lineno);
      (i == 5 ? s.first_timestamp : s.last_timestamp) = t;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

enum class TableFormat { Csv, Markdown };

/// One row per dataset with its method-call count, in input order.
inline std::string trace_stats_report(const std::vector<LabeledStats>& datasets,
                                      TableFormat format = TableFormat::Markdown) {
  if (datasets.empty()) throw Error("trace statistics report needs at least one dataset");
  std::ostringstream os;
  if (format == TableFormat::Csv) {
    os << "#,label,method_calls,inter_class_calls\n";
    for (std::size_t i = 0; i < datasets.size(); ++i)
      os << i + 1 << ',' << datasets[i].label << ','
         << datasets[i].stats.total_records << ','
         << datasets[i].stats.inter_class_records << '\n';
    return os.str();
  }
  os << "| # | label | method calls | inter-class calls |\n";
  os << "|---|---|---:|---:|\n";
  for (std::size_t i = 0; i < datasets.size(); ++i)
    os << "| " << i + 1 << " | " << datasets[i].label << " | "
       << datasets[i].stats.total_records << " | "
       << datasets[i].stats.inter_class_records << " |\n";
  return os.str();
}

}  // namespace coupling
