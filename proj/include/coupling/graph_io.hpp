#pragma once

// Call-facts CSV: header `caller,callee,count`, one edge per row, rows sorted
// by (caller, callee). A row with an empty callee and count 0 records an
// isolated node.

#include <charconv>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <set>
#include <string_view>
#include <vector>

#include "coupling/error.hpp"
#include "coupling/model.hpp"

namespace coupling {

inline constexpr std::string_view kCallFactsHeader = "caller,callee,count";

namespace detail {

inline std::string_view chomp(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
    line.remove_suffix(1);
  return line;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename Int>
bool parse_int(std::string_view s, Int& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace detail

inline void write_call_facts(std::ostream& os, const DependencyGraph& g) {
  struct Row {
    std::string_view caller, callee;
    Weight count;
  };
  std::vector<Row> rows;
  rows.reserve(g.edge_count());
  std::set<std::string_view> touched;
  for (const auto& [key, w] : g.edges()) {
    rows.push_back({key.first, key.second, w});
    touched.insert(key.first);
    touched.insert(key.second);
  }
  for (const auto& node : g.nodes())
    if (!touched.contains(node)) rows.push_back({node, {}, 0});
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.caller != b.caller) return a.caller < b.caller;
    if (a.callee != b.callee) return a.callee < b.callee;
    return a.count < b.count;
  });

  os << kCallFactsHeader << '\n';
  for (const auto& r : rows)
    os << r.caller << ',' << r.callee << ',' << r.count << '\n';
}

inline DependencyGraph read_call_facts(std::istream& is,
                                       Granularity g = Granularity::Class) {
  GraphBuilder builder(g);
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(is, line)) {
    ++lineno;
    auto text = detail::chomp(line);
    if (!header_seen) {
      if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);
      if (text != kCallFactsHeader)
        throw ParseError("expected header '" + std::string(kCallFactsHeader) +
                             "'",
                         lineno);
      header_seen = true;
      continue;
    }
    if (text.empty()) continue;
    auto fields = detail::split(text, ',');
    if (fields.size() != 3)
      throw ParseError("expected 3 fields, found " +
                           std::to_string(fields.size()),
                       lineno);
    Weight count = 0;
    if (!detail::parse_int(fields[2], count))
      throw ParseError("count '" + std::string(fields[2]) +
                           "' is not a non-negative integer",
                       lineno);
    try {
      if (count == 0) {
        if (!fields[1].empty())
          throw ParseError("zero count on an edge row", lineno);
        builder.add_node(fields[0]);
      } else {
        builder.add_edge(fields[0], fields[1], count);
      }
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  if (!header_seen) throw ParseError("missing header", 1);
  return std::move(builder).build();
}

inline void save_call_facts(const std::filesystem::path& path,
                            const DependencyGraph& g) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write '" + path.string() + "'");
  write_call_facts(os, g);
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}

inline DependencyGraph load_call_facts(const std::filesystem::path& path,
                                       Granularity g = Granularity::Class) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot read '" + path.string() + "'");
  try {
    return read_call_facts(is, g);
  } catch (const ParseError& e) {
    throw ParseError::in_source(path.string(), e);
  }
}

}  // namespace coupling
