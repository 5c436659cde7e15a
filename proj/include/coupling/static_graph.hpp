#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "coupling/archive.hpp"
#include "coupling/classfile.hpp"
#include "coupling/error.hpp"
#include "coupling/filter.hpp"
#include "coupling/io.hpp"
#include "coupling/model.hpp"

namespace coupling {

/// Raw class-file bytes plus where they came from ("dir/A.class",
/// "lib.jar!/a/B.class").
struct ClassFileInput {
  std::string source;
  std::vector<std::uint8_t> bytes;
};

struct StaticExtraction {
  DependencyGraph graph{Granularity::Class};
  std::size_t classes_parsed = 0;
  // Call sites kept in the graph (after self/array/indy exclusion and
  // filtering).
  Weight call_sites = 0;
};

/// Builds the class-level static graph. Edges are kept iff both endpoints
/// pass the filter; every in-scope parsed class is a node even without
/// edges. Weights are call-site counts.
inline StaticExtraction extract_static_graph(
    std::span<const ClassFileInput> inputs, const AnalysisFilter& filter = {},
    const ClassFileOptions& options = {}) {
  StaticExtraction out;
  GraphBuilder builder(Granularity::Class);
  for (const auto& input : inputs) {
    ClassFacts facts;
    try {
      facts = parse_class_file(input.bytes, options);
    } catch (const Error& e) {
      throw InputError(input.source, e.what());
    }
    ++out.classes_parsed;
    if (!filter.accepts(facts.class_name)) continue;
    builder.add_node(facts.class_name);
    for (const auto& [callee, count] : facts.calls) {
      if (!filter.accepts(callee)) continue;
      builder.add_edge(facts.class_name, callee, count);
      out.call_sites += count;
    }
  }
  out.graph = std::move(builder).build();
  return out;
}

inline bool is_archive_path(const std::filesystem::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".jar" || ext == ".zip";
}

/// Loads class files from `.class` files, `.jar`/`.zip` archives and
/// directories (searched recursively for `.class` files, in sorted order).
inline std::vector<ClassFileInput> collect_class_inputs(
    std::span<const std::filesystem::path> paths) {
  namespace fs = std::filesystem;
  std::vector<ClassFileInput> out;
  auto add_file = [&](const fs::path& p) {
    if (is_archive_path(p)) {
      auto bytes = read_binary_file(p);
      std::vector<ArchiveMember> members;
      try {
        members = read_zip(bytes, [](std::string_view name) {
          return name.ends_with(".class");
        });
      } catch (const Error& e) {
        throw InputError(p.string(), e.what());
      }
      for (auto& m : members)
        out.push_back({p.string() + "!/" + m.name, std::move(m.data)});
    } else {
      out.push_back({p.string(), read_binary_file(p)});
    }
  };
  for (const auto& path : paths) {
    std::error_code ec;
    auto status = fs::status(path, ec);
    if (ec || !fs::exists(status))
      throw IoError("no such file or directory: '" + path.string() + "'");
    if (fs::is_directory(status)) {
      std::vector<fs::path> found;
      for (const auto& entry : fs::recursive_directory_iterator(path))
        if (entry.is_regular_file() && entry.path().extension() == ".class")
          found.push_back(entry.path());
      std::sort(found.begin(), found.end());
      for (const auto& f : found) add_file(f);
    } else {
      add_file(path);
    }
  }
  return out;
}

}  // namespace coupling
