// coupling: static/dynamic coupling analysis from the command line.
//
// Exit codes: 0 success, 1 usage error, 2 analysis or I/O error,
// 3 too many malformed trace lines.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "coupling/coupling.hpp"

namespace fs = std::filesystem;
using namespace coupling;

namespace {

constexpr int kExitError = 2;
constexpr int kExitMalformed = 3;

struct Common {
  std::vector<std::string> include;
  std::vector<std::string> exclude;
  std::string out = ".";
  bool fold_inner = false;

  AnalysisFilter filter() const { return {include, exclude}; }
  InnerClassMode inner() const {
    return fold_inner ? InnerClassMode::FoldIntoOuter : InnerClassMode::KeepDistinct;
  }
};

void add_filter_options(CLI::App* cmd, Common& c) {
  cmd->add_option("--include", c.include, "Keep classes starting with PREFIX (repeatable)")
      ->type_name("PREFIX");
  cmd->add_option("--exclude", c.exclude, "Drop classes starting with PREFIX (repeatable)")
      ->type_name("PREFIX");
}

void add_out_option(CLI::App* cmd, Common& c) {
  cmd->add_option("--out", c.out, "Output directory")->type_name("DIR");
}

const std::map<std::string, char> kSeparators{{"semicolon", ';'}, {"comma", ','}, {"tab", '\t'}};
const std::map<std::string, TableFormat> kFormats{{"csv", TableFormat::Csv},
                                                  {"md", TableFormat::Markdown}};

// Outputs never replace an input file.
class OutputGuard {
public:
  explicit OutputGuard(const std::vector<std::string>& inputs) {
    for (const auto& p : inputs)
      if (p != "-") inputs_.emplace_back(p);
  }

  fs::path prepare(const fs::path& dir, const std::string& name) const {
    fs::create_directories(dir);
    auto target = dir / name;
    std::error_code ec;
    for (const auto& in : inputs_)
      if (fs::equivalent(in, target, ec))
        throw Error("refusing to overwrite input '" + in.string() + "' with output");
    return target;
  }

private:
  std::vector<fs::path> inputs_;
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write '" + path.string() + "'");
  os << text;
  if (!os) throw IoError("write failed for '" + path.string() + "'");
}

std::string stats_csv(const std::string& label, const TraceStats& s) {
  std::ostringstream os;
  write_stats_csv(os, {{label, s}});
  return os.str();
}

// ---- subcommands -------------------------------------------------------------

int run_extract_static(const std::vector<std::string>& inputs, const Common& c,
                       unsigned max_version) {
  std::vector<fs::path> paths(inputs.begin(), inputs.end());
  auto classes = collect_class_inputs(paths);
  auto out = extract_static_graph(classes, c.filter(), {max_version, c.inner()});
  OutputGuard guard(inputs);
  save_call_facts(guard.prepare(c.out, "static.csv"), out.graph);
  std::cout << out.classes_parsed << " classes, " << out.graph.edge_count() << " edges, "
            << out.call_sites << " call sites\n";
  return 0;
}

int run_ingest(const std::vector<std::string>& inputs, const Common& c, char separator,
               ErrorPolicy policy, const std::string& label) {
  IngestOptions options{c.filter(), separator, policy, c.inner()};
  auto result = ingest_trace_files(inputs, options);
  OutputGuard guard(inputs);
  save_call_facts(guard.prepare(c.out, "dynamic.csv"), result.graph);
  write_text(guard.prepare(c.out, "stats.csv"), stats_csv(label, result.stats));
  std::cout << result.stats.total_records << " records, "
            << result.stats.inter_class_records << " inter-class, "
            << result.graph.node_count() << " classes, " << result.graph.edge_count()
            << " edges, " << result.malformed_lines << " malformed lines\n";
  if (result.exceeds_malformed_tolerance()) {
    std::cerr << "error: " << result.malformed_lines << " of " << result.record_lines
              << " lines are malformed (tolerance " << kMalformedTolerance * 100 << "%)\n";
    return kExitMalformed;
  }
  return 0;
}

std::vector<Granularity> granularities(const std::string& g) {
  if (g == "class") return {Granularity::Class};
  if (g == "package") return {Granularity::Package};
  return {Granularity::Class, Granularity::Package};
}

int run_degrees(const std::string& static_csv, const std::string& dynamic_csv, const Common& c,
                const std::string& granularity) {
  auto filter = c.filter();
  auto st = apply_filter(load_call_facts(static_csv), filter);
  auto dyn = apply_filter(load_call_facts(dynamic_csv), filter);
  auto wanted = granularities(granularity);
  std::vector<CouplingVector> vectors;
  std::vector<CouplingRanking> rankings;
  for (auto& v : all_coupling_vectors(st, dyn)) {
    if (std::find(wanted.begin(), wanted.end(), v.selector.granularity) == wanted.end())
      continue;
    rankings.push_back(ranking(v));
    vectors.push_back(std::move(v));
  }
  OutputGuard guard({static_csv, dynamic_csv});
  std::ostringstream d, r;
  write_degrees_csv(d, vectors);
  write_rankings_csv(r, rankings);
  write_text(guard.prepare(c.out, "degrees.csv"), d.str());
  write_text(guard.prepare(c.out, "rankings.csv"), r.str());
  std::cout << vectors.size() << " coupling vectors\n";
  return 0;
}

int run_compare(const std::string& static_csv, const std::string& dynamic_csv, const Common& c,
                TableFormat format) {
  auto filter = c.filter();
  auto st = apply_filter(load_call_facts(static_csv), filter);
  auto dyn = apply_filter(load_call_facts(dynamic_csv), filter);
  auto cells = comparison_suite(st, dyn);
  std::ostringstream csv;
  write_results_csv(csv, cells);
  auto md = render_markdown(cells);
  OutputGuard guard({static_csv, dynamic_csv});
  write_text(guard.prepare(c.out, "results.csv"), csv.str());
  write_text(guard.prepare(c.out, "results.md"), md);
  std::cout << (format == TableFormat::Csv ? csv.str() : md);
  for (const auto& cell : cells)
    if (cell.degenerate())
      std::cerr << "warning: " << row_label(cell.spec.granularity, cell.spec.lhs, cell.spec.rhs)
                << ' ' << to_string(cell.spec.direction) << ": " << cell.error
                << " (reported as n/a)\n";
  return 0;
}

int run_simulate(const std::string& scenario_path, const Common& c,
                 std::optional<std::uint64_t> seed, char separator) {
  auto scenario = load_scenario(scenario_path);
  if (seed) scenario.model.seed = *seed;
  OutputGuard guard({scenario_path});
  auto trace = guard.prepare(c.out, scenario.gzip ? "trace.log.gz" : "trace.log");
  auto out = simulate_to_file(scenario.static_graph, scenario.model, trace, scenario.gzip,
                              separator);
  save_call_facts(guard.prepare(c.out, "static.csv"), scenario.static_graph);
  save_call_facts(guard.prepare(c.out, "ground_truth.csv"), out.ground_truth);
  write_text(guard.prepare(c.out, "stats.csv"),
             stats_csv(fs::path(scenario_path).stem().string(), out.stats));
  std::cout << out.stats.total_records << " records, " << out.ground_truth.edge_count()
            << " of " << scenario.static_graph.edge_count() << " static edges exercised\n";
  return 0;
}

int run_stats(const std::vector<std::string>& inputs, TableFormat format) {
  std::vector<LabeledStats> rows;
  for (const auto& p : inputs) {
    std::ifstream is(p);
    if (!is) throw IoError("cannot read '" + p + "'");
    try {
      for (auto& r : read_stats_csv(is)) rows.push_back(std::move(r));
    } catch (const ParseError& e) {
      throw ParseError::in_source(p, e);
    }
  }
  std::cout << trace_stats_report(rows, format);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Static and dynamic coupling metrics for JVM programs"};
  app.require_subcommand(1);
  Common common;

  auto* extract = app.add_subcommand("extract-static", "Static call graph from class files");
  std::vector<std::string> class_paths;
  unsigned max_version = 69;
  extract->add_option("paths", class_paths, ".class files, directories, .jar/.zip archives")
      ->required();
  extract->add_option("--max-class-version", max_version, "Highest accepted class-file major version");
  extract->add_flag("--fold-inner", common.fold_inner, "Attribute inner classes to their outer class");
  add_filter_options(extract, common);
  add_out_option(extract, common);

  auto* ingest = app.add_subcommand("ingest", "Dynamic call graph from monitoring traces");
  std::vector<std::string> trace_paths;
  std::string separator_name = "semicolon";
  std::string policy_name = "skip";
  std::string label = "trace";
  ingest->add_option("traces", trace_paths, "Trace files (plain or gzip, - for stdin)")->required();
  ingest->add_option("--separator", separator_name, "Record field separator")
      ->check(CLI::IsMember({"semicolon", "comma", "tab"}));
  ingest->add_option("--error-policy", policy_name, "Malformed-line handling")
      ->check(CLI::IsMember({"fail-fast", "skip"}));
  ingest->add_option("--label", label, "Dataset label for stats.csv");
  ingest->add_flag("--fold-inner", common.fold_inner, "Attribute inner classes to their outer class");
  add_filter_options(ingest, common);
  add_out_option(ingest, common);

  std::string static_csv, dynamic_csv, granularity = "both", format_name = "md";
  auto add_graph_inputs = [&](CLI::App* cmd) {
    cmd->add_option("--static", static_csv, "Static call-facts CSV")->required();
    cmd->add_option("--dynamic", dynamic_csv, "Dynamic call-facts CSV")->required();
    add_filter_options(cmd, common);
    add_out_option(cmd, common);
  };

  auto* degrees = app.add_subcommand("degrees", "Coupling degrees and rankings for all measures");
  add_graph_inputs(degrees);
  degrees->add_option("--granularity", granularity, "Module granularity")
      ->check(CLI::IsMember({"class", "package", "both"}));

  auto* compare = app.add_subcommand("compare", "Kendall-Tau comparison table of coupling orders");
  add_graph_inputs(compare);
  compare->add_option("--format", format_name, "Table printed on stdout")
      ->check(CLI::IsMember({"csv", "md"}));

  auto* simulate = app.add_subcommand("simulate", "Synthetic trace from a scenario file");
  std::string scenario_path;
  std::optional<std::uint64_t> seed;
  simulate->add_option("scenario", scenario_path, "Scenario config (key = value lines)")
      ->required();
  simulate->add_option("--seed", seed, "Override the scenario seed");
  simulate->add_option("--separator", separator_name, "Record field separator")
      ->check(CLI::IsMember({"semicolon", "comma", "tab"}));
  add_out_option(simulate, common);

  auto* stats = app.add_subcommand("stats", "Dataset table from stats CSV files");
  std::vector<std::string> stats_paths;
  stats->add_option("files", stats_paths, "stats.csv files")->required();
  stats->add_option("--format", format_name, "Output format")->check(CLI::IsMember({"csv", "md"}));

  CLI11_PARSE(app, argc, argv);

  try {
    char separator = kSeparators.at(separator_name);
    auto format = kFormats.at(format_name);
    if (*extract) return run_extract_static(class_paths, common, max_version);
    if (*ingest)
      return run_ingest(trace_paths, common, separator,
                        policy_name == "skip" ? ErrorPolicy::SkipAndCount : ErrorPolicy::FailFast,
                        label);
    if (*degrees) return run_degrees(static_csv, dynamic_csv, common, granularity);
    if (*compare) return run_compare(static_csv, dynamic_csv, common, format);
    if (*simulate) return run_simulate(scenario_path, common, seed, separator);
    if (*stats) return run_stats(stats_paths, format);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return 0;
}
