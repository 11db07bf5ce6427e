#include "pnsearch/cli_commands.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pnsearch/bench_harness.hpp"
#include "pnsearch/circuit_compiler.hpp"
#include "pnsearch/index.hpp"
#include "pnsearch/query_dag.hpp"

namespace pnsearch::cli {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

// Dag wire format, or a constraint DSL object (which is compiled first).
NormalizedDag load_query(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_object() && j.contains("kind") && !j.contains("nodes")) {
    return compile_constraint(text).dag;
  }
  QueryDag dag = parse_dag(text);
  validate(dag);
  return normalize(dag);
}

}  // namespace

int cmd_index_build(const std::filesystem::path& corpus_path,
                    const std::filesystem::path& index_path, Streams io) {
  try {
    auto docs = read_corpus_jsonl(corpus_path);
    auto index = build_index(docs);
    save_index(index, index_path);
    nlohmann::ordered_json summary;
    summary["universe_size"] = index.universe_size();
    summary["terms"] = index.term_count();
    io.out << summary.dump() << '\n';
    return kOk;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return kError;
  }
}

int cmd_query(const QueryConfig& config, Streams io) {
  try {
    auto index = load_index(config.index_path);
    auto dag = load_query(config.dag_path);
    auto report = compute_pn(dag, index, config.eval);
    switch (config.mode) {
      case OutputMode::Ids:
        for (DocId d : report.result) io.out << index.key_of(d) << '\n';
        break;
      case OutputMode::Count:
        io.out << report.result.size() << '\n';
        break;
      case OutputMode::Report:
        io.out << report_to_json(report, index, {true, config.per_node_sizes}) << '\n';
        break;
    }
    if (config.fail_empty && report.result.empty()) return kEmptyResult;
    return kOk;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return kError;
  }
}

int cmd_compile(const std::filesystem::path& constraint_path,
                const std::optional<std::filesystem::path>& dag_out, Streams io) {
  try {
    auto compiled = compile_constraint(read_file(constraint_path));
    auto wire = serialize_dag(compiled.dag.dag());
    nlohmann::ordered_json summary;
    summary["node_count"] = compiled.node_count;
    if (dag_out) {
      write_file(*dag_out, wire + "\n");
      io.out << summary.dump() << '\n';
    } else {
      io.out << wire << '\n';
      io.err << summary.dump() << '\n';
    }
    return kOk;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return kError;
  }
}

int cmd_bench(const std::string& experiment, std::uint64_t seed,
              const std::optional<std::filesystem::path>& output,
              const std::optional<std::filesystem::path>& csv, Streams io) {
  if (!is_known_experiment(experiment)) {
    io.err << "error: unknown experiment '" << experiment
           << "' (expected disjunctive-negation, xor-chain or net-positive)\n";
    return kError;
  }
  try {
    auto report = run_experiment(experiment, seed);
    if (output) {
      write_file(*output, report.to_json() + "\n");
    } else {
      io.out << report.to_json() << '\n';
    }
    if (csv) write_file(*csv, report.to_csv());
    for (const auto& v : report.verdicts) {
      io.err << (v.passed ? "PASS " : "FAIL ") << v.name << ": " << v.detail << '\n';
    }
    return report.passed() ? kOk : kError;
  } catch (const std::exception& e) {
    io.err << "error: " << e.what() << '\n';
    return kError;
  }
}

int run(int argc, const char* const* argv, Streams io) {
  CLI::App app{"Boolean query-DAG retrieval over an inverted index"};
  app.require_subcommand(1);

  auto* index_cmd = app.add_subcommand("index", "Index management");
  index_cmd->require_subcommand(1);
  auto* build_cmd = index_cmd->add_subcommand("build", "Build an index from a JSONL corpus");
  std::filesystem::path corpus_path, index_out;
  build_cmd->add_option("corpus", corpus_path, "JSONL corpus")->required()->check(CLI::ExistingFile);
  build_cmd->add_option("-o,--output", index_out, "Index file to write")->required();

  auto* query_cmd = app.add_subcommand("query", "Query evaluation");
  query_cmd->require_subcommand(1);
  auto* eval_cmd = query_cmd->add_subcommand("eval", "Evaluate a dag or constraint file");
  QueryConfig qc;
  bool count = false, report = false;
  eval_cmd->add_option("-i,--index", qc.index_path, "Index file")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("dag", qc.dag_path, "Dag (wire format) or constraint JSON")
      ->required()
      ->check(CLI::ExistingFile);
  eval_cmd->add_flag("--adaptive-polarity", qc.eval.adaptive_leaf_polarity,
                     "Negative leaf responses for terms in more than half the documents");
  eval_cmd->add_flag("--parallel", qc.eval.parallel, "Evaluate independent nodes concurrently");
  eval_cmd->add_flag("--count", count, "Print the result count only");
  eval_cmd->add_flag("--report", report, "Print the full evaluation report as JSON");
  eval_cmd->add_flag("--per-node", qc.per_node_sizes, "Include per-node set sizes in --report");
  eval_cmd->add_flag("--fail-empty", qc.fail_empty, "Exit 2 when the result is empty");

  auto* compile_cmd = app.add_subcommand("compile", "Compile a constraint to a dag");
  std::filesystem::path constraint_path;
  std::optional<std::filesystem::path> dag_out;
  compile_cmd->add_option("constraint", constraint_path, "Constraint JSON")
      ->required()
      ->check(CLI::ExistingFile);
  compile_cmd->add_option("-o,--output", dag_out, "Dag file to write (default: stdout)");

  auto* bench_cmd = app.add_subcommand("bench", "Scaling experiments");
  bench_cmd->require_subcommand(1);
  auto* run_cmd = bench_cmd->add_subcommand("run", "Run one experiment");
  std::string experiment;
  std::uint64_t seed = 42;
  std::optional<std::filesystem::path> bench_out, bench_csv;
  run_cmd->add_option("experiment", experiment, "disjunctive-negation | xor-chain | net-positive")
      ->required();
  run_cmd->add_option("--seed", seed, "Corpus seed");
  run_cmd->add_option("-o,--output", bench_out, "Report JSON path (default: stdout)");
  run_cmd->add_option("--csv", bench_csv, "Also write rows as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream out, err;
    int rc = app.exit(e, out, err);
    io.out << out.str();
    io.err << err.str();
    return rc == 0 ? kOk : kError;
  }

  if (*build_cmd) return cmd_index_build(corpus_path, index_out, io);
  if (*eval_cmd) {
    if (count && report) {
      io.err << "error: --count and --report are exclusive\n";
      return kError;
    }
    qc.mode = report ? OutputMode::Report : count ? OutputMode::Count : OutputMode::Ids;
    return cmd_query(qc, io);
  }
  if (*compile_cmd) return cmd_compile(constraint_path, dag_out, io);
  if (*run_cmd) return cmd_bench(experiment, seed, bench_out, bench_csv, io);
  return kError;
}

}  // namespace pnsearch::cli
