#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "pnsearch/evaluator.hpp"

namespace pnsearch::cli {

enum ExitCode : int { kOk = 0, kError = 1, kEmptyResult = 2 };

enum class OutputMode { Ids, Count, Report };

struct QueryConfig {
  std::filesystem::path index_path;
  std::filesystem::path dag_path;
  EvalOptions eval;
  OutputMode mode = OutputMode::Ids;
  bool fail_empty = false;
  bool per_node_sizes = false;
};

struct Streams {
  std::ostream& out;
  std::ostream& err;
};

int cmd_index_build(const std::filesystem::path& corpus_path,
                    const std::filesystem::path& index_path, Streams io);
int cmd_query(const QueryConfig& config, Streams io);
// Writes the dag to `dag_out` (or stdout when empty) and reports the node count.
int cmd_compile(const std::filesystem::path& constraint_path,
                const std::optional<std::filesystem::path>& dag_out, Streams io);
int cmd_bench(const std::string& experiment, std::uint64_t seed,
              const std::optional<std::filesystem::path>& output,
              const std::optional<std::filesystem::path>& csv, Streams io);

// Full command line: `index build`, `query eval`, `compile`, `bench run`.
int run(int argc, const char* const* argv, Streams io);

}  // namespace pnsearch::cli
