#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "pnsearch/index.hpp"
#include "pnsearch/pn_algebra.hpp"
#include "pnsearch/query_dag.hpp"

namespace pnsearch {

struct EvalOptions {
  // Emit <U \ I(t), NEG> for leaves covering more than half the universe.
  bool adaptive_leaf_polarity = false;
  // Evaluate independent nodes concurrently, one topological level at a time.
  bool parallel = false;
  bool collect_counters = true;
  // Apply shrink() to every intermediate response. Off by default; when on,
  // materialized sets may leave U_active.
  bool shrink_dense = false;
  // Worker cap for parallel mode; 0 means hardware concurrency.
  unsigned max_threads = 0;
};

struct EvalReport {
  PostingList result;          // final, positive semantics
  CostCounters counters;
  std::uint64_t u_active_size = 0;
  std::uint64_t evaluated_nodes = 0;  // distinct nodes after CSE and pruning
  // Input node id -> |S_v| of the node it was merged into. Reachable nodes only.
  std::map<NodeId, std::uint64_t> per_node_set_sizes;
};

PNResponse leaf_response(const InvertedIndex& index, std::string_view term,
                         const EvalOptions& opts, CostCounters* counters = nullptr);

// POS: the set itself. NEG: complement against [0, universe_size), charged
// to finalization_touches.
PostingList finalize(const PNResponse& root, std::uint64_t universe_size,
                     CostCounters* counters = nullptr);

// Bottom-up memoized evaluation. Runs CSE and prunes unreachable nodes first,
// so each distinct subexpression is computed exactly once.
EvalReport compute_pn(const NormalizedDag& dag, const InvertedIndex& index,
                      const EvalOptions& opts = {});

// Union of the posting lists of every term reachable from the root.
PostingList active_universe(const QueryDag& dag, const InvertedIndex& index);

struct ReportJsonOptions {
  bool ids = true;              // false: emit "count" only
  bool per_node_sizes = false;
};
std::string report_to_json(const EvalReport& report, const InvertedIndex& index,
                           const ReportJsonOptions& opts = {});

}  // namespace pnsearch
