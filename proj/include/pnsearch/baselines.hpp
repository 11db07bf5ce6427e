#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pnsearch/index.hpp"
#include "pnsearch/pn_algebra.hpp"
#include "pnsearch/query_dag.hpp"

namespace pnsearch {

// Ground truth: evaluates the dag once per document over a dense truth table.
// Accepts any valid dag (k-ary operators, constants, shared nodes).
PostingList eval_oracle(const QueryDag& dag, const InvertedIndex& index);

struct BaselineResult {
  PostingList result;
  CostCounters counters;
};

// Term-at-a-time over absolute sets: every node materializes D(v). Negation
// and True materialize against the universe.
BaselineResult eval_naive_taat(const QueryDag& dag, const InvertedIndex& index);

class ExpansionLimitExceeded : public std::runtime_error {
 public:
  explicit ExpansionLimitExceeded(std::uint64_t reached)
      : std::runtime_error("tree expansion exceeded limit at " + std::to_string(reached) + " nodes"),
        reached_(reached) {}
  std::uint64_t reached() const { return reached_; }

 private:
  std::uint64_t reached_;
};

class WorkLimitExceeded : public std::runtime_error {
 public:
  explicit WorkLimitExceeded(std::uint64_t reached)
      : std::runtime_error("tree evaluation exceeded work limit at " + std::to_string(reached) +
                           " touches"),
        reached_(reached) {}
  std::uint64_t reached() const { return reached_; }

 private:
  std::uint64_t reached_;
};

inline constexpr std::uint64_t kDefaultExpansionLimit = std::uint64_t{1} << 22;
inline constexpr std::uint64_t kDefaultWorkLimit = std::uint64_t{1} << 27;

// Number of nodes in the tree obtained by duplicating every shared node per
// parent path. Saturates at UINT64_MAX.
std::uint64_t unrolled_size(const QueryDag& dag);

struct TreeExpansion {
  QueryDag tree;
  std::uint64_t node_count = 0;
};

// Throws ExpansionLimitExceeded before materializing when the tree would
// exceed `limit` nodes.
TreeExpansion unroll_to_tree(const QueryDag& dag, std::uint64_t limit = kDefaultExpansionLimit);

bool is_tree(const QueryDag& dag);

// Simulated document-at-a-time evaluation: recursive, no memoization, and
// negation materialized as a complement scan (the match-all behavior).
// Counters model iterator work. Throws WorkLimitExceeded.
BaselineResult eval_tree_iterative(const QueryDag& tree, const InvertedIndex& index,
                                   std::uint64_t work_limit = kDefaultWorkLimit);

// A Boolean circuit with fixed inputs. Gates reference earlier gates only.
enum class GateKind : std::uint8_t { Input, And, Or, Not };

struct Gate {
  GateKind kind = GateKind::Input;
  bool value = false;                  // Input only
  std::vector<std::size_t> operands;   // indices of earlier gates
};

struct CircuitInstance {
  std::vector<Gate> gates;
  std::size_t output = 0;
};

class CircuitInstanceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void validate_circuit(const CircuitInstance& c);
bool simulate_circuit(const CircuitInstance& c);

// One document, one token "TRUE". True inputs become Term("TRUE"), False
// inputs Not(Term("TRUE")).
std::pair<InvertedIndex, QueryDag> cvp_reduce(const CircuitInstance& c);

inline constexpr std::string_view kTrueToken = "TRUE";

// JSON: {"root": id, "nodes": [{"id", "kind": "input"|"and"|"or"|"not",
// "value"?, "children"?}]}
CircuitInstance parse_circuit(std::string_view text);
std::string serialize_circuit(const CircuitInstance& c);

}  // namespace pnsearch
