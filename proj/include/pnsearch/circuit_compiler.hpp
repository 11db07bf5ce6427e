#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "pnsearch/query_dag.hpp"

namespace pnsearch {

class CircuitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Little-endian vector of bit nodes: bits[0] is the least significant.
struct BitVec {
  std::vector<NodeId> bits;
  std::size_t width() const { return bits.size(); }
};

struct WeightedTerm {
  std::string term;
  std::uint32_t weight = 1;
};

// Hash-consing builder for binary query dags. Requests for a node that
// already exists return the existing id. Constant operands are folded, and
// idempotent or double-negated forms collapse to their operand.
class DagBuilder {
 public:
  NodeId term(std::string_view t);
  NodeId constant(bool value);
  NodeId not_(NodeId a);
  NodeId and_(NodeId a, NodeId b);
  NodeId or_(NodeId a, NodeId b);

  NodeId and_all(const std::vector<NodeId>& xs);
  NodeId or_all(const std::vector<NodeId>& xs);

  std::size_t size() const { return dag_.size(); }
  const QueryDag& dag() const { return dag_; }
  bool is_const(NodeId v, bool value) const;

  // Dag rooted at `root` with unreachable nodes pruned.
  NormalizedDag build(NodeId root) const;

 private:
  NodeId intern(NodeKind kind, std::string term, std::vector<NodeId> children);
  void check(NodeId v) const;

  QueryDag dag_;
  std::map<std::tuple<NodeKind, std::string, std::vector<NodeId>>, NodeId> table_;
};

NodeId gate_xor(DagBuilder& b, NodeId a, NodeId c);
// a == c
NodeId gate_xnor(DagBuilder& b, NodeId a, NodeId c);

struct FullAdderOut {
  NodeId sum;
  NodeId carry;
};
FullAdderOut full_adder(DagBuilder& b, NodeId a, NodeId c, NodeId carry_in);

// Constant wired from True/False nodes; `width` bits.
BitVec constant_bits(DagBuilder& b, std::uint64_t value, std::size_t width);
// Term leaves `field#BIT<i>` for i < width.
BitVec field_bits(DagBuilder& b, std::string_view field, std::size_t width);

// Ripple-carry sum; result width = max(wx, wy) + 1.
BitVec add(DagBuilder& b, const BitVec& x, const BitVec& y);
// True where value(x) > value(y); shorter operand is zero-extended.
NodeId compare_gt(DagBuilder& b, const BitVec& x, const BitVec& y);

inline constexpr unsigned kDefaultMaxSumWidth = 32;

// Per document: sum of good weights present > sum of bad weights present.
NodeId weighted_sum_gt(DagBuilder& b, const std::vector<WeightedTerm>& good,
                       const std::vector<WeightedTerm>& bad,
                       unsigned max_width = kDefaultMaxSumWidth);

// True where at least k inputs hold. k == 0 is True, k == inputs + 1 is False.
NodeId count_at_least(DagBuilder& b, const std::vector<NodeId>& inputs, std::size_t k);

// True where the bit-sliced field value exceeds `constant`.
NodeId field_gt_const(DagBuilder& b, std::string_view field, std::uint64_t constant,
                      unsigned width);

// Sum of weighted indicators with zero-valued high bits trimmed.
BitVec weighted_sum(DagBuilder& b, const std::vector<WeightedTerm>& terms, unsigned max_width);

// Constraint DSL (JSON): weighted_sum_gt, count_at_least, field_gt_const,
// term, and/or/not combinators.
struct CompiledConstraint {
  NormalizedDag dag;
  std::size_t node_count;
};
CompiledConstraint compile_constraint(std::string_view json_text);

}  // namespace pnsearch
