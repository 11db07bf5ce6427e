#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pnsearch {

// Dense node index within one dag.
using NodeId = std::uint32_t;

enum class NodeKind : std::uint8_t { Term, And, Or, Not, True, False };

std::string_view to_string(NodeKind kind);

struct QueryNode {
  NodeKind kind = NodeKind::False;
  std::string term;               // Term only
  std::vector<NodeId> children;   // And/Or: any count, Not: one

  friend bool operator==(const QueryNode&, const QueryNode&) = default;
};

// A query graph. Edges point from operators to operands. `labels` optionally
// carries external node names (from the wire format) for diagnostics.
struct QueryDag {
  std::vector<QueryNode> nodes;
  NodeId root = 0;
  std::vector<std::string> labels;

  std::size_t size() const { return nodes.size(); }
  const QueryNode& operator[](NodeId id) const { return nodes[id]; }
  std::string label(NodeId id) const;

  NodeId add(QueryNode node);
  NodeId add_term(std::string term);
  NodeId add_and(std::vector<NodeId> children);
  NodeId add_or(std::vector<NodeId> children);
  NodeId add_not(NodeId child);
  NodeId add_const(bool value);
};

enum class DagErrorKind {
  CycleDetected,
  DanglingChild,
  ArityViolation,
  MissingRoot,
  DuplicateId,
  UnknownKind,
  Syntax,
  NotNormalized,
};

class DagError : public std::runtime_error {
 public:
  DagError(DagErrorKind kind, std::vector<NodeId> nodes, const std::string& message)
      : std::runtime_error(message), kind_(kind), nodes_(std::move(nodes)) {}

  DagErrorKind kind() const { return kind_; }
  // Nodes involved: the cycle for CycleDetected, the offending node otherwise.
  const std::vector<NodeId>& nodes() const { return nodes_; }

 private:
  DagErrorKind kind_;
  std::vector<NodeId> nodes_;
};

// Throws DagError unless every child resolves, arities hold and the graph is
// acyclic.
void validate(const QueryDag& dag);

// Children before parents, ties broken by smallest node id. Covers every node.
std::vector<NodeId> topo_order(const QueryDag& dag);

// Nodes reachable from the root, as a mask indexed by NodeId.
std::vector<bool> reachable_from_root(const QueryDag& dag);

// A dag whose And/Or nodes all have exactly two children. Construction
// validates; there is no way to hold an invalid one.
class NormalizedDag {
 public:
  explicit NormalizedDag(QueryDag dag);

  const QueryDag& dag() const { return dag_; }
  std::size_t size() const { return dag_.size(); }
  NodeId root() const { return dag_.root; }
  const QueryNode& operator[](NodeId id) const { return dag_.nodes[id]; }

 private:
  QueryDag dag_;
};

// Left-leaning binary chains for k-ary And/Or, unary collapse, empty And ->
// True, empty Or -> False.
NormalizedDag normalize(const QueryDag& dag);

struct CseResult {
  NormalizedDag dag;
  std::vector<NodeId> canonical;  // input node id -> node id in `dag`
};

// Hash-conses structurally identical nodes. And/Or children are compared as
// unordered pairs and emitted in ascending id order. Output ids follow the
// input's topological order, so cse is a fixed point on its own output.
CseResult cse_with_mapping(const NormalizedDag& dag);
NormalizedDag cse(const NormalizedDag& dag);

// Drops nodes unreachable from the root, preserving relative order.
QueryDag prune(const QueryDag& dag);
NormalizedDag prune(const NormalizedDag& dag);

// Structural equality of the root-reachable graphs, ignoring node ids.
bool structurally_equal(const QueryDag& a, const QueryDag& b);

// JSON wire format: {"root": id, "nodes": [{"id", "kind", "term"?, "children"?}]}.
// parse_dag resolves references but does not check acyclicity or arity; call
// validate for that.
QueryDag parse_dag(std::string_view text);
// Emits nodes in topological order with ids "n0", "n1", ...
std::string serialize_dag(const QueryDag& dag);

}  // namespace pnsearch
