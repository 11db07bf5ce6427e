#include "pnsearch/baselines.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <optional>
#include <unordered_map>

#include "json.hpp"

namespace pnsearch {

namespace {

std::vector<NodeId> reachable_topo(const QueryDag& dag) {
  auto reach = reachable_from_root(dag);
  std::vector<NodeId> order;
  for (NodeId v : topo_order(dag)) {
    if (reach[v]) order.push_back(v);
  }
  return order;
}

}  // namespace

PostingList eval_oracle(const QueryDag& dag, const InvertedIndex& index) {
  validate(dag);
  const auto order = reachable_topo(dag);
  const std::uint64_t universe = index.universe_size();

  std::map<std::string, std::vector<bool>, std::less<>> membership;
  for (NodeId v : order) {
    const auto& node = dag.nodes[v];
    if (node.kind != NodeKind::Term || membership.count(node.term)) continue;
    std::vector<bool> bits(universe, false);
    for (DocId d : index.lookup(node.term)) bits[d] = true;
    membership.emplace(node.term, std::move(bits));
  }

  PostingList out;
  std::vector<char> truth(dag.size(), 0);
  for (std::uint64_t d = 0; d < universe; ++d) {
    for (NodeId v : order) {
      const auto& node = dag.nodes[v];
      bool t = false;
      switch (node.kind) {
        case NodeKind::Term: t = membership.find(node.term)->second[d]; break;
        case NodeKind::True: t = true; break;
        case NodeKind::False: t = false; break;
        case NodeKind::Not: t = !truth[node.children[0]]; break;
        case NodeKind::And:
          t = std::all_of(node.children.begin(), node.children.end(),
                          [&](NodeId c) { return truth[c] != 0; });
          break;
        case NodeKind::Or:
          t = std::any_of(node.children.begin(), node.children.end(),
                          [&](NodeId c) { return truth[c] != 0; });
          break;
      }
      truth[v] = t;
    }
    if (truth[dag.root]) out.push_back(static_cast<DocId>(d));
  }
  return out;
}

BaselineResult eval_naive_taat(const QueryDag& dag, const InvertedIndex& index) {
  validate(dag);
  BaselineResult res;
  CostCounters* c = &res.counters;
  const std::uint64_t universe = index.universe_size();
  std::vector<PostingList> sets(dag.size());
  for (NodeId v : reachable_topo(dag)) {
    const auto& node = dag.nodes[v];
    PostingList s;
    switch (node.kind) {
      case NodeKind::Term: s = index.lookup(node.term); break;
      case NodeKind::True: s = set_complement({}, universe, c); break;
      case NodeKind::False: break;
      case NodeKind::Not: s = set_complement(sets[node.children[0]], universe, c); break;
      case NodeKind::And:
        if (node.children.empty()) {
          s = set_complement({}, universe, c);
        } else {
          s = sets[node.children[0]];
          for (std::size_t i = 1; i < node.children.size(); ++i) {
            s = set_intersect(s, sets[node.children[i]], c);
          }
        }
        break;
      case NodeKind::Or:
        for (NodeId k : node.children) s = set_union(s, sets[k], c);
        break;
    }
    ++c->node_visits;
    c->note_materialized(s.size());
    sets[v] = std::move(s);
  }
  res.result = sets[dag.root];
  return res;
}

std::uint64_t unrolled_size(const QueryDag& dag) {
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::uint64_t> size(dag.size(), 0);
  for (NodeId v : topo_order(dag)) {
    std::uint64_t s = 1;
    for (NodeId c : dag.nodes[v].children) {
      s = (kMax - s < size[c]) ? kMax : s + size[c];
    }
    size[v] = s;
  }
  return dag.size() ? size[dag.root] : 0;
}

namespace {

NodeId copy_subtree(const QueryDag& dag, NodeId v, QueryDag& out) {
  const auto& node = dag.nodes[v];
  QueryNode copy{node.kind, node.term, {}};
  copy.children.reserve(node.children.size());
  for (NodeId c : node.children) copy.children.push_back(copy_subtree(dag, c, out));
  return out.add(std::move(copy));
}

}  // namespace

TreeExpansion unroll_to_tree(const QueryDag& dag, std::uint64_t limit) {
  validate(dag);
  std::uint64_t n = unrolled_size(dag);
  if (n > limit) throw ExpansionLimitExceeded(n);
  TreeExpansion out;
  out.tree.nodes.reserve(n);
  out.tree.root = copy_subtree(dag, dag.root, out.tree);
  out.node_count = n;
  return out;
}

bool is_tree(const QueryDag& dag) {
  auto reach = reachable_from_root(dag);
  std::vector<unsigned> parents(dag.size(), 0);
  for (NodeId v = 0; v < dag.size(); ++v) {
    if (!reach[v]) continue;
    for (NodeId c : dag.nodes[v].children) {
      if (++parents[c] > 1) return false;
    }
  }
  return dag.root >= dag.size() || parents[dag.root] == 0;
}

namespace {

class TreeWalker {
 public:
  TreeWalker(const QueryDag& tree, const InvertedIndex& index, std::uint64_t limit)
      : tree_(tree), index_(index), limit_(limit) {}

  PostingList eval(NodeId v) {
    const auto& node = tree_.nodes[v];
    const auto universe = index_.universe_size();
    PostingList s;
    switch (node.kind) {
      case NodeKind::Term: s = index_.lookup(node.term); break;
      case NodeKind::True: s = set_complement({}, universe, &counters_); break;
      case NodeKind::False: break;
      case NodeKind::Not: s = set_complement(eval(node.children[0]), universe, &counters_); break;
      case NodeKind::And:
        if (node.children.empty()) {
          s = set_complement({}, universe, &counters_);
        } else {
          s = eval(node.children[0]);
          for (std::size_t i = 1; i < node.children.size(); ++i) {
            s = set_intersect(s, eval(node.children[i]), &counters_);
            check();
          }
        }
        break;
      case NodeKind::Or:
        for (NodeId c : node.children) {
          s = set_union(s, eval(c), &counters_);
          check();
        }
        break;
    }
    ++counters_.node_visits;
    counters_.note_materialized(s.size());
    check();
    return s;
  }

  const CostCounters& counters() const { return counters_; }

 private:
  void check() const {
    if (counters_.element_touches > limit_) throw WorkLimitExceeded(counters_.element_touches);
  }

  const QueryDag& tree_;
  const InvertedIndex& index_;
  std::uint64_t limit_;
  CostCounters counters_;
};

}  // namespace

BaselineResult eval_tree_iterative(const QueryDag& tree, const InvertedIndex& index,
                                   std::uint64_t work_limit) {
  validate(tree);
  if (!is_tree(tree)) {
    throw std::invalid_argument("eval_tree_iterative requires a tree-shaped query");
  }
  TreeWalker walker(tree, index, work_limit);
  BaselineResult res;
  res.result = walker.eval(tree.root);
  res.counters = walker.counters();
  return res;
}

void validate_circuit(const CircuitInstance& c) {
  if (c.gates.empty()) throw CircuitInstanceError("circuit has no gates");
  if (c.output >= c.gates.size()) throw CircuitInstanceError("circuit output does not exist");
  for (std::size_t g = 0; g < c.gates.size(); ++g) {
    const auto& gate = c.gates[g];
    for (std::size_t op : gate.operands) {
      if (op >= g) {
        throw CircuitInstanceError("gate " + std::to_string(g) + " uses operand " +
                                   std::to_string(op) + " that does not precede it");
      }
    }
    bool ok = true;
    switch (gate.kind) {
      case GateKind::Input: ok = gate.operands.empty(); break;
      case GateKind::Not: ok = gate.operands.size() == 1; break;
      case GateKind::And:
      case GateKind::Or: ok = !gate.operands.empty(); break;
    }
    if (!ok) throw CircuitInstanceError("gate " + std::to_string(g) + " has wrong operand count");
  }
}

bool simulate_circuit(const CircuitInstance& c) {
  validate_circuit(c);
  std::vector<bool> value(c.gates.size());
  for (std::size_t g = 0; g < c.gates.size(); ++g) {
    const auto& gate = c.gates[g];
    switch (gate.kind) {
      case GateKind::Input: value[g] = gate.value; break;
      case GateKind::Not: value[g] = !value[gate.operands[0]]; break;
      case GateKind::And: {
        bool v = true;
        for (auto op : gate.operands) v = v && value[op];
        value[g] = v;
        break;
      }
      case GateKind::Or: {
        bool v = false;
        for (auto op : gate.operands) v = v || value[op];
        value[g] = v;
        break;
      }
    }
  }
  return value[c.output];
}

std::pair<InvertedIndex, QueryDag> cvp_reduce(const CircuitInstance& c) {
  validate_circuit(c);
  std::map<std::string, PostingList, std::less<>> postings;
  postings.emplace(std::string(kTrueToken), PostingList{0});
  auto index = InvertedIndex::from_postings(1, std::move(postings));

  QueryDag dag;
  std::vector<NodeId> map(c.gates.size());
  std::optional<NodeId> true_leaf;
  auto leaf = [&] {
    if (!true_leaf) true_leaf = dag.add_term(std::string(kTrueToken));
    return *true_leaf;
  };
  for (std::size_t g = 0; g < c.gates.size(); ++g) {
    const auto& gate = c.gates[g];
    std::vector<NodeId> kids;
    for (auto op : gate.operands) kids.push_back(map[op]);
    switch (gate.kind) {
      case GateKind::Input: map[g] = gate.value ? leaf() : dag.add_not(leaf()); break;
      case GateKind::Not: map[g] = dag.add_not(kids[0]); break;
      case GateKind::And: map[g] = dag.add_and(std::move(kids)); break;
      case GateKind::Or: map[g] = dag.add_or(std::move(kids)); break;
    }
  }
  dag.root = map[c.output];
  return {std::move(index), std::move(dag)};
}

CircuitInstance parse_circuit(std::string_view text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw CircuitInstanceError(std::string("circuit JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("root") || !j.contains("nodes") || !j["nodes"].is_array()) {
    throw CircuitInstanceError("circuit JSON needs 'root' and 'nodes'");
  }
  CircuitInstance c;
  std::unordered_map<std::string, std::size_t> ids;
  try {
    for (const auto& jn : j["nodes"]) {
      auto id = jn.at("id").get<std::string>();
      auto kind = jn.at("kind").get<std::string>();
      Gate g;
      if (kind == "input") {
        g.kind = GateKind::Input;
        g.value = jn.at("value").get<bool>();
      } else if (kind == "and") {
        g.kind = GateKind::And;
      } else if (kind == "or") {
        g.kind = GateKind::Or;
      } else if (kind == "not") {
        g.kind = GateKind::Not;
      } else {
        throw CircuitInstanceError("unknown gate kind '" + kind + "'");
      }
      if (jn.contains("children")) {
        for (const auto& ch : jn["children"]) {
          auto it = ids.find(ch.get<std::string>());
          if (it == ids.end()) {
            throw CircuitInstanceError("gate '" + id + "' uses an undefined or later gate");
          }
          g.operands.push_back(it->second);
        }
      }
      if (!ids.emplace(id, c.gates.size()).second) {
        throw CircuitInstanceError("duplicate gate id '" + id + "'");
      }
      c.gates.push_back(std::move(g));
    }
    auto root = ids.find(j["root"].get<std::string>());
    if (root == ids.end()) throw CircuitInstanceError("circuit root not found");
    c.output = root->second;
  } catch (const json::exception& e) {
    throw CircuitInstanceError(std::string("circuit JSON: ") + e.what());
  }
  validate_circuit(c);
  return c;
}

std::string serialize_circuit(const CircuitInstance& c) {
  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  for (std::size_t g = 0; g < c.gates.size(); ++g) {
    const auto& gate = c.gates[g];
    nlohmann::ordered_json jn;
    jn["id"] = "g" + std::to_string(g);
    switch (gate.kind) {
      case GateKind::Input:
        jn["kind"] = "input";
        jn["value"] = gate.value;
        break;
      case GateKind::And: jn["kind"] = "and"; break;
      case GateKind::Or: jn["kind"] = "or"; break;
      case GateKind::Not: jn["kind"] = "not"; break;
    }
    if (!gate.operands.empty()) {
      auto kids = nlohmann::ordered_json::array();
      for (auto op : gate.operands) kids.push_back("g" + std::to_string(op));
      jn["children"] = std::move(kids);
    }
    nodes.push_back(std::move(jn));
  }
  nlohmann::ordered_json out;
  out["root"] = "g" + std::to_string(c.output);
  out["nodes"] = std::move(nodes);
  return out.dump();
}

}  // namespace pnsearch
