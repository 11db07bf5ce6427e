#include "pnsearch/query_dag.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <queue>
#include <tuple>
#include <unordered_map>

#include "json.hpp"

namespace pnsearch {

std::string_view to_string(NodeKind kind) {
  switch (kind) {
    case NodeKind::Term: return "term";
    case NodeKind::And: return "and";
    case NodeKind::Or: return "or";
    case NodeKind::Not: return "not";
    case NodeKind::True: return "true";
    case NodeKind::False: return "false";
  }
  return "?";
}

std::string QueryDag::label(NodeId id) const {
  if (id < labels.size() && !labels[id].empty()) return labels[id];
  return "#" + std::to_string(id);
}

NodeId QueryDag::add(QueryNode node) {
  nodes.push_back(std::move(node));
  return static_cast<NodeId>(nodes.size() - 1);
}

NodeId QueryDag::add_term(std::string term) {
  return add({NodeKind::Term, std::move(term), {}});
}
NodeId QueryDag::add_and(std::vector<NodeId> children) {
  return add({NodeKind::And, {}, std::move(children)});
}
NodeId QueryDag::add_or(std::vector<NodeId> children) {
  return add({NodeKind::Or, {}, std::move(children)});
}
NodeId QueryDag::add_not(NodeId child) { return add({NodeKind::Not, {}, {child}}); }
NodeId QueryDag::add_const(bool value) {
  return add({value ? NodeKind::True : NodeKind::False, {}, {}});
}

namespace {

// Kahn's algorithm with a min-heap of ready nodes. Returns fewer than
// dag.size() ids when the graph has a cycle.
std::vector<NodeId> kahn_order(const QueryDag& dag) {
  const std::size_t n = dag.size();
  std::vector<std::size_t> pending(n, 0);
  std::vector<std::vector<NodeId>> parents(n);
  for (NodeId v = 0; v < n; ++v) {
    for (NodeId c : dag.nodes[v].children) {
      ++pending[v];
      parents[c].push_back(v);
    }
  }
  std::priority_queue<NodeId, std::vector<NodeId>, std::greater<>> ready;
  for (NodeId v = 0; v < n; ++v) {
    if (pending[v] == 0) ready.push(v);
  }
  std::vector<NodeId> order;
  order.reserve(n);
  while (!ready.empty()) {
    NodeId v = ready.top();
    ready.pop();
    order.push_back(v);
    for (NodeId p : parents[v]) {
      if (--pending[p] == 0) ready.push(p);
    }
  }
  return order;
}

std::vector<NodeId> find_cycle(const QueryDag& dag, const std::vector<NodeId>& sorted) {
  std::vector<bool> done(dag.size(), false);
  for (NodeId v : sorted) done[v] = true;
  // Every unsorted node has an unsorted child; walking children must revisit.
  NodeId start = 0;
  while (done[start]) ++start;
  std::vector<int> seen_at(dag.size(), -1);
  std::vector<NodeId> path;
  NodeId v = start;
  while (seen_at[v] < 0) {
    seen_at[v] = static_cast<int>(path.size());
    path.push_back(v);
    for (NodeId c : dag.nodes[v].children) {
      if (!done[c]) {
        v = c;
        break;
      }
    }
  }
  return {path.begin() + seen_at[v], path.end()};
}

void check_references(const QueryDag& dag) {
  if (dag.root >= dag.size()) {
    throw DagError(DagErrorKind::MissingRoot, {}, "dag root does not exist");
  }
  for (NodeId v = 0; v < dag.size(); ++v) {
    for (NodeId c : dag.nodes[v].children) {
      if (c >= dag.size()) {
        throw DagError(DagErrorKind::DanglingChild, {v},
                       "node " + dag.label(v) + " references missing child " + std::to_string(c));
      }
    }
  }
}

void check_arity(const QueryDag& dag, NodeId v) {
  const auto& node = dag.nodes[v];
  auto fail = [&](const std::string& what) {
    throw DagError(DagErrorKind::ArityViolation, {v},
                   "node " + dag.label(v) + " (" + std::string(to_string(node.kind)) + ") " + what);
  };
  switch (node.kind) {
    case NodeKind::Not:
      if (node.children.size() != 1) fail("must have exactly one child");
      break;
    case NodeKind::Term:
    case NodeKind::True:
    case NodeKind::False:
      if (!node.children.empty()) fail("must not have children");
      break;
    case NodeKind::And:
    case NodeKind::Or:
      break;
  }
}

}  // namespace

void validate(const QueryDag& dag) {
  check_references(dag);
  auto order = kahn_order(dag);
  if (order.size() != dag.size()) {
    auto cycle = find_cycle(dag, order);
    std::string msg = "cycle detected:";
    for (NodeId v : cycle) msg += " " + dag.label(v);
    throw DagError(DagErrorKind::CycleDetected, std::move(cycle), msg);
  }
  for (NodeId v = 0; v < dag.size(); ++v) check_arity(dag, v);
}

std::vector<NodeId> topo_order(const QueryDag& dag) {
  check_references(dag);
  auto order = kahn_order(dag);
  if (order.size() != dag.size()) {
    auto cycle = find_cycle(dag, order);
    throw DagError(DagErrorKind::CycleDetected, std::move(cycle), "cycle detected");
  }
  return order;
}

std::vector<bool> reachable_from_root(const QueryDag& dag) {
  std::vector<bool> seen(dag.size(), false);
  if (dag.root >= dag.size()) return seen;
  std::vector<NodeId> stack{dag.root};
  seen[dag.root] = true;
  while (!stack.empty()) {
    NodeId v = stack.back();
    stack.pop_back();
    for (NodeId c : dag.nodes[v].children) {
      if (!seen[c]) {
        seen[c] = true;
        stack.push_back(c);
      }
    }
  }
  return seen;
}

NormalizedDag::NormalizedDag(QueryDag dag) : dag_(std::move(dag)) {
  validate(dag_);
  for (NodeId v = 0; v < dag_.size(); ++v) {
    const auto& node = dag_.nodes[v];
    if ((node.kind == NodeKind::And || node.kind == NodeKind::Or) && node.children.size() != 2) {
      throw DagError(DagErrorKind::NotNormalized, {v},
                     "node " + dag_.label(v) + " is not binary");
    }
  }
}

NormalizedDag normalize(const QueryDag& dag) {
  validate(dag);
  QueryDag out;
  std::vector<NodeId> map(dag.size());
  for (NodeId v : topo_order(dag)) {
    const auto& node = dag.nodes[v];
    switch (node.kind) {
      case NodeKind::Term:
      case NodeKind::True:
      case NodeKind::False:
        map[v] = out.add({node.kind, node.term, {}});
        break;
      case NodeKind::Not:
        map[v] = out.add_not(map[node.children[0]]);
        break;
      case NodeKind::And:
      case NodeKind::Or: {
        const auto& kids = node.children;
        if (kids.empty()) {
          map[v] = out.add_const(node.kind == NodeKind::And);
        } else {
          NodeId acc = map[kids[0]];
          for (std::size_t i = 1; i < kids.size(); ++i) {
            acc = out.add({node.kind, {}, {acc, map[kids[i]]}});
          }
          map[v] = acc;
        }
        break;
      }
    }
  }
  out.root = map[dag.root];
  return NormalizedDag(std::move(out));
}

CseResult cse_with_mapping(const NormalizedDag& input) {
  const QueryDag& dag = input.dag();
  using Key = std::tuple<NodeKind, std::string, std::vector<NodeId>>;
  std::map<Key, NodeId> table;
  QueryDag out;
  std::vector<NodeId> map(dag.size());
  for (NodeId v : topo_order(dag)) {
    const auto& node = dag.nodes[v];
    std::vector<NodeId> kids;
    kids.reserve(node.children.size());
    for (NodeId c : node.children) kids.push_back(map[c]);
    if (node.kind == NodeKind::And || node.kind == NodeKind::Or) {
      std::sort(kids.begin(), kids.end());
    }
    Key key{node.kind, node.kind == NodeKind::Term ? node.term : std::string{}, kids};
    auto it = table.find(key);
    if (it != table.end()) {
      map[v] = it->second;
      continue;
    }
    NodeId id = out.add({node.kind, std::get<1>(key), std::move(kids)});
    table.emplace(std::move(key), id);
    map[v] = id;
  }
  out.root = map[dag.root];
  return {NormalizedDag(std::move(out)), std::move(map)};
}

NormalizedDag cse(const NormalizedDag& dag) { return cse_with_mapping(dag).dag; }

QueryDag prune(const QueryDag& dag) {
  check_references(dag);
  auto keep = reachable_from_root(dag);
  std::vector<NodeId> map(dag.size(), 0);
  QueryDag out;
  for (NodeId v = 0; v < dag.size(); ++v) {
    if (!keep[v]) continue;
    map[v] = static_cast<NodeId>(out.nodes.size());
    out.nodes.push_back(dag.nodes[v]);
    if (!dag.labels.empty()) out.labels.push_back(v < dag.labels.size() ? dag.labels[v] : "");
  }
  for (auto& node : out.nodes) {
    for (auto& c : node.children) c = map[c];
  }
  out.root = map[dag.root];
  return out;
}

NormalizedDag prune(const NormalizedDag& dag) { return NormalizedDag(prune(dag.dag())); }

bool structurally_equal(const QueryDag& a, const QueryDag& b) {
  if (a.root >= a.size() || b.root >= b.size()) return false;
  std::unordered_map<NodeId, NodeId> fwd, back;
  std::vector<std::pair<NodeId, NodeId>> stack{{a.root, b.root}};
  while (!stack.empty()) {
    auto [x, y] = stack.back();
    stack.pop_back();
    auto f = fwd.find(x);
    auto r = back.find(y);
    if (f != fwd.end() || r != back.end()) {
      if (f == fwd.end() || r == back.end() || f->second != y || r->second != x) return false;
      continue;
    }
    fwd.emplace(x, y);
    back.emplace(y, x);
    const auto& nx = a.nodes[x];
    const auto& ny = b.nodes[y];
    if (nx.kind != ny.kind || nx.term != ny.term || nx.children.size() != ny.children.size()) {
      return false;
    }
    for (std::size_t i = 0; i < nx.children.size(); ++i) {
      stack.emplace_back(nx.children[i], ny.children[i]);
    }
  }
  return true;
}

namespace {

[[noreturn]] void syntax_error(const std::string& msg) {
  throw DagError(DagErrorKind::Syntax, {}, "dag syntax error: " + msg);
}

std::string position_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

NodeKind parse_kind(const std::string& s, const std::string& id) {
  static const std::map<std::string, NodeKind, std::less<>> kKinds = {
      {"term", NodeKind::Term}, {"and", NodeKind::And},   {"or", NodeKind::Or},
      {"not", NodeKind::Not},   {"true", NodeKind::True}, {"false", NodeKind::False}};
  auto it = kKinds.find(s);
  if (it == kKinds.end()) {
    throw DagError(DagErrorKind::UnknownKind, {}, "node '" + id + "' has unknown kind '" + s + "'");
  }
  return it->second;
}

}  // namespace

QueryDag parse_dag(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    syntax_error(position_of(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + e.what());
  }
  if (!j.is_object()) syntax_error("top level must be an object");
  if (!j.contains("root") || !j["root"].is_string()) syntax_error("missing string field 'root'");
  if (!j.contains("nodes") || !j["nodes"].is_array()) syntax_error("missing array field 'nodes'");

  QueryDag dag;
  std::unordered_map<std::string, NodeId> ids;
  std::vector<std::vector<std::string>> child_names;
  for (std::size_t i = 0; i < j["nodes"].size(); ++i) {
    const auto& jn = j["nodes"][i];
    const std::string where = "nodes[" + std::to_string(i) + "]";
    if (!jn.is_object()) syntax_error(where + " is not an object");
    if (!jn.contains("id") || !jn["id"].is_string()) syntax_error(where + " lacks string 'id'");
    if (!jn.contains("kind") || !jn["kind"].is_string()) syntax_error(where + " lacks string 'kind'");
    auto id = jn["id"].get<std::string>();
    QueryNode node;
    node.kind = parse_kind(jn["kind"].get<std::string>(), id);
    if (node.kind == NodeKind::Term) {
      if (!jn.contains("term") || !jn["term"].is_string()) syntax_error(where + " lacks string 'term'");
      node.term = jn["term"].get<std::string>();
    }
    std::vector<std::string> kids;
    if (jn.contains("children")) {
      if (!jn["children"].is_array()) syntax_error(where + " 'children' must be an array");
      for (const auto& c : jn["children"]) {
        if (!c.is_string()) syntax_error(where + " child ids must be strings");
        kids.push_back(c.get<std::string>());
      }
    }
    NodeId nid = static_cast<NodeId>(dag.nodes.size());
    if (!ids.emplace(id, nid).second) {
      throw DagError(DagErrorKind::DuplicateId, {nid}, "duplicate node id '" + id + "'");
    }
    dag.nodes.push_back(std::move(node));
    dag.labels.push_back(id);
    child_names.push_back(std::move(kids));
  }
  for (NodeId v = 0; v < dag.size(); ++v) {
    for (const auto& name : child_names[v]) {
      auto it = ids.find(name);
      if (it == ids.end()) {
        throw DagError(DagErrorKind::DanglingChild, {v},
                       "node '" + dag.labels[v] + "' references unknown child '" + name + "'");
      }
      dag.nodes[v].children.push_back(it->second);
    }
  }
  auto root = j["root"].get<std::string>();
  auto it = ids.find(root);
  if (it == ids.end()) throw DagError(DagErrorKind::MissingRoot, {}, "root '" + root + "' not found");
  dag.root = it->second;
  return dag;
}

std::string serialize_dag(const QueryDag& dag) {
  auto order = topo_order(dag);
  std::vector<NodeId> pos(dag.size());
  for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = static_cast<NodeId>(i);
  auto name = [&](NodeId v) { return "n" + std::to_string(pos[v]); };

  nlohmann::ordered_json nodes = nlohmann::ordered_json::array();
  for (NodeId v : order) {
    const auto& node = dag.nodes[v];
    nlohmann::ordered_json jn;
    jn["id"] = name(v);
    jn["kind"] = std::string(to_string(node.kind));
    if (node.kind == NodeKind::Term) jn["term"] = node.term;
    if (!node.children.empty()) {
      auto kids = nlohmann::ordered_json::array();
      for (NodeId c : node.children) kids.push_back(name(c));
      jn["children"] = std::move(kids);
    }
    nodes.push_back(std::move(jn));
  }
  nlohmann::ordered_json out;
  out["root"] = name(dag.root);
  out["nodes"] = std::move(nodes);
  return out.dump();
}

}  // namespace pnsearch
