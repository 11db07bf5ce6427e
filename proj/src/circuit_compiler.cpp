#include "pnsearch/circuit_compiler.hpp"

#include <algorithm>
#include <bit>
#include <deque>

#include "json.hpp"

namespace pnsearch {

void DagBuilder::check(NodeId v) const {
  if (v >= dag_.size()) throw CircuitError("unknown node id " + std::to_string(v));
}

NodeId DagBuilder::intern(NodeKind kind, std::string term, std::vector<NodeId> children) {
  auto key = std::make_tuple(kind, std::move(term), std::move(children));
  auto it = table_.find(key);
  if (it != table_.end()) return it->second;
  NodeId id = dag_.add({kind, std::get<1>(key), std::get<2>(key)});
  table_.emplace(std::move(key), id);
  return id;
}

bool DagBuilder::is_const(NodeId v, bool value) const {
  return dag_.nodes[v].kind == (value ? NodeKind::True : NodeKind::False);
}

NodeId DagBuilder::term(std::string_view t) { return intern(NodeKind::Term, std::string(t), {}); }

NodeId DagBuilder::constant(bool value) {
  return intern(value ? NodeKind::True : NodeKind::False, {}, {});
}

NodeId DagBuilder::not_(NodeId a) {
  check(a);
  const auto& n = dag_.nodes[a];
  if (n.kind == NodeKind::True) return constant(false);
  if (n.kind == NodeKind::False) return constant(true);
  if (n.kind == NodeKind::Not) return n.children[0];
  return intern(NodeKind::Not, {}, {a});
}

namespace {

bool complementary(const QueryDag& dag, NodeId a, NodeId b) {
  auto negates = [&](NodeId x, NodeId y) {
    return dag.nodes[x].kind == NodeKind::Not && dag.nodes[x].children[0] == y;
  };
  return negates(a, b) || negates(b, a);
}

}  // namespace

NodeId DagBuilder::and_(NodeId a, NodeId b) {
  check(a);
  check(b);
  if (a == b) return a;
  if (is_const(a, false) || is_const(b, false)) return constant(false);
  if (is_const(a, true)) return b;
  if (is_const(b, true)) return a;
  if (complementary(dag_, a, b)) return constant(false);
  return intern(NodeKind::And, {}, {std::min(a, b), std::max(a, b)});
}

NodeId DagBuilder::or_(NodeId a, NodeId b) {
  check(a);
  check(b);
  if (a == b) return a;
  if (is_const(a, true) || is_const(b, true)) return constant(true);
  if (is_const(a, false)) return b;
  if (is_const(b, false)) return a;
  if (complementary(dag_, a, b)) return constant(true);
  return intern(NodeKind::Or, {}, {std::min(a, b), std::max(a, b)});
}

NodeId DagBuilder::and_all(const std::vector<NodeId>& xs) {
  if (xs.empty()) return constant(true);
  NodeId acc = xs[0];
  for (std::size_t i = 1; i < xs.size(); ++i) acc = and_(acc, xs[i]);
  return acc;
}

NodeId DagBuilder::or_all(const std::vector<NodeId>& xs) {
  if (xs.empty()) return constant(false);
  NodeId acc = xs[0];
  for (std::size_t i = 1; i < xs.size(); ++i) acc = or_(acc, xs[i]);
  return acc;
}

NormalizedDag DagBuilder::build(NodeId root) const {
  check(root);
  QueryDag dag = dag_;
  dag.root = root;
  return NormalizedDag(prune(dag));
}

NodeId gate_xor(DagBuilder& b, NodeId a, NodeId c) {
  return b.or_(b.and_(a, b.not_(c)), b.and_(b.not_(a), c));
}

NodeId gate_xnor(DagBuilder& b, NodeId a, NodeId c) { return b.not_(gate_xor(b, a, c)); }

FullAdderOut full_adder(DagBuilder& b, NodeId a, NodeId c, NodeId carry_in) {
  NodeId half = gate_xor(b, a, c);
  NodeId sum = gate_xor(b, half, carry_in);
  NodeId carry = b.or_(b.and_(a, c), b.and_(carry_in, half));
  return {sum, carry};
}

BitVec constant_bits(DagBuilder& b, std::uint64_t value, std::size_t width) {
  if (width < 64 && (value >> width) != 0) {
    throw CircuitError("constant " + std::to_string(value) + " does not fit in " +
                       std::to_string(width) + " bits");
  }
  BitVec v;
  for (std::size_t i = 0; i < width; ++i) v.bits.push_back(b.constant(i < 64 && ((value >> i) & 1u)));
  return v;
}

BitVec field_bits(DagBuilder& b, std::string_view field, std::size_t width) {
  BitVec v;
  for (std::size_t i = 0; i < width; ++i) {
    v.bits.push_back(b.term(std::string(field) + "#BIT" + std::to_string(i)));
  }
  return v;
}

namespace {

NodeId bit_or_false(DagBuilder& b, const BitVec& v, std::size_t i) {
  return i < v.width() ? v.bits[i] : b.constant(false);
}

unsigned bits_for(std::uint64_t bound) { return std::max(1u, static_cast<unsigned>(std::bit_width(bound))); }

// A value together with an upper bound on it, so provably-zero high bits can
// be dropped after each addition.
struct Bounded {
  BitVec bits;
  std::uint64_t bound;
};

Bounded add_bounded(DagBuilder& b, const Bounded& x, const Bounded& y) {
  Bounded out{add(b, x.bits, y.bits), x.bound + y.bound};
  out.bits.bits.resize(std::min<std::size_t>(out.bits.width(), bits_for(out.bound)));
  return out;
}

// Balanced pairwise adder tree.
Bounded sum_tree(DagBuilder& b, std::vector<Bounded> items) {
  if (items.empty()) return {BitVec{}, 0};
  std::deque<Bounded> queue(std::make_move_iterator(items.begin()), std::make_move_iterator(items.end()));
  while (queue.size() > 1) {
    Bounded x = std::move(queue.front());
    queue.pop_front();
    Bounded y = std::move(queue.front());
    queue.pop_front();
    queue.push_back(add_bounded(b, x, y));
  }
  return std::move(queue.front());
}

}  // namespace

BitVec add(DagBuilder& b, const BitVec& x, const BitVec& y) {
  const std::size_t width = std::max(x.width(), y.width());
  BitVec out;
  NodeId carry = b.constant(false);
  for (std::size_t i = 0; i < width; ++i) {
    auto fa = full_adder(b, bit_or_false(b, x, i), bit_or_false(b, y, i), carry);
    out.bits.push_back(fa.sum);
    carry = fa.carry;
  }
  out.bits.push_back(carry);
  return out;
}

NodeId compare_gt(DagBuilder& b, const BitVec& x, const BitVec& y) {
  const std::size_t width = std::max(x.width(), y.width());
  std::vector<NodeId> wins;
  NodeId equal_above = b.constant(true);
  for (std::size_t i = width; i-- > 0;) {
    NodeId xi = bit_or_false(b, x, i);
    NodeId yi = bit_or_false(b, y, i);
    wins.push_back(b.and_(b.and_(xi, b.not_(yi)), equal_above));
    equal_above = b.and_(equal_above, gate_xnor(b, xi, yi));
  }
  return b.or_all(wins);
}

BitVec weighted_sum(DagBuilder& b, const std::vector<WeightedTerm>& terms, unsigned max_width) {
  std::uint64_t total = 0;
  std::vector<Bounded> products;
  for (const auto& t : terms) {
    if (t.weight < 1 || t.weight >= (1u << 30)) {
      throw CircuitError("weight of '" + t.term + "' must be in [1, 2^30)");
    }
    total += t.weight;
    NodeId indicator = b.term(t.term);
    BitVec product;
    for (unsigned i = 0; i < bits_for(t.weight); ++i) {
      product.bits.push_back(((t.weight >> i) & 1u) ? indicator : b.constant(false));
    }
    products.push_back({std::move(product), t.weight});
  }
  if (std::bit_width(total) > max_width) {
    throw CircuitError("weighted sum up to " + std::to_string(total) + " overflows " +
                       std::to_string(max_width) + " bits");
  }
  return sum_tree(b, std::move(products)).bits;
}

NodeId weighted_sum_gt(DagBuilder& b, const std::vector<WeightedTerm>& good,
                       const std::vector<WeightedTerm>& bad, unsigned max_width) {
  if (good.empty() || bad.empty()) throw CircuitError("weighted_sum_gt needs terms on both sides");
  BitVec lhs = weighted_sum(b, good, max_width);
  BitVec rhs = weighted_sum(b, bad, max_width);
  return compare_gt(b, lhs, rhs);
}

NodeId count_at_least(DagBuilder& b, const std::vector<NodeId>& inputs, std::size_t k) {
  if (k == 0) return b.constant(true);
  if (k > inputs.size() + 1) {
    throw CircuitError("threshold " + std::to_string(k) + " exceeds input count + 1");
  }
  if (k == inputs.size() + 1) return b.constant(false);
  std::vector<Bounded> ones;
  for (NodeId v : inputs) ones.push_back({BitVec{{v}}, 1});
  BitVec popcount = sum_tree(b, std::move(ones)).bits;
  return compare_gt(b, popcount, constant_bits(b, k - 1, bits_for(k - 1)));
}

NodeId field_gt_const(DagBuilder& b, std::string_view field, std::uint64_t constant,
                      unsigned width) {
  if (width > 63) throw CircuitError("field width must be at most 63 bits");
  if ((constant >> width) != 0) {
    throw CircuitError("constant " + std::to_string(constant) + " does not fit field width " +
                       std::to_string(width));
  }
  return compare_gt(b, field_bits(b, field, width), constant_bits(b, constant, width));
}

namespace {

using nlohmann::json;

const json& require(const json& j, const char* key) {
  if (!j.contains(key)) throw CircuitError(std::string("constraint is missing '") + key + "'");
  return j[key];
}

template <typename T>
T require_as(const json& j, const char* key) {
  try {
    return require(j, key).get<T>();
  } catch (const json::exception& e) {
    throw CircuitError(std::string("constraint field '") + key + "': " + e.what());
  }
}

std::vector<WeightedTerm> weighted_terms(const json& j, const char* key) {
  const auto& arr = require(j, key);
  if (!arr.is_array()) throw CircuitError(std::string("'") + key + "' must be an array");
  std::vector<WeightedTerm> out;
  for (const auto& item : arr) {
    auto term = require_as<std::string>(item, "term");
    auto weight = require_as<std::int64_t>(item, "weight");
    if (weight < 1 || weight >= (std::int64_t{1} << 30)) {
      throw CircuitError("weight of '" + term + "' must be in [1, 2^30)");
    }
    out.push_back({std::move(term), static_cast<std::uint32_t>(weight)});
  }
  return out;
}

NodeId compile_node(DagBuilder& b, const json& j) {
  if (!j.is_object()) throw CircuitError("constraint must be a JSON object");
  auto kind = require_as<std::string>(j, "kind");
  if (kind == "weighted_sum_gt") {
    unsigned width = j.contains("max_width") ? require_as<unsigned>(j, "max_width") : kDefaultMaxSumWidth;
    return weighted_sum_gt(b, weighted_terms(j, "good"), weighted_terms(j, "bad"), width);
  }
  if (kind == "count_at_least") {
    std::vector<NodeId> inputs;
    for (const auto& t : require_as<std::vector<std::string>>(j, "terms")) inputs.push_back(b.term(t));
    auto k = require_as<std::int64_t>(j, "k");
    if (k < 0) throw CircuitError("k must be non-negative");
    return count_at_least(b, inputs, static_cast<std::size_t>(k));
  }
  if (kind == "field_gt_const") {
    auto c = require_as<std::int64_t>(j, "const");
    if (c < 0) throw CircuitError("const must be non-negative");
    return field_gt_const(b, require_as<std::string>(j, "field"), static_cast<std::uint64_t>(c),
                          require_as<unsigned>(j, "width"));
  }
  if (kind == "term") return b.term(require_as<std::string>(j, "term"));
  if (kind == "true") return b.constant(true);
  if (kind == "false") return b.constant(false);
  if (kind == "and" || kind == "or") {
    const auto& kids = require(j, "children");
    if (!kids.is_array()) throw CircuitError("'children' must be an array");
    std::vector<NodeId> ids;
    for (const auto& c : kids) ids.push_back(compile_node(b, c));
    return kind == "and" ? b.and_all(ids) : b.or_all(ids);
  }
  if (kind == "not") {
    if (j.contains("child")) return b.not_(compile_node(b, j["child"]));
    const auto& kids = require(j, "children");
    if (!kids.is_array() || kids.size() != 1) throw CircuitError("'not' takes exactly one child");
    return b.not_(compile_node(b, kids[0]));
  }
  throw CircuitError("unknown constraint kind '" + kind + "'");
}

}  // namespace

CompiledConstraint compile_constraint(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw CircuitError(std::string("constraint JSON: ") + e.what());
  }
  DagBuilder b;
  NodeId root = compile_node(b, j);
  auto dag = b.build(root);
  std::size_t n = dag.size();
  return {std::move(dag), n};
}

}  // namespace pnsearch
