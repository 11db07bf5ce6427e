#include <gtest/gtest.h>

#include "pnsearch/baselines.hpp"
#include "pnsearch/circuit_compiler.hpp"
#include "pnsearch/query_dag.hpp"
#include "support/generators.hpp"

namespace pnsearch {
namespace {

DagErrorKind error_kind_of(const QueryDag& dag) {
  try {
    validate(dag);
  } catch (const DagError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "dag validated unexpectedly";
  return DagErrorKind::Syntax;
}

TEST(Validate, SingleTermIsValid) {
  QueryDag dag;
  dag.root = dag.add_term("cat");
  EXPECT_NO_THROW(validate(dag));
}

TEST(Validate, SelfCycle) {
  QueryDag dag;
  dag.add_term("a");
  dag.nodes.push_back({NodeKind::And, "", {0, 1}});
  dag.root = 1;
  try {
    validate(dag);
    FAIL();
  } catch (const DagError& e) {
    EXPECT_EQ(e.kind(), DagErrorKind::CycleDetected);
    EXPECT_EQ(e.nodes(), (std::vector<NodeId>{1}));
  }
}

TEST(Validate, LongerCycleReportsMembers) {
  QueryDag dag;
  dag.nodes.push_back({NodeKind::Not, "", {1}});
  dag.nodes.push_back({NodeKind::Not, "", {2}});
  dag.nodes.push_back({NodeKind::Or, "", {0, 3}});
  dag.nodes.push_back({NodeKind::Term, "x", {}});
  dag.root = 0;
  try {
    validate(dag);
    FAIL();
  } catch (const DagError& e) {
    EXPECT_EQ(e.kind(), DagErrorKind::CycleDetected);
    auto nodes = e.nodes();
    std::sort(nodes.begin(), nodes.end());
    EXPECT_EQ(nodes, (std::vector<NodeId>{0, 1, 2}));
  }
}

TEST(Validate, NotWithTwoChildren) {
  QueryDag dag;
  auto a = dag.add_term("a");
  auto b = dag.add_term("b");
  dag.root = dag.add({NodeKind::Not, "", {a, b}});
  EXPECT_EQ(error_kind_of(dag), DagErrorKind::ArityViolation);
}

TEST(Validate, LeafWithChildrenAndDangling) {
  QueryDag leafy;
  leafy.add_term("a");
  leafy.root = leafy.add({NodeKind::True, "", {0}});
  EXPECT_EQ(error_kind_of(leafy), DagErrorKind::ArityViolation);

  QueryDag dangling;
  dangling.root = dangling.add_not(5);
  EXPECT_EQ(error_kind_of(dangling), DagErrorKind::DanglingChild);

  QueryDag no_root;
  EXPECT_EQ(error_kind_of(no_root), DagErrorKind::MissingRoot);
}

TEST(TopoOrder, ChainAndTieBreak) {
  QueryDag dag;
  dag.nodes.push_back({NodeKind::Not, "", {1}});
  dag.nodes.push_back({NodeKind::Term, "t", {}});
  dag.root = 0;
  EXPECT_EQ(topo_order(dag), (std::vector<NodeId>{1, 0}));
}

TEST(TopoOrder, EdgePropertyOnRandomDags) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    auto dag = testing::random_kary_dag(rng, 40, 6);
    // Shuffle ids so the order is not trivially the construction order.
    std::vector<NodeId> perm(dag.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    QueryDag shuffled;
    shuffled.nodes.resize(dag.size());
    for (NodeId v = 0; v < dag.size(); ++v) {
      auto node = dag.nodes[v];
      for (auto& c : node.children) c = perm[c];
      shuffled.nodes[perm[v]] = node;
    }
    shuffled.root = perm[dag.root];

    auto order = topo_order(shuffled);
    ASSERT_EQ(order.size(), shuffled.size());
    std::vector<std::size_t> pos(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) pos[order[k]] = k;
    for (NodeId v = 0; v < shuffled.size(); ++v) {
      for (NodeId c : shuffled.nodes[v].children) EXPECT_LT(pos[c], pos[v]);
    }
    EXPECT_EQ(order, topo_order(shuffled));
  }
}

TEST(Normalize, KaryAndBecomesLeftChain) {
  QueryDag dag;
  auto a = dag.add_term("a");
  auto b = dag.add_term("b");
  auto c = dag.add_term("c");
  dag.root = dag.add_and({a, b, c});
  auto n = normalize(dag);

  QueryDag expected;
  auto ea = expected.add_term("a");
  auto eb = expected.add_term("b");
  auto ec = expected.add_term("c");
  expected.root = expected.add_and({expected.add_and({ea, eb}), ec});
  EXPECT_TRUE(structurally_equal(n.dag(), expected));
}

TEST(Normalize, UnaryOrCollapses) {
  QueryDag dag;
  auto x = dag.add_term("x");
  dag.root = dag.add_or({x});
  auto n = normalize(dag);
  EXPECT_EQ(n[n.root()].kind, NodeKind::Term);
  EXPECT_EQ(n[n.root()].term, "x");
}

TEST(Normalize, EmptyAndOr) {
  QueryDag t;
  t.root = t.add_and({});
  EXPECT_EQ(normalize(t)[normalize(t).root()].kind, NodeKind::True);
  QueryDag f;
  f.root = f.add_or({});
  EXPECT_EQ(normalize(f)[normalize(f).root()].kind, NodeKind::False);
}

TEST(Normalize, RejectsInvalidInput) {
  QueryDag dag;
  dag.root = dag.add_not(3);
  EXPECT_THROW(normalize(dag), DagError);
}

TEST(NormalizedDag, ConstructorRequiresBinary) {
  QueryDag dag;
  auto a = dag.add_term("a");
  dag.root = dag.add_and({a, a, a});
  try {
    NormalizedDag n(dag);
    FAIL();
  } catch (const DagError& e) {
    EXPECT_EQ(e.kind(), DagErrorKind::NotNormalized);
  }
}

TEST(Normalize, PreservesSemanticsAndGrowsLinearly) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 300; ++i) {
    auto index = testing::random_index(rng, 60, 5);
    auto dag = testing::random_kary_dag(rng, 30, 5);
    auto n = normalize(dag);
    std::size_t edges = 0;
    for (const auto& node : dag.nodes) edges += node.children.size();
    EXPECT_LE(n.size(), dag.size() + edges + 1);
    EXPECT_EQ(eval_oracle(n.dag(), index), eval_oracle(dag, index)) << "case " << i;
  }
}

TEST(Cse, MergesDuplicateLeaves) {
  QueryDag dag;
  auto x1 = dag.add_term("x");
  auto x2 = dag.add_term("x");
  dag.root = dag.add_and({x1, x2});
  NormalizedDag n(dag);
  auto merged = cse(n);
  EXPECT_EQ(merged.size(), n.size() - 1);
}

TEST(Cse, SharesIdenticalSubexpression) {
  // (S and A) or (S and B) with S = (p or not q) written twice.
  QueryDag dag;
  auto make_s = [&] {
    auto p = dag.add_term("p");
    auto q = dag.add_term("q");
    return dag.add_or({p, dag.add_not(q)});
  };
  auto s1 = make_s();
  auto s2 = make_s();
  auto a = dag.add_term("a");
  auto b = dag.add_term("b");
  dag.root = dag.add_or({dag.add_and({s1, a}), dag.add_and({s2, b})});
  NormalizedDag n(dag);
  auto result = cse_with_mapping(n);
  EXPECT_EQ(result.canonical[s1], result.canonical[s2]);
  EXPECT_EQ(result.dag.size(), n.size() - 4);

  std::size_t or_nodes = 0;
  for (const auto& node : result.dag.dag().nodes) {
    if (node.kind == NodeKind::Or) ++or_nodes;
  }
  EXPECT_EQ(or_nodes, 2u);
}

TEST(Cse, CommutedOperandsMerge) {
  QueryDag dag;
  auto a = dag.add_term("a");
  auto b = dag.add_term("b");
  dag.root = dag.add_or({dag.add_and({a, b}), dag.add_and({b, a})});
  auto merged = cse(NormalizedDag(dag));
  EXPECT_EQ(merged.size(), 4u);
}

TEST(Cse, FixedPointAndSemanticsOnRandomDags) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 400; ++i) {
    auto index = testing::random_index(rng, 50, 4);
    NormalizedDag n(testing::random_binary_dag(rng, 40, 4));
    auto once = cse(n);
    auto twice = cse(once);
    EXPECT_LE(once.size(), n.size());
    EXPECT_EQ(once.dag().nodes, twice.dag().nodes) << "case " << i;
    EXPECT_EQ(once.root(), twice.root());
    EXPECT_EQ(eval_oracle(once.dag(), index), eval_oracle(n.dag(), index)) << "case " << i;
  }
}

TEST(Prune, RemovesOrphans) {
  QueryDag dag;
  dag.add_term("orphan");
  auto a = dag.add_term("a");
  dag.root = dag.add_not(a);
  auto pruned = prune(dag);
  EXPECT_EQ(pruned.size(), 2u);
  EXPECT_TRUE(structurally_equal(pruned, dag));
}

TEST(Prune, FullyReachableUnchanged) {
  QueryDag dag;
  auto a = dag.add_term("a");
  auto b = dag.add_term("b");
  dag.root = dag.add_and({a, b});
  auto pruned = prune(dag);
  EXPECT_EQ(pruned.nodes, dag.nodes);
  EXPECT_EQ(pruned.root, dag.root);
}

TEST(Prune, CompiledCircuitDeadNodesRemoved) {
  // Build a sum whose low bits feed nothing, then root at the top comparison.
  DagBuilder b;
  std::vector<WeightedTerm> good{{"g0", 3}, {"g1", 5}, {"g2", 6}};
  std::vector<WeightedTerm> bad{{"b0", 2}, {"b1", 7}};
  auto extra = add(b, field_bits(b, "F", 4), field_bits(b, "G", 4));
  (void)extra;
  auto root = weighted_sum_gt(b, good, bad);
  QueryDag full = b.dag();
  full.root = root;
  auto pruned = prune(full);
  EXPECT_LT(pruned.size(), full.size());

  std::mt19937_64 rng(3);
  std::map<std::string, PostingList, std::less<>> postings;
  for (const char* t : {"g0", "g1", "g2", "b0", "b1"}) {
    auto& list = postings[t];
    for (DocId d = 0; d < 64; ++d) {
      if (rng() % 2) list.push_back(d);
    }
  }
  auto index = InvertedIndex::from_postings(64, postings);
  EXPECT_EQ(eval_oracle(pruned, index), eval_oracle(full, index));
}

TEST(WireFormat, SingleLeaf) {
  auto dag = parse_dag(R"({"root":"n0","nodes":[{"id":"n0","kind":"term","term":"cat"}]})");
  ASSERT_EQ(dag.size(), 1u);
  EXPECT_EQ(dag[0].kind, NodeKind::Term);
  EXPECT_EQ(dag[0].term, "cat");
  EXPECT_EQ(dag.root, 0u);
}

TEST(WireFormat, ForwardReferencesResolve) {
  auto dag = parse_dag(R"({"root":"top","nodes":[
      {"id":"top","kind":"and","children":["x","y"]},
      {"id":"x","kind":"term","term":"a"},
      {"id":"y","kind":"not","children":["x"]}]})");
  EXPECT_NO_THROW(validate(dag));
  EXPECT_EQ(dag.label(dag.root), "top");
}

DagErrorKind parse_error_kind(std::string_view text) {
  try {
    parse_dag(text);
  } catch (const DagError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "parsed unexpectedly: " << text;
  return DagErrorKind::CycleDetected;
}

TEST(WireFormat, Errors) {
  EXPECT_EQ(parse_error_kind(R"({"root":"n0","nodes":[{"id":"n0","kind":"term","term":"a"},
                                                       {"id":"n0","kind":"term","term":"b"}]})"),
            DagErrorKind::DuplicateId);
  EXPECT_EQ(parse_error_kind(R"({"root":"n0","nodes":[{"id":"n0","kind":"xor","children":[]}]})"),
            DagErrorKind::UnknownKind);
  EXPECT_EQ(parse_error_kind(R"({"root":"n9","nodes":[{"id":"n0","kind":"true"}]})"),
            DagErrorKind::MissingRoot);
  EXPECT_EQ(parse_error_kind(R"({"root":"n0","nodes":[{"id":"n0","kind":"not","children":["q"]}]})"),
            DagErrorKind::DanglingChild);
  EXPECT_EQ(parse_error_kind("{\"root\": \n  oops}"), DagErrorKind::Syntax);
  EXPECT_EQ(parse_error_kind(R"({"nodes":[]})"), DagErrorKind::Syntax);
}

TEST(WireFormat, SyntaxErrorHasPosition) {
  try {
    parse_dag("{\"root\":\"n0\",\n \"nodes\": [,]}");
    FAIL();
  } catch (const DagError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(WireFormat, CompiledCircuitRoundTrip) {
  DagBuilder b;
  std::vector<NodeId> inputs;
  for (int i = 0; i < 40; ++i) inputs.push_back(b.term("w" + std::to_string(i)));
  auto root = count_at_least(b, inputs, 13);
  auto dag = b.build(root);
  ASSERT_GE(dag.size(), 500u);
  auto text = serialize_dag(dag.dag());
  auto back = parse_dag(text);
  EXPECT_NO_THROW(validate(back));
  EXPECT_TRUE(structurally_equal(back, dag.dag()));
  EXPECT_EQ(serialize_dag(back), text);
}

TEST(WireFormat, RandomRoundTrip) {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 200; ++i) {
    auto dag = testing::random_kary_dag(rng, 30, 5);
    auto back = parse_dag(serialize_dag(dag));
    EXPECT_TRUE(structurally_equal(back, dag)) << "case " << i;
  }
}

TEST(StructurallyEqual, DistinguishesDifferentGraphs) {
  QueryDag a;
  auto x = a.add_term("x");
  a.root = a.add_and({x, x});
  QueryDag b;
  auto x1 = b.add_term("x");
  auto x2 = b.add_term("x");
  b.root = b.add_and({x1, x2});
  EXPECT_FALSE(structurally_equal(a, b));
  QueryDag c;
  auto y = c.add_term("y");
  c.root = c.add_and({y, y});
  EXPECT_FALSE(structurally_equal(a, c));
  EXPECT_TRUE(structurally_equal(a, a));
}

}  // namespace
}  // namespace pnsearch
