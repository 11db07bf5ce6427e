#include <gtest/gtest.h>

#include <sstream>

#include "json.hpp"
#include "pnsearch/baselines.hpp"
#include "pnsearch/bench_harness.hpp"
#include "pnsearch/cli_commands.hpp"
#include "support/temp_dir.hpp"

namespace pnsearch {
namespace {

using testing::TempDir;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "pnsearch");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  int code = cli::run(static_cast<int>(argv.size()), argv.data(), {out, err});
  return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

class CliTest : public ::testing::Test {
 protected:
  TempDir dir;

  std::string build(const std::string& corpus) {
    auto corpus_path = dir.write("corpus.jsonl", corpus);
    auto index_path = dir.file("index.pnix").string();
    auto r = run_cli({"index", "build", corpus_path.string(), "-o", index_path});
    EXPECT_EQ(r.code, 0) << r.err;
    return index_path;
  }
};

TEST_F(CliTest, IndexBuildTwoLines) {
  auto corpus = dir.write("c.jsonl", "{\"id\":\"doc-a\",\"tokens\":[\"x\",\"y\"]}\n{\"id\":\"doc-b\",\"tokens\":[\"y\"]}\n");
  auto r = run_cli({"index", "build", corpus.string(), "-o", dir.file("i.pnix").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto summary = nlohmann::json::parse(r.out);
  EXPECT_EQ(summary["universe_size"], 2);
  EXPECT_EQ(summary["terms"], 2);
  EXPECT_EQ(load_index(dir.file("i.pnix")).universe_size(), 2u);
}

TEST_F(CliTest, IndexBuildMalformedLine) {
  auto corpus = dir.write("c.jsonl", "{\"id\":\"a\",\"tokens\":[]}\n{\"id\":\"b\",\"tokens\":[\n");
  auto r = run_cli({"index", "build", corpus.string(), "-o", dir.file("i.pnix").string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;
}

TEST_F(CliTest, IndexBuildSyntheticCounts) {
  CorpusSpec spec;
  spec.universe_size = 10000;
  spec.terms = {{"alpha", 0.2}, {"beta", 0.01}, {"gamma", 0.7}};
  spec.seed = 4;
  auto corpus = gen_corpus(spec);
  std::ostringstream jsonl;
  for (DocId d = 0; d < spec.universe_size; ++d) {
    nlohmann::json doc;
    doc["id"] = "d" + std::to_string(d);
    doc["tokens"] = nlohmann::json::array();
    for (const auto& t : spec.terms) {
      const auto& list = corpus.index.lookup(t.term);
      if (std::binary_search(list.begin(), list.end(), d)) doc["tokens"].push_back(t.term);
    }
    jsonl << doc.dump() << '\n';
  }
  auto path = dir.write("big.jsonl", jsonl.str());
  auto r = run_cli({"index", "build", path.string(), "-o", dir.file("big.pnix").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto summary = nlohmann::json::parse(r.out);
  EXPECT_EQ(summary["universe_size"], 10000);
  EXPECT_EQ(summary["terms"], 3);
  auto loaded = load_index(dir.file("big.pnix"));
  for (const auto& t : spec.terms) EXPECT_EQ(loaded.lookup(t.term), corpus.index.lookup(t.term));
}

TEST_F(CliTest, QuerySingleTermPrintsKeys) {
  auto index = build("{\"id\":\"k0\",\"tokens\":[\"a\",\"b\"]}\n{\"id\":\"k1\",\"tokens\":[\"b\"]}\n");
  auto dag = dir.write("q.json", R"({"root":"n0","nodes":[{"id":"n0","kind":"term","term":"b"}]})");
  auto r = run_cli({"query", "eval", "-i", index, dag.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(lines(r.out), (std::vector<std::string>{"k0", "k1"}));
  auto c = run_cli({"query", "eval", "-i", index, dag.string(), "--count"});
  EXPECT_EQ(c.out, "2\n");
}

TEST_F(CliTest, QueryNotTrueIsEmpty) {
  auto index = build("{\"id\":\"dtrue\",\"tokens\":[\"TRUE\"]}\n");
  auto dag = dir.write("q.json", R"({"root":"r","nodes":[
      {"id":"r","kind":"not","children":["t"]},{"id":"t","kind":"term","term":"TRUE"}]})");
  auto r = run_cli({"query", "eval", "-i", index, dag.string(), "--count"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "0\n");
  auto fail = run_cli({"query", "eval", "-i", index, dag.string(), "--fail-empty"});
  EXPECT_EQ(fail.code, 2);
  EXPECT_EQ(fail.out, "");
}

TEST_F(CliTest, QueryReportAndFlags) {
  auto index = build(
      "{\"id\":\"a\",\"tokens\":[\"x\"]}\n{\"id\":\"b\",\"tokens\":[\"x\",\"y\"]}\n"
      "{\"id\":\"c\",\"tokens\":[\"y\"]}\n{\"id\":\"d\",\"tokens\":[]}\n");
  auto dag = dir.write("q.json", R"({"root":"o","nodes":[
      {"id":"o","kind":"or","children":["x","ny"]},
      {"id":"x","kind":"term","term":"x"},
      {"id":"ny","kind":"not","children":["y"]},
      {"id":"y","kind":"term","term":"y"}]})");
  for (auto flags : std::vector<std::vector<std::string>>{{}, {"--adaptive-polarity"}, {"--parallel"}}) {
    std::vector<std::string> args{"query", "eval", "-i", index, dag.string(), "--report", "--per-node"};
    args.insert(args.end(), flags.begin(), flags.end());
    auto r = run_cli(args);
    ASSERT_EQ(r.code, 0) << r.err;
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["result"], nlohmann::json({0, 1, 3}));
    EXPECT_EQ(j["keys"], nlohmann::json({"a", "b", "d"}));
    EXPECT_TRUE(j.contains("per_node_set_sizes"));
  }
  auto both = run_cli({"query", "eval", "-i", index, dag.string(), "--report", "--count"});
  EXPECT_EQ(both.code, 1);
}

TEST_F(CliTest, QueryValidationErrorsNameNodes) {
  auto index = build("{\"id\":\"a\",\"tokens\":[\"x\"]}\n");
  auto cyc = dir.write("cyc.json", R"({"root":"p","nodes":[
      {"id":"p","kind":"not","children":["q"]},{"id":"q","kind":"not","children":["p"]}]})");
  auto r = run_cli({"query", "eval", "-i", index, cyc.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("cycle"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("p"), std::string::npos);

  auto arity = dir.write("arity.json", R"({"root":"p","nodes":[
      {"id":"p","kind":"not","children":["x","x"]},{"id":"x","kind":"term","term":"x"}]})");
  auto a = run_cli({"query", "eval", "-i", index, arity.string()});
  EXPECT_EQ(a.code, 1);
  EXPECT_NE(a.err.find("node p"), std::string::npos) << a.err;
}

TEST_F(CliTest, QueryWeightedConstraintMatchesOracle) {
  auto p = default_net_positive_params(3);
  p.universe_size = 1500;
  auto corpus = gen_corpus(net_positive_corpus_spec(p));
  save_index(corpus.index, dir.file("np.pnix"));

  nlohmann::json constraint;
  constraint["kind"] = "weighted_sum_gt";
  for (const auto& w : p.good) constraint["good"].push_back({{"term", w.term}, {"weight", w.weight}});
  for (const auto& w : p.bad) constraint["bad"].push_back({{"term", w.term}, {"weight", w.weight}});
  auto path = dir.write("c.json", constraint.dump());
  auto r = run_cli({"query", "eval", "-i", dir.file("np.pnix").string(), path.string()});
  ASSERT_EQ(r.code, 0) << r.err;

  auto compiled = compile_constraint(constraint.dump());
  std::vector<std::string> expected;
  for (DocId d : eval_oracle(compiled.dag.dag(), corpus.index)) expected.push_back(std::to_string(d));
  EXPECT_EQ(lines(r.out), expected);
  EXPECT_FALSE(expected.empty());
}

TEST_F(CliTest, CompileCountAtLeastZero) {
  auto c = dir.write("c.json", R"({"kind":"count_at_least","terms":["a","b","c"],"k":0})");
  auto out = dir.file("dag.json");
  auto r = run_cli({"compile", c.string(), "-o", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(nlohmann::json::parse(r.out)["node_count"], 1);
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  auto dag = parse_dag(ss.str());
  EXPECT_EQ(dag[dag.root].kind, NodeKind::True);
}

TEST_F(CliTest, CompileWidthError) {
  auto c = dir.write("c.json", R"({"kind":"field_gt_const","field":"F","const":300,"width":8})");
  auto r = run_cli({"compile", c.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, CompileNodeCountConsistent) {
  auto p = default_net_positive_params();
  nlohmann::json constraint;
  constraint["kind"] = "and";
  nlohmann::json topic{{"kind", "or"}, {"children", nlohmann::json::array()}};
  for (const auto& t : p.topic) topic["children"].push_back({{"kind", "term"}, {"term", t}});
  nlohmann::json ws{{"kind", "weighted_sum_gt"}};
  for (const auto& w : p.good) ws["good"].push_back({{"term", w.term}, {"weight", w.weight}});
  for (const auto& w : p.bad) ws["bad"].push_back({{"term", w.term}, {"weight", w.weight}});
  constraint["children"] = {topic, ws};
  auto c = dir.write("np.json", constraint.dump());
  auto r = run_cli({"compile", c.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto dag = parse_dag(r.out);
  auto reported = nlohmann::json::parse(r.err)["node_count"].get<std::size_t>();
  EXPECT_EQ(dag.size(), reported);
  EXPECT_EQ(reported, build_net_positive_dag(p).size());
}

TEST_F(CliTest, BenchUnknownExperiment) {
  auto r = run_cli({"bench", "run", "nonsense"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("unknown experiment"), std::string::npos);
}

TEST_F(CliTest, BenchNetPositiveWritesReports) {
  auto json_path = dir.file("r.json");
  auto csv_path = dir.file("r.csv");
  auto r = run_cli({"bench", "run", "net-positive", "--seed", "5", "-o", json_path.string(), "--csv",
                    csv_path.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(json_path);
  auto j = nlohmann::json::parse(in);
  EXPECT_EQ(j["experiment"], "net-positive");
  EXPECT_TRUE(std::filesystem::exists(csv_path));
  EXPECT_NE(r.err.find("PASS"), std::string::npos);
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(run_cli({"query", "eval"}).code, 1);
  EXPECT_EQ(run_cli({"index", "build", dir.file("missing.jsonl").string(), "-o", "x"}).code, 1);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST_F(CliTest, CorruptIndexReported) {
  auto index = build("{\"id\":\"a\",\"tokens\":[\"x\"]}\n");
  {
    std::ofstream out(index, std::ios::binary | std::ios::trunc);
    out << "PNIX";
  }
  auto dag = dir.write("q.json", R"({"root":"n0","nodes":[{"id":"n0","kind":"term","term":"x"}]})");
  auto r = run_cli({"query", "eval", "-i", index, dag.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("index file"), std::string::npos) << r.err;
}

}  // namespace
}  // namespace pnsearch
