#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "pnsearch/circuit_compiler.hpp"
#include "pnsearch/index.hpp"

namespace pnsearch {

struct TermSpec {
  std::string term;
  double density = 0.0;  // per-document inclusion probability
};

// Values drawn uniformly from [min_value, max_value] and indexed as
// bit-sliced tokens.
struct NumericFieldSpec {
  std::string field;
  unsigned width = 8;
  std::uint64_t min_value = 0;
  std::uint64_t max_value = 255;
};

struct CorpusSpec {
  std::uint64_t universe_size = 0;
  std::vector<TermSpec> terms;
  std::vector<NumericFieldSpec> numeric_fields;
  std::uint64_t seed = 1;
};

struct SyntheticCorpus {
  InvertedIndex index;
  std::map<std::string, std::vector<std::uint64_t>> field_values;  // per doc
};

class BenchPreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Each term and field draws from its own stream derived from (seed, position),
// so output depends only on the spec.
SyntheticCorpus gen_corpus(const CorpusSpec& spec);

// Stream seeding shared by the generators.
std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t stream);
// `count` distinct ids from [0, universe), ascending (Floyd's algorithm).
PostingList sample_exact(std::uint64_t universe, std::size_t count, std::mt19937_64& rng);

using Cell = std::variant<std::uint64_t, std::int64_t, double, bool, std::string>;
using Row = std::vector<std::pair<std::string, Cell>>;

struct Verdict {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct BenchReport {
  std::string experiment;
  std::vector<Row> rows;
  std::vector<Verdict> verdicts;

  bool passed() const;
  // Columns named "wall_ms" are informational and dropped when
  // include_wall_time is false, which makes the output seed-deterministic.
  std::string to_json(bool include_wall_time = true) const;
  std::string to_csv(bool include_wall_time = true) const;
};

struct SweepPoint {
  std::uint64_t universe_size = 0;
  std::size_t a_size = 0;
  std::size_t b_size = 0;
};

struct DisjunctiveNegationParams {
  std::vector<SweepPoint> points;
  std::uint64_t seed = 42;
};

DisjunctiveNegationParams disjunctive_negation_sweep(const std::vector<std::uint64_t>& universe_sizes,
                                                     std::size_t list_size = 1000,
                                                     std::uint64_t seed = 42);

// A v !B with fixed |A|, |B| while |U| grows. Throws BenchPreconditionError
// when list sizes change across the sweep or exceed the universe.
BenchReport exp_disjunctive_negation(const DisjunctiveNegationParams& params);

struct XorChainParams {
  std::vector<unsigned> depths;
  std::uint64_t universe_size = 100000;
  double density = 0.05;
  std::uint64_t seed = 42;
  std::uint64_t expansion_limit = std::uint64_t{1} << 22;
  std::uint64_t work_limit = std::uint64_t{1} << 28;
  unsigned baseline_max_depth = 12;
  bool check_oracle = true;
};

// Re-convergent parity chain x_k = x_{k-1} xor t_k over terms t_0..t_depth.
NodeId build_xor_chain(DagBuilder& b, unsigned depth, const std::string& prefix = "t");
BenchReport exp_xor_chain(const XorChainParams& params);

struct NetPositiveParams {
  std::uint64_t universe_size = 10000;
  std::vector<WeightedTerm> good;
  std::vector<WeightedTerm> bad;
  std::vector<std::string> topic;
  double weighted_density = 0.3;
  double topic_density = 0.05;
  std::uint64_t seed = 42;
};

// 5 good + 5 bad weighted terms and a 24-term topic disjunction.
NetPositiveParams default_net_positive_params(std::uint64_t seed = 42);

// Assignments of the weighted terms satisfying good > bad, times the topic
// size: the clause count of a minterm DNF for the whole query.
std::uint64_t net_positive_dnf_clauses(const NetPositiveParams& params);

// topic-or AND weighted_sum_gt(good, bad)
NormalizedDag build_net_positive_dag(const NetPositiveParams& params);

// Per-document weighted-sum oracle over the generated corpus.
PostingList net_positive_oracle(const NetPositiveParams& params, const InvertedIndex& index);

CorpusSpec net_positive_corpus_spec(const NetPositiveParams& params);

BenchReport exp_net_positive(const NetPositiveParams& params);

// CLI entry: "disjunctive-negation", "xor-chain", "net-positive".
BenchReport run_experiment(const std::string& name, std::uint64_t seed);
bool is_known_experiment(const std::string& name);

}  // namespace pnsearch
