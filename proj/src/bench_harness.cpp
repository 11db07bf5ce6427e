#include "pnsearch/bench_harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "pnsearch/baselines.hpp"
#include "pnsearch/evaluator.hpp"

namespace pnsearch {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform double in [0, 1) from the top 53 bits; portable across standard
// libraries, unlike std::uniform_real_distribution.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

Verdict verdict(std::string name, bool passed, std::string detail) {
  return {std::move(name), passed, std::move(detail)};
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace

std::mt19937_64 derived_rng(std::uint64_t seed, std::uint64_t stream) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x51ed270b27f1ULL)));
}

PostingList sample_exact(std::uint64_t universe, std::size_t count, std::mt19937_64& rng) {
  if (count > universe) throw BenchPreconditionError("cannot sample more ids than the universe holds");
  std::unordered_set<DocId> chosen;
  chosen.reserve(count * 2);
  for (std::uint64_t j = universe - count; j < universe; ++j) {
    auto t = static_cast<DocId>(rng() % (j + 1));
    if (!chosen.insert(t).second) chosen.insert(static_cast<DocId>(j));
  }
  PostingList out(chosen.begin(), chosen.end());
  std::sort(out.begin(), out.end());
  return out;
}

SyntheticCorpus gen_corpus(const CorpusSpec& spec) {
  std::map<std::string, PostingList, std::less<>> postings;
  for (std::size_t i = 0; i < spec.terms.size(); ++i) {
    const auto& ts = spec.terms[i];
    if (!(ts.density >= 0.0 && ts.density <= 1.0)) {
      throw BenchPreconditionError("density of '" + ts.term + "' outside [0, 1]");
    }
    auto rng = derived_rng(spec.seed, i);
    auto& list = postings[ts.term];
    for (std::uint64_t d = 0; d < spec.universe_size; ++d) {
      if (unit(rng) < ts.density) list.push_back(static_cast<DocId>(d));
    }
  }

  SyntheticCorpus corpus;
  for (std::size_t f = 0; f < spec.numeric_fields.size(); ++f) {
    const auto& fs = spec.numeric_fields[f];
    if (fs.min_value > fs.max_value || fs.width > 63 || (fs.max_value >> fs.width) != 0) {
      throw BenchPreconditionError("bad value range for field '" + fs.field + "'");
    }
    auto rng = derived_rng(spec.seed, 0x10000 + f);
    const std::uint64_t span = fs.max_value - fs.min_value + 1;
    std::vector<std::uint64_t> values(spec.universe_size);
    std::vector<PostingList> bit_lists(fs.width);
    for (std::uint64_t d = 0; d < spec.universe_size; ++d) {
      values[d] = fs.min_value + rng() % span;
      for (unsigned b = 0; b < fs.width; ++b) {
        if ((values[d] >> b) & 1u) bit_lists[b].push_back(static_cast<DocId>(d));
      }
    }
    for (unsigned b = 0; b < fs.width; ++b) {
      auto& list = postings[bit_token(fs.field, b)];
      list = set_union(list, bit_lists[b]);
    }
    corpus.field_values[fs.field] = std::move(values);
  }
  corpus.index = InvertedIndex::from_postings(spec.universe_size, std::move(postings));
  return corpus;
}

bool BenchReport::passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.passed; });
}

namespace {

nlohmann::ordered_json cell_json(const Cell& c) {
  return std::visit([](const auto& v) { return nlohmann::ordered_json(v); }, c);
}

std::string cell_text(const Cell& c) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, std::string>) {
          if (v.find_first_of(",\"\n") == std::string::npos) return v;
          std::string quoted = "\"";
          for (char ch : v) {
            if (ch == '"') quoted += '"';
            quoted += ch;
          }
          return quoted + "\"";
        } else if constexpr (std::is_same_v<T, bool>) {
          return v ? "true" : "false";
        } else if constexpr (std::is_same_v<T, double>) {
          return fmt(v);
        } else {
          return std::to_string(v);
        }
      },
      c);
}

bool is_wall(const std::string& name) { return name == "wall_ms"; }

}  // namespace

std::string BenchReport::to_json(bool include_wall_time) const {
  nlohmann::ordered_json j;
  j["experiment"] = experiment;
  j["passed"] = passed();
  auto jrows = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    nlohmann::ordered_json jr = nlohmann::ordered_json::object();
    for (const auto& [name, cell] : row) {
      if (!include_wall_time && is_wall(name)) continue;
      jr[name] = cell_json(cell);
    }
    jrows.push_back(std::move(jr));
  }
  j["rows"] = std::move(jrows);
  auto jv = nlohmann::ordered_json::array();
  for (const auto& v : verdicts) {
    jv.push_back({{"name", v.name}, {"passed", v.passed}, {"detail", v.detail}});
  }
  j["verdicts"] = std::move(jv);
  return j.dump(2);
}

std::string BenchReport::to_csv(bool include_wall_time) const {
  std::ostringstream os;
  if (rows.empty()) return {};
  bool first = true;
  for (const auto& [name, cell] : rows.front()) {
    if (!include_wall_time && is_wall(name)) continue;
    os << (first ? "" : ",") << name;
    first = false;
  }
  os << '\n';
  for (const auto& row : rows) {
    first = true;
    for (const auto& [name, cell] : row) {
      if (!include_wall_time && is_wall(name)) continue;
      os << (first ? "" : ",") << cell_text(cell);
      first = false;
    }
    os << '\n';
  }
  return os.str();
}

DisjunctiveNegationParams disjunctive_negation_sweep(const std::vector<std::uint64_t>& universe_sizes,
                                                     std::size_t list_size, std::uint64_t seed) {
  DisjunctiveNegationParams p;
  p.seed = seed;
  for (auto u : universe_sizes) p.points.push_back({u, list_size, list_size});
  return p;
}

BenchReport exp_disjunctive_negation(const DisjunctiveNegationParams& params) {
  if (params.points.empty()) throw BenchPreconditionError("empty sweep");
  for (const auto& pt : params.points) {
    if (pt.a_size != params.points.front().a_size || pt.b_size != params.points.front().b_size) {
      throw BenchPreconditionError("posting list sizes must stay fixed across the sweep");
    }
    if (pt.a_size > pt.universe_size || pt.b_size > pt.universe_size) {
      throw BenchPreconditionError("posting lists larger than the universe");
    }
  }

  QueryDag q;
  NodeId a = q.add_term("A");
  NodeId b = q.add_term("B");
  q.root = q.add_or({a, q.add_not(b)});
  const NormalizedDag dag = normalize(q);
  const QueryDag tree = unroll_to_tree(dag.dag()).tree;

  BenchReport report;
  report.experiment = "disjunctive-negation";
  std::vector<std::uint64_t> pn, taat, daat, universes;
  bool agree = true;
  for (std::size_t i = 0; i < params.points.size(); ++i) {
    const auto& pt = params.points[i];
    auto rng = derived_rng(params.seed, pt.universe_size);
    std::map<std::string, PostingList, std::less<>> postings;
    postings["A"] = sample_exact(pt.universe_size, pt.a_size, rng);
    postings["B"] = sample_exact(pt.universe_size, pt.b_size, rng);
    auto index = InvertedIndex::from_postings(pt.universe_size, std::move(postings));

    auto start = std::chrono::steady_clock::now();
    auto pn_report = compute_pn(dag, index);
    double wall = elapsed_ms(start);
    auto taat_res = eval_naive_taat(dag.dag(), index);
    auto daat_res = eval_tree_iterative(tree, index, std::numeric_limits<std::uint64_t>::max());
    auto oracle = eval_oracle(dag.dag(), index);
    bool same = pn_report.result == oracle && taat_res.result == oracle && daat_res.result == oracle;
    agree = agree && same;

    pn.push_back(pn_report.counters.element_touches);
    taat.push_back(taat_res.counters.element_touches);
    daat.push_back(daat_res.counters.element_touches);
    universes.push_back(pt.universe_size);
    report.rows.push_back({
        {"universe_size", pt.universe_size},
        {"a_size", std::uint64_t{pt.a_size}},
        {"b_size", std::uint64_t{pt.b_size}},
        {"pn_touches", pn_report.counters.element_touches},
        {"pn_finalization_touches", pn_report.counters.finalization_touches},
        {"pn_max_materialized", pn_report.counters.max_materialized},
        {"taat_touches", taat_res.counters.element_touches},
        {"daat_touches", daat_res.counters.element_touches},
        {"result_size", std::uint64_t{oracle.size()}},
        {"results_agree", same},
        {"wall_ms", wall},
    });
  }

  auto [umin, umax] = std::minmax_element(universes.begin(), universes.end());
  const double sweep = static_cast<double>(*umax) / static_cast<double>(*umin);
  auto at = [&](const std::vector<std::uint64_t>& v, std::uint64_t u) {
    return static_cast<double>(v[static_cast<std::size_t>(
        std::find(universes.begin(), universes.end(), u) - universes.begin())]);
  };
  auto [pmin, pmax] = std::minmax_element(pn.begin(), pn.end());
  const double pn_spread = *pmin == 0 ? (*pmax == 0 ? 1.0 : INFINITY)
                                      : static_cast<double>(*pmax) / static_cast<double>(*pmin);
  const double taat_growth = at(taat, *umax) / std::max(1.0, at(taat, *umin));
  const double daat_growth = at(daat, *umax) / std::max(1.0, at(daat, *umin));

  report.verdicts.push_back(verdict("compute_pn_flat", pn_spread < 2.0,
                                    "max/min touches " + fmt(pn_spread) + " < 2"));
  report.verdicts.push_back(verdict("taat_grows", taat_growth >= sweep / 2,
                                    "growth " + fmt(taat_growth) + " >= " + fmt(sweep / 2)));
  report.verdicts.push_back(verdict("daat_grows", daat_growth >= sweep / 2,
                                    "growth " + fmt(daat_growth) + " >= " + fmt(sweep / 2)));
  report.verdicts.push_back(verdict("results_agree", agree, "all evaluators equal the oracle"));
  return report;
}

NodeId build_xor_chain(DagBuilder& b, unsigned depth, const std::string& prefix) {
  NodeId x = b.term(prefix + "0");
  for (unsigned k = 1; k <= depth; ++k) x = gate_xor(b, x, b.term(prefix + std::to_string(k)));
  return x;
}

BenchReport exp_xor_chain(const XorChainParams& params) {
  if (params.depths.empty()) throw BenchPreconditionError("no depths given");
  unsigned max_depth = *std::max_element(params.depths.begin(), params.depths.end());
  if (std::find(params.depths.begin(), params.depths.end(), 0u) != params.depths.end()) {
    throw BenchPreconditionError("depths must be at least 1");
  }
  if (max_depth > 60) throw BenchPreconditionError("depth above 60 overflows the 2^depth bound");

  CorpusSpec spec;
  spec.universe_size = params.universe_size;
  spec.seed = params.seed;
  for (unsigned k = 0; k <= max_depth; ++k) spec.terms.push_back({"t" + std::to_string(k), params.density});
  const auto corpus = gen_corpus(spec);
  const auto& index = corpus.index;

  BenchReport report;
  report.experiment = "xor-chain";
  bool growth_ok = true, visits_ok = true, agree = true;
  for (unsigned depth : params.depths) {
    DagBuilder b;
    auto dag = b.build(build_xor_chain(b, depth));

    auto start = std::chrono::steady_clock::now();
    auto pn = compute_pn(dag, index);
    double wall = elapsed_ms(start);

    const std::uint64_t unrolled = unrolled_size(dag.dag());
    const bool limit_exceeded = unrolled > params.expansion_limit;
    bool baseline_completed = false;
    std::uint64_t baseline_touches = 0;
    bool same = true;
    if (!limit_exceeded && depth <= params.baseline_max_depth) {
      try {
        auto tree = unroll_to_tree(dag.dag(), params.expansion_limit);
        auto res = eval_tree_iterative(tree.tree, index, params.work_limit);
        baseline_completed = true;
        baseline_touches = res.counters.element_touches;
        same = res.result == pn.result;
      } catch (const WorkLimitExceeded& e) {
        baseline_touches = e.reached();
      }
    }
    if (params.check_oracle && (baseline_completed || depth == max_depth)) {
      same = same && eval_oracle(dag.dag(), index) == pn.result;
    }
    agree = agree && same;
    const bool blowup = limit_exceeded || unrolled >= (std::uint64_t{1} << depth);
    growth_ok = growth_ok && blowup;
    visits_ok = visits_ok && pn.counters.node_visits <= 10ull * depth;

    report.rows.push_back({
        {"depth", std::uint64_t{depth}},
        {"dag_nodes", std::uint64_t{dag.size()}},
        {"pn_node_visits", pn.counters.node_visits},
        {"pn_touches", pn.counters.element_touches},
        {"unrolled_nodes", unrolled},
        {"expansion_limit_exceeded", limit_exceeded},
        {"baseline_completed", baseline_completed},
        {"baseline_touches", baseline_touches},
        {"result_size", std::uint64_t{pn.result.size()}},
        {"results_agree", same},
        {"wall_ms", wall},
    });
  }
  report.verdicts.push_back(verdict("tree_expansion_exponential", growth_ok,
                                    "unrolled nodes >= 2^depth or expansion limit exceeded"));
  report.verdicts.push_back(verdict("dag_visits_linear", visits_ok, "node visits <= 10 * depth"));
  report.verdicts.push_back(verdict("results_agree", agree,
                                    "baseline (where completed) and oracle equal compute_pn"));
  return report;
}

NetPositiveParams default_net_positive_params(std::uint64_t seed) {
  NetPositiveParams p;
  p.seed = seed;
  const std::uint32_t good_w[] = {9, 7, 5, 3, 2};
  const std::uint32_t bad_w[] = {8, 6, 4, 3, 1};
  for (int i = 0; i < 5; ++i) {
    p.good.push_back({"good" + std::to_string(i), good_w[i]});
    p.bad.push_back({"bad" + std::to_string(i), bad_w[i]});
  }
  for (int i = 0; i < 24; ++i) p.topic.push_back("topic" + std::to_string(i));
  return p;
}

std::uint64_t net_positive_dnf_clauses(const NetPositiveParams& params) {
  const std::size_t n = params.good.size() + params.bad.size();
  if (n > 30) throw BenchPreconditionError("too many weighted terms to enumerate");
  std::uint64_t satisfying = 0;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
    std::uint64_t g = 0, b = 0;
    for (std::size_t i = 0; i < params.good.size(); ++i) {
      if ((mask >> i) & 1u) g += params.good[i].weight;
    }
    for (std::size_t i = 0; i < params.bad.size(); ++i) {
      if ((mask >> (params.good.size() + i)) & 1u) b += params.bad[i].weight;
    }
    if (g > b) ++satisfying;
  }
  return satisfying * std::max<std::uint64_t>(1, params.topic.size());
}

NormalizedDag build_net_positive_dag(const NetPositiveParams& params) {
  DagBuilder b;
  std::vector<NodeId> topic;
  for (const auto& t : params.topic) topic.push_back(b.term(t));
  NodeId scope = params.topic.empty() ? b.constant(true) : b.or_all(topic);
  NodeId constraint = weighted_sum_gt(b, params.good, params.bad);
  return b.build(b.and_(scope, constraint));
}

CorpusSpec net_positive_corpus_spec(const NetPositiveParams& params) {
  CorpusSpec spec;
  spec.universe_size = params.universe_size;
  spec.seed = params.seed;
  for (const auto& t : params.good) spec.terms.push_back({t.term, params.weighted_density});
  for (const auto& t : params.bad) spec.terms.push_back({t.term, params.weighted_density});
  for (const auto& t : params.topic) spec.terms.push_back({t, params.topic_density});
  return spec;
}

PostingList net_positive_oracle(const NetPositiveParams& params, const InvertedIndex& index) {
  const std::uint64_t n = index.universe_size();
  std::vector<std::uint64_t> good(n, 0), bad(n, 0);
  std::vector<bool> in_topic(n, params.topic.empty());
  for (const auto& t : params.good) {
    for (DocId d : index.lookup(t.term)) good[d] += t.weight;
  }
  for (const auto& t : params.bad) {
    for (DocId d : index.lookup(t.term)) bad[d] += t.weight;
  }
  for (const auto& t : params.topic) {
    for (DocId d : index.lookup(t)) in_topic[d] = true;
  }
  PostingList out;
  for (std::uint64_t d = 0; d < n; ++d) {
    if (in_topic[d] && good[d] > bad[d]) out.push_back(static_cast<DocId>(d));
  }
  return out;
}

BenchReport exp_net_positive(const NetPositiveParams& params) {
  const auto corpus = gen_corpus(net_positive_corpus_spec(params));
  const auto dag = build_net_positive_dag(params);

  auto start = std::chrono::steady_clock::now();
  auto pn = compute_pn(dag, corpus.index);
  double wall = elapsed_ms(start);
  const auto oracle = net_positive_oracle(params, corpus.index);
  const std::uint64_t clauses = net_positive_dnf_clauses(params);
  const bool same = pn.result == oracle;

  BenchReport report;
  report.experiment = "net-positive";
  report.rows.push_back({
      {"universe_size", params.universe_size},
      {"good_terms", std::uint64_t{params.good.size()}},
      {"bad_terms", std::uint64_t{params.bad.size()}},
      {"topic_terms", std::uint64_t{params.topic.size()}},
      {"dag_nodes", std::uint64_t{dag.size()}},
      {"dnf_clauses", clauses},
      {"pn_node_visits", pn.counters.node_visits},
      {"pn_touches", pn.counters.element_touches},
      {"pn_max_materialized", pn.counters.max_materialized},
      {"u_active_size", pn.u_active_size},
      {"result_size", std::uint64_t{pn.result.size()}},
      {"results_agree", same},
      {"wall_ms", wall},
  });
  report.verdicts.push_back(verdict("dag_nodes_in_range", dag.size() >= 100 && dag.size() <= 2000,
                                    std::to_string(dag.size()) + " in [100, 2000]"));
  report.verdicts.push_back(verdict("dnf_explodes", clauses >= 10000,
                                    std::to_string(clauses) + " >= 10000"));
  report.verdicts.push_back(verdict("results_agree", same, "compute_pn equals weighted-sum oracle"));
  return report;
}

bool is_known_experiment(const std::string& name) {
  return name == "disjunctive-negation" || name == "xor-chain" || name == "net-positive";
}

BenchReport run_experiment(const std::string& name, std::uint64_t seed) {
  if (name == "disjunctive-negation") {
    return exp_disjunctive_negation(disjunctive_negation_sweep({10000, 100000, 1000000}, 1000, seed));
  }
  if (name == "xor-chain") {
    XorChainParams p;
    p.seed = seed;
    for (unsigned d = 1; d <= 20; ++d) p.depths.push_back(d);
    return exp_xor_chain(p);
  }
  if (name == "net-positive") return exp_net_positive(default_net_positive_params(seed));
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

}  // namespace pnsearch
