#include "pnsearch/evaluator.hpp"

#include <algorithm>
#include <atomic>
#include <optional>
#include <thread>

#include "json.hpp"

namespace pnsearch {

PNResponse leaf_response(const InvertedIndex& index, std::string_view term,
                         const EvalOptions& opts, CostCounters* counters) {
  auto docs = index.lookup_shared(term);
  if (opts.adaptive_leaf_polarity && 2 * docs->size() > index.universe_size()) {
    return {set_complement(*docs, index.universe_size(), counters), Polarity::Neg};
  }
  return {std::move(docs), Polarity::Pos};
}

PostingList finalize(const PNResponse& root, std::uint64_t universe_size, CostCounters* counters) {
  if (root.positive()) return root.set();
  CostCounters scan;
  auto out = set_complement(root.set(), universe_size, &scan);
  if (counters) counters->finalization_touches += scan.element_touches;
  return out;
}

PostingList active_universe(const QueryDag& dag, const InvertedIndex& index) {
  auto reach = reachable_from_root(dag);
  std::vector<std::string_view> terms;
  for (NodeId v = 0; v < dag.size(); ++v) {
    if (reach[v] && dag.nodes[v].kind == NodeKind::Term) terms.push_back(dag.nodes[v].term);
  }
  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  PostingList acc;
  for (auto t : terms) acc = set_union(acc, index.lookup(t));
  return acc;
}

namespace {

class Evaluation {
 public:
  Evaluation(const QueryDag& dag, const InvertedIndex& index, const EvalOptions& opts)
      : dag_(dag), index_(index), opts_(opts), memo_(dag.size()) {}

  void visit(NodeId v, CostCounters* counters) {
    const auto& node = dag_.nodes[v];
    PNResponse r;
    switch (node.kind) {
      case NodeKind::Term:
        r = leaf_response(index_, node.term, opts_, counters);
        break;
      case NodeKind::True:
        r = PNResponse(PostingList{}, Polarity::Neg);
        break;
      case NodeKind::False:
        r = PNResponse(PostingList{}, Polarity::Pos);
        break;
      case NodeKind::Not:
        r = pn_not(child(node, 0));
        break;
      case NodeKind::And:
        r = pn_and(child(node, 0), child(node, 1), counters);
        break;
      case NodeKind::Or:
        r = pn_or(child(node, 0), child(node, 1), counters);
        break;
    }
    if (opts_.shrink_dense) r = shrink(r, index_.universe_size(), counters);
    if (counters) {
      ++counters->node_visits;
      counters->note_materialized(r.size());
    }
    memo_[v].emplace(std::move(r));
  }

  const PNResponse& result(NodeId v) const { return *memo_[v]; }

 private:
  const PNResponse& child(const QueryNode& node, std::size_t i) const {
    return *memo_[node.children[i]];
  }

  const QueryDag& dag_;
  const InvertedIndex& index_;
  const EvalOptions& opts_;
  // Written once per node; distinct slots may be filled concurrently.
  std::vector<std::optional<PNResponse>> memo_;
};

std::vector<std::vector<NodeId>> levels_of(const QueryDag& dag, const std::vector<NodeId>& order) {
  std::vector<std::size_t> level(dag.size(), 0);
  std::vector<std::vector<NodeId>> levels;
  for (NodeId v : order) {
    std::size_t l = 0;
    for (NodeId c : dag.nodes[v].children) l = std::max(l, level[c] + 1);
    level[v] = l;
    if (levels.size() <= l) levels.resize(l + 1);
    levels[l].push_back(v);
  }
  return levels;
}

void run_parallel(Evaluation& eval, const QueryDag& dag, const std::vector<NodeId>& order,
                  unsigned max_threads, CostCounters* total) {
  unsigned hw = max_threads ? max_threads : std::max(1u, std::thread::hardware_concurrency());
  for (const auto& wave : levels_of(dag, order)) {
    unsigned workers = static_cast<unsigned>(std::min<std::size_t>(hw, wave.size()));
    if (workers <= 1) {
      for (NodeId v : wave) eval.visit(v, total);
      continue;
    }
    std::vector<CostCounters> local(workers);
    std::atomic<std::size_t> next{0};
    {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
          CostCounters* c = total ? &local[w] : nullptr;
          for (std::size_t i = next++; i < wave.size(); i = next++) eval.visit(wave[i], c);
        });
      }
    }
    if (total) {
      for (const auto& c : local) *total += c;
    }
  }
}

}  // namespace

EvalReport compute_pn(const NormalizedDag& input, const InvertedIndex& index,
                      const EvalOptions& opts) {
  validate(input.dag());
  auto shared = cse_with_mapping(input);
  const QueryDag& dag = shared.dag.dag();

  auto reach = reachable_from_root(dag);
  std::vector<NodeId> order;
  for (NodeId v : topo_order(dag)) {
    if (reach[v]) order.push_back(v);
  }

  EvalReport report;
  CostCounters* counters = opts.collect_counters ? &report.counters : nullptr;
  Evaluation eval(dag, index, opts);
  if (opts.parallel) {
    run_parallel(eval, dag, order, opts.max_threads, counters);
  } else {
    for (NodeId v : order) eval.visit(v, counters);
  }

  report.result = finalize(eval.result(dag.root), index.universe_size(), counters);
  report.evaluated_nodes = order.size();
  report.u_active_size = active_universe(dag, index).size();

  auto input_reach = reachable_from_root(input.dag());
  for (NodeId v = 0; v < input.size(); ++v) {
    if (input_reach[v]) report.per_node_set_sizes[v] = eval.result(shared.canonical[v]).size();
  }
  return report;
}

std::string report_to_json(const EvalReport& report, const InvertedIndex& index,
                           const ReportJsonOptions& opts) {
  nlohmann::ordered_json j;
  if (opts.ids) {
    j["result"] = report.result;
    if (!index.keys().empty()) {
      auto keys = nlohmann::ordered_json::array();
      for (DocId d : report.result) keys.push_back(index.key_of(d));
      j["keys"] = std::move(keys);
    }
  }
  j["count"] = report.result.size();
  j["counters"] = {
      {"element_touches", report.counters.element_touches},
      {"node_visits", report.counters.node_visits},
      {"max_materialized", report.counters.max_materialized},
      {"finalization_touches", report.counters.finalization_touches},
  };
  j["u_active_size"] = report.u_active_size;
  j["evaluated_nodes"] = report.evaluated_nodes;
  j["universe_size"] = index.universe_size();
  if (opts.per_node_sizes) {
    auto sizes = nlohmann::ordered_json::object();
    for (auto [node, size] : report.per_node_set_sizes) sizes[std::to_string(node)] = size;
    j["per_node_set_sizes"] = std::move(sizes);
  }
  return j.dump();
}

}  // namespace pnsearch
