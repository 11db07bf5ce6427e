#pragma once

// Seeded random instances shared by the unit and acceptance suites.

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "pnsearch/baselines.hpp"
#include "pnsearch/index.hpp"
#include "pnsearch/query_dag.hpp"

namespace pnsearch::testing {

inline std::string term_name(std::size_t i) { return "t" + std::to_string(i); }

// Terms t0..t{n-1}, each with a density drawn from a mix of rare, common and
// near-universal values so adaptive polarity gets exercised.
inline InvertedIndex random_index(std::mt19937_64& rng, std::uint64_t universe, std::size_t terms) {
  static constexpr double kDensities[] = {0.0, 0.01, 0.05, 0.2, 0.5, 0.7, 0.95, 1.0};
  std::map<std::string, PostingList, std::less<>> postings;
  for (std::size_t t = 0; t < terms; ++t) {
    double p = kDensities[rng() % std::size(kDensities)];
    std::bernoulli_distribution coin(p);
    auto& list = postings[term_name(t)];
    for (std::uint64_t d = 0; d < universe; ++d) {
      if (coin(rng)) list.push_back(static_cast<DocId>(d));
    }
  }
  return InvertedIndex::from_postings(universe, std::move(postings));
}

// Random binary dag of at most max_nodes nodes. Operands are drawn from all
// earlier nodes, so sharing and re-convergence are common. Terms may be absent
// from the index (index `terms` .. `terms + 1`).
inline QueryDag random_binary_dag(std::mt19937_64& rng, std::size_t max_nodes, std::size_t terms) {
  QueryDag dag;
  const std::size_t target = 1 + rng() % max_nodes;
  auto pick = [&] { return static_cast<NodeId>(rng() % dag.size()); };
  while (dag.size() < target) {
    unsigned r = dag.nodes.empty() ? 0 : static_cast<unsigned>(rng() % 10);
    if (r <= 2) {
      if (rng() % 20 == 0) {
        dag.add_const(rng() % 2 == 0);
      } else {
        dag.add_term(term_name(rng() % (terms + 2)));
      }
    } else if (r <= 4) {
      dag.add_not(pick());
    } else if (r <= 7) {
      dag.add_and({pick(), pick()});
    } else {
      dag.add_or({pick(), pick()});
    }
  }
  dag.root = static_cast<NodeId>(dag.size() - 1);
  return dag;
}

// Like random_binary_dag but And/Or take 0..4 children.
inline QueryDag random_kary_dag(std::mt19937_64& rng, std::size_t max_nodes, std::size_t terms) {
  QueryDag dag;
  const std::size_t target = 1 + rng() % max_nodes;
  auto pick = [&] { return static_cast<NodeId>(rng() % dag.size()); };
  while (dag.size() < target) {
    unsigned r = dag.nodes.empty() ? 0 : static_cast<unsigned>(rng() % 10);
    if (r <= 2) {
      dag.add_term(term_name(rng() % (terms + 1)));
    } else if (r <= 4) {
      dag.add_not(pick());
    } else {
      std::vector<NodeId> kids(rng() % 5);
      for (auto& k : kids) k = pick();
      if (r <= 7) {
        dag.add_and(std::move(kids));
      } else {
        dag.add_or(std::move(kids));
      }
    }
  }
  dag.root = static_cast<NodeId>(dag.size() - 1);
  return dag;
}

inline CircuitInstance random_circuit(std::mt19937_64& rng, std::size_t max_gates) {
  CircuitInstance c;
  const std::size_t target = 1 + rng() % max_gates;
  const std::size_t inputs = 1 + rng() % std::max<std::size_t>(1, target / 3);
  for (std::size_t g = 0; g < target; ++g) {
    Gate gate;
    if (g < inputs) {
      gate.kind = GateKind::Input;
      gate.value = rng() % 2 == 0;
    } else {
      unsigned r = static_cast<unsigned>(rng() % 3);
      gate.kind = r == 0 ? GateKind::Not : r == 1 ? GateKind::And : GateKind::Or;
      std::size_t arity = gate.kind == GateKind::Not ? 1 : 2 + rng() % 2;
      for (std::size_t k = 0; k < arity; ++k) gate.operands.push_back(rng() % g);
    }
    c.gates.push_back(std::move(gate));
  }
  c.output = c.gates.size() - 1;
  return c;
}

// Membership-table semantics of a PN pair, independent of the merge kernels.
inline std::vector<bool> members(const PostingList& set, bool negative, std::uint64_t universe) {
  std::vector<bool> in(universe, negative);
  for (DocId d : set) in[d] = !negative;
  return in;
}

inline PostingList to_list(const std::vector<bool>& in) {
  PostingList out;
  for (std::size_t d = 0; d < in.size(); ++d) {
    if (in[d]) out.push_back(static_cast<DocId>(d));
  }
  return out;
}

}  // namespace pnsearch::testing
