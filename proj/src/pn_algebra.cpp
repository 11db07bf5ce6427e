#include "pnsearch/pn_algebra.hpp"

#include <algorithm>

namespace pnsearch {

CostCounters& CostCounters::operator+=(const CostCounters& other) {
  element_touches += other.element_touches;
  node_visits += other.node_visits;
  finalization_touches += other.finalization_touches;
  note_materialized(other.max_materialized);
  return *this;
}

namespace {

void charge(CostCounters* counters, std::uint64_t touches) {
  if (counters) counters->element_touches += touches;
}

}  // namespace

PostingList set_union(std::span<const DocId> a, std::span<const DocId> b, CostCounters* counters) {
  PostingList out;
  out.reserve(a.size() + b.size());
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  charge(counters, a.size() + b.size());
  return out;
}

PostingList set_intersect(std::span<const DocId> a, std::span<const DocId> b,
                          CostCounters* counters) {
  PostingList out;
  out.reserve(std::min(a.size(), b.size()));
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j]) {
      ++i;
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      out.push_back(a[i]);
      ++i;
      ++j;
    }
  }
  charge(counters, i + j);
  return out;
}

PostingList set_difference(std::span<const DocId> a, std::span<const DocId> b,
                           CostCounters* counters) {
  PostingList out;
  out.reserve(a.size());
  std::size_t i = 0, j = 0;
  while (i < a.size()) {
    if (j == b.size()) {
      out.insert(out.end(), a.begin() + static_cast<std::ptrdiff_t>(i), a.end());
      i = a.size();
    } else if (a[i] < b[j]) {
      out.push_back(a[i++]);
    } else if (b[j] < a[i]) {
      ++j;
    } else {
      ++i;
      ++j;
    }
  }
  charge(counters, a.size() + j);
  return out;
}

PostingList set_complement(std::span<const DocId> docs, std::uint64_t universe_size,
                           CostCounters* counters) {
  PostingList out;
  out.reserve(universe_size - std::min<std::uint64_t>(docs.size(), universe_size));
  std::size_t j = 0;
  for (std::uint64_t d = 0; d < universe_size; ++d) {
    if (j < docs.size() && docs[j] == d) {
      ++j;
    } else {
      out.push_back(static_cast<DocId>(d));
    }
  }
  charge(counters, universe_size);
  return out;
}

PNResponse pn_not(const PNResponse& child) {
  return PNResponse(child.shared_set(), flip(child.polarity()));
}

PNResponse pn_and(const PNResponse& l, const PNResponse& r, CostCounters* counters) {
  const auto& a = l.set();
  const auto& b = r.set();
  if (l.positive() && r.positive()) return {set_intersect(a, b, counters), Polarity::Pos};
  if (l.positive()) return {set_difference(a, b, counters), Polarity::Pos};
  if (r.positive()) return {set_difference(b, a, counters), Polarity::Pos};
  // (U\A) n (U\B) = U \ (A u B)
  return {set_union(a, b, counters), Polarity::Neg};
}

PNResponse pn_or(const PNResponse& l, const PNResponse& r, CostCounters* counters) {
  const auto& a = l.set();
  const auto& b = r.set();
  if (l.positive() && r.positive()) return {set_union(a, b, counters), Polarity::Pos};
  // A u (U\B) = U \ (B\A)
  if (l.positive()) return {set_difference(b, a, counters), Polarity::Neg};
  if (r.positive()) return {set_difference(a, b, counters), Polarity::Neg};
  // (U\A) u (U\B) = U \ (A n B)
  return {set_intersect(a, b, counters), Polarity::Neg};
}

PostingList denote(const PNResponse& r, std::uint64_t universe_size) {
  if (r.positive()) return r.set();
  return set_complement(r.set(), universe_size);
}

PNResponse shrink(const PNResponse& r, std::uint64_t universe_size, CostCounters* counters) {
  if (2 * r.size() <= universe_size) return r;
  return {set_complement(r.set(), universe_size, counters), flip(r.polarity())};
}

}  // namespace pnsearch
