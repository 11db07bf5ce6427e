#pragma once

#include <cstdint>
#include <memory>
#include <span>

#include "pnsearch/index.hpp"

namespace pnsearch {

// Work accounting for one evaluation.
//
// element_touches counts input elements consumed by the merge kernels plus
// every universe id visited by a complement scan outside finalization. Output
// writes are not counted separately; each output element is produced by
// consuming at least one input element.
struct CostCounters {
  std::uint64_t element_touches = 0;
  std::uint64_t node_visits = 0;
  std::uint64_t max_materialized = 0;
  std::uint64_t finalization_touches = 0;

  void note_materialized(std::uint64_t size) {
    if (size > max_materialized) max_materialized = size;
  }

  CostCounters& operator+=(const CostCounters& other);
  friend bool operator==(const CostCounters&, const CostCounters&) = default;
};

// Sorted-list merge kernels. `counters` may be null.
PostingList set_union(std::span<const DocId> a, std::span<const DocId> b,
                      CostCounters* counters = nullptr);
PostingList set_intersect(std::span<const DocId> a, std::span<const DocId> b,
                          CostCounters* counters = nullptr);
PostingList set_difference(std::span<const DocId> a, std::span<const DocId> b,
                           CostCounters* counters = nullptr);
// [0, universe_size) \ docs. Visits every universe id.
PostingList set_complement(std::span<const DocId> docs, std::uint64_t universe_size,
                           CostCounters* counters = nullptr);

enum class Polarity : std::uint8_t { Pos, Neg };

constexpr Polarity flip(Polarity p) { return p == Polarity::Pos ? Polarity::Neg : Polarity::Pos; }

// <S, POS> denotes S; <S, NEG> denotes U \ S. The set is shared and immutable,
// so negation is a flag flip with no copy.
class PNResponse {
 public:
  PNResponse() : PNResponse(PostingList{}, Polarity::Pos) {}
  PNResponse(PostingList docs, Polarity polarity)
      : docs_(std::make_shared<const PostingList>(std::move(docs))), polarity_(polarity) {}
  PNResponse(std::shared_ptr<const PostingList> docs, Polarity polarity)
      : docs_(std::move(docs)), polarity_(polarity) {}

  const PostingList& set() const { return *docs_; }
  const std::shared_ptr<const PostingList>& shared_set() const { return docs_; }
  Polarity polarity() const { return polarity_; }
  bool positive() const { return polarity_ == Polarity::Pos; }
  std::size_t size() const { return docs_->size(); }

  friend bool operator==(const PNResponse& a, const PNResponse& b) {
    return a.polarity_ == b.polarity_ && *a.docs_ == *b.docs_;
  }

 private:
  std::shared_ptr<const PostingList> docs_;
  Polarity polarity_;
};

PNResponse pn_not(const PNResponse& child);
PNResponse pn_and(const PNResponse& left, const PNResponse& right,
                  CostCounters* counters = nullptr);
PNResponse pn_or(const PNResponse& left, const PNResponse& right,
                 CostCounters* counters = nullptr);

// The denoted set against a concrete universe.
PostingList denote(const PNResponse& r, std::uint64_t universe_size);

// Optional re-polarization: flips to the complement representation when
// |set| > universe_size / 2. Not used by the core algebra.
PNResponse shrink(const PNResponse& r, std::uint64_t universe_size,
                  CostCounters* counters = nullptr);

}  // namespace pnsearch
