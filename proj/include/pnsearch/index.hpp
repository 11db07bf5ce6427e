#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pnsearch {

// Dense document identifier in [0, universe_size).
using DocId = std::uint32_t;

// Strictly ascending, duplicate-free document ids.
using PostingList = std::vector<DocId>;

bool is_strictly_ascending(std::span<const DocId> docs);

class IndexError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised by load_index for truncated files, bad magic, unknown versions and
// checksum mismatches.
class IndexFormatError : public IndexError {
 public:
  using IndexError::IndexError;
};

// One corpus record. `key` is the external identifier; dense DocIds are
// assigned in order of first appearance.
struct Document {
  std::string key;
  std::vector<std::string> tokens;
};

// Term -> posting list over a dense universe. Immutable once built; lookups of
// absent terms return the empty list.
class InvertedIndex {
 public:
  using Dictionary = std::map<std::string, std::shared_ptr<const PostingList>, std::less<>>;

  InvertedIndex() = default;

  // Validates every list (ascending, < universe_size). `keys`, when non-empty,
  // must hold exactly universe_size external identifiers.
  static InvertedIndex from_postings(std::uint64_t universe_size,
                                     std::map<std::string, PostingList, std::less<>> postings,
                                     std::vector<std::string> keys = {});

  std::uint64_t universe_size() const { return universe_size_; }
  std::size_t term_count() const { return dictionary_.size(); }
  const Dictionary& dictionary() const { return dictionary_; }

  const PostingList& lookup(std::string_view term) const;
  // Shared handle to the stored list; never null.
  std::shared_ptr<const PostingList> lookup_shared(std::string_view term) const;
  std::size_t doc_frequency(std::string_view term) const { return lookup(term).size(); }

  // External keys (sidecar); empty when the index was built without them.
  const std::vector<std::string>& keys() const { return keys_; }
  void set_keys(std::vector<std::string> keys);
  std::string key_of(DocId doc) const;

  friend bool operator==(const InvertedIndex& a, const InvertedIndex& b);

 private:
  std::uint64_t universe_size_ = 0;
  Dictionary dictionary_;
  std::vector<std::string> keys_;
};

InvertedIndex build_index(std::span<const Document> docs);

// JSON Lines corpus: {"id": "...", "tokens": ["...", ...]} per line. Blank
// lines are skipped. Errors carry the 1-based line number.
std::vector<Document> read_corpus_jsonl(std::istream& in);
std::vector<Document> read_corpus_jsonl(const std::filesystem::path& path);

// Bit-sliced numeric field tokens: `field#BIT<i>` for every set bit i < width.
std::vector<std::string> bit_slice_tokens(std::string_view field, std::uint64_t value,
                                          unsigned width);
std::string bit_token(std::string_view field, unsigned bit);

// Binary index format, little endian:
//   "PNIX" | u32 version | u64 universe_size | u64 term_count
//   term_count x { varint len | bytes | varint n | n varint gaps }
//   u32 crc32 of all preceding bytes
// The first gap of a list is the first doc id itself.
inline constexpr std::uint32_t kIndexFormatVersion = 1;

std::vector<std::uint8_t> serialize_index(const InvertedIndex& index);
InvertedIndex deserialize_index(std::span<const std::uint8_t> bytes);

// Writes the index file; external keys, if present, go to `<path>.keys.json`.
void save_index(const InvertedIndex& index, const std::filesystem::path& path);
InvertedIndex load_index(const std::filesystem::path& path);
std::filesystem::path keys_sidecar_path(const std::filesystem::path& index_path);

}  // namespace pnsearch
