#include "pnsearch/index.hpp"

#include <zlib.h>

#include <algorithm>
#include <fstream>
#include <iterator>
#include <unordered_map>

#include "json.hpp"

namespace pnsearch {

namespace {

const PostingList& empty_list() {
  static const PostingList kEmpty;
  return kEmpty;
}

const std::shared_ptr<const PostingList>& empty_shared() {
  static const auto kEmpty = std::make_shared<const PostingList>();
  return kEmpty;
}

constexpr char kMagic[4] = {'P', 'N', 'I', 'X'};

class ByteWriter {
 public:
  void put_u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void put_u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void put_varint(std::uint64_t v) {
    while (v >= 0x80) {
      out_.push_back(static_cast<std::uint8_t>(v | 0x80));
      v >>= 7;
    }
    out_.push_back(static_cast<std::uint8_t>(v));
  }
  void put_bytes(std::string_view s) { out_.insert(out_.end(), s.begin(), s.end()); }
  std::vector<std::uint8_t>& bytes() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint32_t get_u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{in_[pos_++]} << (8 * i);
    return v;
  }
  std::uint64_t get_u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t{in_[pos_++]} << (8 * i);
    return v;
  }
  std::uint64_t get_varint() {
    std::uint64_t v = 0;
    for (unsigned shift = 0; shift < 64; shift += 7) {
      need(1);
      std::uint8_t b = in_[pos_++];
      v |= std::uint64_t{b & 0x7fu} << shift;
      if ((b & 0x80) == 0) return v;
    }
    throw IndexFormatError("index file: varint longer than 10 bytes");
  }
  std::string get_string(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  bool at_end() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw IndexFormatError("index file: truncated");
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks for very large files.
  constexpr std::size_t kChunk = 1u << 30;
  for (std::size_t off = 0; off < bytes.size(); off += kChunk) {
    auto n = std::min(kChunk, bytes.size() - off);
    crc = crc32(crc, bytes.data() + off, static_cast<uInt>(n));
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

bool is_strictly_ascending(std::span<const DocId> docs) {
  return std::adjacent_find(docs.begin(), docs.end(),
                            [](DocId a, DocId b) { return a >= b; }) == docs.end();
}

InvertedIndex InvertedIndex::from_postings(std::uint64_t universe_size,
                                           std::map<std::string, PostingList, std::less<>> postings,
                                           std::vector<std::string> keys) {
  if (universe_size > std::uint64_t{1} << 32) {
    throw IndexError("universe size exceeds 32-bit doc id space");
  }
  InvertedIndex index;
  index.universe_size_ = universe_size;
  for (auto& [term, list] : postings) {
    if (!is_strictly_ascending(list)) {
      throw IndexError("posting list for '" + term + "' is not strictly ascending");
    }
    if (!list.empty() && list.back() >= universe_size) {
      throw IndexError("posting list for '" + term + "' references doc " +
                       std::to_string(list.back()) + " outside the universe");
    }
    index.dictionary_.emplace(term, std::make_shared<const PostingList>(std::move(list)));
  }
  index.set_keys(std::move(keys));
  return index;
}

const PostingList& InvertedIndex::lookup(std::string_view term) const {
  auto it = dictionary_.find(term);
  return it == dictionary_.end() ? empty_list() : *it->second;
}

std::shared_ptr<const PostingList> InvertedIndex::lookup_shared(std::string_view term) const {
  auto it = dictionary_.find(term);
  return it == dictionary_.end() ? empty_shared() : it->second;
}

void InvertedIndex::set_keys(std::vector<std::string> keys) {
  if (!keys.empty() && keys.size() != universe_size_) {
    throw IndexError("key sidecar has " + std::to_string(keys.size()) + " entries, universe has " +
                     std::to_string(universe_size_));
  }
  keys_ = std::move(keys);
}

std::string InvertedIndex::key_of(DocId doc) const {
  return keys_.empty() ? std::to_string(doc) : keys_.at(doc);
}

bool operator==(const InvertedIndex& a, const InvertedIndex& b) {
  if (a.universe_size_ != b.universe_size_ || a.keys_ != b.keys_ ||
      a.dictionary_.size() != b.dictionary_.size()) {
    return false;
  }
  return std::equal(a.dictionary_.begin(), a.dictionary_.end(), b.dictionary_.begin(),
                    [](const auto& x, const auto& y) {
                      return x.first == y.first && *x.second == *y.second;
                    });
}

InvertedIndex build_index(std::span<const Document> docs) {
  std::unordered_map<std::string, DocId> ids;
  std::vector<std::string> keys;
  std::vector<std::vector<std::string>> normalized;  // per doc: sorted unique tokens
  std::map<std::string, PostingList, std::less<>> postings;

  for (const auto& doc : docs) {
    std::vector<std::string> tokens = doc.tokens;
    for (const auto& t : tokens) {
      if (t.empty()) throw IndexError("document '" + doc.key + "' has an empty token");
    }
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());

    auto [it, inserted] = ids.try_emplace(doc.key, static_cast<DocId>(keys.size()));
    if (!inserted) {
      if (normalized[it->second] != tokens) {
        throw IndexError("duplicate document id '" + doc.key + "' with conflicting content");
      }
      continue;
    }
    DocId id = it->second;
    keys.push_back(doc.key);
    for (const auto& t : tokens) postings[t].push_back(id);
    normalized.push_back(std::move(tokens));
  }
  const std::uint64_t universe = keys.size();
  return InvertedIndex::from_postings(universe, std::move(postings), std::move(keys));
}

std::vector<Document> read_corpus_jsonl(std::istream& in) {
  std::vector<Document> docs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto where = [&] { return "corpus line " + std::to_string(line_no) + ": "; };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw IndexError(where() + e.what());
    }
    if (!j.is_object() || !j.contains("id") || !j["id"].is_string()) {
      throw IndexError(where() + "expected object with string field 'id'");
    }
    if (!j.contains("tokens") || !j["tokens"].is_array()) {
      throw IndexError(where() + "expected array field 'tokens'");
    }
    Document doc;
    doc.key = j["id"].get<std::string>();
    for (const auto& t : j["tokens"]) {
      if (!t.is_string()) throw IndexError(where() + "tokens must be strings");
      doc.tokens.push_back(t.get<std::string>());
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<Document> read_corpus_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IndexError("cannot open corpus " + path.string());
  return read_corpus_jsonl(in);
}

std::string bit_token(std::string_view field, unsigned bit) {
  return std::string(field) + "#BIT" + std::to_string(bit);
}

std::vector<std::string> bit_slice_tokens(std::string_view field, std::uint64_t value,
                                          unsigned width) {
  std::vector<std::string> tokens;
  for (unsigned i = 0; i < width && i < 64; ++i) {
    if ((value >> i) & 1u) tokens.push_back(bit_token(field, i));
  }
  return tokens;
}

std::vector<std::uint8_t> serialize_index(const InvertedIndex& index) {
  ByteWriter w;
  w.put_bytes(std::string_view(kMagic, 4));
  w.put_u32(kIndexFormatVersion);
  w.put_u64(index.universe_size());
  w.put_u64(index.term_count());
  for (const auto& [term, list] : index.dictionary()) {
    w.put_varint(term.size());
    w.put_bytes(term);
    w.put_varint(list->size());
    DocId prev = 0;
    for (DocId d : *list) {
      w.put_varint(d - prev);
      prev = d;
    }
  }
  w.put_u32(crc_of(w.bytes()));
  return std::move(w.bytes());
}

InvertedIndex deserialize_index(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 + 4 + 8 + 8 + 4) throw IndexFormatError("index file: truncated header");
  if (!std::equal(kMagic, kMagic + 4, bytes.begin())) {
    throw IndexFormatError("index file: bad magic");
  }
  auto body = bytes.first(bytes.size() - 4);
  ByteReader tail(bytes.last(4));
  if (tail.get_u32() != crc_of(body)) throw IndexFormatError("index file: checksum mismatch");

  ByteReader r(body.subspan(4));
  std::uint32_t version = r.get_u32();
  if (version != kIndexFormatVersion) {
    throw IndexFormatError("index file: unsupported format version " + std::to_string(version));
  }
  std::uint64_t universe = r.get_u64();
  std::uint64_t terms = r.get_u64();
  std::map<std::string, PostingList, std::less<>> postings;
  for (std::uint64_t i = 0; i < terms; ++i) {
    std::string term = r.get_string(r.get_varint());
    std::uint64_t n = r.get_varint();
    if (n > universe) throw IndexFormatError("index file: posting list longer than universe");
    PostingList list;
    list.reserve(n);
    std::uint64_t prev = 0;
    for (std::uint64_t k = 0; k < n; ++k) {
      std::uint64_t gap = r.get_varint();
      if (k > 0 && gap == 0) throw IndexFormatError("index file: duplicate doc id in '" + term + "'");
      prev += gap;
      if (prev >= universe) throw IndexFormatError("index file: doc id outside universe");
      list.push_back(static_cast<DocId>(prev));
    }
    if (!postings.emplace(std::move(term), std::move(list)).second) {
      throw IndexFormatError("index file: duplicate term");
    }
  }
  if (!r.at_end()) throw IndexFormatError("index file: trailing bytes");
  return InvertedIndex::from_postings(universe, std::move(postings));
}

std::filesystem::path keys_sidecar_path(const std::filesystem::path& index_path) {
  auto p = index_path;
  p += ".keys.json";
  return p;
}

void save_index(const InvertedIndex& index, const std::filesystem::path& path) {
  auto bytes = serialize_index(index);
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IndexError("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IndexError("write failed: " + path.string());
  }
  auto sidecar = keys_sidecar_path(path);
  if (index.keys().empty()) {
    std::error_code ec;
    std::filesystem::remove(sidecar, ec);
    return;
  }
  std::ofstream out(sidecar, std::ios::trunc);
  if (!out) throw IndexError("cannot open " + sidecar.string() + " for writing");
  out << nlohmann::json(index.keys()).dump() << '\n';
  if (!out) throw IndexError("write failed: " + sidecar.string());
}

InvertedIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IndexError("cannot open index " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  auto index = deserialize_index(bytes);

  auto sidecar = keys_sidecar_path(path);
  if (std::filesystem::exists(sidecar)) {
    std::ifstream kin(sidecar);
    try {
      auto j = nlohmann::json::parse(kin);
      index.set_keys(j.get<std::vector<std::string>>());
    } catch (const nlohmann::json::exception& e) {
      throw IndexFormatError("key sidecar " + sidecar.string() + ": " + e.what());
    }
  }
  return index;
}

}  // namespace pnsearch
