#ifndef MBRKIT_CORPUS_HPP_
#define MBRKIT_CORPUS_HPP_

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mbrkit {

// Multiset of pseudo-references. `support` holds the distinct texts in
// first-occurrence order and `multiplicity[k]` counts support[k] in items.
class ReferenceBag {
 public:
  ReferenceBag() = default;
  explicit ReferenceBag(std::vector<std::string> items);

  const std::vector<std::string>& items() const { return items_; }
  const std::vector<std::string>& support() const { return support_; }
  const std::vector<int>& multiplicity() const { return multiplicity_; }

  // Position in support() of items()[i].
  std::size_t support_index_of_item(std::size_t i) const {
    return item_to_support_[i];
  }

  // Multiplicity of `text`; 0 when it is not in the bag.
  int multiplicity_of(std::string_view text) const;

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  friend bool operator==(const ReferenceBag& a, const ReferenceBag& b) {
    return a.items_ == b.items_;
  }

 private:
  std::vector<std::string> items_;
  std::vector<std::string> support_;
  std::vector<int> multiplicity_;
  std::vector<std::size_t> item_to_support_;
};

struct Instance {
  std::optional<std::string> source;
  std::vector<std::string> hypotheses;
  ReferenceBag references;
  // Natural-log scores aligned with references.items().
  std::optional<std::vector<double>> lprobs;
  std::optional<std::string> id;

  friend bool operator==(const Instance&, const Instance&) = default;
};

// Unit-normalized sentence embeddings keyed by text.
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return vectors_.size(); }

  // Normalizes `vector` to unit length. Returns false if `text` replaced an
  // existing entry. Throws DataError on dimension mismatch or zero norm.
  bool insert(std::string text, std::vector<double> vector);

  const std::vector<double>* find(std::string_view text) const;

 private:
  struct Hash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::size_t dim_ = 0;
  std::unordered_map<std::string, std::vector<double>, Hash, std::equal_to<>>
      vectors_;
};

// Ranked n-best result of one decoder run.
struct DecoderOutput {
  std::vector<std::size_t> idx;
  std::vector<std::string> sentence;
  std::vector<double> score;
};

// One JSON object per line with keys source, hypotheses and optional
// references, lprobs, id. Blank lines are skipped. Errors carry the
// 1-based line number.
std::vector<Instance> parse_jsonl(std::istream& in);

// Consecutive blocks of `num_candidates` lines form one instance. When
// `sources` is given it must hold exactly one line per block.
std::vector<Instance> parse_plain(std::istream& hypotheses,
                                  std::size_t num_candidates,
                                  std::istream* sources = nullptr);

// Lines of {"text": ..., "vector": [...]}. Duplicate texts keep the last
// vector and append a message to `warnings` if given.
EmbeddingTable load_embeddings(std::istream& in,
                               std::vector<std::string>* warnings = nullptr);

enum class OutputMode { kText, kJsonl };

// text: the top-1 sentence per line. jsonl: {"idx":[...],"sentence":[...],
// "score":[...]} per line.
void write_outputs(std::ostream& out, const std::vector<DecoderOutput>& outputs,
                   OutputMode mode);

// Canonical JSONL form of an instance, parseable by parse_jsonl.
std::string to_jsonl(const Instance& instance);

}  // namespace mbrkit

#endif  // MBRKIT_CORPUS_HPP_
