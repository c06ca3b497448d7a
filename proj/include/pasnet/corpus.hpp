#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace pasnet {

enum class Label : int { kNom = 0, kAcc = 1, kDat = 2, kNone = 3 };

inline constexpr int kNumLabels = 4;
inline constexpr std::array<Label, 3> kArgLabels = {Label::kNom, Label::kAcc, Label::kDat};

constexpr int index_of(Label l) { return static_cast<int>(l); }
std::string_view label_name(Label l);
std::optional<Label> parse_label(std::string_view s);

// Distance value for a token inside the predicate's own bunsetsu.
inline constexpr int kSameBunsetsu = 0;

// One annotated sentence. All indices are 0-based here; the file format is
// 1-based for tokens and predicates.
struct Sentence {
  std::string id;
  std::vector<std::string> tokens;
  std::vector<int> bunsetsu_of;    // token -> bunsetsu
  std::vector<int> bunsetsu_head;  // bunsetsu -> parent bunsetsu, -1 for the root
  std::vector<int> predicates;     // ascending token positions
  std::map<int, std::vector<int>> clusters;        // cluster id -> ascending tokens
  std::map<std::pair<int, Label>, int> gold_args;  // (predicate, label) -> cluster id

  std::size_t n() const { return tokens.size(); }
  std::size_t q() const { return predicates.size(); }

  const std::vector<int>* gold_cluster(int pred, Label label) const;
  bool operator==(const Sentence&) const = default;
};

// Throws IntegrityError naming the first violated invariant.
void validate(const Sentence& s);

// Edges on the undirected tree path between two bunsetsu.
int bunsetsu_distance(const Sentence& s, int a, int b);
// Distance from predicate `pred` to token `t`; kSameBunsetsu when they
// share a bunsetsu.
int dependency_distance(const Sentence& s, int pred, int t);

// Training target of a gold slot: the largest-index cluster member outside
// the predicate's bunsetsu, or -1 if every member is inside it.
int canonical_target(const Sentence& s, int pred, Label label);

class Vocabulary {
 public:
  static constexpr std::int32_t kUnk = 0;
  static constexpr std::string_view kUnkSurface = "<unk>";

  Vocabulary();
  static Vocabulary build(std::span<const Sentence> sentences);

  std::int32_t id(std::string_view surface) const;
  std::int32_t add(std::string_view surface);
  const std::string& surface(std::int32_t id) const { return surfaces_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return surfaces_.size(); }
  std::span<const std::string> surfaces() const { return surfaces_; }

  std::vector<std::int32_t> encode(const Sentence& s) const;

 private:
  std::vector<std::string> surfaces_;
  std::unordered_map<std::string, std::int32_t> ids_;
};

struct Corpus {
  std::vector<Sentence> sentences;
  Vocabulary vocab;
};

// Reads the line-oriented corpus format. Throws ParseError for malformed
// lines and IntegrityError for dangling references or broken invariants.
std::vector<Sentence> parse_sentences(std::istream& in);
Corpus parse_corpus(std::istream& in, bool build_vocab = true);
Corpus read_corpus_file(const std::string& path, bool build_vocab = true);

void write_sentences(std::ostream& out, std::span<const Sentence> sentences);
void write_corpus_file(const std::string& path, std::span<const Sentence> sentences);
std::string serialize(std::span<const Sentence> sentences);

struct SplitRatios {
  double train = 0.8;
  double dev = 0.1;
  double test = 0.1;
};

struct CorpusSplit {
  Corpus train;
  Corpus dev;
  Corpus test;
};

// Seeded shuffle then partition; all three vocabularies are the one built
// from the training part.
CorpusSplit split(const Corpus& corpus, SplitRatios ratios, std::uint64_t seed);

}  // namespace pasnet
