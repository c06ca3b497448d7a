#include "pasnet/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "pasnet/errors.hpp"
#include "pasnet/rng.hpp"

namespace pasnet {

std::string_view label_name(Label l) {
  switch (l) {
    case Label::kNom: return "NOM";
    case Label::kAcc: return "ACC";
    case Label::kDat: return "DAT";
    case Label::kNone: return "NONE";
  }
  return "?";
}

std::optional<Label> parse_label(std::string_view s) {
  if (s == "NOM") return Label::kNom;
  if (s == "ACC") return Label::kAcc;
  if (s == "DAT") return Label::kDat;
  if (s == "NONE") return Label::kNone;
  return std::nullopt;
}

const std::vector<int>* Sentence::gold_cluster(int pred, Label label) const {
  auto it = gold_args.find({pred, label});
  if (it == gold_args.end()) return nullptr;
  auto c = clusters.find(it->second);
  return c == clusters.end() ? nullptr : &c->second;
}

void validate(const Sentence& s) {
  auto fail = [&](const std::string& what) { throw IntegrityError("sentence " + s.id + ": " + what); };
  const int n = static_cast<int>(s.n());
  const int nb = static_cast<int>(s.bunsetsu_head.size());
  if (s.bunsetsu_of.size() != s.tokens.size()) fail("token/bunsetsu table length mismatch");
  for (int t = 0; t < n; ++t) {
    if (s.bunsetsu_of[t] < 0 || s.bunsetsu_of[t] >= nb) {
      fail("token " + std::to_string(t + 1) + " references undefined bunsetsu " + std::to_string(s.bunsetsu_of[t]));
    }
  }
  int roots = 0;
  for (int b = 0; b < nb; ++b) {
    const int h = s.bunsetsu_head[b];
    if (h == -1) {
      ++roots;
    } else if (h < 0 || h >= nb) {
      fail("bunsetsu " + std::to_string(b) + " has undefined head " + std::to_string(h));
    }
  }
  if (nb > 0 && roots != 1) fail("bunsetsu tree has " + std::to_string(roots) + " roots");
  for (int b = 0; b < nb; ++b) {
    int cur = b;
    for (int steps = 0; cur != -1; ++steps) {
      if (steps > nb) fail("bunsetsu dependency cycle through " + std::to_string(b));
      cur = s.bunsetsu_head[cur];
    }
  }
  for (std::size_t i = 0; i < s.predicates.size(); ++i) {
    const int p = s.predicates[i];
    if (p < 0 || p >= n) fail("predicate " + std::to_string(i + 1) + " outside the sentence");
    if (i > 0 && p <= s.predicates[i - 1]) fail("predicate positions are not strictly ascending");
  }
  for (const auto& [cid, members] : s.clusters) {
    if (members.empty()) fail("cluster " + std::to_string(cid) + " is empty");
    for (int t : members) {
      if (t < 0 || t >= n) fail("cluster " + std::to_string(cid) + " member outside the sentence");
    }
  }
  for (const auto& [slot, cid] : s.gold_args) {
    if (slot.first < 0 || slot.first >= static_cast<int>(s.q())) {
      fail("argument for undefined predicate " + std::to_string(slot.first + 1));
    }
    if (slot.second == Label::kNone) fail("NONE used as an argument label");
    if (!s.clusters.contains(cid)) fail("argument references undefined cluster " + std::to_string(cid));
  }
}

int bunsetsu_distance(const Sentence& s, int a, int b) {
  // Depth of every ancestor of `a`, then walk up from `b` until one is hit.
  std::vector<int> depth_from_a(s.bunsetsu_head.size(), -1);
  for (int cur = a, d = 0; cur != -1; cur = s.bunsetsu_head[cur], ++d) depth_from_a[cur] = d;
  for (int cur = b, d = 0; cur != -1; cur = s.bunsetsu_head[cur], ++d) {
    if (depth_from_a[cur] >= 0) return d + depth_from_a[cur];
  }
  throw IntegrityError("sentence " + s.id + ": bunsetsu " + std::to_string(a) + " and " + std::to_string(b) +
                       " are not connected");
}

int dependency_distance(const Sentence& s, int pred, int t) {
  const int pb = s.bunsetsu_of.at(static_cast<std::size_t>(s.predicates.at(static_cast<std::size_t>(pred))));
  const int tb = s.bunsetsu_of.at(static_cast<std::size_t>(t));
  return pb == tb ? kSameBunsetsu : bunsetsu_distance(s, pb, tb);
}

int canonical_target(const Sentence& s, int pred, Label label) {
  const std::vector<int>* members = s.gold_cluster(pred, label);
  if (!members) return -1;
  for (auto it = members->rbegin(); it != members->rend(); ++it) {
    if (dependency_distance(s, pred, *it) != kSameBunsetsu) return *it;
  }
  return -1;
}

Vocabulary::Vocabulary() { add(kUnkSurface); }

Vocabulary Vocabulary::build(std::span<const Sentence> sentences) {
  Vocabulary v;
  for (const auto& s : sentences)
    for (const auto& tok : s.tokens) v.add(tok);
  return v;
}

std::int32_t Vocabulary::id(std::string_view surface) const {
  auto it = ids_.find(std::string(surface));
  return it == ids_.end() ? kUnk : it->second;
}

std::int32_t Vocabulary::add(std::string_view surface) {
  auto [it, inserted] = ids_.emplace(std::string(surface), static_cast<std::int32_t>(surfaces_.size()));
  if (inserted) surfaces_.emplace_back(surface);
  return it->second;
}

std::vector<std::int32_t> Vocabulary::encode(const Sentence& s) const {
  std::vector<std::int32_t> out;
  out.reserve(s.n());
  for (const auto& tok : s.tokens) out.push_back(id(tok));
  return out;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

int to_int(std::string_view field, std::size_t line_no, const char* what) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size()) {
    throw ParseError(line_no, std::string("bad ") + what + " '" + std::string(field) + "'");
  }
  return v;
}

class SentenceBuilder {
 public:
  SentenceBuilder(std::string id, std::size_t line) : line_(line) { s_.id = std::move(id); }

  void token(int idx, std::string_view surface, int bunsetsu, std::size_t line) {
    if (idx != static_cast<int>(s_.tokens.size()) + 1) {
      throw ParseError(line, "token index " + std::to_string(idx) + " out of order (expected " +
                                 std::to_string(s_.tokens.size() + 1) + ")");
    }
    if (bunsetsu < 0) throw ParseError(line, "negative bunsetsu id");
    s_.tokens.emplace_back(surface);
    s_.bunsetsu_of.push_back(bunsetsu);
  }

  void bunsetsu(int id, int head, std::size_t line) {
    if (id < 0 || head < -1) throw ParseError(line, "bad bunsetsu edge");
    if (heads_.contains(id)) throw IntegrityError("sentence " + s_.id + ": bunsetsu " + std::to_string(id) + " defined twice");
    heads_[id] = head;
  }

  void predicate(int id, int tok, std::size_t line) {
    if (id != static_cast<int>(s_.predicates.size()) + 1) {
      throw ParseError(line, "predicate id " + std::to_string(id) + " out of order");
    }
    s_.predicates.push_back(tok - 1);
  }

  void cluster(int id, std::vector<int> members, std::size_t line) {
    if (s_.clusters.contains(id)) throw ParseError(line, "cluster " + std::to_string(id) + " defined twice");
    for (int& m : members) --m;
    std::sort(members.begin(), members.end());
    members.erase(std::unique(members.begin(), members.end()), members.end());
    s_.clusters[id] = std::move(members);
  }

  void argument(int pred, Label label, int cluster, std::size_t line) {
    if (!s_.gold_args.emplace(std::make_pair(pred - 1, label), cluster).second) {
      throw ParseError(line, "duplicate argument slot");
    }
  }

  Sentence finish() {
    const int nb = static_cast<int>(heads_.size());
    s_.bunsetsu_head.assign(static_cast<std::size_t>(nb), -1);
    for (const auto& [id, head] : heads_) {
      if (id >= nb) {
        throw IntegrityError("sentence " + s_.id + ": bunsetsu ids must be dense from 0, found " + std::to_string(id));
      }
      s_.bunsetsu_head[static_cast<std::size_t>(id)] = head;
    }
    validate(s_);
    return std::move(s_);
  }

 private:
  Sentence s_;
  std::map<int, int> heads_;
  std::size_t line_;
};

}  // namespace

std::vector<Sentence> parse_sentences(std::istream& in) {
  std::vector<Sentence> out;
  std::optional<SentenceBuilder> cur;
  std::string raw;
  std::size_t line_no = 0;
  auto flush = [&] {
    if (cur) out.push_back(cur->finish());
    cur.reset();
  };
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line(raw);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      flush();
      continue;
    }
    const auto f = split_fields(line, ' ');
    for (const auto& field : f) {
      if (field.empty()) throw ParseError(line_no, "empty field (fields are single-space separated)");
    }
    const std::string_view tag = f[0];
    if (tag == "#SENT") {
      if (f.size() != 2) throw ParseError(line_no, "#SENT takes one field");
      flush();
      cur.emplace(std::string(f[1]), line_no);
      continue;
    }
    if (!cur) throw ParseError(line_no, "record outside a sentence");
    if (tag == "T") {
      if (f.size() != 4) throw ParseError(line_no, "T takes three fields");
      cur->token(to_int(f[1], line_no, "token index"), f[2], to_int(f[3], line_no, "bunsetsu id"), line_no);
    } else if (tag == "B") {
      if (f.size() != 3) throw ParseError(line_no, "B takes two fields");
      cur->bunsetsu(to_int(f[1], line_no, "bunsetsu id"), to_int(f[2], line_no, "head id"), line_no);
    } else if (tag == "P") {
      if (f.size() != 3) throw ParseError(line_no, "P takes two fields");
      cur->predicate(to_int(f[1], line_no, "predicate id"), to_int(f[2], line_no, "token index"), line_no);
    } else if (tag == "C") {
      if (f.size() != 3) throw ParseError(line_no, "C takes two fields");
      std::vector<int> members;
      for (auto m : split_fields(f[2], ',')) members.push_back(to_int(m, line_no, "cluster member"));
      cur->cluster(to_int(f[1], line_no, "cluster id"), std::move(members), line_no);
    } else if (tag == "A") {
      if (f.size() != 4) throw ParseError(line_no, "A takes three fields");
      const auto label = parse_label(f[2]);
      if (!label || *label == Label::kNone) throw ParseError(line_no, "bad argument label '" + std::string(f[2]) + "'");
      cur->argument(to_int(f[1], line_no, "predicate id"), *label, to_int(f[3], line_no, "cluster id"), line_no);
    } else {
      throw ParseError(line_no, "unknown record type '" + std::string(tag) + "'");
    }
  }
  flush();
  return out;
}

Corpus parse_corpus(std::istream& in, bool build_vocab) {
  Corpus c;
  c.sentences = parse_sentences(in);
  if (build_vocab) c.vocab = Vocabulary::build(c.sentences);
  return c;
}

Corpus read_corpus_file(const std::string& path, bool build_vocab) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file " + path);
  return parse_corpus(in, build_vocab);
}

void write_sentences(std::ostream& out, std::span<const Sentence> sentences) {
  bool first = true;
  for (const auto& s : sentences) {
    if (!first) out << '\n';
    first = false;
    out << "#SENT " << s.id << '\n';
    for (std::size_t t = 0; t < s.n(); ++t) out << "T " << t + 1 << ' ' << s.tokens[t] << ' ' << s.bunsetsu_of[t] << '\n';
    for (std::size_t b = 0; b < s.bunsetsu_head.size(); ++b) out << "B " << b << ' ' << s.bunsetsu_head[b] << '\n';
    for (std::size_t i = 0; i < s.q(); ++i) out << "P " << i + 1 << ' ' << s.predicates[i] + 1 << '\n';
    for (const auto& [cid, members] : s.clusters) {
      out << "C " << cid << ' ';
      for (std::size_t k = 0; k < members.size(); ++k) out << (k ? "," : "") << members[k] + 1;
      out << '\n';
    }
    for (const auto& [slot, cid] : s.gold_args) {
      out << "A " << slot.first + 1 << ' ' << label_name(slot.second) << ' ' << cid << '\n';
    }
  }
}

std::string serialize(std::span<const Sentence> sentences) {
  std::ostringstream os;
  write_sentences(os, sentences);
  return os.str();
}

void write_corpus_file(const std::string& path, std::span<const Sentence> sentences) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write corpus file " + path);
  write_sentences(out, sentences);
  if (!out) throw IoError("write failed for " + path);
}

CorpusSplit split(const Corpus& corpus, SplitRatios ratios, std::uint64_t seed) {
  if (ratios.train <= 0 || ratios.dev <= 0 || ratios.test <= 0 ||
      std::abs(ratios.train + ratios.dev + ratios.test - 1.0) > 1e-9) {
    throw UsageError("split ratios must be positive and sum to 1");
  }
  const std::size_t n = corpus.sentences.size();
  const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios.train));
  const auto n_dev = static_cast<std::size_t>(std::llround(static_cast<double>(n) * ratios.dev));
  if (n_train == 0 || n_dev == 0 || n_train + n_dev >= n) {
    throw UsageError("split of " + std::to_string(n) + " sentences leaves an empty part");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(order);
  CorpusSplit out;
  for (std::size_t k = 0; k < n; ++k) {
    Corpus& dst = k < n_train ? out.train : k < n_train + n_dev ? out.dev : out.test;
    dst.sentences.push_back(corpus.sentences[order[k]]);
  }
  out.train.vocab = Vocabulary::build(out.train.sentences);
  out.dev.vocab = out.train.vocab;
  out.test.vocab = out.train.vocab;
  return out;
}

}  // namespace pasnet
