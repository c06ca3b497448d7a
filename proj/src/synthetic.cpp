#include "pasnet/synthetic.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <sstream>
#include <string>

#include "pasnet/checkpoint.hpp"
#include "pasnet/errors.hpp"
#include "pasnet/rng.hpp"

namespace pasnet {
namespace {

constexpr std::array<Label, 3> kShareCycle = {Label::kNom, Label::kDat, Label::kAcc};
constexpr int kMaxAttempts = 1000;

std::string_view particle(Label l) {
  switch (l) {
    case Label::kNom: return "ga";
    case Label::kAcc: return "wo";
    default: return "ni";
  }
}

bool is_source_verb(int v, std::size_t verbs) { return v % 2 == 0 && static_cast<std::size_t>(v) + 1 < verbs; }
Label shared_label(int source_verb) { return kShareCycle[static_cast<std::size_t>(source_verb / 2) % kShareCycle.size()]; }

struct Clause {
  int verb = 0;
  std::array<bool, 3> overt{};
  std::array<int, 3> cluster{-1, -1, -1};  // per label, overt fillers only
  int source = -1;                         // clause whose NOM is shared
  Label shared = Label::kNone;
  bool pronoun = false;
};

class SentenceWriter {
 public:
  int new_bunsetsu(int head) {
    s.bunsetsu_head.push_back(head);
    return static_cast<int>(s.bunsetsu_head.size()) - 1;
  }
  int token(std::string surface, int bunsetsu) {
    s.tokens.push_back(std::move(surface));
    s.bunsetsu_of.push_back(bunsetsu);
    return static_cast<int>(s.tokens.size()) - 1;
  }
  Sentence s;
};

std::optional<Sentence> try_sentence(const GeneratorConfig& cfg, Rng& rng) {
  const auto q = static_cast<std::size_t>(
      rng.range(static_cast<std::int64_t>(cfg.min_predicates), static_cast<std::int64_t>(cfg.max_predicates)));
  std::vector<Clause> clauses(q);
  for (std::size_t c = 0; c < q; ++c) {
    std::vector<int> sources;
    for (std::size_t e = 0; e < c; ++e) {
      if (clauses[e].overt[0] && is_source_verb(clauses[e].verb, cfg.verbs)) sources.push_back(static_cast<int>(e));
    }
    Clause& cl = clauses[c];
    if (!sources.empty() && rng.bernoulli(cfg.share_prob)) {
      cl.source = sources[static_cast<std::size_t>(rng.range(0, static_cast<std::int64_t>(sources.size()) - 1))];
      const int src_verb = clauses[static_cast<std::size_t>(cl.source)].verb;
      cl.verb = src_verb + 1;
      cl.shared = shared_label(src_verb);
      cl.pronoun = !rng.bernoulli(cfg.zero_prob);
    } else {
      // Plain clauses use source verbs only; partners appear through sharing.
      const auto pairs = static_cast<std::int64_t>(cfg.verbs / 2);
      cl.verb = 2 * static_cast<int>(rng.range(0, pairs - 1));
    }
    const std::array<double, 3> probs = {cfg.nom_prob, cfg.acc_prob, cfg.dat_prob};
    for (std::size_t k = 0; k < 3; ++k) {
      cl.overt[k] = kArgLabels[k] != cl.shared && rng.bernoulli(probs[k]);
    }
  }

  std::vector<int> nouns(cfg.nouns);
  for (std::size_t k = 0; k < nouns.size(); ++k) nouns[k] = static_cast<int>(k);
  rng.shuffle(nouns);
  std::size_t next_noun = 0;
  int next_cluster = 1;

  SentenceWriter w;
  std::vector<std::vector<int>> arg_bunsetsu(q);  // patched to point at the predicate later
  for (std::size_t c = 0; c < q; ++c) {
    Clause& cl = clauses[c];
    std::vector<Label> slots;
    for (std::size_t k = 0; k < 3; ++k)
      if (cl.overt[k]) slots.push_back(kArgLabels[k]);
    if (cl.pronoun) slots.push_back(cl.shared);
    rng.shuffle(slots);
    for (Label l : slots) {
      int adj_bunsetsu = -1;
      if (rng.bernoulli(cfg.adjective_prob)) {
        adj_bunsetsu = w.new_bunsetsu(-1);
        w.token("a" + std::to_string(rng.range(0, static_cast<std::int64_t>(cfg.adjectives) - 1)), adj_bunsetsu);
      }
      const int b = w.new_bunsetsu(-1);
      if (adj_bunsetsu >= 0) w.s.bunsetsu_head[static_cast<std::size_t>(adj_bunsetsu)] = b;
      arg_bunsetsu[c].push_back(b);
      const bool is_pronoun = cl.pronoun && l == cl.shared;
      int tok = 0;
      if (is_pronoun) {
        tok = w.token("pro", b);
        const int src_cluster = clauses[static_cast<std::size_t>(cl.source)].cluster[0];
        w.s.clusters[src_cluster].push_back(tok);
      } else {
        tok = w.token("n" + std::to_string(nouns[next_noun++]), b);
        const int cid = next_cluster++;
        w.s.clusters[cid] = {tok};
        cl.cluster[static_cast<std::size_t>(index_of(l))] = cid;
      }
      w.token(std::string(particle(l)), b);
    }
    const int pb = w.new_bunsetsu(-1);
    w.s.predicates.push_back(w.token("v" + std::to_string(cl.verb), pb));
    w.token(c + 1 == q ? "ta" : "te", pb);
    for (int b : arg_bunsetsu[c]) w.s.bunsetsu_head[static_cast<std::size_t>(b)] = pb;
    if (c > 0) {
      const int prev_pred_tok = w.s.predicates[c - 1];
      w.s.bunsetsu_head[static_cast<std::size_t>(w.s.bunsetsu_of[static_cast<std::size_t>(prev_pred_tok)])] = pb;
    }
  }

  for (std::size_t c = 0; c < q; ++c) {
    const Clause& cl = clauses[c];
    for (std::size_t k = 0; k < 3; ++k) {
      if (cl.overt[k]) w.s.gold_args[{static_cast<int>(c), kArgLabels[k]}] = cl.cluster[k];
    }
    if (cl.source >= 0) {
      w.s.gold_args[{static_cast<int>(c), cl.shared}] = clauses[static_cast<std::size_t>(cl.source)].cluster[0];
    }
  }
  for (auto& [cid, members] : w.s.clusters) std::sort(members.begin(), members.end());

  if (w.s.n() < cfg.min_tokens || w.s.n() > cfg.max_tokens) return std::nullopt;
  return std::move(w.s);
}

}  // namespace

void check_config(const GeneratorConfig& cfg) {
  auto fail = [](const std::string& what) { throw UsageError("generator config: " + what); };
  if (cfg.sentences == 0) fail("sentences must be positive");
  if (cfg.min_predicates == 0 || cfg.min_predicates > cfg.max_predicates) fail("bad predicate count range");
  // Every predicate bunsetsu holds two tokens.
  if (cfg.max_tokens < 2 * cfg.min_predicates) fail("max_tokens is shorter than the minimum predicate count allows");
  if (cfg.min_tokens > cfg.max_tokens) fail("bad token length range");
  if (cfg.verbs < 2) fail("need at least two verbs");
  if (cfg.adjectives == 0) fail("need at least one adjective");
  if (cfg.nouns < 3 * cfg.max_predicates) fail("too few nouns for the maximum number of arguments");
  for (double p : {cfg.share_prob, cfg.zero_prob, cfg.nom_prob, cfg.acc_prob, cfg.dat_prob, cfg.adjective_prob}) {
    if (!(p >= 0.0 && p <= 1.0)) fail("probabilities must lie in [0, 1]");
  }
}

Corpus generate_synthetic(const GeneratorConfig& cfg, std::uint64_t seed) {
  check_config(cfg);
  Rng rng(seed);
  Corpus corpus;
  corpus.sentences.reserve(cfg.sentences);
  for (std::size_t k = 0; k < cfg.sentences; ++k) {
    std::optional<Sentence> s;
    for (int attempt = 0; attempt < kMaxAttempts && !s; ++attempt) s = try_sentence(cfg, rng);
    if (!s) throw UsageError("generator config: token length range cannot be met");
    char id[32];
    std::snprintf(id, sizeof id, "s%05zu", k + 1);
    s->id = id;
    validate(*s);
    corpus.sentences.push_back(std::move(*s));
  }
  corpus.vocab = Vocabulary::build(corpus.sentences);
  return corpus;
}

GeneratorConfig parse_generator_config(std::string_view text) {
  GeneratorConfig cfg;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (std::getline(in, raw)) {
    ++line;
    const std::string body = trim(raw.substr(0, raw.find('#')));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(line, "expected 'key = value'");
    const std::string key = trim(body.substr(0, eq)), val = trim(body.substr(eq + 1));
    std::size_t used = 0;
    double num = 0.0;
    try {
      num = std::stod(val, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != val.size()) throw ParseError(line, "bad value for " + key);
    auto count = [&](std::size_t& field) {
      if (num < 0 || num != static_cast<double>(static_cast<std::size_t>(num)))
        throw ParseError(line, key + " must be a non-negative integer");
      field = static_cast<std::size_t>(num);
    };
    if (key == "sentences") count(cfg.sentences);
    else if (key == "nouns") count(cfg.nouns);
    else if (key == "verbs") count(cfg.verbs);
    else if (key == "adjectives") count(cfg.adjectives);
    else if (key == "min_tokens") count(cfg.min_tokens);
    else if (key == "max_tokens") count(cfg.max_tokens);
    else if (key == "min_predicates") count(cfg.min_predicates);
    else if (key == "max_predicates") count(cfg.max_predicates);
    else if (key == "share_prob") cfg.share_prob = num;
    else if (key == "zero_prob") cfg.zero_prob = num;
    else if (key == "nom_prob") cfg.nom_prob = num;
    else if (key == "acc_prob") cfg.acc_prob = num;
    else if (key == "dat_prob") cfg.dat_prob = num;
    else if (key == "adjective_prob") cfg.adjective_prob = num;
    else throw ParseError(line, "unknown key '" + key + "'");
  }
  return cfg;
}

GeneratorConfig read_generator_config(const std::string& path) {
  const std::string text = read_file_bytes(path);
  try {
    return parse_generator_config(text);
  } catch (const ParseError& e) {
    throw FormatError(path + ": " + e.what());
  }
}

}  // namespace pasnet
