#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "pasnet/corpus.hpp"

namespace pasnet {

// Template grammar for a head-final toy language. Each clause is a run of
// argument bunsetsu (noun + case particle, optionally preceded by an
// adjective) followed by a predicate bunsetsu (verb + connective); clause
// predicates chain to the next clause and the last one is the root.
//
// Verbs come in pairs (v0,v1), (v2,v3), ...: plain clauses use the even
// verbs, and with probability share_prob a clause instead uses the odd
// partner of an earlier clause's verb and takes that clause's NOM filler as
// one of its own slots (NOM, DAT or ACC depending on the pair). That filler is omitted with
// probability zero_prob (a long-distance Zero argument) and otherwise
// realised as a coreferent pronoun next to the predicate.
struct GeneratorConfig {
  std::size_t sentences = 2000;
  std::size_t nouns = 150;
  std::size_t verbs = 24;
  std::size_t adjectives = 10;
  std::size_t min_tokens = 3;
  std::size_t max_tokens = 40;
  std::size_t min_predicates = 1;
  std::size_t max_predicates = 4;
  double share_prob = 0.5;
  double zero_prob = 0.9;
  double nom_prob = 0.9;
  double acc_prob = 0.5;
  double dat_prob = 0.3;
  double adjective_prob = 0.2;
};

// Throws UsageError for configurations that cannot produce sentences.
void check_config(const GeneratorConfig& cfg);

// "key = value" lines named after the fields above; '#' starts a comment.
// Unknown keys and malformed values raise ParseError.
GeneratorConfig parse_generator_config(std::string_view text);
GeneratorConfig read_generator_config(const std::string& path);

// Deterministic in (cfg, seed).
Corpus generate_synthetic(const GeneratorConfig& cfg, std::uint64_t seed);

}  // namespace pasnet
