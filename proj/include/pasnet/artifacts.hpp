#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "pasnet/config.hpp"
#include "pasnet/corpus.hpp"
#include "pasnet/decoder.hpp"
#include "pasnet/model.hpp"
#include "pasnet/trainer.hpp"

namespace pasnet {

inline constexpr std::string_view kVersionString = "pasnet 1.0.0";

// One surface per line, ids in line order; line 1 is the UNK surface.
void save_vocabulary(const std::string& path, const Vocabulary& vocab);
Vocabulary load_vocabulary(const std::string& path);

std::string thresholds_json(const ThresholdSet& theta);
ThresholdSet parse_thresholds_json(std::string_view text);

// 64-bit FNV-1a, printed as 16 hex digits.
std::string checksum_hex(std::string_view bytes);

struct RunManifest {
  std::string command;
  std::string config_path;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::string corpus_checksum;
  double wall_clock_seconds = 0.0;
  std::string version{kVersionString};
};

std::string manifest_json(const RunManifest& m);
void write_manifest(const std::string& path, const RunManifest& m);

// A trained model directory: model.ckpt, config.cfg, vocab.txt,
// thresholds.json and history.tsv.
struct RunFiles {
  static constexpr std::string_view kCheckpoint = "model.ckpt";
  static constexpr std::string_view kConfig = "config.cfg";
  static constexpr std::string_view kVocab = "vocab.txt";
  static constexpr std::string_view kThresholds = "thresholds.json";
  static constexpr std::string_view kHistory = "history.tsv";
};

template <typename T>
void save_run(const std::string& dir, const RunConfig& cfg, const Vocabulary& vocab, const Model<T>& model,
              const ThresholdSet& theta, const TrainHistory& history);

template <typename T>
struct LoadedRun {
  RunConfig config;
  Vocabulary vocab;
  std::unique_ptr<Model<T>> model;
  ThresholdSet thresholds;
};

template <typename T>
LoadedRun<T> load_run(const std::string& dir);

// Re-encodes a corpus against another vocabulary.
Corpus with_vocabulary(std::vector<Sentence> sentences, const Vocabulary& vocab);

}  // namespace pasnet
