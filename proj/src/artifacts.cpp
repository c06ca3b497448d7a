#include "pasnet/artifacts.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pasnet/checkpoint.hpp"
#include "pasnet/errors.hpp"

namespace pasnet {

namespace fs = std::filesystem;

namespace {

std::string join(const std::string& dir, std::string_view name) { return (fs::path(dir) / name).string(); }

void write_text(const std::string& path, const std::string& text) { write_file_bytes(path, text); }

}  // namespace

void save_vocabulary(const std::string& path, const Vocabulary& vocab) {
  std::string text;
  for (const auto& s : vocab.surfaces()) text += s + '\n';
  write_text(path, text);
}

Vocabulary load_vocabulary(const std::string& path) {
  std::istringstream in(read_file_bytes(path));
  std::string line;
  Vocabulary v;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != Vocabulary::kUnkSurface) throw FormatError(path + ": first vocabulary entry must be <unk>");
      continue;
    }
    if (line.empty() || v.id(line) != Vocabulary::kUnk) {
      throw FormatError(path + ": line " + std::to_string(line_no) + ": empty or duplicate surface");
    }
    v.add(line);
  }
  if (line_no == 0) throw FormatError(path + ": empty vocabulary file");
  return v;
}

std::string thresholds_json(const ThresholdSet& theta) {
  nlohmann::ordered_json j;
  for (Label c : kArgLabels) j[std::string(label_name(c))] = theta[c];
  return j.dump(2) + "\n";
}

ThresholdSet parse_thresholds_json(std::string_view text) {
  ThresholdSet theta;
  try {
    const auto j = nlohmann::json::parse(text);
    for (Label c : kArgLabels) theta[c] = j.at(std::string(label_name(c))).get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("thresholds: ") + e.what());
  }
  for (double v : theta.theta)
    if (!(v >= 0.0 && v <= 1.0)) throw FormatError("thresholds: value outside [0, 1]");
  return theta;
}

std::string checksum_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["command"] = m.command;
  j["config"] = m.config_path;
  j["seeds"] = m.seeds;
  j["inputs"] = m.inputs;
  j["outputs"] = m.outputs;
  j["corpus_checksum"] = m.corpus_checksum;
  j["wall_clock_seconds"] = m.wall_clock_seconds;
  j["version"] = m.version;
  return j.dump(2) + "\n";
}

void write_manifest(const std::string& path, const RunManifest& m) { write_text(path, manifest_json(m)); }

template <typename T>
void save_run(const std::string& dir, const RunConfig& cfg, const Vocabulary& vocab, const Model<T>& model,
              const ThresholdSet& theta, const TrainHistory& history) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
  write_file_bytes(join(dir, RunFiles::kCheckpoint), save_checkpoint(model.params()));
  std::ostringstream c;
  write_config(c, cfg);
  write_text(join(dir, RunFiles::kConfig), c.str());
  save_vocabulary(join(dir, RunFiles::kVocab), vocab);
  write_text(join(dir, RunFiles::kThresholds), thresholds_json(theta));
  std::ostringstream h;
  history.write(h);
  write_text(join(dir, RunFiles::kHistory), h.str());
}

template <typename T>
LoadedRun<T> load_run(const std::string& dir) {
  LoadedRun<T> run;
  run.config = read_config_file(join(dir, RunFiles::kConfig));
  run.vocab = load_vocabulary(join(dir, RunFiles::kVocab));
  run.thresholds = parse_thresholds_json(read_file_bytes(join(dir, RunFiles::kThresholds)));
  run.model = std::make_unique<Model<T>>(run.config.model, run.vocab.size(), 0);
  load_checkpoint_into(run.model->params(), read_file_bytes(join(dir, RunFiles::kCheckpoint)));
  return run;
}

Corpus with_vocabulary(std::vector<Sentence> sentences, const Vocabulary& vocab) {
  Corpus c;
  c.sentences = std::move(sentences);
  c.vocab = vocab;
  return c;
}

template void save_run<float>(const std::string&, const RunConfig&, const Vocabulary&, const Model<float>&,
                              const ThresholdSet&, const TrainHistory&);
template void save_run<double>(const std::string&, const RunConfig&, const Vocabulary&, const Model<double>&,
                               const ThresholdSet&, const TrainHistory&);
template LoadedRun<float> load_run<float>(const std::string&);
template LoadedRun<double> load_run<double>(const std::string&);

}  // namespace pasnet
