// pasnet command-line tool: corpus generation, training, evaluation,
// ensembling, significance tests and attention dumps.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "pasnet/artifacts.hpp"
#include "pasnet/checkpoint.hpp"
#include "pasnet/errors.hpp"
#include "pasnet/evaluation.hpp"
#include "pasnet/synthetic.hpp"
#include "pasnet/trainer.hpp"

namespace fs = std::filesystem;
using namespace pasnet;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string path_in(const std::string& dir, std::string_view name) { return (fs::path(dir) / name).string(); }

void make_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

std::string checksum_of_files(const std::vector<std::string>& paths) {
  std::string all;
  for (const auto& p : paths) all += read_file_bytes(p);
  return checksum_hex(all);
}

// "3", "1..10" or "1,4,7".
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw UsageError("bad seed list '" + text + "'");
    return static_cast<std::uint64_t>(v);
  };
  if (const auto dots = text.find(".."); dots != std::string::npos) {
    const std::uint64_t lo = number(text.substr(0, dots)), hi = number(text.substr(dots + 2));
    if (hi < lo) throw UsageError("empty seed range '" + text + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
    return out;
  }
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) out.push_back(number(part));
  if (out.empty()) throw UsageError("empty seed list");
  return out;
}

std::vector<Sentence> read_sentences(const std::string& path) { return read_corpus_file(path, false).sentences; }

// ---------------------------------------------------------------- gen-data

struct GenArgs {
  GeneratorConfig gen;
  std::string config;
  std::uint64_t seed = 1;
  std::string out;
  double train = 0.8, dev = 0.1, test = 0.1;
};

int cmd_gen_data(GenArgs a, const CLI::App& sub) {
  const auto start = Clock::now();
  if (!a.config.empty()) {
    // Command-line options win over the file.
    const GeneratorConfig file = read_generator_config(a.config);
    const GeneratorConfig given = a.gen;
    a.gen = file;
    auto take = [&](const char* opt, auto member) {
      if (sub.count(opt)) a.gen.*member = given.*member;
    };
    take("--sentences", &GeneratorConfig::sentences);
    take("--share-prob", &GeneratorConfig::share_prob);
    take("--zero-prob", &GeneratorConfig::zero_prob);
    take("--max-tokens", &GeneratorConfig::max_tokens);
    take("--max-predicates", &GeneratorConfig::max_predicates);
    take("--nouns", &GeneratorConfig::nouns);
    take("--verbs", &GeneratorConfig::verbs);
  }
  check_config(a.gen);
  Corpus all = generate_synthetic(a.gen, a.seed);
  CorpusSplit parts = split(all, {a.train, a.dev, a.test}, a.seed);
  make_dir(a.out);
  RunManifest m;
  m.command = "gen-data";
  m.config_path = a.config;
  m.seeds = {a.seed};
  std::string bytes;
  for (auto [name, corpus] : {std::pair<const char*, const Corpus*>{"train.txt", &parts.train},
                              {"dev.txt", &parts.dev},
                              {"test.txt", &parts.test}}) {
    const std::string path = path_in(a.out, name);
    const std::string text = serialize(corpus->sentences);
    write_file_bytes(path, text);
    bytes += text;
    m.outputs.push_back(path);
  }
  m.corpus_checksum = checksum_hex(bytes);
  m.wall_clock_seconds = seconds_since(start);
  write_manifest(path_in(a.out, "manifest.json"), m);
  std::cout << "wrote " << parts.train.sentences.size() << " / " << parts.dev.sentences.size() << " / "
            << parts.test.sentences.size() << " sentences to " << a.out << '\n';
  return 0;
}

// ------------------------------------------------------------------- train

struct TrainArgs {
  std::string data;
  std::string train_file, dev_file;
  std::string config;
  std::string variant;
  std::string seeds = "1";
  std::string out;
  std::size_t max_epochs = 0;
  double lr = 0.0;
  std::string threshold_split;
  bool freeze = false;
  bool quiet = false;
};

int cmd_train(const TrainArgs& a) {
  const auto start = Clock::now();
  RunConfig cfg = a.config.empty() ? RunConfig{} : read_config_file(a.config);
  if (!a.variant.empty()) apply_variant(cfg.model, a.variant);
  if (a.max_epochs) cfg.train.max_epochs = a.max_epochs;
  if (a.lr > 0.0) cfg.train.learning_rate = a.lr;
  if (a.threshold_split == "dev") cfg.train.threshold_split = ThresholdSplit::kDev;
  else if (a.threshold_split == "train") cfg.train.threshold_split = ThresholdSplit::kTrain;
  else if (!a.threshold_split.empty()) throw UsageError("--threshold-split must be 'train' or 'dev'");
  if (a.freeze) cfg.train.freeze_thresholds = true;
  check(cfg.model);
  check(cfg.train);
  const std::vector<std::uint64_t> seeds = parse_seeds(a.seeds);

  std::string train_path = a.train_file, dev_path = a.dev_file;
  if (!a.data.empty()) {
    if (train_path.empty()) train_path = path_in(a.data, "train.txt");
    if (dev_path.empty()) dev_path = path_in(a.data, "dev.txt");
  }
  if (train_path.empty() || dev_path.empty()) throw UsageError("train needs --data DIR or both --train and --dev");
  Corpus train = read_corpus_file(train_path, true);
  Corpus dev = with_vocabulary(read_sentences(dev_path), train.vocab);

  make_dir(a.out);
  RunManifest m;
  m.command = "train --variant " + variant_string(cfg.model);
  m.config_path = a.config;
  m.seeds = seeds;
  m.inputs = {train_path, dev_path};
  m.corpus_checksum = checksum_of_files(m.inputs);
  for (std::uint64_t seed : seeds) {
    RunConfig run_cfg = cfg;
    run_cfg.train.seed = seed;
    Model<float> model(run_cfg.model, train.vocab.size(), seed);
    TrainHooks hooks;
    if (!a.quiet) {
      hooks.on_epoch = [seed](const EpochRecord& r) {
        std::cerr << "seed " << seed << " epoch " << r.epoch << " loss " << std::setprecision(6) << r.mean_loss
                  << " dev_f1 " << r.dev_f1 << " lr " << r.lr << ' ' << event_name(r.event) << '\n';
      };
    }
    TrainResult result = pasnet::train(model, train, dev, run_cfg.train, hooks);
    const std::string dir = path_in(a.out, "seed-" + std::to_string(seed));
    save_run(dir, run_cfg, train.vocab, model, result.thresholds, result.history);
    m.outputs.push_back(dir);
    std::cout << variant_string(run_cfg.model) << " seed " << seed << ": best dev F1 " << std::fixed
              << std::setprecision(4) << result.best_dev_f1 << " after " << result.history.epochs.size()
              << " epochs -> " << dir << '\n'
              << std::defaultfloat;
  }
  m.wall_clock_seconds = seconds_since(start);
  write_manifest(path_in(a.out, "manifest.json"), m);
  return 0;
}

// --------------------------------------------------- eval / predict / ensemble

std::optional<ThresholdSet> parse_theta(const std::string& text) {
  if (text.empty()) return std::nullopt;
  ThresholdSet t;
  std::stringstream ss(text);
  std::string part;
  std::size_t k = 0;
  while (std::getline(ss, part, ',')) {
    if (k == 3) throw UsageError("--theta takes three comma-separated values");
    try {
      t.theta[k++] = std::stod(part);
    } catch (const std::exception&) {
      throw UsageError("bad --theta value '" + part + "'");
    }
  }
  if (k != 3) throw UsageError("--theta takes three comma-separated values");
  for (double v : t.theta)
    if (!(v >= 0.0 && v <= 1.0)) throw UsageError("--theta values must lie in [0, 1]");
  return t;
}

void write_report_files(const std::string& dir, const std::string& stem, const EvalReport& r) {
  std::ostringstream text;
  write_report_text(text, r);
  write_file_bytes(path_in(dir, stem + ".txt"), text.str());
  write_file_bytes(path_in(dir, stem + ".json"), report_json(r) + "\n");
}

struct EvalArgs {
  std::vector<std::string> models;
  std::string data;
  std::string out;
  std::string theta;
};

int cmd_eval(const EvalArgs& a) {
  const auto start = Clock::now();
  const std::optional<ThresholdSet> fixed = parse_theta(a.theta);
  const std::vector<Sentence> sentences = read_sentences(a.data);
  if (!a.out.empty()) make_dir(a.out);
  std::ostringstream f1_list, zero_list;
  f1_list << std::setprecision(17);
  zero_list << std::setprecision(17);
  RunManifest m;
  m.command = "eval";
  m.inputs = a.models;
  m.inputs.push_back(a.data);
  m.corpus_checksum = checksum_of_files({a.data});
  for (std::size_t k = 0; k < a.models.size(); ++k) {
    LoadedRun<float> run = load_run<float>(a.models[k]);
    Corpus corpus = with_vocabulary(sentences, run.vocab);
    const ThresholdSet theta = fixed.value_or(run.thresholds);
    EvalReport r = evaluate(corpus.sentences, predict_corpus(*run.model, corpus), theta);
    std::cout << "== " << a.models[k] << " (" << variant_string(run.config.model) << ")\n";
    write_report_text(std::cout, r);
    f1_list << r.f1() << '\n';
    zero_list << r.at(Stratum::kZero).f1() << '\n';
    if (!a.out.empty()) {
      const std::string stem = "report-" + std::to_string(k + 1);
      write_report_files(a.out, stem, r);
      m.outputs.push_back(path_in(a.out, stem + ".txt"));
    }
  }
  if (!a.out.empty()) {
    write_file_bytes(path_in(a.out, "f1.txt"), f1_list.str());
    write_file_bytes(path_in(a.out, "zero_f1.txt"), zero_list.str());
    m.outputs.push_back(path_in(a.out, "f1.txt"));
    m.outputs.push_back(path_in(a.out, "zero_f1.txt"));
    m.wall_clock_seconds = seconds_since(start);
    write_manifest(path_in(a.out, "manifest.json"), m);
  }
  return 0;
}

struct PredictArgs {
  std::string model;
  std::string input;
  std::string out;
  std::string theta;
};

int cmd_predict(const PredictArgs& a) {
  LoadedRun<float> run = load_run<float>(a.model);
  Corpus corpus = with_vocabulary(read_sentences(a.input), run.vocab);
  const ThresholdSet theta = parse_theta(a.theta).value_or(run.thresholds);
  std::ostringstream lines;
  for (const auto& s : corpus.sentences) {
    const auto ids = corpus.vocab.encode(s);
    write_predictions(lines, s, decode(run.model->predict(s, ids), theta, s));
  }
  if (a.out.empty()) {
    std::cout << lines.str();
  } else {
    write_file_bytes(a.out, lines.str());
  }
  return 0;
}

struct EnsembleArgs {
  std::vector<std::string> models;
  std::string data;
  std::string tune;
  std::string out;
};

std::vector<LabelProbabilities> averaged(std::vector<LoadedRun<float>>& runs, const std::vector<Sentence>& sentences) {
  std::vector<std::vector<LabelProbabilities>> per_model;
  for (auto& run : runs) per_model.push_back(predict_corpus(*run.model, with_vocabulary(sentences, run.vocab)));
  std::vector<LabelProbabilities> out;
  for (std::size_t k = 0; k < sentences.size(); ++k) {
    std::vector<LabelProbabilities> members;
    for (const auto& p : per_model) members.push_back(p[k]);
    out.push_back(ensemble_average(members));
  }
  return out;
}

int cmd_ensemble(const EnsembleArgs& a) {
  const auto start = Clock::now();
  std::vector<LoadedRun<float>> runs;
  for (const auto& dir : a.models) runs.push_back(load_run<float>(dir));
  const std::vector<Sentence> sentences = read_sentences(a.data);
  const std::vector<LabelProbabilities> probs = averaged(runs, sentences);

  ThresholdSet theta;
  if (!a.tune.empty()) {
    const std::vector<Sentence> tune = read_sentences(a.tune);
    theta = search_thresholds(tune, averaged(runs, tune));
  } else {
    // Mean of the members' thresholds, kept on the 0.01 grid.
    for (std::size_t c = 0; c < 3; ++c) {
      double sum = 0.0;
      for (const auto& r : runs) sum += r.thresholds.theta[c];
      theta.theta[c] = std::round(100.0 * sum / static_cast<double>(runs.size())) / 100.0;
    }
  }
  EvalReport r = evaluate(sentences, probs, theta);
  std::cout << "== ensemble of " << runs.size() << " models, theta " << theta.theta[0] << ' ' << theta.theta[1] << ' '
            << theta.theta[2] << '\n';
  write_report_text(std::cout, r);
  if (!a.out.empty()) {
    make_dir(a.out);
    write_report_files(a.out, "report-ensemble", r);
    write_file_bytes(path_in(a.out, "thresholds.json"), thresholds_json(theta));
    RunManifest m;
    m.command = "ensemble";
    m.inputs = a.models;
    m.inputs.push_back(a.data);
    if (!a.tune.empty()) m.inputs.push_back(a.tune);
    m.outputs = {path_in(a.out, "report-ensemble.txt"), path_in(a.out, "thresholds.json")};
    m.corpus_checksum = checksum_of_files({a.data});
    m.wall_clock_seconds = seconds_since(start);
    write_manifest(path_in(a.out, "manifest.json"), m);
  }
  return 0;
}

// ----------------------------------------------------------------- compare

struct CompareArgs {
  std::vector<std::string> scores;
  std::uint64_t seed = 1;
  std::string out;
};

std::vector<double> read_score_list(const std::string& path) {
  std::istringstream in(read_file_bytes(path));
  std::vector<double> v;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      std::size_t used = 0;
      v.push_back(std::stod(line, &used));
    } catch (const std::exception&) {
      throw ParseError(line_no, path + ": not a number: '" + line + "'");
    }
  }
  if (v.empty()) throw FormatError(path + ": no scores");
  return v;
}

int cmd_compare(const CompareArgs& a) {
  if (a.scores.size() < 2) throw UsageError("compare needs at least two --scores NAME=FILE lists");
  std::vector<std::string> names;
  std::vector<std::vector<double>> lists;
  for (const auto& item : a.scores) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--scores takes NAME=FILE, got '" + item + "'");
    names.push_back(item.substr(0, eq));
    lists.push_back(read_score_list(item.substr(eq + 1)));
  }
  // Row model vs column model: p-value of "row better than column".
  std::ostringstream o;
  std::size_t width = 8;
  for (const auto& n : names) width = std::max(width, n.size() + 2);
  o << std::left << std::setw(static_cast<int>(width)) << "" << std::right;
  for (std::size_t j = 1; j < names.size(); ++j) o << std::setw(static_cast<int>(width)) << names[j];
  o << '\n';
  nlohmann::ordered_json pairs = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i + 1 < names.size(); ++i) {
    o << std::left << std::setw(static_cast<int>(width)) << names[i] << std::right;
    for (std::size_t j = 1; j < names.size(); ++j) {
      if (j <= i) {
        o << std::setw(static_cast<int>(width)) << "";
        continue;
      }
      const SignificanceResult r = permutation_test(lists[i], lists[j], a.seed);
      std::ostringstream cell;
      cell << std::setprecision(3) << r.p_value;
      o << std::setw(static_cast<int>(width)) << cell.str();
      pairs.push_back({{"a", names[i]},
                       {"b", names[j]},
                       {"mean_difference", r.observed},
                       {"p_value", r.p_value},
                       {"method", r.exact ? "exact" : "monte-carlo"},
                       {"draws", r.draws},
                       {"seed", r.seed}});
    }
    o << '\n';
  }
  std::cout << "one-sided p-values (row > column), unpaired permutation test\n" << o.str();
  if (!a.out.empty()) write_file_bytes(a.out, pairs.dump(2) + "\n");
  return 0;
}

// ---------------------------------------------------------- dump-attention

struct DumpArgs {
  std::string model;
  std::string data;
  std::string sentence;
  std::size_t limit = 1;
  std::string out;
};

int cmd_dump_attention(const DumpArgs& a) {
  LoadedRun<float> run = load_run<float>(a.model);
  if (!run.config.model.has_attention()) {
    throw UsageError("variant " + variant_string(run.config.model) + " has no attention layer");
  }
  Corpus corpus = with_vocabulary(read_sentences(a.data), run.vocab);
  nlohmann::ordered_json out;
  out["variant"] = variant_string(run.config.model);
  out["sentences"] = nlohmann::ordered_json::array();
  std::size_t dumped = 0;
  for (const auto& s : corpus.sentences) {
    if (!a.sentence.empty() && s.id != a.sentence) continue;
    if (a.sentence.empty() && dumped == a.limit) break;
    if (s.q() == 0) continue;
    AttentionTrace trace;
    trace.retain = true;
    run.model->predict(s, corpus.vocab.encode(s), &trace);
    nlohmann::ordered_json js;
    js["id"] = s.id;
    js["tokens"] = s.tokens;
    std::vector<int> preds;
    for (int p : s.predicates) preds.push_back(p + 1);
    js["predicates"] = preds;
    js["matrices"] = nlohmann::ordered_json::array();
    for (const auto& m : trace.matrices) {
      nlohmann::ordered_json jm;
      jm["target"] = m.target + 1;
      jm["source"] = m.source < 0 ? nlohmann::ordered_json("self") : nlohmann::ordered_json(m.source + 1);
      std::vector<std::vector<double>> rows(m.n);
      for (std::size_t t = 0; t < m.n; ++t)
        rows[t].assign(m.weights.begin() + static_cast<std::ptrdiff_t>(t * m.n),
                       m.weights.begin() + static_cast<std::ptrdiff_t>((t + 1) * m.n));
      jm["weights"] = rows;
      js["matrices"].push_back(jm);
    }
    out["sentences"].push_back(js);
    ++dumped;
  }
  if (!a.sentence.empty() && dumped == 0) throw UsageError("no sentence with id '" + a.sentence + "'");
  const std::string text = out.dump(1) + "\n";
  if (a.out.empty()) {
    std::cout << text;
  } else {
    write_file_bytes(a.out, text);
  }
  return 0;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const UsageError*>(&e)) return 1;
  if (dynamic_cast<const IoError*>(&e)) return 2;
  if (dynamic_cast<const FormatError*>(&e) || dynamic_cast<const IntegrityError*>(&e) ||
      dynamic_cast<const ParseError*>(&e) || dynamic_cast<const DimensionError*>(&e))
    return 3;
  if (dynamic_cast<const NumericalError*>(&e)) return 4;
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-predicate argument structure analysis: data, training and evaluation"};
  app.set_version_flag("--version", std::string(kVersionString));
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen-data", "Generate a synthetic corpus split into train/dev/test");
  g->add_option("--config", gen.config, "Generator configuration file (key = value)");
  g->add_option("--sentences", gen.gen.sentences, "Total number of sentences")->capture_default_str();
  g->add_option("--share-prob", gen.gen.share_prob, "Probability that a clause shares an argument")
      ->capture_default_str();
  g->add_option("--zero-prob", gen.gen.zero_prob, "Probability that a shared argument is omitted")
      ->capture_default_str();
  g->add_option("--max-tokens", gen.gen.max_tokens, "Maximum sentence length")->capture_default_str();
  g->add_option("--max-predicates", gen.gen.max_predicates, "Maximum predicates per sentence")->capture_default_str();
  g->add_option("--nouns", gen.gen.nouns, "Noun vocabulary size")->capture_default_str();
  g->add_option("--verbs", gen.gen.verbs, "Verb vocabulary size (even)")->capture_default_str();
  g->add_option("--train-ratio", gen.train)->capture_default_str();
  g->add_option("--dev-ratio", gen.dev)->capture_default_str();
  g->add_option("--test-ratio", gen.test)->capture_default_str();
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("--out", gen.out, "Output directory")->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train one model per seed");
  t->add_option("--data", tr.data, "Directory holding train.txt and dev.txt");
  t->add_option("--train", tr.train_file, "Training corpus file");
  t->add_option("--dev", tr.dev_file, "Development corpus file");
  t->add_option("--config", tr.config, "key = value configuration file");
  t->add_option("--variant", tr.variant, "base, pool, att-pool, pool-selfatt, selfatt, grid; prefix mp- for MP input");
  auto* seed_opt = t->add_option("--seed", tr.seeds, "Seed");
  t->add_option("--seeds", tr.seeds, "Seed list: 1..10 or 1,2,3")->excludes(seed_opt);
  t->add_option("--max-epochs", tr.max_epochs, "Override the configured epoch cap");
  t->add_option("--lr", tr.lr, "Override the initial learning rate");
  t->add_option("--threshold-split", tr.threshold_split, "Split used for threshold search: train or dev");
  t->add_flag("--freeze-thresholds", tr.freeze, "Use fixed 0.5 thresholds during training");
  t->add_flag("--quiet", tr.quiet, "No per-epoch log");
  t->add_option("--out", tr.out, "Output directory; one seed-N subdirectory per seed")->required();

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Stratified evaluation of trained models");
  e->add_option("--model", ev.models, "Run directory (repeatable)")->required();
  e->add_option("--data", ev.data, "Gold-annotated corpus file")->required();
  e->add_option("--theta", ev.theta, "Override thresholds: NOM,ACC,DAT");
  e->add_option("--out", ev.out, "Directory for reports and f1.txt / zero_f1.txt score lists");

  PredictArgs pr;
  auto* p = app.add_subcommand("predict", "Write predicted arguments");
  p->add_option("--model", pr.model, "Run directory")->required();
  p->add_option("--input", pr.input, "Corpus file (annotations optional)")->required();
  p->add_option("--theta", pr.theta, "Override thresholds: NOM,ACC,DAT");
  p->add_option("--out", pr.out, "Output file (default stdout)");

  EnsembleArgs en;
  auto* n = app.add_subcommand("ensemble", "Average label probabilities over models, then decode and evaluate");
  n->add_option("--model", en.models, "Run directory (repeatable)")->required();
  n->add_option("--data", en.data, "Gold-annotated corpus file")->required();
  n->add_option("--tune", en.tune, "Corpus on which to search ensemble thresholds");
  n->add_option("--out", en.out, "Output directory");

  CompareArgs cmp;
  auto* c = app.add_subcommand("compare", "Pairwise one-sided permutation tests over per-seed scores");
  c->add_option("--scores", cmp.scores, "NAME=FILE with one score per line (repeatable)");
  c->add_option("--seed", cmp.seed, "Monte Carlo seed")->capture_default_str();
  c->add_option("--out", cmp.out, "JSON output file");

  DumpArgs du;
  auto* d = app.add_subcommand("dump-attention", "Export attention weights as JSON");
  d->add_option("--model", du.model, "Run directory")->required();
  d->add_option("--data", du.data, "Corpus file")->required();
  d->add_option("--sentence", du.sentence, "Sentence id");
  d->add_option("--limit", du.limit, "Number of sentences when no id is given")->capture_default_str();
  d->add_option("--out", du.out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*g) return cmd_gen_data(gen, *g);
    if (*t) return cmd_train(tr);
    if (*e) return cmd_eval(ev);
    if (*p) return cmd_predict(pr);
    if (*n) return cmd_ensemble(en);
    if (*c) return cmd_compare(cmp);
    if (*d) return cmd_dump_attention(du);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return exit_code_for(ex);
  }
  return 1;
}
