#include "pasnet/config.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>

#include "pasnet/errors.hpp"

namespace pasnet {

std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kBase: return "base";
    case Variant::kPool: return "pool";
    case Variant::kAttPool: return "att-pool";
    case Variant::kPoolSelfAtt: return "pool-selfatt";
    case Variant::kSelfAtt: return "selfatt";
    case Variant::kGrid: return "grid";
  }
  return "?";
}

void apply_variant(HyperConfig& cfg, std::string_view name) {
  bool mp = false;
  if (name == "mp") {
    cfg.mp_enabled = true;
    cfg.variant = Variant::kBase;
    return;
  }
  if (name.starts_with("mp-")) {
    mp = true;
    name.remove_prefix(3);
  }
  for (Variant v : {Variant::kBase, Variant::kPool, Variant::kAttPool, Variant::kPoolSelfAtt, Variant::kSelfAtt,
                    Variant::kGrid}) {
    if (variant_name(v) == name) {
      cfg.variant = v;
      cfg.mp_enabled = mp;
      return;
    }
  }
  throw UsageError("unknown variant '" + std::string(name) + "'");
}

std::string variant_string(const HyperConfig& cfg) {
  if (cfg.mp_enabled && cfg.variant == Variant::kBase) return "mp";
  return (cfg.mp_enabled ? "mp-" : "") + std::string(variant_name(cfg.variant));
}

void check(const HyperConfig& cfg) {
  if (cfg.K < 1) throw UsageError("K must be at least 1");
  if (cfg.d_w == 0 || cfg.d_r == 0 || cfg.d_f == 0) throw UsageError("widths must be positive");
  if (!(cfg.dropout_rate >= 0.0 && cfg.dropout_rate < 1.0)) throw UsageError("dropout_rate must lie in [0, 1)");
}

void check(const TrainConfig& cfg) {
  if (cfg.patience < 1) throw UsageError("patience must be at least 1");
  if (!(cfg.lr_floor_factor > 0.0 && cfg.lr_floor_factor < 1.0)) throw UsageError("lr_floor_factor must lie in (0, 1)");
  if (!(cfg.learning_rate > 0.0)) throw UsageError("learning_rate must be positive");
  if (cfg.max_epochs < 1) throw UsageError("max_epochs must be at least 1");
  if (cfg.clip_norm < 0.0) throw UsageError("clip_norm must be non-negative");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename V>
V number(std::string_view v, std::size_t line, std::string_view key) {
  V out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ParseError(line, "bad value '" + std::string(v) + "' for " + std::string(key));
  }
  return out;
}

bool boolean(std::string_view v, std::size_t line, std::string_view key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ParseError(line, "bad boolean '" + std::string(v) + "' for " + std::string(key));
}

}  // namespace

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view s(raw);
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) throw ParseError(line, "expected 'key = value'");
    const std::string_view key = trim(s.substr(0, eq));
    const std::string_view val = trim(s.substr(eq + 1));
    HyperConfig& m = cfg.model;
    TrainConfig& t = cfg.train;
    if (key == "d_w") m.d_w = number<std::size_t>(val, line, key);
    else if (key == "d_r") m.d_r = number<std::size_t>(val, line, key);
    else if (key == "K") m.K = number<std::size_t>(val, line, key);
    else if (key == "dropout_rate") m.dropout_rate = number<double>(val, line, key);
    else if (key == "d_f") m.d_f = number<std::size_t>(val, line, key);
    else if (key == "mp_enabled") m.mp_enabled = boolean(val, line, key);
    else if (key == "variant") {
      const bool mp = m.mp_enabled;
      apply_variant(m, val);
      m.mp_enabled = m.mp_enabled || mp;
    } else if (key == "learning_rate") t.learning_rate = number<double>(val, line, key);
    else if (key == "beta1") t.beta1 = number<double>(val, line, key);
    else if (key == "beta2") t.beta2 = number<double>(val, line, key);
    else if (key == "epsilon") t.epsilon = number<double>(val, line, key);
    else if (key == "patience") t.patience = number<std::size_t>(val, line, key);
    else if (key == "lr_floor_factor") t.lr_floor_factor = number<double>(val, line, key);
    else if (key == "max_epochs") t.max_epochs = number<std::size_t>(val, line, key);
    else if (key == "seed") t.seed = number<std::uint64_t>(val, line, key);
    else if (key == "clip_norm") t.clip_norm = number<double>(val, line, key);
    else if (key == "threshold_split") {
      if (val == "train") t.threshold_split = ThresholdSplit::kTrain;
      else if (val == "dev") t.threshold_split = ThresholdSplit::kDev;
      else throw ParseError(line, "threshold_split must be 'train' or 'dev'");
    } else if (key == "freeze_thresholds") t.freeze_thresholds = boolean(val, line, key);
    else throw ParseError(line, "unknown key '" + std::string(key) + "'");
  }
  check(cfg.model);
  check(cfg.train);
  return cfg;
}

RunConfig read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file " + path);
  return parse_config(in);
}

void write_config(std::ostream& out, const RunConfig& cfg) {
  const auto& m = cfg.model;
  const auto& t = cfg.train;
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  out << "variant = " << variant_string(m) << '\n'
      << "d_w = " << m.d_w << '\n'
      << "d_r = " << m.d_r << '\n'
      << "K = " << m.K << '\n'
      << "dropout_rate = " << m.dropout_rate << '\n'
      << "d_f = " << m.d_f << '\n'
      << "learning_rate = " << t.learning_rate << '\n'
      << "beta1 = " << t.beta1 << '\n'
      << "beta2 = " << t.beta2 << '\n'
      << "epsilon = " << t.epsilon << '\n'
      << "patience = " << t.patience << '\n'
      << "lr_floor_factor = " << t.lr_floor_factor << '\n'
      << "max_epochs = " << t.max_epochs << '\n'
      << "seed = " << t.seed << '\n'
      << "clip_norm = " << t.clip_norm << '\n'
      << "threshold_split = " << (t.threshold_split == ThresholdSplit::kTrain ? "train" : "dev") << '\n'
      << "freeze_thresholds = " << (t.freeze_thresholds ? "true" : "false") << '\n';
}

}  // namespace pasnet
