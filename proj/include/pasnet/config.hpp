#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

namespace pasnet {

enum class Variant { kBase, kPool, kAttPool, kPoolSelfAtt, kSelfAtt, kGrid };

std::string_view variant_name(Variant v);

struct HyperConfig {
  std::size_t d_w = 256;
  std::size_t d_r = 256;
  std::size_t K = 10;
  double dropout_rate = 0.1;
  std::size_t d_f = 1024;
  bool mp_enabled = false;
  Variant variant = Variant::kBase;

  bool has_attention() const {
    return variant == Variant::kAttPool || variant == Variant::kPoolSelfAtt || variant == Variant::kSelfAtt;
  }
  bool operator==(const HyperConfig&) const = default;
};

// "base", "pool", "att-pool", "pool-selfatt", "selfatt", "grid", each
// optionally prefixed with "mp-"; "mp" alone is the MP base model.
void apply_variant(HyperConfig& cfg, std::string_view name);
std::string variant_string(const HyperConfig& cfg);

enum class ThresholdSplit { kTrain, kDev };

struct TrainConfig {
  double learning_rate = 2e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t patience = 4;
  double lr_floor_factor = 1.0 / 16.0;
  std::size_t max_epochs = 100;
  std::uint64_t seed = 1;
  double clip_norm = 0.0;  // 0 disables clipping
  ThresholdSplit threshold_split = ThresholdSplit::kTrain;
  bool freeze_thresholds = false;  // fixed 0.5 instead of re-searching
};

void check(const HyperConfig& cfg);
void check(const TrainConfig& cfg);

// Line-oriented "key = value" text, '#' starts a comment. Keys are the
// field names of HyperConfig and TrainConfig; "variant" takes a variant
// string as accepted by apply_variant.
struct RunConfig {
  HyperConfig model;
  TrainConfig train;
};

RunConfig parse_config(std::istream& in);
RunConfig read_config_file(const std::string& path);
void write_config(std::ostream& out, const RunConfig& cfg);

}  // namespace pasnet
