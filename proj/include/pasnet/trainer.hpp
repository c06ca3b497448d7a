#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "pasnet/config.hpp"
#include "pasnet/model.hpp"

namespace pasnet {

// First and second moments per parameter, in store order.
template <typename T>
struct AdamState {
  std::vector<Tensor<T>> m;
  std::vector<Tensor<T>> v;
  std::uint64_t step = 0;

  void reset() {
    m.clear();
    v.clear();
    step = 0;
  }
};

// Bias-corrected Adam update of every parameter from its accumulated grad.
template <typename T>
void adam_step(std::span<Parameter<T>* const> params, AdamState<T>& state, const TrainConfig& cfg, double lr);

// Rescales all gradients so their global L2 norm is at most `max_norm`.
// Returns the norm before clipping.
template <typename T>
double clip_gradients(std::span<Parameter<T>* const> params, double max_norm);

enum class ScheduleEvent { kNone, kImproved, kRestart, kStop };
std::string_view event_name(ScheduleEvent e);

// Halves the learning rate once `patience` epochs pass without a new best
// dev F1, signalling a restart from the best parameters; stops when the
// halved rate would fall below initial * floor_factor.
class LrSchedule {
 public:
  LrSchedule(double initial, std::size_t patience, double floor_factor);

  ScheduleEvent observe(double dev_f1);

  double lr() const { return lr_; }
  double best() const { return best_; }
  std::size_t halvings() const { return halvings_; }
  bool stopped() const { return stopped_; }

 private:
  double initial_;
  std::size_t patience_;
  double floor_factor_;
  double lr_;
  double best_ = -1.0;
  std::size_t since_best_ = 0;
  std::size_t halvings_ = 0;
  bool stopped_ = false;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double mean_loss = 0.0;
  double dev_f1 = 0.0;
  double lr = 0.0;  // rate used during this epoch
  ScheduleEvent event = ScheduleEvent::kNone;
  ThresholdSet thresholds;
  bool operator==(const EpochRecord&) const = default;
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;

  std::size_t restarts() const;
  // Tab-separated, one line per epoch, with a header.
  void write(std::ostream& out) const;
  bool operator==(const TrainHistory&) const = default;
};

struct TrainHooks {
  // Replaces the dev evaluation (and threshold search) when set.
  std::function<double(std::size_t epoch)> dev_f1;
  std::function<void(const EpochRecord&)> on_epoch;
  // Ends training after the epoch when it returns true.
  std::function<bool(const EpochRecord&)> stop;
};

struct TrainResult {
  TrainHistory history;
  ThresholdSet thresholds;  // searched at the best epoch
  double best_dev_f1 = 0.0;
};

// Dev F1 of the model with thresholds chosen per cfg: fixed 0.5 when
// frozen, otherwise searched on the configured split.
template <typename T>
double dev_score(Model<T>& model, const Corpus& train, const Corpus& dev, const TrainConfig& cfg,
                 ThresholdSet* thresholds_out);

// Trains in place. On return the model holds the parameters of the best
// dev epoch.
template <typename T>
TrainResult train(Model<T>& model, const Corpus& train, const Corpus& dev, const TrainConfig& cfg,
                  const TrainHooks& hooks = {});

// Seed of the dropout/shuffle stream, derived from the run seed.
std::uint64_t training_stream_seed(std::uint64_t seed);

}  // namespace pasnet
