#include "pasnet/trainer.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

#include "pasnet/errors.hpp"

namespace pasnet {

template <typename T>
void adam_step(std::span<Parameter<T>* const> params, AdamState<T>& state, const TrainConfig& cfg, double lr) {
  if (state.m.empty()) {
    for (const auto* p : params) {
      state.m.emplace_back(p->value.shape());
      state.v.emplace_back(p->value.shape());
    }
  }
  if (state.m.size() != params.size()) throw UsageError("adam_step: optimizer state does not match parameters");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double c1 = 1.0 - std::pow(cfg.beta1, t);
  const double c2 = 1.0 - std::pow(cfg.beta2, t);
  const double b1 = cfg.beta1, b2 = cfg.beta2, eps = cfg.epsilon;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter<T>& p = *params[k];
    T* w = p.value.raw();
    const T* g = p.grad.raw();
    T* m = state.m[k].raw();
    T* v = state.v[k].raw();
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double gi = static_cast<double>(g[i]);
      const double mi = b1 * static_cast<double>(m[i]) + (1.0 - b1) * gi;
      const double vi = b2 * static_cast<double>(v[i]) + (1.0 - b2) * gi * gi;
      m[i] = static_cast<T>(mi);
      v[i] = static_cast<T>(vi);
      w[i] = static_cast<T>(static_cast<double>(w[i]) - lr * (mi / c1) / (std::sqrt(vi / c2) + eps));
    }
  }
}

template <typename T>
double clip_gradients(std::span<Parameter<T>* const> params, double max_norm) {
  double sq = 0.0;
  for (const auto* p : params)
    for (std::size_t i = 0; i < p->grad.size(); ++i) sq += static_cast<double>(p->grad[i]) * p->grad[i];
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const T scale = static_cast<T>(max_norm / norm);
    for (auto* p : params)
      for (std::size_t i = 0; i < p->grad.size(); ++i) p->grad[i] *= scale;
  }
  return norm;
}

std::string_view event_name(ScheduleEvent e) {
  switch (e) {
    case ScheduleEvent::kNone: return "-";
    case ScheduleEvent::kImproved: return "best";
    case ScheduleEvent::kRestart: return "restart";
    case ScheduleEvent::kStop: return "stop";
  }
  return "?";
}

LrSchedule::LrSchedule(double initial, std::size_t patience, double floor_factor)
    : initial_(initial), patience_(patience), floor_factor_(floor_factor), lr_(initial) {
  if (!(initial > 0.0)) throw UsageError("learning rate must be positive");
  if (patience == 0) throw UsageError("patience must be at least 1");
  if (!(floor_factor > 0.0 && floor_factor < 1.0)) throw UsageError("lr floor factor must be in (0, 1)");
}

ScheduleEvent LrSchedule::observe(double dev_f1) {
  if (stopped_) throw UsageError("LrSchedule::observe after stop");
  if (dev_f1 > best_) {
    best_ = dev_f1;
    since_best_ = 0;
    return ScheduleEvent::kImproved;
  }
  if (++since_best_ < patience_) return ScheduleEvent::kNone;
  since_best_ = 0;
  const double next = lr_ * 0.5;
  if (next < initial_ * floor_factor_) {
    stopped_ = true;
    return ScheduleEvent::kStop;
  }
  lr_ = next;
  ++halvings_;
  return ScheduleEvent::kRestart;
}

std::size_t TrainHistory::restarts() const {
  std::size_t n = 0;
  for (const auto& e : epochs) n += e.event == ScheduleEvent::kRestart;
  return n;
}

void TrainHistory::write(std::ostream& out) const {
  std::ostringstream o;
  o.precision(17);
  o << "epoch\tmean_loss\tdev_f1\tlr\tevent\ttheta_nom\ttheta_acc\ttheta_dat\n";
  for (const auto& e : epochs) {
    o << e.epoch << '\t' << e.mean_loss << '\t' << e.dev_f1 << '\t' << e.lr << '\t' << event_name(e.event) << '\t'
      << e.thresholds.theta[0] << '\t' << e.thresholds.theta[1] << '\t' << e.thresholds.theta[2] << '\n';
  }
  out << o.str();
}

std::uint64_t training_stream_seed(std::uint64_t seed) { return seed ^ 0x9E3779B97F4A7C15ULL; }

template <typename T>
double dev_score(Model<T>& model, const Corpus& train, const Corpus& dev, const TrainConfig& cfg,
                 ThresholdSet* thresholds_out) {
  const std::vector<LabelProbabilities> dev_probs = predict_corpus(model, dev);
  ThresholdSet theta;
  if (!cfg.freeze_thresholds) {
    if (cfg.threshold_split == ThresholdSplit::kDev) {
      theta = search_thresholds(dev.sentences, dev_probs);
    } else {
      const std::vector<LabelProbabilities> train_probs = predict_corpus(model, train);
      theta = search_thresholds(train.sentences, train_probs);
    }
  }
  if (thresholds_out) *thresholds_out = theta;
  return corpus_f1(dev.sentences, dev_probs, theta);
}

template <typename T>
TrainResult train(Model<T>& model, const Corpus& train_set, const Corpus& dev, const TrainConfig& cfg,
                  const TrainHooks& hooks) {
  check(cfg);
  if (train_set.sentences.empty()) throw UsageError("train: empty training split");
  if (dev.sentences.empty() && !hooks.dev_f1) throw UsageError("train: empty development split");

  ParamStore<T>& store = model.params();
  const std::vector<Parameter<T>*> params = store.all();
  std::vector<std::vector<std::int32_t>> ids;
  ids.reserve(train_set.sentences.size());
  for (const auto& s : train_set.sentences) ids.push_back(train_set.vocab.encode(s));

  Rng rng(training_stream_seed(cfg.seed));
  AdamState<T> adam;
  LrSchedule schedule(cfg.learning_rate, cfg.patience, cfg.lr_floor_factor);
  TrainResult result;
  std::vector<Tensor<T>> best_params = store.snapshot();
  std::vector<std::size_t> order(train_set.sentences.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = schedule.lr();
    rng.shuffle(order);
    double total = 0.0;
    std::size_t counted = 0;
    const RunOptions opts{true, &rng, model.config().dropout_rate};
    for (std::size_t idx : order) {
      const Sentence& s = train_set.sentences[idx];
      if (s.q() == 0 || s.n() == 0) continue;
      Tape<T> tape;
      Var<T> loss = model.loss(tape, s, ids[idx], opts);
      const double value = static_cast<double>(loss.value().item());
      if (!std::isfinite(value)) {
        throw NumericalError("non-finite loss " + std::to_string(value) + " on sentence " + s.id + " in epoch " +
                             std::to_string(epoch));
      }
      store.zero_grad();
      tape.backward(loss);
      if (cfg.clip_norm > 0.0) clip_gradients<T>(params, cfg.clip_norm);
      adam_step<T>(params, adam, cfg, schedule.lr());
      total += value;
      ++counted;
    }
    rec.mean_loss = counted ? total / static_cast<double>(counted) : 0.0;
    rec.dev_f1 = hooks.dev_f1 ? hooks.dev_f1(epoch) : dev_score(model, train_set, dev, cfg, &rec.thresholds);

    rec.event = schedule.observe(rec.dev_f1);
    if (rec.event == ScheduleEvent::kImproved) {
      best_params = store.snapshot();
      result.thresholds = rec.thresholds;
      result.best_dev_f1 = rec.dev_f1;
    } else if (rec.event == ScheduleEvent::kRestart) {
      store.restore(best_params);
      adam.reset();
    }
    result.history.epochs.push_back(rec);
    if (hooks.on_epoch) hooks.on_epoch(rec);
    if (rec.event == ScheduleEvent::kStop) break;
    if (hooks.stop && hooks.stop(rec)) break;
  }
  store.restore(best_params);
  return result;
}

#define PASNET_INSTANTIATE_TRAINER(T)                                                                         \
  template void adam_step<T>(std::span<Parameter<T>* const>, AdamState<T>&, const TrainConfig&, double);      \
  template double clip_gradients<T>(std::span<Parameter<T>* const>, double);                                  \
  template double dev_score<T>(Model<T>&, const Corpus&, const Corpus&, const TrainConfig&, ThresholdSet*);   \
  template TrainResult train<T>(Model<T>&, const Corpus&, const Corpus&, const TrainConfig&, const TrainHooks&);

PASNET_INSTANTIATE_TRAINER(float)
PASNET_INSTANTIATE_TRAINER(double)

}  // namespace pasnet
