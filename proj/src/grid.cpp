#include "pasnet/grid.hpp"

namespace pasnet {

template <typename T>
EncoderParams<T> add_grid_params(ParamStore<T>& store, const HyperConfig& cfg, std::size_t vocab_size) {
  return add_encoder_params(store, cfg, vocab_size, /*cross_width=*/cfg.d_r);
}

template <typename T>
std::vector<Var<T>> grid_forward(Tape<T>& tape, const Sentence& s, std::span<const std::int32_t> ids,
                                 const EncoderParams<T>& params, const HyperConfig& cfg, const RunOptions& opts) {
  const std::size_t q = s.q();
  if (q == 0) throw UsageError("grid_forward: sentence " + s.id + " has no predicates");
  const std::size_t n = s.n();
  Var<T> embedded = gather_rows(tape.parameter(*params.embedding), ids);
  std::vector<Var<T>> below;
  below.reserve(q);
  for (std::size_t i = 0; i < q; ++i) below.push_back(embed_inputs(embedded, s, i, cfg.mp_enabled));

  Var<T> zeros = tape.constant(Tensor<T>({n, cfg.d_r}));
  for (std::size_t k = 1; k <= params.layers.size(); ++k) {
    const bool odd = k % 2 == 1;
    std::vector<Var<T>> current(q);
    for (std::size_t step = 0; step < q; ++step) {
      const std::size_t i = odd ? step : q - 1 - step;
      Var<T> neighbour = zeros;
      if (odd && i > 0) neighbour = current[i - 1];
      if (!odd && i + 1 < q) neighbour = current[i + 1];
      Var<T> in = concat(below[i], neighbour);
      if (opts.dropout_active()) in = dropout(in, opts.dropout_rate, *opts.rng);
      Var<T> r = gru_sequence(in, params.layers[k - 1], /*reverse=*/!odd);
      current[i] = k == 1 ? r : add(below[i], r);
    }
    below = std::move(current);
  }
  return below;
}

template EncoderParams<float> add_grid_params<float>(ParamStore<float>&, const HyperConfig&, std::size_t);
template EncoderParams<double> add_grid_params<double>(ParamStore<double>&, const HyperConfig&, std::size_t);
template std::vector<Var<float>> grid_forward<float>(Tape<float>&, const Sentence&, std::span<const std::int32_t>,
                                                     const EncoderParams<float>&, const HyperConfig&,
                                                     const RunOptions&);
template std::vector<Var<double>> grid_forward<double>(Tape<double>&, const Sentence&, std::span<const std::int32_t>,
                                                       const EncoderParams<double>&, const HyperConfig&,
                                                       const RunOptions&);

}  // namespace pasnet
