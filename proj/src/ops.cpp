#include "pasnet/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace pasnet {
namespace {

template <typename T>
using MatRM = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MapMat = Eigen::Map<MatRM<T>>;
template <typename T>
using CMapMat = Eigen::Map<const MatRM<T>>;
template <typename T>
using MapVec = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, 1>>;
template <typename T>
using CMapVec = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>>;

template <typename T>
CMapMat<T> as_rows(const Tensor<T>& t) {
  return CMapMat<T>(t.raw(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}
template <typename T>
MapMat<T> as_rows(Tensor<T>& t) {
  return MapMat<T>(t.raw(), static_cast<Eigen::Index>(t.rows()), static_cast<Eigen::Index>(t.cols()));
}
template <typename T>
CMapVec<T> as_vec(const Tensor<T>& t) {
  return CMapVec<T>(t.raw(), static_cast<Eigen::Index>(t.size()));
}
template <typename T>
MapVec<T> as_vec(Tensor<T>& t) {
  return MapVec<T>(t.raw(), static_cast<Eigen::Index>(t.size()));
}

void require(bool ok, const std::string& op, const Shape& a, const Shape& b) {
  if (!ok) throw DimensionError(op + ": incompatible shapes " + shape_string(a) + " and " + shape_string(b));
}

// Shape of x with the last axis replaced.
Shape with_cols(const Shape& s, std::size_t cols) {
  Shape out = s.empty() ? Shape{1} : s;
  out.back() = cols;
  return out;
}

}  // namespace

template <typename T>
Var<T> affine(Var<T> w, Var<T> x, std::optional<Var<T>> b) {
  const Tensor<T>& wv = w.value();
  const Tensor<T>& xv = x.value();
  require(wv.rank() == 2 && xv.rank() >= 1 && wv.dim(1) == xv.cols(), "affine", wv.shape(), xv.shape());
  const std::size_t m = wv.dim(0);
  if (b) {
    const Tensor<T>& bv = b->value();
    require(bv.rank() == 1 && bv.dim(0) == m, "affine bias", wv.shape(), bv.shape());
  }
  Tensor<T> y(with_cols(xv.shape(), m));
  auto ym = as_rows(y);
  ym.noalias() = as_rows(xv) * as_rows(wv).transpose();
  if (b) ym.rowwise() += as_vec(b->value()).transpose();

  Tape<T>& tape = *w.tape;
  const std::uint32_t wid = w.id, xid = x.id;
  const bool has_bias = b.has_value();
  const std::uint32_t bid = has_bias ? b->id : 0;
  std::vector<Var<T>> in{w, x};
  if (has_bias) in.push_back(*b);
  return tape.record("affine", in, std::move(y), [wid, xid, bid, has_bias](Tape<T>& t, std::uint32_t self) {
    const auto gy = as_rows(t.grad(self));
    if (Tensor<T>* gx = t.input_grad(xid)) as_rows(*gx).noalias() += gy * as_rows(t.value(wid));
    if (Tensor<T>* gw = t.input_grad(wid)) as_rows(*gw).noalias() += gy.transpose() * as_rows(t.value(xid));
    if (has_bias) {
      if (Tensor<T>* gb = t.input_grad(bid)) as_vec(*gb) += gy.colwise().sum().transpose();
    }
  });
}

template <typename T>
Var<T> matmul(Var<T> a, Var<T> b) {
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  require(av.rank() == 2 && bv.rank() == 2 && av.dim(1) == bv.dim(0), "matmul", av.shape(), bv.shape());
  Tensor<T> c({av.dim(0), bv.dim(1)});
  as_rows(c).noalias() = as_rows(av) * as_rows(bv);
  const std::uint32_t aid = a.id, bid = b.id;
  return a.tape->record("matmul", {a, b}, std::move(c), [aid, bid](Tape<T>& t, std::uint32_t self) {
    const auto gc = as_rows(t.grad(self));
    if (Tensor<T>* ga = t.input_grad(aid)) as_rows(*ga).noalias() += gc * as_rows(t.value(bid)).transpose();
    if (Tensor<T>* gb = t.input_grad(bid)) as_rows(*gb).noalias() += as_rows(t.value(aid)).transpose() * gc;
  });
}

template <typename T>
Var<T> activation(Activation kind, Var<T> x) {
  const Tensor<T>& xv = x.value();
  Tensor<T> y(xv.shape());
  const std::size_t n = xv.size();
  switch (kind) {
    case Activation::kRelu:
      for (std::size_t i = 0; i < n; ++i) y[i] = xv[i] > T(0) ? xv[i] : T(0);
      break;
    case Activation::kTanh:
      for (std::size_t i = 0; i < n; ++i) y[i] = std::tanh(xv[i]);
      break;
    case Activation::kSigmoid:
      for (std::size_t i = 0; i < n; ++i) y[i] = T(1) / (T(1) + std::exp(-xv[i]));
      break;
  }
  const char* name = kind == Activation::kRelu ? "relu" : kind == Activation::kTanh ? "tanh" : "sigmoid";
  const std::uint32_t xid = x.id;
  return x.tape->record(name, {x}, std::move(y), [kind, xid](Tape<T>& t, std::uint32_t self) {
    Tensor<T>* gx = t.input_grad(xid);
    if (!gx) return;
    const Tensor<T>& gy = t.grad(self);
    const Tensor<T>& y = t.value(self);
    const std::size_t n = y.size();
    switch (kind) {
      case Activation::kRelu:
        // y > 0 exactly when x > 0; the derivative at 0 is taken as 0.
        for (std::size_t i = 0; i < n; ++i) (*gx)[i] += y[i] > T(0) ? gy[i] : T(0);
        break;
      case Activation::kTanh:
        for (std::size_t i = 0; i < n; ++i) (*gx)[i] += gy[i] * (T(1) - y[i] * y[i]);
        break;
      case Activation::kSigmoid:
        for (std::size_t i = 0; i < n; ++i) (*gx)[i] += gy[i] * y[i] * (T(1) - y[i]);
        break;
    }
  });
}

template <typename T>
Var<T> softmax(Var<T> x) {
  const Tensor<T>& xv = x.value();
  if (xv.cols() == 0) throw UsageError("softmax: empty last axis");
  Tensor<T> y(xv.shape());
  const std::size_t rows = xv.rows(), cols = xv.cols();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* in = xv.raw() + r * cols;
    T* out = y.raw() + r * cols;
    const T mx = *std::max_element(in, in + cols);
    T z = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      out[c] = std::exp(in[c] - mx);
      z += out[c];
    }
    for (std::size_t c = 0; c < cols; ++c) out[c] /= z;
  }
  const std::uint32_t xid = x.id;
  return x.tape->record("softmax", {x}, std::move(y), [xid](Tape<T>& t, std::uint32_t self) {
    Tensor<T>* gx = t.input_grad(xid);
    if (!gx) return;
    const Tensor<T>& y = t.value(self);
    const Tensor<T>& gy = t.grad(self);
    const std::size_t rows = y.rows(), cols = y.cols();
    for (std::size_t r = 0; r < rows; ++r) {
      const std::size_t o = r * cols;
      T s = 0;
      for (std::size_t c = 0; c < cols; ++c) s += gy[o + c] * y[o + c];
      for (std::size_t c = 0; c < cols; ++c) (*gx)[o + c] += y[o + c] * (gy[o + c] - s);
    }
  });
}

template <typename T>
Var<T> maxpool_set(std::span<const Var<T>> vs) {
  if (vs.empty()) throw UsageError("maxpool_set: empty input set");
  const Tensor<T>& first = vs[0].value();
  for (const auto& v : vs) require(v.shape() == first.shape(), "maxpool_set", first.shape(), v.shape());
  Tensor<T> y = first;
  std::vector<std::uint32_t> winner(first.size(), 0);
  for (std::size_t k = 1; k < vs.size(); ++k) {
    const Tensor<T>& v = vs[k].value();
    for (std::size_t d = 0; d < y.size(); ++d) {
      if (v[d] > y[d]) {
        y[d] = v[d];
        winner[d] = static_cast<std::uint32_t>(k);
      }
    }
  }
  std::vector<std::uint32_t> ids;
  ids.reserve(vs.size());
  for (const auto& v : vs) ids.push_back(v.id);
  return vs[0].tape->record("maxpool_set", vs, std::move(y),
                            [ids = std::move(ids), winner = std::move(winner)](Tape<T>& t, std::uint32_t self) {
                              const Tensor<T>& gy = t.grad(self);
                              for (std::size_t d = 0; d < winner.size(); ++d) {
                                if (Tensor<T>* g = t.input_grad(ids[winner[d]])) (*g)[d] += gy[d];
                              }
                            });
}

namespace {

template <typename T, typename F, typename B>
Var<T> elementwise(const char* name, Var<T> a, Var<T> b, F f, B back) {
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  require(av.shape() == bv.shape(), name, av.shape(), bv.shape());
  Tensor<T> y(av.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = f(av[i], bv[i]);
  const std::uint32_t aid = a.id, bid = b.id;
  return a.tape->record(name, {a, b}, std::move(y), [aid, bid, back](Tape<T>& t, std::uint32_t self) {
    back(t, t.grad(self), aid, bid);
  });
}

}  // namespace

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  return elementwise<T>(
      "add", a, b, [](T x, T y) { return x + y; },
      [](Tape<T>& t, const Tensor<T>& g, std::uint32_t aid, std::uint32_t bid) {
        if (Tensor<T>* ga = t.input_grad(aid)) as_vec(*ga) += as_vec(g);
        if (Tensor<T>* gb = t.input_grad(bid)) as_vec(*gb) += as_vec(g);
      });
}

template <typename T>
Var<T> sub(Var<T> a, Var<T> b) {
  return elementwise<T>(
      "sub", a, b, [](T x, T y) { return x - y; },
      [](Tape<T>& t, const Tensor<T>& g, std::uint32_t aid, std::uint32_t bid) {
        if (Tensor<T>* ga = t.input_grad(aid)) as_vec(*ga) += as_vec(g);
        if (Tensor<T>* gb = t.input_grad(bid)) as_vec(*gb) -= as_vec(g);
      });
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
  return elementwise<T>(
      "mul", a, b, [](T x, T y) { return x * y; },
      [](Tape<T>& t, const Tensor<T>& g, std::uint32_t aid, std::uint32_t bid) {
        if (Tensor<T>* ga = t.input_grad(aid)) as_vec(*ga) += as_vec(g).cwiseProduct(as_vec(t.value(bid)));
        if (Tensor<T>* gb = t.input_grad(bid)) as_vec(*gb) += as_vec(g).cwiseProduct(as_vec(t.value(aid)));
      });
}

template <typename T>
Var<T> concat(Var<T> a, Var<T> b) {
  const Tensor<T>& av = a.value();
  const Tensor<T>& bv = b.value();
  require(av.rank() >= 1 && av.rank() == bv.rank(), "concat", av.shape(), bv.shape());
  std::size_t rows = 1;
  for (std::size_t k = 0; k + 1 < av.rank(); ++k) {
    require(av.dim(k) == bv.dim(k), "concat", av.shape(), bv.shape());
    rows *= av.dim(k);
  }
  const std::size_t ca = av.cols(), cb = bv.cols();
  Tensor<T> y(with_cols(av.shape(), ca + cb));
  for (std::size_t r = 0; r < rows; ++r) {
    std::copy_n(av.raw() + r * ca, ca, y.raw() + r * (ca + cb));
    std::copy_n(bv.raw() + r * cb, cb, y.raw() + r * (ca + cb) + ca);
  }
  const std::uint32_t aid = a.id, bid = b.id;
  return a.tape->record("concat", {a, b}, std::move(y), [aid, bid, ca, cb, rows](Tape<T>& t, std::uint32_t self) {
    const Tensor<T>& g = t.grad(self);
    Tensor<T>* ga = t.input_grad(aid);
    Tensor<T>* gb = t.input_grad(bid);
    for (std::size_t r = 0; r < rows; ++r) {
      const T* src = g.raw() + r * (ca + cb);
      if (ga)
        for (std::size_t c = 0; c < ca; ++c) (*ga)[r * ca + c] += src[c];
      if (gb)
        for (std::size_t c = 0; c < cb; ++c) (*gb)[r * cb + c] += src[ca + c];
    }
  });
}

template <typename T>
Var<T> slice(Var<T> x, std::size_t begin, std::size_t len) {
  const Tensor<T>& xv = x.value();
  const std::size_t cols = xv.cols(), rows = xv.rows();
  if (xv.rank() == 0 || begin + len > cols) {
    throw DimensionError("slice: columns [" + std::to_string(begin) + ", " + std::to_string(begin + len) +
                         ") out of range for shape " + shape_string(xv.shape()));
  }
  Tensor<T> y(with_cols(xv.shape(), len));
  for (std::size_t r = 0; r < rows; ++r) std::copy_n(xv.raw() + r * cols + begin, len, y.raw() + r * len);
  const std::uint32_t xid = x.id;
  return x.tape->record("slice", {x}, std::move(y), [xid, begin, len, cols, rows](Tape<T>& t, std::uint32_t self) {
    Tensor<T>* gx = t.input_grad(xid);
    if (!gx) return;
    const Tensor<T>& g = t.grad(self);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < len; ++c) (*gx)[r * cols + begin + c] += g[r * len + c];
  });
}

template <typename T>
Var<T> row(Var<T> x, std::size_t r) {
  const Tensor<T>& xv = x.value();
  if (xv.rank() != 2 || r >= xv.dim(0)) {
    throw DimensionError("row: index " + std::to_string(r) + " out of range for shape " + shape_string(xv.shape()));
  }
  const std::size_t cols = xv.dim(1);
  Tensor<T> y({cols});
  std::copy_n(xv.raw() + r * cols, cols, y.raw());
  const std::uint32_t xid = x.id;
  return x.tape->record("row", {x}, std::move(y), [xid, r, cols](Tape<T>& t, std::uint32_t self) {
    if (Tensor<T>* gx = t.input_grad(xid)) {
      const Tensor<T>& g = t.grad(self);
      for (std::size_t c = 0; c < cols; ++c) (*gx)[r * cols + c] += g[c];
    }
  });
}

template <typename T>
Var<T> stack(std::span<const Var<T>> rows) {
  if (rows.empty()) throw UsageError("stack: no rows");
  const std::size_t cols = rows[0].value().size();
  Tensor<T> y({rows.size(), cols});
  std::vector<std::uint32_t> ids;
  ids.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const Tensor<T>& v = rows[r].value();
    require(v.rank() == 1 && v.size() == cols, "stack", rows[0].shape(), v.shape());
    std::copy_n(v.raw(), cols, y.raw() + r * cols);
    ids.push_back(rows[r].id);
  }
  return rows[0].tape->record("stack", rows, std::move(y), [ids = std::move(ids), cols](Tape<T>& t, std::uint32_t self) {
    const Tensor<T>& g = t.grad(self);
    for (std::size_t r = 0; r < ids.size(); ++r) {
      if (Tensor<T>* gr = t.input_grad(ids[r]))
        for (std::size_t c = 0; c < cols; ++c) (*gr)[c] += g[r * cols + c];
    }
  });
}

template <typename T>
Var<T> gather_rows(Var<T> table, std::span<const std::int32_t> ids) {
  const Tensor<T>& tv = table.value();
  if (tv.rank() != 2) throw DimensionError("gather_rows: table must be a matrix, got " + shape_string(tv.shape()));
  const std::size_t cols = tv.dim(1);
  Tensor<T> y({ids.size(), cols});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || static_cast<std::size_t>(ids[r]) >= tv.dim(0)) {
      throw UsageError("gather_rows: index " + std::to_string(ids[r]) + " outside table of " +
                       std::to_string(tv.dim(0)) + " rows");
    }
    std::copy_n(tv.raw() + static_cast<std::size_t>(ids[r]) * cols, cols, y.raw() + r * cols);
  }
  const std::uint32_t tid = table.id;
  return table.tape->record(
      "gather_rows", {table}, std::move(y),
      [tid, idx = std::vector<std::int32_t>(ids.begin(), ids.end()), cols](Tape<T>& t, std::uint32_t self) {
        Tensor<T>* gt = t.input_grad(tid);
        if (!gt) return;
        const Tensor<T>& g = t.grad(self);
        for (std::size_t r = 0; r < idx.size(); ++r)
          for (std::size_t c = 0; c < cols; ++c) (*gt)[static_cast<std::size_t>(idx[r]) * cols + c] += g[r * cols + c];
      });
}

template <typename T>
Var<T> pairwise_sum(Var<T> u, Var<T> v) {
  const Tensor<T>& uv = u.value();
  const Tensor<T>& vv = v.value();
  require(uv.rank() == 2 && vv.rank() == 2 && uv.dim(1) == vv.dim(1), "pairwise_sum", uv.shape(), vv.shape());
  const std::size_t a = uv.dim(0), b = vv.dim(0), d = uv.dim(1);
  Tensor<T> y({a, b, d});
  for (std::size_t i = 0; i < a; ++i)
    for (std::size_t j = 0; j < b; ++j) {
      T* out = y.raw() + (i * b + j) * d;
      const T* ui = uv.raw() + i * d;
      const T* vj = vv.raw() + j * d;
      for (std::size_t k = 0; k < d; ++k) out[k] = ui[k] + vj[k];
    }
  const std::uint32_t uid = u.id, vid = v.id;
  return u.tape->record("pairwise_sum", {u, v}, std::move(y), [uid, vid, a, b, d](Tape<T>& t, std::uint32_t self) {
    const Tensor<T>& g = t.grad(self);
    Tensor<T>* gu = t.input_grad(uid);
    Tensor<T>* gv = t.input_grad(vid);
    for (std::size_t i = 0; i < a; ++i)
      for (std::size_t j = 0; j < b; ++j) {
        const T* src = g.raw() + (i * b + j) * d;
        if (gu)
          for (std::size_t k = 0; k < d; ++k) (*gu)[i * d + k] += src[k];
        if (gv)
          for (std::size_t k = 0; k < d; ++k) (*gv)[j * d + k] += src[k];
      }
  });
}

template <typename T>
Var<T> reshape(Var<T> x, Shape shape) {
  Tensor<T> y = x.value();
  y.reshape(std::move(shape));
  const std::uint32_t xid = x.id;
  return x.tape->record("reshape", {x}, std::move(y), [xid](Tape<T>& t, std::uint32_t self) {
    if (Tensor<T>* gx = t.input_grad(xid)) as_vec(*gx) += as_vec(t.grad(self));
  });
}

template <typename T>
Var<T> sum(Var<T> x) {
  const Tensor<T>& xv = x.value();
  T s = 0;
  for (std::size_t i = 0; i < xv.size(); ++i) s += xv[i];
  const std::uint32_t xid = x.id;
  return x.tape->record("sum", {x}, Tensor<T>::scalar(s), [xid](Tape<T>& t, std::uint32_t self) {
    if (Tensor<T>* gx = t.input_grad(xid)) as_vec(*gx).array() += t.grad(self)[0];
  });
}

template <typename T>
Var<T> dropout(Var<T> x, double rate, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw UsageError("dropout: rate must lie in [0, 1), got " + std::to_string(rate));
  if (rate == 0.0) return x;
  x.tape->mark_stochastic();
  const Tensor<T>& xv = x.value();
  Tensor<T> mask(xv.shape());
  const T keep_scale = T(1.0 / (1.0 - rate));
  for (std::size_t i = 0; i < mask.size(); ++i) mask[i] = rng.uniform() < rate ? T(0) : keep_scale;
  Tensor<T> y(xv.shape());
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = xv[i] * mask[i];
  const std::uint32_t xid = x.id;
  return x.tape->record("dropout", {x}, std::move(y), [xid, mask = std::move(mask)](Tape<T>& t, std::uint32_t self) {
    if (Tensor<T>* gx = t.input_grad(xid)) as_vec(*gx) += as_vec(t.grad(self)).cwiseProduct(as_vec(mask));
  });
}

namespace {
constexpr double kLogFloor = 1e-12;
}

template <typename T>
Var<T> nll_loss(Var<T> probs, int gold) {
  const Tensor<T>& pv = probs.value();
  if (pv.rank() != 1) throw DimensionError("nll_loss: expected a vector, got " + shape_string(pv.shape()));
  return nll_rows(probs, std::span<const int>(&gold, 1));
}

template <typename T>
Var<T> nll_rows(Var<T> probs, std::span<const int> gold) {
  const Tensor<T>& pv = probs.value();
  const std::size_t rows = pv.rows(), cols = pv.cols();
  if (gold.size() != rows) {
    throw DimensionError("nll_rows: " + std::to_string(gold.size()) + " labels for " + std::to_string(rows) + " rows");
  }
  T loss = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (gold[r] < 0 || static_cast<std::size_t>(gold[r]) >= cols) {
      throw UsageError("nll_loss: gold label " + std::to_string(gold[r]) + " outside 0.." + std::to_string(cols - 1));
    }
    loss -= std::log(std::max(pv[r * cols + static_cast<std::size_t>(gold[r])], T(kLogFloor)));
  }
  const std::uint32_t pid = probs.id;
  return probs.tape->record("nll", {probs}, Tensor<T>::scalar(loss),
                            [pid, labels = std::vector<int>(gold.begin(), gold.end()), cols](Tape<T>& t, std::uint32_t self) {
                              Tensor<T>* gp = t.input_grad(pid);
                              if (!gp) return;
                              const T g = t.grad(self)[0];
                              const Tensor<T>& p = t.value(pid);
                              for (std::size_t r = 0; r < labels.size(); ++r) {
                                const std::size_t k = r * cols + static_cast<std::size_t>(labels[r]);
                                if (p[k] > T(kLogFloor)) (*gp)[k] -= g / p[k];
                              }
                            });
}

#define PASNET_INSTANTIATE_OPS(T)                                                   \
  template Var<T> affine<T>(Var<T>, Var<T>, std::optional<Var<T>>);                 \
  template Var<T> matmul<T>(Var<T>, Var<T>);                                        \
  template Var<T> activation<T>(Activation, Var<T>);                                \
  template Var<T> softmax<T>(Var<T>);                                               \
  template Var<T> maxpool_set<T>(std::span<const Var<T>>);                          \
  template Var<T> add<T>(Var<T>, Var<T>);                                           \
  template Var<T> sub<T>(Var<T>, Var<T>);                                           \
  template Var<T> mul<T>(Var<T>, Var<T>);                                           \
  template Var<T> concat<T>(Var<T>, Var<T>);                                        \
  template Var<T> slice<T>(Var<T>, std::size_t, std::size_t);                       \
  template Var<T> row<T>(Var<T>, std::size_t);                                      \
  template Var<T> stack<T>(std::span<const Var<T>>);                                \
  template Var<T> gather_rows<T>(Var<T>, std::span<const std::int32_t>);            \
  template Var<T> pairwise_sum<T>(Var<T>, Var<T>);                                  \
  template Var<T> reshape<T>(Var<T>, Shape);                                        \
  template Var<T> sum<T>(Var<T>);                                                   \
  template Var<T> dropout<T>(Var<T>, double, Rng&);                                 \
  template Var<T> nll_loss<T>(Var<T>, int);                                         \
  template Var<T> nll_rows<T>(Var<T>, std::span<const int>);

PASNET_INSTANTIATE_OPS(float)
PASNET_INSTANTIATE_OPS(double)

}  // namespace pasnet
