#pragma once

// Dense building blocks shared by the training pass and incremental decoding.

#include <cmath>
#include <limits>
#include <type_traits>
#include <vector>

#include "offtarget/transformer.hpp"

namespace offtarget::kernels {

template <typename T>
using RowVector = Eigen::Matrix<T, 1, Eigen::Dynamic>;
template <typename T>
using ConstMatMap = Eigen::Map<const Matrix<T>>;
template <typename T>
using MatMap = Eigen::Map<Matrix<T>>;
template <typename T>
using ConstRowMap = Eigen::Map<const RowVector<T>>;
template <typename T>
using RowMap = Eigen::Map<RowVector<T>>;

inline constexpr double kLayerNormEps = 1e-5;

template <typename T>
ConstMatMap<T> mat(const Parameters<T>& p, int slot) {
  const auto& info = p.layout.tensors[static_cast<std::size_t>(slot)];
  return ConstMatMap<T>(p.data(slot), info.rows, info.cols);
}

template <typename T>
MatMap<T> mat(Parameters<T>& p, int slot) {
  const auto& info = p.layout.tensors[static_cast<std::size_t>(slot)];
  return MatMap<T>(p.data(slot), info.rows, info.cols);
}

template <typename T>
ConstRowMap<T> vec(const Parameters<T>& p, int slot) {
  return ConstRowMap<T>(p.data(slot), static_cast<Eigen::Index>(p.layout.tensors[static_cast<std::size_t>(slot)].size()));
}

template <typename T>
RowMap<T> vec(Parameters<T>& p, int slot) {
  return RowMap<T>(p.data(slot), static_cast<Eigen::Index>(p.layout.tensors[static_cast<std::size_t>(slot)].size()));
}

template <typename T>
void linear(const Matrix<T>& x, const Parameters<T>& p, int w, int b, Matrix<T>& y) {
  y.noalias() = x * mat(p, w);
  y.rowwise() += vec(p, b);
}

/// dx += dy W^T, dW += x^T dy, db += colsum(dy)
template <typename T>
void linear_backward(const Matrix<T>& x, const Matrix<T>& dy, const Parameters<T>& p, int w,
                     Parameters<T>& g, int gw, int gb, Matrix<T>* dx) {
  mat(g, gw).noalias() += x.transpose() * dy;
  vec(g, gb) += dy.colwise().sum();
  if (dx) dx->noalias() += dy * mat(p, w).transpose();
}

template <typename T>
void layer_norm(const Matrix<T>& x, ConstRowMap<T> gain, ConstRowMap<T> bias, Matrix<T>& y,
                std::type_identity_t<LayerNormCache<T>>* cache) {
  const Eigen::Index n = x.rows();
  const Eigen::Index d = x.cols();
  y.resize(n, d);
  if (cache) {
    cache->normalized.resize(n, d);
    cache->inv_std.resize(n);
  }
  RowVector<T> centered(d);
  for (Eigen::Index r = 0; r < n; ++r) {
    const T mean = x.row(r).mean();
    centered = x.row(r).array() - mean;
    const T var = centered.squaredNorm() / static_cast<T>(d);
    const T inv_std = T(1) / std::sqrt(var + static_cast<T>(kLayerNormEps));
    centered *= inv_std;
    y.row(r) = centered.cwiseProduct(gain) + bias;
    if (cache) {
      cache->normalized.row(r) = centered;
      cache->inv_std(r) = inv_std;
    }
  }
}

/// dx += d(LN)/dx^T dy; gain and bias gradients accumulate.
template <typename T>
void layer_norm_backward(const Matrix<T>& dy, const LayerNormCache<T>& cache, ConstRowMap<T> gain,
                         RowMap<T> dgain, RowMap<T> dbias, Matrix<T>& dx) {
  const Eigen::Index n = dy.rows();
  const Eigen::Index d = dy.cols();
  RowVector<T> dxhat(d);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto xhat = cache.normalized.row(r);
    dxhat = dy.row(r).cwiseProduct(gain);
    const T m1 = dxhat.mean();
    const T m2 = dxhat.dot(xhat) / static_cast<T>(d);
    dx.row(r).array() += cache.inv_std(r) * (dxhat.array() - m1 - xhat.array() * m2);
    dgain += dy.row(r).cwiseProduct(xhat);
    dbias += dy.row(r);
  }
}

/// Inverted dropout in place; the mask stores 0 or 1/(1-p) per element.
template <typename T>
void dropout(Matrix<T>& x, double p, Rng& rng, Matrix<T>& mask) {
  mask.resize(x.rows(), x.cols());
  const T scale = static_cast<T>(1.0 / (1.0 - p));
  T* m = mask.data();
  T* v = x.data();
  const Eigen::Index n = x.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    m[i] = uniform01(rng) < p ? T(0) : scale;
    v[i] *= m[i];
  }
}

struct AttentionShape {
  int batch = 0;
  int q_len = 0;
  int k_len = 0;
  int heads = 0;
  int head_dim = 0;
  bool causal = false;
  const std::vector<int>* key_lengths = nullptr;

  int visible(int b, int i) const {
    int limit = (*key_lengths)[static_cast<std::size_t>(b)];
    if (causal) limit = std::min(limit, i + 1);
    return limit;
  }
};

template <typename T>
using Strided = Eigen::Map<Matrix<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using ConstStrided = Eigen::Map<const Matrix<T>, 0, Eigen::OuterStride<>>;

/// The (b, h) slice of a [batch*len, heads*head_dim] activation.
template <typename T>
ConstStrided<T> head_slice(const Matrix<T>& x, int b, int h, int len, int head_dim) {
  const auto d = x.cols();
  return ConstStrided<T>(x.data() + static_cast<std::size_t>(b) * len * d + h * head_dim, len, head_dim,
                         Eigen::OuterStride<>(d));
}

template <typename T>
Strided<T> head_slice(Matrix<T>& x, int b, int h, int len, int head_dim) {
  const auto d = x.cols();
  return Strided<T>(x.data() + static_cast<std::size_t>(b) * len * d + h * head_dim, len, head_dim,
                    Eigen::OuterStride<>(d));
}

/// Scaled dot-product attention per head. Keys outside the visible range get
/// probability exactly zero, so their values never influence the result.
template <typename T>
void attention_core(const Matrix<T>& q, const Matrix<T>& k, const Matrix<T>& v,
                    const AttentionShape& s, AlignedVector<T>& probs, Matrix<T>& context) {
  const int d = s.heads * s.head_dim;
  probs.assign(static_cast<std::size_t>(s.batch) * s.heads * s.q_len * s.k_len, T(0));
  context.resize(static_cast<Eigen::Index>(s.batch) * s.q_len, d);
  const T scale = T(1) / std::sqrt(static_cast<T>(s.head_dim));
  for (int b = 0; b < s.batch; ++b) {
    const int keys = (*s.key_lengths)[static_cast<std::size_t>(b)];
    for (int h = 0; h < s.heads; ++h) {
      MatMap<T> p(probs.data() + (static_cast<std::size_t>(b) * s.heads + h) * s.q_len * s.k_len, s.q_len, s.k_len);
      const auto kb = head_slice(k, b, h, s.k_len, s.head_dim).topRows(keys);
      p.leftCols(keys).noalias() = head_slice(q, b, h, s.q_len, s.head_dim) * kb.transpose();
      for (int i = 0; i < s.q_len; ++i) {
        const int limit = s.visible(b, i);
        auto row = p.row(i);
        row.tail(s.k_len - limit).setZero();
        auto live = row.head(limit);
        live *= scale;
        const T mx = live.maxCoeff();
        live = (live.array() - mx).exp();
        live /= live.sum();
      }
      head_slice(context, b, h, s.q_len, s.head_dim).noalias() =
          p.leftCols(keys) * head_slice(v, b, h, s.k_len, s.head_dim).topRows(keys);
    }
  }
}

template <typename T>
void attention_core_backward(const Matrix<T>& dcontext, const Matrix<T>& q, const Matrix<T>& k,
                             const Matrix<T>& v, const AlignedVector<T>& probs,
                             const AttentionShape& s, Matrix<T>& dq, Matrix<T>& dk, Matrix<T>& dv) {
  dq.setZero(q.rows(), q.cols());
  dk.setZero(k.rows(), k.cols());
  dv.setZero(v.rows(), v.cols());
  const T scale = T(1) / std::sqrt(static_cast<T>(s.head_dim));
  Matrix<T> dp;
  Eigen::Matrix<T, Eigen::Dynamic, 1> weighted;
  for (int b = 0; b < s.batch; ++b) {
    const int keys = (*s.key_lengths)[static_cast<std::size_t>(b)];
    for (int h = 0; h < s.heads; ++h) {
      const ConstMatMap<T> pfull(probs.data() + (static_cast<std::size_t>(b) * s.heads + h) * s.q_len * s.k_len,
                                 s.q_len, s.k_len);
      const auto p = pfull.leftCols(keys);
      const auto dc = head_slice(dcontext, b, h, s.q_len, s.head_dim);
      head_slice(dv, b, h, s.k_len, s.head_dim).topRows(keys).noalias() = p.transpose() * dc;
      dp.noalias() = dc * head_slice(v, b, h, s.k_len, s.head_dim).topRows(keys).transpose();
      // softmax backward: ds = p * (dp - <p, dp>) * scale
      weighted = dp.cwiseProduct(p).rowwise().sum();
      dp = (p.array() * (dp.colwise() - weighted).array() * scale).matrix();
      head_slice(dq, b, h, s.q_len, s.head_dim).noalias() = dp * head_slice(k, b, h, s.k_len, s.head_dim).topRows(keys);
      head_slice(dk, b, h, s.k_len, s.head_dim).topRows(keys).noalias() =
          dp.transpose() * head_slice(q, b, h, s.q_len, s.head_dim);
    }
  }
}

}  // namespace offtarget::kernels
