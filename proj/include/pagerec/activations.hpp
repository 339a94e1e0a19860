#pragma once
#include <cmath>

#include "pagerec/error.hpp"
#include "pagerec/rng.hpp"
#include "pagerec/tensor.hpp"

namespace pagerec {

template <class T>
inline T sigmoid(T x) {
  return T(1) / (T(1) + std::exp(-x));
}

template <class T>
inline void tanh_inplace(Tensor<T>& t) {
  for (T& v : t.data) v = std::tanh(v);
}

// d/dx tanh given y = tanh(x).
template <class T>
inline T dtanh_from_y(T y) {
  return T(1) - y * y;
}

// Inverted dropout. Training: zero with probability p, scale survivors by
// 1/(1-p); inference: identity. The mask is returned for the backward pass.
template <class T>
inline Tensor<T> dropout_forward(const Tensor<T>& in, double p, Rng& rng,
                                 bool training, Tensor<T>* mask_out) {
  if (p < 0.0 || p >= 1.0) throw ConfigError("dropout rate must be in [0,1)");
  if (!training || p == 0.0) {
    if (mask_out) *mask_out = Tensor<T>();
    return in;
  }
  const T scale = T(1.0 / (1.0 - p));
  Tensor<T> mask(in.shape);
  Tensor<T> out(in.shape);
  for (size_t i = 0; i < in.size(); ++i) {
    const T m = rng.bernoulli(p) ? T(0) : scale;
    mask.data[i] = m;
    out.data[i] = in.data[i] * m;
  }
  if (mask_out) *mask_out = std::move(mask);
  return out;
}

template <class T>
inline Tensor<T> dropout_backward(const Tensor<T>& dout, const Tensor<T>& mask) {
  if (mask.size() == 0) return dout;  // was identity
  Tensor<T> din(dout.shape);
  for (size_t i = 0; i < dout.size(); ++i)
    din.data[i] = dout.data[i] * mask.data[i];
  return din;
}

}  // namespace pagerec
