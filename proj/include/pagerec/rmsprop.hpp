#pragma once
#include <cmath>

#include "pagerec/error.hpp"
#include "pagerec/tensor.hpp"

namespace pagerec {

// Per-parameter running mean of squared gradients.
//   acc   <- rho*acc + (1-rho)*grad^2
//   param <- param - lr * grad / sqrt(acc + eps)
template <class T>
struct RmsPropState {
  Tensor<T> acc;
  double rho = 0.9;
  double lr = 1e-3;
  double eps = 1e-8;

  RmsPropState() = default;
  RmsPropState(const std::vector<int>& shape, double rho_, double lr_,
               double eps_)
      : acc(shape), rho(rho_), lr(lr_), eps(eps_) {
    if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("rmsprop rho must be in (0,1)");
    if (!(lr > 0.0)) throw ConfigError("rmsprop learning rate must be > 0");
    if (!(eps > 0.0)) throw ConfigError("rmsprop eps must be > 0");
  }
};

template <class T>
void rmsprop_step(Tensor<T>& param, const Tensor<T>& grad,
                  RmsPropState<T>& state) {
  if (!param.same_shape(grad) || !param.same_shape(state.acc))
    throw DimensionError("rmsprop: param " + shape_str(param.shape) + ", grad " +
                         shape_str(grad.shape) + ", acc " +
                         shape_str(state.acc.shape) + " must all match");
  const T rho = T(state.rho), lr = T(state.lr), eps = T(state.eps);
  for (size_t i = 0; i < param.size(); ++i) {
    const T g = grad.data[i];
    if (!std::isfinite(double(g)))
      throw NumericError("rmsprop: non-finite gradient");
    T& a = state.acc.data[i];
    a = rho * a + (T(1) - rho) * g * g;
    param.data[i] -= lr * g / std::sqrt(a + eps);
  }
}

}  // namespace pagerec
