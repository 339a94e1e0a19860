#pragma once
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "pagerec/error.hpp"
#include "pagerec/rng.hpp"

namespace pagerec {

// Dense N-dimensional array, row-major, last axis fastest. Plain value type:
// copyable, movable, no aliasing.
template <class T>
struct Tensor {
  std::vector<int> shape;
  std::vector<T> data;

  Tensor() = default;

  explicit Tensor(std::vector<int> s, T fill = T(0))
      : shape(std::move(s)), data(checked_numel(shape), fill) {}

  static size_t checked_numel(const std::vector<int>& s) {
    size_t n = 1;
    for (size_t i = 0; i < s.size(); ++i) {
      if (s[i] <= 0) {
        std::ostringstream os;
        os << "tensor axis " << i << " must be positive, got " << s[i];
        throw DimensionError(os.str());
      }
      n *= size_t(s[i]);
    }
    return n;
  }

  size_t size() const { return data.size(); }
  int rank() const { return int(shape.size()); }
  int dim(int i) const { return shape[size_t(i)]; }

  T* ptr() { return data.data(); }
  const T* ptr() const { return data.data(); }

  T& at(int i) { return data[size_t(i)]; }
  const T& at(int i) const { return data[size_t(i)]; }
  T& at(int i, int j) { return data[size_t(i) * shape[1] + j]; }
  const T& at(int i, int j) const { return data[size_t(i) * shape[1] + j]; }
  T& at(int i, int j, int k) {
    return data[(size_t(i) * shape[1] + j) * shape[2] + k];
  }
  const T& at(int i, int j, int k) const {
    return data[(size_t(i) * shape[1] + j) * shape[2] + k];
  }
  T& at(int i, int j, int k, int l) {
    return data[((size_t(i) * shape[1] + j) * shape[2] + k) * shape[3] + l];
  }
  const T& at(int i, int j, int k, int l) const {
    return data[((size_t(i) * shape[1] + j) * shape[2] + k) * shape[3] + l];
  }

  void fill(T v) { std::fill(data.begin(), data.end(), v); }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
};

template <class T>
inline bool all_finite(const Tensor<T>& t) {
  for (const T& v : t.data)
    if (!std::isfinite(double(v))) return false;
  return true;
}

template <class To, class From>
inline Tensor<To> cast(const Tensor<From>& t) {
  Tensor<To> out(t.shape);
  for (size_t i = 0; i < t.size(); ++i) out.data[i] = To(t.data[i]);
  return out;
}

inline std::string shape_str(const std::vector<int>& s) {
  std::string r = "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) r += ",";
    r += std::to_string(s[i]);
  }
  return r + "]";
}

// Uniform init in +-sqrt(6/(fan_in+fan_out)).
template <class T>
inline void fill_glorot(Tensor<T>& t, int fan_in, int fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / double(fan_in + fan_out));
  for (T& v : t.data) v = T(rng.uniform(-limit, limit));
}

}  // namespace pagerec
