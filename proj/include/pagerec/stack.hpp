#pragma once
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "pagerec/activations.hpp"
#include "pagerec/conv2d.hpp"
#include "pagerec/error.hpp"
#include "pagerec/mdlstm.hpp"
#include "pagerec/rmsprop.hpp"

namespace pagerec {

// Layer chain description, independent of the parameter scalar type.
struct LayerSpec {
  enum Kind { kConv, kLstm } kind = kConv;
  // conv
  int out_channels = 0;
  int fh = 0, fw = 0;
  int sh = 1, sw = 1;
  bool linear = false;  // no activation (output heads)
  // lstm
  int hidden = 0;

  static LayerSpec conv(int out_ch, int fh_, int fw_, int sh_, int sw_,
                        bool linear_ = false) {
    LayerSpec s;
    s.kind = kConv;
    s.out_channels = out_ch;
    s.fh = fh_;
    s.fw = fw_;
    s.sh = sh_;
    s.sw = sw_;
    s.linear = linear_;
    return s;
  }
  static LayerSpec lstm(int hidden_) {
    LayerSpec s;
    s.kind = kLstm;
    s.hidden = hidden_;
    return s;
  }
};

template <class T>
struct ConvLayer {
  Tensor<T> w;  // [Cout,Cin,fh,fw]
  Tensor<T> b;  // [Cout]
  int sh = 1, sw = 1;
  bool linear = false;

  long param_count() const { return long(w.size()) + long(b.size()); }
};

template <class T>
using Layer = std::variant<ConvLayer<T>, MdLstm<T>>;

// A chain of conv / MDLSTM layers over [C,H,W] maps. Hidden convolutions use
// tanh activations followed by dropout during training.
template <class T>
struct Stack {
  std::vector<Layer<T>> layers;
  double dropout = 0.0;

  int out_channels() const {
    if (layers.empty()) throw ConfigError("empty layer stack");
    if (const auto* c = std::get_if<ConvLayer<T>>(&layers.back()))
      return c->w.dim(0);
    return std::get<MdLstm<T>>(layers.back()).hidden;
  }
};

template <class T>
Stack<T> build_stack(const std::vector<LayerSpec>& specs, int in_channels,
                     double dropout, Rng& rng) {
  Stack<T> st;
  st.dropout = dropout;
  int ch = in_channels;
  for (const auto& spec : specs) {
    if (spec.kind == LayerSpec::kConv) {
      ConvLayer<T> l;
      l.w = Tensor<T>({spec.out_channels, ch, spec.fh, spec.fw});
      l.b = Tensor<T>({spec.out_channels});
      l.sh = spec.sh;
      l.sw = spec.sw;
      l.linear = spec.linear;
      const int fan_in = ch * spec.fh * spec.fw;
      fill_glorot(l.w, fan_in, spec.out_channels, rng);
      st.layers.emplace_back(std::move(l));
      ch = spec.out_channels;
    } else {
      if (spec.hidden <= 0) throw ConfigError("lstm hidden size must be positive");
      MdLstm<T> l(ch, spec.hidden);
      for (auto& d : l.dir) fill_glorot(d, ch + 2 * spec.hidden + 1, spec.hidden, rng);
      // zero the bias column
      for (auto& d : l.dir)
        for (int r = 0; r < d.dim(0); ++r) d.at(r, d.dim(1) - 1) = T(0);
      st.layers.emplace_back(std::move(l));
      ch = spec.hidden;
    }
  }
  return st;
}

template <class T>
std::vector<long> per_layer_param_counts(const Stack<T>& st) {
  std::vector<long> counts;
  for (const auto& l : st.layers) {
    if (const auto* c = std::get_if<ConvLayer<T>>(&l))
      counts.push_back(c->param_count());
    else
      counts.push_back(std::get<MdLstm<T>>(l).param_count());
  }
  return counts;
}

// Shape of each layer output for a [c,h,w] input, computed without running
// the network.
inline std::vector<std::array<int, 3>> stack_output_shapes(
    const std::vector<LayerSpec>& specs, int c, int h, int w) {
  std::vector<std::array<int, 3>> shapes;
  for (const auto& s : specs) {
    if (s.kind == LayerSpec::kConv) {
      auto [oh, ow] = conv_out_hw(h, w, s.fh, s.fw, s.sh, s.sw);
      c = s.out_channels;
      h = oh;
      w = ow;
    } else {
      c = s.hidden;
    }
    shapes.push_back({c, h, w});
  }
  return shapes;
}

// Smallest input that still yields a 1x1 final map.
inline std::pair<int, int> stack_min_input_hw(
    const std::vector<LayerSpec>& specs) {
  int h = 1, w = 1;
  for (auto it = specs.rbegin(); it != specs.rend(); ++it) {
    if (it->kind != LayerSpec::kConv) continue;
    h = (h - 1) * it->sh + it->fh;
    w = (w - 1) * it->sw + it->fw;
  }
  return {h, w};
}

template <class T>
struct StackCache {
  std::vector<Tensor<T>> inputs;        // input of each layer
  std::vector<Tensor<T>> activations;   // conv output post-tanh, pre-dropout
  std::vector<Tensor<T>> dropout_mask;  // empty when dropout was identity
  std::vector<MdLstmCache<T>> lstm;
};

// Forward through the stack. In training mode dropout masks are drawn from
// rng after every non-linear convolution; in inference mode the pass is
// deterministic.
template <class T>
Tensor<T> stack_forward(const Stack<T>& st, const Tensor<T>& in, bool training,
                        Rng* rng, StackCache<T>* cache) {
  if (training && st.dropout > 0.0 && !rng)
    throw ConfigError("training forward with dropout requires an rng");
  Tensor<T> x = in;
  const size_t n = st.layers.size();
  if (cache) {
    cache->inputs.assign(n, Tensor<T>());
    cache->activations.assign(n, Tensor<T>());
    cache->dropout_mask.assign(n, Tensor<T>());
    cache->lstm.assign(n, MdLstmCache<T>());
  }
  for (size_t i = 0; i < n; ++i) {
    if (cache) cache->inputs[i] = x;
    if (const auto* c = std::get_if<ConvLayer<T>>(&st.layers[i])) {
      Tensor<T> y = conv2d_forward(x, c->w, c->b, c->sh, c->sw);
      if (!c->linear) {
        tanh_inplace(y);
        if (cache) cache->activations[i] = y;
        if (training && st.dropout > 0.0) {
          Tensor<T>* mask = cache ? &cache->dropout_mask[i] : nullptr;
          y = dropout_forward(y, st.dropout, *rng, true, mask);
        }
      }
      x = std::move(y);
    } else {
      const auto& l = std::get<MdLstm<T>>(st.layers[i]);
      x = mdlstm_forward(l, x, cache ? &cache->lstm[i] : nullptr);
    }
  }
  return x;
}

template <class T>
struct StackGrads {
  std::vector<Tensor<T>> tensors;  // parameter gradients in for_each_param order
  Tensor<T> dinput;
};

// Parameter enumeration shared by the optimizer, checkpoints and gradients.
template <class T, class Fn>
void for_each_param(Stack<T>& st, Fn fn) {
  for (size_t i = 0; i < st.layers.size(); ++i) {
    const std::string base = "layer" + std::to_string(i);
    if (auto* c = std::get_if<ConvLayer<T>>(&st.layers[i])) {
      fn(base + "/w", c->w);
      fn(base + "/b", c->b);
    } else {
      auto& l = std::get<MdLstm<T>>(st.layers[i]);
      for (int d = 0; d < kMdlstmDirs; ++d)
        fn(base + "/dir" + std::to_string(d), l.dir[size_t(d)]);
    }
  }
}

template <class T, class Fn>
void for_each_param(const Stack<T>& st, Fn fn) {
  for_each_param(const_cast<Stack<T>&>(st),
                 [&](const std::string& name, Tensor<T>& t) {
                   fn(name, const_cast<const Tensor<T>&>(t));
                 });
}

template <class T>
std::vector<Tensor<T>> zero_grads_like(const Stack<T>& st) {
  std::vector<Tensor<T>> g;
  for_each_param(st, [&](const std::string&, const Tensor<T>& t) {
    g.emplace_back(t.shape);
  });
  return g;
}

// Backward through the stack; returns the input gradient and accumulates
// parameter gradients into `grads` (layout of zero_grads_like).
template <class T>
Tensor<T> stack_backward(const Stack<T>& st, const StackCache<T>& cache,
                         const Tensor<T>& dout, std::vector<Tensor<T>>& grads) {
  Tensor<T> d = dout;
  // Index of each layer's first grad tensor.
  std::vector<size_t> grad_base(st.layers.size());
  size_t idx = 0;
  for (size_t i = 0; i < st.layers.size(); ++i) {
    grad_base[i] = idx;
    idx += std::holds_alternative<ConvLayer<T>>(st.layers[i]) ? 2 : kMdlstmDirs;
  }
  if (grads.size() != idx)
    throw DimensionError("stack_backward: grads layout mismatch");

  for (size_t ri = st.layers.size(); ri-- > 0;) {
    if (const auto* c = std::get_if<ConvLayer<T>>(&st.layers[ri])) {
      if (!c->linear) {
        d = dropout_backward(d, cache.dropout_mask[ri]);
        const Tensor<T>& y = cache.activations[ri];
        for (size_t k = 0; k < d.size(); ++k)
          d.data[k] *= dtanh_from_y(y.data[k]);
      }
      auto g = conv2d_backward(cache.inputs[ri], c->w, c->sh, c->sw, d);
      for (size_t k = 0; k < g.dw.size(); ++k)
        grads[grad_base[ri]].data[k] += g.dw.data[k];
      for (size_t k = 0; k < g.db.size(); ++k)
        grads[grad_base[ri] + 1].data[k] += g.db.data[k];
      d = std::move(g.din);
    } else {
      const auto& l = std::get<MdLstm<T>>(st.layers[ri]);
      auto g = mdlstm_backward(l, cache.lstm[ri], d);
      for (int dd = 0; dd < kMdlstmDirs; ++dd)
        for (size_t k = 0; k < g.dw[size_t(dd)].size(); ++k)
          grads[grad_base[ri] + size_t(dd)].data[k] += g.dw[size_t(dd)].data[k];
      d = std::move(g.din);
    }
  }
  return d;
}

}  // namespace pagerec
