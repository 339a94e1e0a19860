#pragma once
#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "pagerec/ctc.hpp"
#include "pagerec/doc_types.hpp"
#include "pagerec/stack.hpp"

namespace pagerec {

// Crop a line box out of a page and rescale it isotropically to the target
// height with bilinear interpolation. Output values stay in [0,1].
inline Tensor<float> prepare_line(const Tensor<float>& page, const LineBox& box,
                                  int target_height) {
  if (page.rank() != 3 || page.dim(0) != 1)
    throw DimensionError("prepare_line: page must be [1,H,W]");
  if (target_height <= 0) throw ConfigError("prepare_line: target height must be > 0");
  const int ph = page.dim(1), pw = page.dim(2);
  LineBox b = box;
  b.x_left = std::max(0, b.x_left);
  b.y_top = std::max(0, b.y_top);
  b.x_right = std::min(pw, b.x_right);
  b.y_bottom = std::min(ph, b.y_bottom);
  if (b.width() <= 0 || b.height() <= 0)
    throw DimensionError("prepare_line: empty crop");

  const double scale = double(target_height) / double(b.height());
  const int out_w = std::max(1, int(std::llround(b.width() * scale)));
  Tensor<float> out({1, target_height, out_w});
  const double inv = 1.0 / scale;
  for (int oy = 0; oy < target_height; ++oy) {
    // half-pixel centers so that scale 1 is the identity
    const double sy = (oy + 0.5) * inv - 0.5;
    const int y0 = int(std::floor(sy));
    const double fy = sy - y0;
    const int yc0 = std::clamp(y0, 0, b.height() - 1);
    const int yc1 = std::clamp(y0 + 1, 0, b.height() - 1);
    for (int ox = 0; ox < out_w; ++ox) {
      const double sx = (ox + 0.5) * double(b.width()) / double(out_w) - 0.5;
      const int x0 = int(std::floor(sx));
      const double fx = sx - x0;
      const int xc0 = std::clamp(x0, 0, b.width() - 1);
      const int xc1 = std::clamp(x0 + 1, 0, b.width() - 1);
      const double v00 = page.at(0, b.y_top + yc0, b.x_left + xc0);
      const double v01 = page.at(0, b.y_top + yc0, b.x_left + xc1);
      const double v10 = page.at(0, b.y_top + yc1, b.x_left + xc0);
      const double v11 = page.at(0, b.y_top + yc1, b.x_left + xc1);
      const double v = (1 - fy) * ((1 - fx) * v00 + fx * v01) +
                       fy * ((1 - fx) * v10 + fx * v11);
      out.at(0, oy, ox) = float(v);
    }
  }
  return out;
}

// 2D-LSTM line recognizer: conv/MDLSTM stack, parameter-free vertical sum
// collapse, linear 1x1 class head, per-column softmax. The end-of-line label
// is appended to every training target so the network learns where the text
// stops; decoding truncates at it.
struct RecognizerConfig {
  int input_height = 32;
  std::vector<LayerSpec> features = {
      LayerSpec::conv(8, 4, 4, 4, 2),
      LayerSpec::lstm(8),
      LayerSpec::conv(16, 4, 4, 4, 2),
      LayerSpec::lstm(16),
  };
  Alphabet alphabet = Alphabet::toy();
  double dropout = 0.0;
  bool append_eol = true;

  int stride_x() const {
    int s = 1;
    for (const auto& l : features)
      if (l.kind == LayerSpec::kConv) s *= l.sw;
    return s;
  }

  void validate() const {
    if (input_height <= 0) throw ConfigError("recognizer input height must be > 0");
    if (features.empty()) throw ConfigError("recognizer needs a feature chain");
    if (alphabet.symbols.empty()) throw ConfigError("recognizer alphabet is empty");
  }
};

template <class T>
struct Recognizer {
  RecognizerConfig cfg;
  Stack<T> stack;    // feature chain
  ConvLayer<T> head; // 1x1 linear head applied after the vertical collapse
};

template <class T>
Recognizer<T> build_recognizer(const RecognizerConfig& cfg, Rng& rng) {
  cfg.validate();
  Recognizer<T> r;
  r.cfg = cfg;
  r.stack = build_stack<T>(cfg.features, 1, cfg.dropout, rng);
  const int feat = r.stack.out_channels();
  const int classes = cfg.alphabet.classes();
  r.head.w = Tensor<T>({classes, feat, 1, 1});
  r.head.b = Tensor<T>({classes});
  r.head.linear = true;
  fill_glorot(r.head.w, feat, classes, rng);
  return r;
}

template <class T, class Fn>
void for_each_recognizer_param(Recognizer<T>& r, Fn fn) {
  for_each_param(r.stack, fn);
  fn(std::string("head/w"), r.head.w);
  fn(std::string("head/b"), r.head.b);
}

template <class T>
struct RecognizerCache {
  StackCache<T> stack;
  Tensor<T> collapsed;  // [F,1,W']
  int pre_collapse_h = 0;
};

inline std::pair<int, int> recognizer_min_input(const RecognizerConfig& cfg) {
  return stack_min_input_hw(cfg.features);
}

// Forward to per-column class posteriors [T columns, classes].
template <class T>
Tensor<T> recognizer_forward(const Recognizer<T>& r, const Tensor<T>& line,
                             bool training, Rng* rng,
                             RecognizerCache<T>* cache) {
  if (line.rank() != 3 || line.dim(0) != 1)
    throw DimensionError("recognizer input must be [1,h,w]");
  if (line.dim(1) != r.cfg.input_height)
    throw DimensionError("recognizer input height " + std::to_string(line.dim(1)) +
                         " != configured " + std::to_string(r.cfg.input_height));
  auto [mh, mw] = recognizer_min_input(r.cfg);
  if (line.dim(2) < mw)
    throw DimensionError("line image narrower than the receptive field; minimum width is " +
                         std::to_string(mw));

  Tensor<T> feat = stack_forward(r.stack, line, training, rng,
                                 cache ? &cache->stack : nullptr);
  const int f = feat.dim(0), fh = feat.dim(1), fw = feat.dim(2);

  Tensor<T> collapsed({f, 1, fw});
  for (int c = 0; c < f; ++c)
    for (int i = 0; i < fh; ++i)
      for (int j = 0; j < fw; ++j) collapsed.at(c, 0, j) += feat.at(c, i, j);
  if (cache) {
    cache->collapsed = collapsed;
    cache->pre_collapse_h = fh;
  }

  Tensor<T> scores = conv2d_forward(collapsed, r.head.w, r.head.b, 1, 1);
  const int classes = scores.dim(0);
  Tensor<T> post({fw, classes});
  for (int j = 0; j < fw; ++j) {
    T mx = scores.at(0, 0, j);
    for (int c = 1; c < classes; ++c) mx = std::max(mx, scores.at(c, 0, j));
    T sum = T(0);
    for (int c = 0; c < classes; ++c) {
      const T e = std::exp(scores.at(c, 0, j) - mx);
      post.at(j, c) = e;
      sum += e;
    }
    for (int c = 0; c < classes; ++c) post.at(j, c) /= sum;
  }
  return post;
}

// Backward from a gradient on the pre-softmax scores [T, classes].
template <class T>
void recognizer_backward(const Recognizer<T>& r, const RecognizerCache<T>& cache,
                         const Tensor<T>& dscores,
                         std::vector<Tensor<T>>& stack_grads, Tensor<T>& dhead_w,
                         Tensor<T>& dhead_b) {
  const int classes = dscores.dim(1), fw = dscores.dim(0);
  Tensor<T> d({classes, 1, fw});
  for (int j = 0; j < fw; ++j)
    for (int c = 0; c < classes; ++c) d.at(c, 0, j) = dscores.at(j, c);

  auto hg = conv2d_backward(cache.collapsed, r.head.w, 1, 1, d);
  for (size_t i = 0; i < hg.dw.size(); ++i) dhead_w.data[i] += hg.dw.data[i];
  for (size_t i = 0; i < hg.db.size(); ++i) dhead_b.data[i] += hg.db.data[i];

  // Broadcast through the vertical sum collapse.
  const int f = cache.collapsed.dim(0);
  Tensor<T> dfeat({f, cache.pre_collapse_h, fw});
  for (int c = 0; c < f; ++c)
    for (int i = 0; i < cache.pre_collapse_h; ++i)
      for (int j = 0; j < fw; ++j) dfeat.at(c, i, j) = hg.din.at(c, 0, j);

  stack_backward(r.stack, cache.stack, dfeat, stack_grads);
}

// Inference: text plus per-column posteriors. Text excludes the EOL label and
// anything after it.
template <class T>
std::pair<std::string, Tensor<double>> recognize_line(const Recognizer<T>& r,
                                                      const Tensor<T>& line) {
  Tensor<T> post = recognizer_forward<T>(r, line, false, nullptr, nullptr);
  Tensor<double> postd = cast<double>(post);
  return {best_path_decode(postd, r.cfg.alphabet), std::move(postd)};
}

}  // namespace pagerec
