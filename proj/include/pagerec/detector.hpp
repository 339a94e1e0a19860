#pragma once
#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <vector>

#include "pagerec/doc_types.hpp"
#include "pagerec/stack.hpp"

namespace pagerec {

// Fully-convolutional detector: a conv/MDLSTM feature chain followed by a
// linear 1x1 head with (K+1)*A channels that predicts A object candidates per
// output cell, each as K sigmoid coordinate offsets plus a confidence.
struct DetectorConfig {
  std::vector<LayerSpec> features;
  int k = 3;        // 2 = point, 3 = triplet, 4 = box
  int anchors = 20; // candidates per output cell
  double h_max = -1.0;      // max predicted line height in px; <0 -> 2*stride_y
  double threshold = 0.5;   // default confidence threshold
  double dropout = 0.5;

  int out_channels() const { return (k + 1) * anchors; }

  std::vector<LayerSpec> full_specs() const {
    auto specs = features;
    specs.push_back(LayerSpec::conv(out_channels(), 1, 1, 1, 1, /*linear=*/true));
    return specs;
  }

  int stride_x() const {
    int s = 1;
    for (const auto& l : features)
      if (l.kind == LayerSpec::kConv) s *= l.sw;
    return s;
  }
  int stride_y() const {
    int s = 1;
    for (const auto& l : features)
      if (l.kind == LayerSpec::kConv) s *= l.sh;
    return s;
  }
  double effective_h_max() const { return h_max > 0 ? h_max : 2.0 * stride_y(); }

  void validate() const {
    if (k < 2 || k > 4) throw ConfigError("detector k must be 2, 3 or 4");
    if (anchors < 1) throw ConfigError("detector anchors must be >= 1");
    if (features.empty()) throw ConfigError("detector needs a feature chain");
  }

  // The reference full-scale architecture.
  static DetectorConfig table1() {
    DetectorConfig c;
    c.features = {
        LayerSpec::conv(12, 4, 4, 3, 3), LayerSpec::lstm(12),
        LayerSpec::conv(16, 4, 3, 3, 2), LayerSpec::lstm(16),
        LayerSpec::conv(24, 6, 3, 4, 2), LayerSpec::lstm(24),
        LayerSpec::conv(30, 4, 3, 3, 2), LayerSpec::lstm(30),
        LayerSpec::conv(36, 3, 2, 2, 1),
    };
    return c;
  }

  // CPU-scale miniature with the same op types (for training experiments).
  static DetectorConfig toy(int anchors_ = 3) {
    DetectorConfig c;
    c.features = {
        LayerSpec::conv(8, 4, 4, 3, 3),
        LayerSpec::lstm(8),
        LayerSpec::conv(12, 4, 4, 3, 3),
        LayerSpec::lstm(12),
    };
    c.anchors = anchors_;
    c.dropout = 0.1;
    return c;
  }
};

template <class T>
struct Detector {
  DetectorConfig cfg;
  Stack<T> stack;  // features + output head
};

template <class T>
Detector<T> build_detector(const DetectorConfig& cfg, Rng& rng) {
  cfg.validate();
  Detector<T> d;
  d.cfg = cfg;
  d.stack = build_stack<T>(cfg.full_specs(), 1, cfg.dropout, rng);
  return d;
}

template <class T>
std::vector<long> detector_param_counts(const Detector<T>& d) {
  return per_layer_param_counts(d.stack);
}

inline std::vector<std::array<int, 3>> detector_map_shapes(
    const DetectorConfig& cfg, int h, int w) {
  return stack_output_shapes(cfg.full_specs(), 1, h, w);
}

inline std::pair<int, int> detector_min_input(const DetectorConfig& cfg) {
  return stack_min_input_hw(cfg.full_specs());
}

// All decoded candidates of one page, in (cell_i, cell_j, anchor) order, with
// the sigmoid values kept so gradients can be scattered back.
struct DecodedPage {
  std::vector<TripletCandidate> cands;
  std::vector<std::array<double, 5>> sig;  // K coordinate sigmoids + confidence
  int cells_h = 0;
  int cells_w = 0;
};

template <class T>
void check_detector_input(const Detector<T>& d, const Tensor<T>& image) {
  if (image.rank() != 3 || image.dim(0) != 1)
    throw DimensionError("detector input must be [1,H,W]");
  auto [mh, mw] = detector_min_input(d.cfg);
  if (image.dim(1) < mh || image.dim(2) < mw) {
    std::ostringstream os;
    os << "detector input " << image.dim(1) << "x" << image.dim(2)
       << " smaller than the receptive field; minimum is " << mh << "x" << mw;
    throw DimensionError(os.str());
  }
}

// Decode the raw head output over a page of width page_w:
//   x = (j + sig(raw_x)) * stride_x / W
//   y = (i + sig(raw_y)) * stride_y / W
//   h = h_max * sig(raw_h) / W        (K >= 3; K = 4 also has w = sig(raw_w))
//   c = sig(raw_c)
// All coordinates are proportions of the page width.
template <class T>
DecodedPage decode_detector_output(const Detector<T>& d, const Tensor<T>& raw,
                                   int page_w) {
  const int k = d.cfg.k, a = d.cfg.anchors;
  if (raw.dim(0) != (k + 1) * a)
    throw DimensionError("decode: head channel count mismatch");
  const int ch = raw.dim(1), cw = raw.dim(2);
  const double sx = d.cfg.stride_x(), sy = d.cfg.stride_y();
  const double hmax = d.cfg.effective_h_max();
  const double w = page_w;

  DecodedPage out;
  out.cells_h = ch;
  out.cells_w = cw;
  out.cands.reserve(size_t(ch) * cw * a);
  out.sig.reserve(size_t(ch) * cw * a);
  for (int i = 0; i < ch; ++i)
    for (int j = 0; j < cw; ++j)
      for (int an = 0; an < a; ++an) {
        const int base = an * (k + 1);
        std::array<double, 5> sg{};
        for (int c = 0; c <= k; ++c)
          sg[size_t(c)] = sigmoid(double(raw.at(base + c, i, j)));
        TripletCandidate t;
        t.k = k;
        t.cell_i = i;
        t.cell_j = j;
        t.anchor = an;
        t.coords[0] = (j + sg[0]) * sx / w;
        t.coords[1] = (i + sg[1]) * sy / w;
        if (k == 3) t.coords[2] = hmax * sg[2] / w;
        if (k == 4) {
          t.coords[2] = sg[2];  // width as a proportion of the page width
          t.coords[3] = hmax * sg[3] / w;
        }
        t.conf = sg[size_t(k)];
        out.cands.push_back(t);
        out.sig.push_back(sg);
      }
  return out;
}

// Chain rule from (dcoords, dconf) per candidate back to the raw head output.
template <class T>
Tensor<T> scatter_decode_grads(const Detector<T>& d, const DecodedPage& dec,
                               const std::vector<std::array<double, 4>>& dcoords,
                               const std::vector<double>& dconf, int page_w) {
  const int k = d.cfg.k, a = d.cfg.anchors;
  const double sx = d.cfg.stride_x(), sy = d.cfg.stride_y();
  const double hmax = d.cfg.effective_h_max();
  const double w = page_w;
  Tensor<T> draw({(k + 1) * a, dec.cells_h, dec.cells_w});
  for (size_t n = 0; n < dec.cands.size(); ++n) {
    const auto& t = dec.cands[n];
    const auto& sg = dec.sig[n];
    const int base = t.anchor * (k + 1);
    double scale[4] = {sx / w, sy / w, k == 4 ? 1.0 : hmax / w, hmax / w};
    for (int c = 0; c < k; ++c) {
      const double s = sg[size_t(c)];
      draw.at(base + c, t.cell_i, t.cell_j) =
          T(dcoords[n][size_t(c)] * scale[c] * s * (1.0 - s));
    }
    const double sc = sg[size_t(k)];
    draw.at(base + k, t.cell_i, t.cell_j) = T(dconf[n] * sc * (1.0 - sc));
  }
  return draw;
}

// Inference: forward, decode, keep candidates with confidence over the
// threshold, most confident first. Deterministic (dropout off).
template <class T>
std::vector<TripletCandidate> detect(const Detector<T>& d,
                                     const Tensor<T>& image, double threshold) {
  check_detector_input(d, image);
  Tensor<T> raw = stack_forward<T>(d.stack, image, /*training=*/false, nullptr,
                                   nullptr);
  DecodedPage dec = decode_detector_output(d, raw, image.dim(2));
  std::vector<TripletCandidate> keep;
  for (const auto& t : dec.cands)
    if (t.conf > threshold) keep.push_back(t);
  std::stable_sort(keep.begin(), keep.end(),
                   [](const TripletCandidate& a, const TripletCandidate& b) {
                     return a.conf > b.conf;
                   });
  return keep;
}

// Accepted-triplet -> recognizer crop: keep the left side, extend to the page
// right edge, pad by the margin on the other three sides, clip to the page.
// Degenerate boxes (empty after clipping) yield nullopt.
inline std::optional<LineBox> triplet_to_box(const TripletCandidate& t,
                                             int page_w, int page_h,
                                             int margin = 10) {
  if (margin < 0) throw ConfigError("triplet_to_box: margin must be >= 0");
  const double w = page_w;
  const double x = t.coords[0] * w;
  const double y = t.coords[1] * w;
  const double h = (t.k >= 3 ? t.coords[size_t(t.k) - 1] : 0.0) * w;
  LineBox b;
  b.x_left = std::max(0, int(std::llround(x - margin)));
  b.x_right = page_w;
  b.y_bottom = std::min(page_h, int(std::llround(y + margin)));
  b.y_top = std::max(0, int(std::llround(y - h - margin)));
  if (b.x_left >= b.x_right || b.y_top >= b.y_bottom) return std::nullopt;
  return b;
}

}  // namespace pagerec
