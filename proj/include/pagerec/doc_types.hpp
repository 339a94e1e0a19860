#pragma once
#include <array>
#include <string>
#include <vector>

#include "pagerec/tensor.hpp"

namespace pagerec {

// One predicted object: K coordinates normalized by the page width, a
// confidence in (0,1), and the output cell / anchor it was decoded from.
struct TripletCandidate {
  int k = 3;
  std::array<double, 4> coords{};  // first k entries valid: x, y_bottom, (w,), h
  double conf = 0.5;
  int cell_i = 0;
  int cell_j = 0;
  int anchor = 0;
};

// Axis-aligned crop rectangle in image coordinates (origin top-left, y down).
// Half-open on the right/bottom: pixels [x_left, x_right) x [y_top, y_bottom).
struct LineBox {
  int x_left = 0;
  int y_top = 0;
  int x_right = 0;
  int y_bottom = 0;

  int width() const { return x_right - x_left; }
  int height() const { return y_bottom - y_top; }
};

// Reference line: bottom-left corner plus height, in pixels, and transcript.
struct GroundTruthLine {
  int x_left = 0;
  int y_bottom = 0;
  int height = 0;
  std::string text;
};

struct PageSample {
  Tensor<float> image;  // [1,H,W], grayscale in [0,1]
  std::vector<GroundTruthLine> lines;
  int width = 0;
  int height = 0;
  std::string id;
};

}  // namespace pagerec
