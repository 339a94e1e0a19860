#pragma once
#include <sstream>
#include <utility>

#include "pagerec/error.hpp"
#include "pagerec/tensor.hpp"

namespace pagerec {

// Valid (unpadded) strided convolution output size.
inline std::pair<int, int> conv_out_hw(int h, int w, int fh, int fw, int sh,
                                       int sw) {
  if (sh < 1 || sw < 1) throw DimensionError("conv stride must be >= 1");
  if (h < fh || w < fw) {
    std::ostringstream os;
    os << "conv input " << h << "x" << w << " smaller than filter " << fh << "x"
       << fw;
    throw DimensionError(os.str());
  }
  return {(h - fh) / sh + 1, (w - fw) / sw + 1};
}

// input [Cin,H,W], filters [Cout,Cin,fh,fw], bias [Cout] -> [Cout,H',W'].
template <class T>
Tensor<T> conv2d_forward(const Tensor<T>& in, const Tensor<T>& w,
                         const Tensor<T>& b, int sh, int sw) {
  if (in.rank() != 3 || w.rank() != 4 || b.rank() != 1)
    throw DimensionError("conv2d expects input rank 3, filters rank 4, bias rank 1");
  const int cin = in.dim(0), h = in.dim(1), wd = in.dim(2);
  const int cout = w.dim(0), fh = w.dim(2), fw = w.dim(3);
  if (w.dim(1) != cin) {
    std::ostringstream os;
    os << "conv2d feature mismatch: input has " << cin << " channels, filters expect "
       << w.dim(1);
    throw DimensionError(os.str());
  }
  if (b.dim(0) != cout)
    throw DimensionError("conv2d bias length does not match output channels");
  auto [oh, ow] = conv_out_hw(h, wd, fh, fw, sh, sw);

  Tensor<T> out({cout, oh, ow});
  const T* ip = in.ptr();
  const T* wp = w.ptr();
  T* op = out.ptr();
  for (int co = 0; co < cout; ++co) {
    const T bias = b.at(co);
    for (int oi = 0; oi < oh; ++oi) {
      for (int oj = 0; oj < ow; ++oj) {
        T acc = bias;
        const int i0 = oi * sh, j0 = oj * sw;
        for (int ci = 0; ci < cin; ++ci) {
          const T* irow = ip + (size_t(ci) * h + i0) * wd + j0;
          const T* wrow = wp + ((size_t(co) * cin + ci) * fh) * fw;
          for (int fy = 0; fy < fh; ++fy) {
            const T* ir = irow + size_t(fy) * wd;
            const T* wr = wrow + size_t(fy) * fw;
            for (int fx = 0; fx < fw; ++fx) acc += ir[fx] * wr[fx];
          }
        }
        op[(size_t(co) * oh + oi) * ow + oj] = acc;
      }
    }
  }
  return out;
}

template <class T>
struct Conv2dGrads {
  Tensor<T> din, dw, db;
};

template <class T>
Conv2dGrads<T> conv2d_backward(const Tensor<T>& in, const Tensor<T>& w, int sh,
                               int sw, const Tensor<T>& dout) {
  const int cin = in.dim(0), h = in.dim(1), wd = in.dim(2);
  const int cout = w.dim(0), fh = w.dim(2), fw = w.dim(3);
  const int oh = dout.dim(1), ow = dout.dim(2);
  if (dout.dim(0) != cout)
    throw DimensionError("conv2d backward: dout channels mismatch");

  Conv2dGrads<T> g{Tensor<T>(in.shape), Tensor<T>(w.shape),
                   Tensor<T>({cout})};
  const T* ip = in.ptr();
  const T* wp = w.ptr();
  const T* dp = dout.ptr();
  T* dip = g.din.ptr();
  T* dwp = g.dw.ptr();
  for (int co = 0; co < cout; ++co) {
    T dbias = T(0);
    for (int oi = 0; oi < oh; ++oi) {
      for (int oj = 0; oj < ow; ++oj) {
        const T d = dp[(size_t(co) * oh + oi) * ow + oj];
        dbias += d;
        const int i0 = oi * sh, j0 = oj * sw;
        for (int ci = 0; ci < cin; ++ci) {
          const T* irow = ip + (size_t(ci) * h + i0) * wd + j0;
          T* dirow = dip + (size_t(ci) * h + i0) * wd + j0;
          const T* wrow = wp + ((size_t(co) * cin + ci) * fh) * fw;
          T* dwrow = dwp + ((size_t(co) * cin + ci) * fh) * fw;
          for (int fy = 0; fy < fh; ++fy) {
            const T* ir = irow + size_t(fy) * wd;
            T* dir = dirow + size_t(fy) * wd;
            const T* wr = wrow + size_t(fy) * fw;
            T* dwr = dwrow + size_t(fy) * fw;
            for (int fx = 0; fx < fw; ++fx) {
              dwr[fx] += d * ir[fx];
              dir[fx] += d * wr[fx];
            }
          }
        }
      }
    }
    g.db.at(co) = dbias;
  }
  return g;
}

}  // namespace pagerec
