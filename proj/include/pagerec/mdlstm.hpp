#pragma once
#include <array>
#include <cstring>
#include <thread>
#include <vector>

#include "pagerec/activations.hpp"
#include "pagerec/error.hpp"
#include "pagerec/tensor.hpp"

namespace pagerec {

// Four-direction multidimensional LSTM. Each direction scans the grid with
// its own sign of row/column order and owns 5 gate units (input gate, one
// forget gate per spatial predecessor, output gate, cell candidate). Each
// unit sees the local input, the hidden state of the x-predecessor and of the
// y-predecessor, and a bias, giving 5*(I+2H+1)*H parameters per direction.
// The layer output is the elementwise sum of the four directional outputs.
inline long mdlstm_param_count(int in_features, int hidden) {
  return 4L * 5L * (in_features + 2L * hidden + 1) * long(hidden);
}

constexpr int kMdlstmDirs = 4;
constexpr int kDirDy[kMdlstmDirs] = {1, 1, -1, -1};
constexpr int kDirDx[kMdlstmDirs] = {1, -1, 1, -1};

// Gate unit order inside the weight matrix rows.
enum MdlstmUnit { kGateIn = 0, kGateForgetX, kGateForgetY, kGateOut, kGateCell };

template <class T>
struct MdLstm {
  int in_features = 0;
  int hidden = 0;
  // Per direction: [5H, I+2H+1]; columns are [x | h_xpred | h_ypred | bias].
  std::array<Tensor<T>, kMdlstmDirs> dir;

  MdLstm() = default;
  MdLstm(int in_f, int hid) : in_features(in_f), hidden(hid) {
    for (auto& d : dir) d = Tensor<T>({5 * hid, in_f + 2 * hid + 1});
  }

  long param_count() const { return mdlstm_param_count(in_features, hidden); }
};

template <class T>
struct MdLstmCache {
  // Position-major grids per direction.
  std::array<Tensor<T>, kMdlstmDirs> gates;      // [Hs,Ws,5H], post-nonlinearity
  std::array<Tensor<T>, kMdlstmDirs> cell;       // [Hs,Ws,H]
  std::array<Tensor<T>, kMdlstmDirs> cell_tanh;  // [Hs,Ws,H]
  std::array<Tensor<T>, kMdlstmDirs> hid;        // [Hs,Ws,H]
  Tensor<T> xpos;                                // [Hs,Ws,I]
};

namespace detail {

template <class Fn>
inline void for_each_direction(bool parallel, Fn fn) {
  if (!parallel) {
    for (int d = 0; d < kMdlstmDirs; ++d) fn(d);
    return;
  }
  std::array<std::thread, kMdlstmDirs> threads;
  for (int d = 0; d < kMdlstmDirs; ++d) threads[size_t(d)] = std::thread(fn, d);
  for (auto& t : threads) t.join();
}

}  // namespace detail

// input [I,Hs,Ws] -> output [H,Hs,Ws]. When cache is non-null the forward
// activations needed by the backward pass are kept.
template <class T>
Tensor<T> mdlstm_forward(const MdLstm<T>& layer, const Tensor<T>& in,
                         MdLstmCache<T>* cache = nullptr) {
  if (in.rank() != 3 || in.dim(0) != layer.in_features)
    throw DimensionError("mdlstm: input has " +
                         std::to_string(in.rank() == 3 ? in.dim(0) : -1) +
                         " features, layer expects " +
                         std::to_string(layer.in_features));
  const int I = layer.in_features, H = layer.hidden;
  const int hs = in.dim(1), ws = in.dim(2);
  const int zlen = I + 2 * H + 1;

  Tensor<T> xpos({hs, ws, I});
  for (int f = 0; f < I; ++f)
    for (int i = 0; i < hs; ++i)
      for (int j = 0; j < ws; ++j) xpos.at(i, j, f) = in.at(f, i, j);

  std::array<Tensor<T>, kMdlstmDirs> gates, cell, cell_tanh, hid;
  for (int d = 0; d < kMdlstmDirs; ++d) {
    gates[size_t(d)] = Tensor<T>({hs, ws, 5 * H});
    cell[size_t(d)] = Tensor<T>({hs, ws, H});
    cell_tanh[size_t(d)] = Tensor<T>({hs, ws, H});
    hid[size_t(d)] = Tensor<T>({hs, ws, H});
  }

  const bool parallel = size_t(hs) * size_t(ws) * size_t(H) >= 4096;
  detail::for_each_direction(parallel, [&](int d) {
    const int dy = kDirDy[d], dx = kDirDx[d];
    const T* w = layer.dir[size_t(d)].ptr();
    Tensor<T>& gd = gates[size_t(d)];
    Tensor<T>& cd = cell[size_t(d)];
    Tensor<T>& td = cell_tanh[size_t(d)];
    Tensor<T>& hd = hid[size_t(d)];
    std::vector<T> z(size_t(zlen));
    std::vector<T> pre(size_t(5) * H);
    for (int ii = 0; ii < hs; ++ii) {
      const int i = dy > 0 ? ii : hs - 1 - ii;
      for (int jj = 0; jj < ws; ++jj) {
        const int j = dx > 0 ? jj : ws - 1 - jj;
        const int pj = j - dx;  // x-predecessor column
        const int pi = i - dy;  // y-predecessor row
        const bool has_x = pj >= 0 && pj < ws;
        const bool has_y = pi >= 0 && pi < hs;

        std::memcpy(z.data(), &xpos.at(i, j, 0), sizeof(T) * size_t(I));
        if (has_x)
          std::memcpy(z.data() + I, &hd.at(i, pj, 0), sizeof(T) * size_t(H));
        else
          std::memset(z.data() + I, 0, sizeof(T) * size_t(H));
        if (has_y)
          std::memcpy(z.data() + I + H, &hd.at(pi, j, 0), sizeof(T) * size_t(H));
        else
          std::memset(z.data() + I + H, 0, sizeof(T) * size_t(H));
        z[size_t(zlen - 1)] = T(1);

        for (int r = 0; r < 5 * H; ++r) {
          const T* wr = w + size_t(r) * zlen;
          T acc = T(0);
          for (int c = 0; c < zlen; ++c) acc += wr[c] * z[size_t(c)];
          pre[size_t(r)] = acc;
        }

        T* g = &gd.at(i, j, 0);
        T* cv = &cd.at(i, j, 0);
        T* tv = &td.at(i, j, 0);
        T* hv = &hd.at(i, j, 0);
        const T* cx = has_x ? &cd.at(i, pj, 0) : nullptr;
        const T* cy = has_y ? &cd.at(pi, j, 0) : nullptr;
        for (int h = 0; h < H; ++h) {
          const T ig = sigmoid(pre[size_t(kGateIn * H + h)]);
          const T fx = sigmoid(pre[size_t(kGateForgetX * H + h)]);
          const T fy = sigmoid(pre[size_t(kGateForgetY * H + h)]);
          const T og = sigmoid(pre[size_t(kGateOut * H + h)]);
          const T gc = std::tanh(pre[size_t(kGateCell * H + h)]);
          g[kGateIn * H + h] = ig;
          g[kGateForgetX * H + h] = fx;
          g[kGateForgetY * H + h] = fy;
          g[kGateOut * H + h] = og;
          g[kGateCell * H + h] = gc;
          T c = ig * gc;
          if (cx) c += fx * cx[h];
          if (cy) c += fy * cy[h];
          cv[h] = c;
          const T tc = std::tanh(c);
          tv[h] = tc;
          hv[h] = og * tc;
        }
      }
    }
  });

  Tensor<T> out({H, hs, ws});
  for (int d = 0; d < kMdlstmDirs; ++d)
    for (int i = 0; i < hs; ++i)
      for (int j = 0; j < ws; ++j) {
        const T* hv = &hid[size_t(d)].at(i, j, 0);
        for (int h = 0; h < H; ++h) out.at(h, i, j) += hv[h];
      }

  if (cache) {
    cache->gates = std::move(gates);
    cache->cell = std::move(cell);
    cache->cell_tanh = std::move(cell_tanh);
    cache->hid = std::move(hid);
    cache->xpos = std::move(xpos);
  }
  return out;
}

template <class T>
struct MdLstmGrads {
  Tensor<T> din;                              // [I,Hs,Ws]
  std::array<Tensor<T>, kMdlstmDirs> dw;      // per direction [5H, I+2H+1]
};

template <class T>
MdLstmGrads<T> mdlstm_backward(const MdLstm<T>& layer,
                               const MdLstmCache<T>& cache,
                               const Tensor<T>& dout) {
  const int I = layer.in_features, H = layer.hidden;
  const int hs = dout.dim(1), ws = dout.dim(2);
  const int zlen = I + 2 * H + 1;
  if (dout.dim(0) != H) throw DimensionError("mdlstm backward: dout feature mismatch");

  // Position-major copy of dout shared by all directions.
  Tensor<T> dout_pos({hs, ws, H});
  for (int h = 0; h < H; ++h)
    for (int i = 0; i < hs; ++i)
      for (int j = 0; j < ws; ++j) dout_pos.at(i, j, h) = dout.at(h, i, j);

  MdLstmGrads<T> out;
  out.din = Tensor<T>({I, hs, ws});
  std::array<Tensor<T>, kMdlstmDirs> din_pos;
  for (int d = 0; d < kMdlstmDirs; ++d) {
    out.dw[size_t(d)] = Tensor<T>(layer.dir[size_t(d)].shape);
    din_pos[size_t(d)] = Tensor<T>({hs, ws, I});
  }

  const bool parallel = size_t(hs) * size_t(ws) * size_t(H) >= 4096;
  detail::for_each_direction(parallel, [&](int d) {
    const int dy = kDirDy[d], dx = kDirDx[d];
    const T* w = layer.dir[size_t(d)].ptr();
    T* dw = out.dw[size_t(d)].ptr();
    const Tensor<T>& gd = cache.gates[size_t(d)];
    const Tensor<T>& cd = cache.cell[size_t(d)];
    const Tensor<T>& td = cache.cell_tanh[size_t(d)];
    const Tensor<T>& hd = cache.hid[size_t(d)];
    Tensor<T>& dip = din_pos[size_t(d)];

    Tensor<T> dh(dout_pos.shape);
    std::memcpy(dh.ptr(), dout_pos.ptr(), sizeof(T) * dout_pos.size());
    Tensor<T> dc({hs, ws, H});

    std::vector<T> z(size_t(zlen));
    std::vector<T> da(size_t(5) * H);
    // Reverse scan order.
    for (int ii = hs - 1; ii >= 0; --ii) {
      const int i = dy > 0 ? ii : hs - 1 - ii;
      for (int jj = ws - 1; jj >= 0; --jj) {
        const int j = dx > 0 ? jj : ws - 1 - jj;
        const int pj = j - dx;
        const int pi = i - dy;
        const bool has_x = pj >= 0 && pj < ws;
        const bool has_y = pi >= 0 && pi < hs;

        std::memcpy(z.data(), &cache.xpos.at(i, j, 0), sizeof(T) * size_t(I));
        if (has_x)
          std::memcpy(z.data() + I, &hd.at(i, pj, 0), sizeof(T) * size_t(H));
        else
          std::memset(z.data() + I, 0, sizeof(T) * size_t(H));
        if (has_y)
          std::memcpy(z.data() + I + H, &hd.at(pi, j, 0), sizeof(T) * size_t(H));
        else
          std::memset(z.data() + I + H, 0, sizeof(T) * size_t(H));
        z[size_t(zlen - 1)] = T(1);

        const T* g = &gd.at(i, j, 0);
        const T* tv = &td.at(i, j, 0);
        const T* cx = has_x ? &cd.at(i, pj, 0) : nullptr;
        const T* cy = has_y ? &cd.at(pi, j, 0) : nullptr;
        T* dhv = &dh.at(i, j, 0);
        T* dcv = &dc.at(i, j, 0);
        T* dcx = has_x ? &dc.at(i, pj, 0) : nullptr;
        T* dcy = has_y ? &dc.at(pi, j, 0) : nullptr;

        for (int h = 0; h < H; ++h) {
          const T ig = g[kGateIn * H + h];
          const T fx = g[kGateForgetX * H + h];
          const T fy = g[kGateForgetY * H + h];
          const T og = g[kGateOut * H + h];
          const T gc = g[kGateCell * H + h];
          const T tc = tv[h];

          const T dhh = dhv[h];
          T dcc = dcv[h] + dhh * og * (T(1) - tc * tc);
          da[size_t(kGateOut * H + h)] = dhh * tc * og * (T(1) - og);
          da[size_t(kGateIn * H + h)] = dcc * gc * ig * (T(1) - ig);
          da[size_t(kGateCell * H + h)] = dcc * ig * (T(1) - gc * gc);
          da[size_t(kGateForgetX * H + h)] =
              cx ? dcc * cx[h] * fx * (T(1) - fx) : T(0);
          da[size_t(kGateForgetY * H + h)] =
              cy ? dcc * cy[h] * fy * (T(1) - fy) : T(0);
          if (dcx) dcx[h] += dcc * fx;
          if (dcy) dcy[h] += dcc * fy;
        }

        T* dhx = has_x ? &dh.at(i, pj, 0) : nullptr;
        T* dhy = has_y ? &dh.at(pi, j, 0) : nullptr;
        T* dxv = &dip.at(i, j, 0);
        for (int r = 0; r < 5 * H; ++r) {
          const T a = da[size_t(r)];
          if (a == T(0)) continue;
          const T* wr = w + size_t(r) * zlen;
          T* dwr = dw + size_t(r) * zlen;
          for (int c = 0; c < zlen; ++c) dwr[c] += a * z[size_t(c)];
          for (int c = 0; c < I; ++c) dxv[c] += a * wr[c];
          if (dhx)
            for (int h = 0; h < H; ++h) dhx[h] += a * wr[I + h];
          if (dhy)
            for (int h = 0; h < H; ++h) dhy[h] += a * wr[I + H + h];
        }
      }
    }
  });

  for (int d = 0; d < kMdlstmDirs; ++d)
    for (int f = 0; f < I; ++f)
      for (int i = 0; i < hs; ++i)
        for (int j = 0; j < ws; ++j)
          out.din.at(f, i, j) += din_pos[size_t(d)].at(i, j, f);
  return out;
}

}  // namespace pagerec
