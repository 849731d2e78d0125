// include/rtfdoa/layers.h
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#ifndef RTFDOA_LAYERS_H_
#define RTFDOA_LAYERS_H_

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "rtfdoa/gemm.h"
#include "rtfdoa/rng.h"
#include "rtfdoa/tensor.h"

namespace rtfdoa {

// All convolutions are 3x3, stride 2, valid (no padding): H -> (H-1)/2 with H
// odd; transpose convolutions invert the map: h -> 2h+1.

inline int conv_out_dim(int m) {
  if (m < 3 || m % 2 == 0) {
    throw std::invalid_argument("conv2d: spatial dim must be odd and >= 3, got " +
                                std::to_string(m));
  }
  return (m - 1) / 2;
}

inline int tconv_out_dim(int m) { return 2 * m + 1; }

// input [B,H,W,C] -> col [B*Ho*Wo, 9*C], rows ordered (b,ho,wo), columns
// ordered (kh,kw,c).
template <typename S>
void im2col_3x3s2(const S* in, int B, int H, int W, int C, S* col) {
  const int Ho = (H - 1) / 2, Wo = (W - 1) / 2;
  for (int b = 0; b < B; ++b) {
    const S* src = in + static_cast<size_t>(b) * H * W * C;
    for (int ho = 0; ho < Ho; ++ho) {
      for (int wo = 0; wo < Wo; ++wo) {
        S* row = col + (static_cast<size_t>(b) * Ho * Wo +
                        static_cast<size_t>(ho) * Wo + wo) *
                           (9 * C);
        for (int kh = 0; kh < 3; ++kh) {
          const S* line = src + (static_cast<size_t>(2 * ho + kh) * W +
                                 static_cast<size_t>(2 * wo)) *
                                    C;
          std::memcpy(row + static_cast<size_t>(kh) * 3 * C, line,
                      sizeof(S) * 3 * C);
        }
      }
    }
  }
}

// Adjoint of im2col: scatter-add col rows back into the [B,H,W,C] grid.
template <typename S>
void col2im_3x3s2(const S* col, int B, int H, int W, int C, S* in) {
  const int Ho = (H - 1) / 2, Wo = (W - 1) / 2;
  std::memset(in, 0, sizeof(S) * static_cast<size_t>(B) * H * W * C);
  for (int b = 0; b < B; ++b) {
    S* dst = in + static_cast<size_t>(b) * H * W * C;
    for (int ho = 0; ho < Ho; ++ho) {
      for (int wo = 0; wo < Wo; ++wo) {
        const S* row = col + (static_cast<size_t>(b) * Ho * Wo +
                              static_cast<size_t>(ho) * Wo + wo) *
                                 (9 * C);
        for (int kh = 0; kh < 3; ++kh) {
          S* line = dst + (static_cast<size_t>(2 * ho + kh) * W +
                           static_cast<size_t>(2 * wo)) *
                              C;
          const S* r = row + static_cast<size_t>(kh) * 3 * C;
          for (int i = 0; i < 3 * C; ++i) line[i] += r[i];
        }
      }
    }
  }
}

template <typename S>
struct ConvCache {
  Tensor<S> col;  // [B*Ho*Wo, 9*Cin]
  int B = 0, H = 0, W = 0, Cin = 0;
};

// weights [9*Cin, Cout] (row (kh,kw,cin)), bias [Cout].
template <typename S>
Tensor<S> conv2d_forward(const Tensor<S>& input, const Tensor<S>& weights,
                         const Tensor<S>& bias, ConvCache<S>* cache) {
  if (input.shape.size() != 4) throw std::invalid_argument("conv2d: input rank != 4");
  const int B = input.dim(0), H = input.dim(1), W = input.dim(2), C = input.dim(3);
  const int Ho = conv_out_dim(H), Wo = conv_out_dim(W);
  const int Cout = bias.dim(0);
  if (weights.dim(0) != 9 * C || weights.dim(1) != Cout) {
    throw std::invalid_argument("conv2d: weight shape " + shape_str(weights.shape) +
                                " does not match input " + shape_str(input.shape));
  }
  const int M = B * Ho * Wo;
  Tensor<S> col({M, 9 * C});
  im2col_3x3s2(input.ptr(), B, H, W, C, col.ptr());
  Tensor<S> out({B, Ho, Wo, Cout});
  gemm_nn(M, Cout, 9 * C, col.ptr(), weights.ptr(), out.ptr(), false);
  for (int r = 0; r < M; ++r) {
    S* o = out.ptr() + static_cast<size_t>(r) * Cout;
    for (int j = 0; j < Cout; ++j) o[j] += bias.data[j];
  }
  if (cache) {
    cache->col = std::move(col);
    cache->B = B;
    cache->H = H;
    cache->W = W;
    cache->Cin = C;
  }
  return out;
}

template <typename S>
Tensor<S> conv2d_backward(const Tensor<S>& dout, const ConvCache<S>& cache,
                          const Tensor<S>& weights, Tensor<S>* dweights,
                          Tensor<S>* dbias) {
  const int B = cache.B, H = cache.H, W = cache.W, C = cache.Cin;
  const int Ho = (H - 1) / 2, Wo = (W - 1) / 2;
  const int Cout = weights.dim(1);
  const int M = B * Ho * Wo;
  for (int r = 0; r < M; ++r) {
    const S* d = dout.ptr() + static_cast<size_t>(r) * Cout;
    for (int j = 0; j < Cout; ++j) dbias->data[j] += d[j];
  }
  gemm_tn(9 * C, Cout, M, cache.col.ptr(), dout.ptr(), dweights->ptr(), true);
  Tensor<S> dcol({M, 9 * C});
  gemm_nt(M, 9 * C, Cout, dout.ptr(), weights.ptr(), dcol.ptr(), false);
  Tensor<S> dinput({B, H, W, C});
  col2im_3x3s2(dcol.ptr(), B, H, W, C, dinput.ptr());
  return dinput;
}

template <typename S>
struct TconvCache {
  Tensor<S> input;  // [B,h,w,Cin]
};

// weights [9*Cout, Cin] (the adjoint conv's layout), bias [Cout].
template <typename S>
Tensor<S> tconv2d_forward(const Tensor<S>& input, const Tensor<S>& weights,
                          const Tensor<S>& bias, TconvCache<S>* cache) {
  if (input.shape.size() != 4) throw std::invalid_argument("tconv2d: input rank != 4");
  const int B = input.dim(0), h = input.dim(1), w = input.dim(2), Cin = input.dim(3);
  const int Cout = bias.dim(0);
  if (weights.dim(0) != 9 * Cout || weights.dim(1) != Cin) {
    throw std::invalid_argument("tconv2d: weight shape " + shape_str(weights.shape) +
                                " does not match input " + shape_str(input.shape));
  }
  const int H = tconv_out_dim(h), W = tconv_out_dim(w);
  const int M = B * h * w;
  Tensor<S> col({M, 9 * Cout});
  gemm_nt(M, 9 * Cout, Cin, input.ptr(), weights.ptr(), col.ptr(), false);
  Tensor<S> out({B, H, W, Cout});
  col2im_3x3s2(col.ptr(), B, H, W, Cout, out.ptr());
  for (size_t r = 0; r < out.size() / Cout; ++r) {
    S* o = out.ptr() + r * Cout;
    for (int j = 0; j < Cout; ++j) o[j] += bias.data[j];
  }
  if (cache) cache->input = input;
  return out;
}

template <typename S>
Tensor<S> tconv2d_backward(const Tensor<S>& dout, const TconvCache<S>& cache,
                           const Tensor<S>& weights, Tensor<S>* dweights,
                           Tensor<S>* dbias) {
  const int B = cache.input.dim(0), h = cache.input.dim(1), w = cache.input.dim(2),
            Cin = cache.input.dim(3);
  const int H = tconv_out_dim(h), W = tconv_out_dim(w);
  const int Cout = weights.dim(0) / 9;
  const size_t rows = dout.size() / Cout;
  for (size_t r = 0; r < rows; ++r) {
    const S* d = dout.ptr() + r * Cout;
    for (int j = 0; j < Cout; ++j) dbias->data[j] += d[j];
  }
  const int M = B * h * w;
  Tensor<S> dcol({M, 9 * Cout});
  im2col_3x3s2(dout.ptr(), B, H, W, Cout, dcol.ptr());
  gemm_tn(9 * Cout, Cin, M, dcol.ptr(), cache.input.ptr(), dweights->ptr(), true);
  Tensor<S> dinput({B, h, w, Cin});
  gemm_nn(M, Cin, 9 * Cout, dcol.ptr(), weights.ptr(), dinput.ptr(), false);
  return dinput;
}

template <typename S>
struct DenseCache {
  Tensor<S> input;  // [B,n]
};

template <typename S>
Tensor<S> dense_forward(const Tensor<S>& input, const Tensor<S>& weights,
                        const Tensor<S>& bias, DenseCache<S>* cache) {
  const int B = input.dim(0);
  const int n = static_cast<int>(input.size()) / B;
  const int m = bias.dim(0);
  if (weights.dim(0) != n || weights.dim(1) != m) {
    throw std::invalid_argument("dense: weight shape " + shape_str(weights.shape) +
                                " does not match input " + shape_str(input.shape));
  }
  Tensor<S> out({B, m});
  gemm_nn(B, m, n, input.ptr(), weights.ptr(), out.ptr(), false);
  for (int r = 0; r < B; ++r) {
    S* o = out.ptr() + static_cast<size_t>(r) * m;
    for (int j = 0; j < m; ++j) o[j] += bias.data[j];
  }
  if (cache) cache->input = input;
  return out;
}

template <typename S>
Tensor<S> dense_backward(const Tensor<S>& dout, const DenseCache<S>& cache,
                         const Tensor<S>& weights, Tensor<S>* dweights,
                         Tensor<S>* dbias) {
  const int B = cache.input.dim(0);
  const int n = static_cast<int>(cache.input.size()) / B;
  const int m = weights.dim(1);
  for (int r = 0; r < B; ++r) {
    const S* d = dout.ptr() + static_cast<size_t>(r) * m;
    for (int j = 0; j < m; ++j) dbias->data[j] += d[j];
  }
  gemm_tn(n, m, B, cache.input.ptr(), dout.ptr(), dweights->ptr(), true);
  Tensor<S> dinput;
  dinput.shape = cache.input.shape;
  dinput.data.assign(cache.input.size(), S(0));
  gemm_nt(B, n, m, dout.ptr(), weights.ptr(), dinput.ptr(), false);
  return dinput;
}

// ---- activations (backward takes the forward *output*) ----------------------

template <typename S>
Tensor<S> relu_forward(const Tensor<S>& x) {
  Tensor<S> y = x;
  for (S& v : y.data) v = v > S(0) ? v : S(0);
  return y;
}

template <typename S>
Tensor<S> relu_backward(const Tensor<S>& dy, const Tensor<S>& y) {
  Tensor<S> dx = dy;
  for (size_t i = 0; i < dx.size(); ++i) {
    if (!(y.data[i] > S(0))) dx.data[i] = S(0);
  }
  return dx;
}

template <typename S>
Tensor<S> tanh_forward(const Tensor<S>& x) {
  Tensor<S> y = x;
  for (S& v : y.data) v = std::tanh(v);
  return y;
}

template <typename S>
Tensor<S> tanh_backward(const Tensor<S>& dy, const Tensor<S>& y) {
  Tensor<S> dx = dy;
  for (size_t i = 0; i < dx.size(); ++i) {
    dx.data[i] *= (S(1) - y.data[i] * y.data[i]);
  }
  return dx;
}

// c * sigmoid(x); the decoder variance head uses c = 10 so sigma^2 in [0,10].
template <typename S>
Tensor<S> sigmoid_scaled_forward(const Tensor<S>& x, S c) {
  Tensor<S> y = x;
  for (S& v : y.data) v = c / (S(1) + std::exp(-v));
  return y;
}

template <typename S>
Tensor<S> sigmoid_scaled_backward(const Tensor<S>& dy, const Tensor<S>& y, S c) {
  Tensor<S> dx = dy;
  for (size_t i = 0; i < dx.size(); ++i) {
    dx.data[i] *= y.data[i] * (S(1) - y.data[i] / c);
  }
  return dx;
}

template <typename S>
Tensor<S> softplus_forward(const Tensor<S>& x) {
  Tensor<S> y = x;
  for (S& v : y.data) {
    v = v > S(30) ? v : std::log1p(std::exp(v));
  }
  return y;
}

// dy/dx = sigmoid(x) = 1 - exp(-y)
template <typename S>
Tensor<S> softplus_backward(const Tensor<S>& dy, const Tensor<S>& y) {
  Tensor<S> dx = dy;
  for (size_t i = 0; i < dx.size(); ++i) {
    dx.data[i] *= (S(1) - std::exp(-y.data[i]));
  }
  return dx;
}

// Row-wise softmax over the last dim of a [B,T] tensor, max-shifted.
template <typename S>
Tensor<S> softmax_forward(const Tensor<S>& x) {
  const int B = x.dim(0), T = x.dim(1);
  Tensor<S> y({B, T});
  for (int r = 0; r < B; ++r) {
    const S* in = x.ptr() + static_cast<size_t>(r) * T;
    S* out = y.ptr() + static_cast<size_t>(r) * T;
    S mx = in[0];
    for (int j = 1; j < T; ++j) mx = std::max(mx, in[j]);
    S sum = 0;
    for (int j = 0; j < T; ++j) {
      out[j] = std::exp(in[j] - mx);
      sum += out[j];
    }
    for (int j = 0; j < T; ++j) out[j] /= sum;
  }
  return y;
}

template <typename S>
Tensor<S> softmax_backward(const Tensor<S>& dy, const Tensor<S>& y) {
  const int B = y.dim(0), T = y.dim(1);
  Tensor<S> dx({B, T});
  for (int r = 0; r < B; ++r) {
    const S* g = dy.ptr() + static_cast<size_t>(r) * T;
    const S* p = y.ptr() + static_cast<size_t>(r) * T;
    S* o = dx.ptr() + static_cast<size_t>(r) * T;
    S dot = 0;
    for (int j = 0; j < T; ++j) dot += g[j] * p[j];
    for (int j = 0; j < T; ++j) o[j] = p[j] * (g[j] - dot);
  }
  return dx;
}

// ---- dropout ----------------------------------------------------------------

template <typename S>
struct DropoutCache {
  Tensor<S> scale;  // 0 or 1/(1-p) per element
  bool active = false;
};

template <typename S>
Tensor<S> dropout_forward(const Tensor<S>& x, double p, bool training, Rng rng,
                          DropoutCache<S>* cache) {
  if (p < 0.0 || p >= 1.0) throw std::invalid_argument("dropout: p must be in [0,1)");
  if (!training || p == 0.0) {
    if (cache) cache->active = false;
    return x;
  }
  Tensor<S> y = x;
  Tensor<S> scale;
  scale.shape = x.shape;
  scale.data.assign(x.size(), S(0));
  const S keep = S(1.0 / (1.0 - p));
  for (size_t i = 0; i < y.size(); ++i) {
    if (rng.uniform() >= p) {
      scale.data[i] = keep;
      y.data[i] *= keep;
    } else {
      y.data[i] = S(0);
    }
  }
  if (cache) {
    cache->scale = std::move(scale);
    cache->active = true;
  }
  return y;
}

template <typename S>
Tensor<S> dropout_backward(const Tensor<S>& dy, const DropoutCache<S>& cache) {
  if (!cache.active) return dy;
  Tensor<S> dx = dy;
  for (size_t i = 0; i < dx.size(); ++i) dx.data[i] *= cache.scale.data[i];
  return dx;
}

}  // namespace rtfdoa

#endif  // RTFDOA_LAYERS_H_
