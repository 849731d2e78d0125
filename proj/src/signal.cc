// src/signal.cc
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#include "rtfdoa/signal.h"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace rtfdoa {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

void fft_pow2(cplx* a, int n, bool inverse) {
  for (int i = 1, j = 0; i < n; ++i) {
    int bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j |= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  std::vector<cplx> w(n / 2);
  const double sgn = inverse ? 1.0 : -1.0;
  for (int i = 0; i < n / 2; ++i) w[i] = std::polar(1.0, sgn * kTwoPi * i / n);
  for (int len = 2; len <= n; len <<= 1) {
    const int half = len / 2, step = n / len;
    for (int i = 0; i < n; i += len) {
      for (int k = 0; k < half; ++k) {
        const cplx u = a[i + k];
        const cplx v = a[i + k + half] * w[static_cast<size_t>(k) * step];
        a[i + k] = u + v;
        a[i + k + half] = u - v;
      }
    }
  }
  if (inverse) {
    for (int i = 0; i < n; ++i) a[i] /= n;
  }
}

void dft_naive(std::vector<cplx>& a, bool inverse) {
  const int n = static_cast<int>(a.size());
  const double sgn = inverse ? 1.0 : -1.0;
  std::vector<cplx> out(n);
  for (int k = 0; k < n; ++k) {
    cplx acc = 0.0;
    for (int t = 0; t < n; ++t) {
      // reduce k*t mod n before polar to keep the argument small
      acc += a[t] * std::polar(1.0, sgn * kTwoPi *
                                        ((static_cast<long long>(k) * t) % n) / n);
    }
    out[k] = inverse ? acc / static_cast<double>(n) : acc;
  }
  a = std::move(out);
}

}  // namespace

void fft(std::vector<cplx>& a, bool inverse) {
  const int n = static_cast<int>(a.size());
  if (n == 0) throw std::invalid_argument("fft: empty input");
  if (is_pow2(n)) {
    fft_pow2(a.data(), n, inverse);
  } else {
    dft_naive(a, inverse);
  }
}

std::vector<cplx> rfft(const double* x, int len, int n) {
  std::vector<cplx> a(n, cplx(0.0, 0.0));
  const int m = std::min(len, n);
  for (int i = 0; i < m; ++i) a[i] = x[i];
  fft(a, false);
  a.resize(n / 2 + 1);
  return a;
}

std::vector<double> make_window(const WindowSpec& spec) {
  if (spec.length < 2 || spec.length % 2 != 0) {
    throw std::invalid_argument("make_window: length must be even and >= 2");
  }
  std::vector<double> w(spec.length);
  switch (spec.kind) {
    case WindowKind::kRectangular:
      for (double& v : w) v = 1.0;
      break;
    case WindowKind::kHamming:
      for (int n = 0; n < spec.length; ++n) {
        w[n] = 0.54 - 0.46 * std::cos(kTwoPi * n / spec.length);
      }
      break;
  }
  return w;
}

StftFrames stft(const RealSignal& signal, int n_fft, const WindowSpec& window) {
  if (n_fft < 2 || n_fft % 2 != 0) {
    throw std::invalid_argument("stft: n_fft must be even and >= 2");
  }
  if (window.length != n_fft) {
    throw std::invalid_argument("stft: window length must equal n_fft");
  }
  const int len = static_cast<int>(signal.samples.size());
  if (len < n_fft) {
    throw std::invalid_argument("stft: signal shorter than n_fft");
  }
  for (double v : signal.samples) {
    if (!std::isfinite(v)) throw std::invalid_argument("stft: non-finite sample");
  }
  const std::vector<double> w = make_window(window);
  const int hop = n_fft / 2;
  const int n_frames = (len - n_fft) / hop + 1;
  const int n_bins = n_fft / 2 + 1;

  StftFrames out;
  out.n_fft = n_fft;
  out.hop = hop;
  out.sample_rate_hz = signal.sample_rate_hz;
  out.data.assign(static_cast<size_t>(n_bins) * n_frames, cplx(0.0, 0.0));

  std::vector<cplx> buf(n_fft);
  for (int f = 0; f < n_frames; ++f) {
    const double* x = signal.samples.data() + static_cast<size_t>(f) * hop;
    for (int i = 0; i < n_fft; ++i) buf[i] = x[i] * w[i];
    fft(buf, false);
    for (int k = 0; k < n_bins; ++k) {
      out.data[static_cast<size_t>(k) * n_frames + f] = buf[k];
    }
  }
  return out;
}

std::vector<double> ifft_one_sided(const std::vector<cplx>& spectrum, int n_fft) {
  if (n_fft < 2 || n_fft % 2 != 0) {
    throw std::invalid_argument("ifft_one_sided: n_fft must be even and >= 2");
  }
  if (static_cast<int>(spectrum.size()) != n_fft / 2 + 1) {
    throw std::invalid_argument("ifft_one_sided: spectrum length must be n_fft/2+1");
  }
  std::vector<cplx> full(n_fft);
  for (int k = 0; k <= n_fft / 2; ++k) full[k] = spectrum[k];
  for (int k = 1; k < n_fft / 2; ++k) full[n_fft - k] = std::conj(spectrum[k]);
  fft(full, true);
  std::vector<double> out(n_fft);
  for (int i = 0; i < n_fft; ++i) out[i] = full[i].real();
  return out;
}

std::vector<double> fft_filter(const std::vector<double>& x,
                               const std::vector<double>& h) {
  if (x.empty() || h.empty()) {
    throw std::invalid_argument("fft_filter: empty input");
  }
  const size_t full = x.size() + h.size() - 1;
  size_t n = 1;
  while (n < full) n <<= 1;
  std::vector<cplx> xa(n, 0.0), ha(n, 0.0);
  for (size_t i = 0; i < x.size(); ++i) xa[i] = x[i];
  for (size_t i = 0; i < h.size(); ++i) ha[i] = h[i];
  fft(xa, false);
  fft(ha, false);
  for (size_t i = 0; i < n; ++i) xa[i] *= ha[i];
  fft(xa, true);
  std::vector<double> out(x.size());
  for (size_t i = 0; i < x.size(); ++i) out[i] = xa[i].real();
  return out;
}

}  // namespace rtfdoa
