// include/rtfdoa/signal.h
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#ifndef RTFDOA_SIGNAL_H_
#define RTFDOA_SIGNAL_H_

#include <complex>
#include <vector>

namespace rtfdoa {

using cplx = std::complex<double>;

struct RealSignal {
  std::vector<double> samples;
  double sample_rate_hz = 0.0;
};

enum class WindowKind { kHamming, kRectangular };

struct WindowSpec {
  WindowKind kind = WindowKind::kHamming;
  int length = 0;
};

// Periodic window; Hamming is 0.54 - 0.46*cos(2*pi*n/length).
// Throws std::invalid_argument for length < 2 or odd length.
std::vector<double> make_window(const WindowSpec& spec);

// One-sided STFT frames, bins 0..n_fft/2 by frame.  Hop is fixed at
// n_fft/2 (50% overlap); frame f covers samples [f*hop, f*hop + n_fft).
struct StftFrames {
  std::vector<cplx> data;  // row-major, n_bins() rows by n_frames() cols
  int n_fft = 0;
  int hop = 0;
  double sample_rate_hz = 0.0;

  int n_bins() const { return n_fft / 2 + 1; }
  int n_frames() const {
    return n_fft > 0 ? static_cast<int>(data.size()) / n_bins() : 0;
  }
  cplx& at(int k, int f) { return data[static_cast<size_t>(k) * n_frames() + f]; }
  const cplx& at(int k, int f) const {
    return data[static_cast<size_t>(k) * n_frames() + f];
  }
};

StftFrames stft(const RealSignal& signal, int n_fft, const WindowSpec& window);

// Conjugate-symmetric extension of a one-sided spectrum (length n_fft/2+1),
// inverse DFT, real part.
std::vector<double> ifft_one_sided(const std::vector<cplx>& spectrum, int n_fft);

// In-place complex FFT/IFFT, any even n (radix-2 when n is a power of two,
// exact naive transform otherwise).  Forward: X[k] = sum_n x[n] e^{-j2πkn/N};
// inverse includes the 1/N factor.
void fft(std::vector<cplx>& a, bool inverse);

// One-sided real-input forward transform: returns bins 0..n/2 of x (padded or
// truncated to length n).
std::vector<cplx> rfft(const double* x, int len, int n);

// Linear convolution of x (length n) with kernel h (length m) via FFT,
// returning the first n samples (same-length "filter" output).
std::vector<double> fft_filter(const std::vector<double>& x,
                               const std::vector<double>& h);

}  // namespace rtfdoa

#endif  // RTFDOA_SIGNAL_H_
