// src/rtf.cc
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#include "rtfdoa/rtf.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rtfdoa {

namespace {
constexpr double kEps = 1e-12;

void check_aligned(const StftFrames& a, const StftFrames& b) {
  if (a.n_fft != b.n_fft || a.n_frames() != b.n_frames()) {
    throw std::invalid_argument("rtf: channels are not aligned");
  }
}
}  // namespace

double wrap_phase(double phi) { return std::remainder(phi, 2.0 * std::numbers::pi); }

std::vector<cplx> instantaneous_rtf(const StftFrames& frames1,
                                    const StftFrames& frames2,
                                    int frame_index) {
  check_aligned(frames1, frames2);
  if (frame_index < 0 || frame_index >= frames1.n_frames()) {
    throw std::invalid_argument("instantaneous_rtf: frame index out of range");
  }
  const int k_full = frames1.n_bins();
  std::vector<cplx> h(static_cast<size_t>(k_full));
  for (int k = 0; k < k_full; ++k) {
    const cplx d1 = frames1.at(k, frame_index);
    const cplx d2 = frames2.at(k, frame_index);
    h[static_cast<size_t>(k)] = d2 * std::conj(d1) / (std::norm(d1) + kEps);
  }
  return h;
}

std::vector<cplx> spectrally_averaged_rtf(const StftFrames& frames1,
                                          const StftFrames& frames2,
                                          const std::vector<int>& frame_set) {
  check_aligned(frames1, frames2);
  if (frame_set.empty()) {
    throw std::invalid_argument("spectrally_averaged_rtf: empty frame set");
  }
  const int k_full = frames1.n_bins();
  std::vector<cplx> num(static_cast<size_t>(k_full), cplx{0, 0});
  std::vector<double> den(static_cast<size_t>(k_full), 0.0);
  for (int f : frame_set) {
    if (f < 0 || f >= frames1.n_frames()) {
      throw std::invalid_argument("spectrally_averaged_rtf: frame index out of range");
    }
    for (int k = 0; k < k_full; ++k) {
      const cplx d1 = frames1.at(k, f);
      num[static_cast<size_t>(k)] += frames2.at(k, f) * std::conj(d1);
      den[static_cast<size_t>(k)] += std::norm(d1);
    }
  }
  std::vector<cplx> h(static_cast<size_t>(k_full));
  for (int k = 0; k < k_full; ++k) {
    h[static_cast<size_t>(k)] = num[static_cast<size_t>(k)] / (den[static_cast<size_t>(k)] + kEps);
  }
  return h;
}

std::vector<float> phase_frame(const StftFrames& frames1,
                               const StftFrames& frames2, int frame_index) {
  const std::vector<cplx> h = instantaneous_rtf(frames1, frames2, frame_index);
  const int k_count = frames1.n_fft / 2 - 1;
  std::vector<float> out(static_cast<size_t>(k_count));
  for (int k = 1; k <= k_count; ++k) {
    out[static_cast<size_t>(k - 1)] =
        static_cast<float>(std::arg(h[static_cast<size_t>(k)]) / std::numbers::pi);
  }
  return out;
}

std::vector<float> phase_frames(const StftFrames& frames1,
                                const StftFrames& frames2) {
  check_aligned(frames1, frames2);
  const int k_count = frames1.n_fft / 2 - 1;
  std::vector<float> out;
  out.reserve(static_cast<size_t>(frames1.n_frames()) * k_count);
  for (int f = 0; f < frames1.n_frames(); ++f) {
    const std::vector<float> row = phase_frame(frames1, frames2, f);
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

RtfPhaseSequence phase_sequence(const StftFrames& frames1,
                                const StftFrames& frames2, int start,
                                int seq_len) {
  check_aligned(frames1, frames2);
  if (seq_len < 1) throw std::invalid_argument("phase_sequence: P must be >= 1");
  if (start < 0 || start + seq_len > frames1.n_frames()) {
    throw std::invalid_argument("phase_sequence: window overruns frame count");
  }
  const int k_count = frames1.n_fft / 2 - 1;
  RtfPhaseSequence seq;
  seq.n_bins = k_count;
  seq.seq_len = seq_len;
  seq.start_frame = start;
  seq.x.resize(static_cast<size_t>(k_count) * seq_len);
  for (int p = 0; p < seq_len; ++p) {
    const std::vector<float> col = phase_frame(frames1, frames2, start + p);
    for (int k = 0; k < k_count; ++k) {
      seq.x[static_cast<size_t>(k) * seq_len + p] = col[static_cast<size_t>(k)];
    }
  }
  return seq;
}

int expected_sequence_count(double duration_s, double sample_rate_hz,
                            int n_fft, int seq_len) {
  if (duration_s <= 0) throw std::invalid_argument("expected_sequence_count: duration must be positive");
  if (n_fft <= 0 || seq_len < 1) {
    throw std::invalid_argument("expected_sequence_count: bad n_fft or P");
  }
  const long long n = static_cast<long long>(
      std::floor(2.0 * sample_rate_hz * duration_s / n_fft));
  const long long count = n - seq_len;
  if (count < 1) throw std::invalid_argument("expected_sequence_count: segment too short");
  return static_cast<int>(count);
}

double free_space_rtf_phase(double f_hz, double theta_deg, double mic_dist_m,
                            double speed_of_sound) {
  if (f_hz < 0) throw std::invalid_argument("free_space_rtf_phase: negative frequency");
  const double theta = theta_deg * std::numbers::pi / 180.0;
  return 2.0 * std::numbers::pi * f_hz * mic_dist_m * std::sin(theta) / speed_of_sound;
}

std::optional<double> phase_wrap_frequency(double theta_deg, double mic_dist_m,
                                           double speed_of_sound) {
  const double s = std::abs(std::sin(theta_deg * std::numbers::pi / 180.0));
  if (s == 0.0) return std::nullopt;
  return speed_of_sound / (2.0 * mic_dist_m * s);
}

double expected_delay(double theta_deg, double mic_dist_m,
                      double speed_of_sound) {
  return mic_dist_m / speed_of_sound * std::sin(theta_deg * std::numbers::pi / 180.0);
}

std::vector<uint8_t> energy_vad_mask(const RealSignal& signal, int n_fft,
                                     int hop) {
  if (n_fft <= 0 || hop <= 0) throw std::invalid_argument("energy_vad_mask: bad n_fft or hop");
  const long long len = static_cast<long long>(signal.samples.size());
  if (len < n_fft) throw std::invalid_argument("energy_vad_mask: signal shorter than one frame");
  const int n_frames = static_cast<int>((len - n_fft) / hop + 1);
  std::vector<double> rms(static_cast<size_t>(n_frames));
  double max_rms = 0.0;
  for (int f = 0; f < n_frames; ++f) {
    double acc = 0.0;
    const double* p = signal.samples.data() + static_cast<size_t>(f) * hop;
    for (int i = 0; i < n_fft; ++i) acc += p[i] * p[i];
    rms[static_cast<size_t>(f)] = std::sqrt(acc / n_fft);
    max_rms = std::max(max_rms, rms[static_cast<size_t>(f)]);
  }
  const double floor_rms = max_rms * std::pow(10.0, -40.0 / 20.0);
  std::vector<uint8_t> keep(static_cast<size_t>(n_frames));
  for (int f = 0; f < n_frames; ++f) {
    keep[static_cast<size_t>(f)] = rms[static_cast<size_t>(f)] >= floor_rms ? 1 : 0;
  }
  return keep;
}

StftFrames filter_frames(const StftFrames& frames,
                         const std::vector<uint8_t>& keep) {
  if (static_cast<int>(keep.size()) != frames.n_frames()) {
    throw std::invalid_argument("filter_frames: mask size mismatch");
  }
  int kept = 0;
  for (uint8_t k : keep) kept += k ? 1 : 0;
  StftFrames out;
  out.n_fft = frames.n_fft;
  out.hop = frames.hop;
  out.sample_rate_hz = frames.sample_rate_hz;
  out.data.resize(static_cast<size_t>(frames.n_bins()) * kept);
  int dst = 0;
  for (int f = 0; f < frames.n_frames(); ++f) {
    if (!keep[static_cast<size_t>(f)]) continue;
    for (int k = 0; k < frames.n_bins(); ++k) {
      out.data[static_cast<size_t>(k) * kept + dst] = frames.at(k, f);
    }
    ++dst;
  }
  return out;
}

StftFrames concat_frames(const std::vector<StftFrames>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_frames: no parts");
  const StftFrames& first = parts[0];
  int total = 0;
  for (const StftFrames& p : parts) {
    if (p.n_fft != first.n_fft || p.hop != first.hop ||
        p.sample_rate_hz != first.sample_rate_hz) {
      throw std::invalid_argument("concat_frames: mismatched frame layout");
    }
    total += p.n_frames();
  }
  StftFrames out;
  out.n_fft = first.n_fft;
  out.hop = first.hop;
  out.sample_rate_hz = first.sample_rate_hz;
  out.data.resize(static_cast<size_t>(first.n_bins()) * total);
  int dst = 0;
  for (const StftFrames& p : parts) {
    for (int f = 0; f < p.n_frames(); ++f) {
      for (int k = 0; k < p.n_bins(); ++k) {
        out.data[static_cast<size_t>(k) * total + dst] = p.at(k, f);
      }
      ++dst;
    }
  }
  return out;
}

StftFrames window_frames(const StftFrames& frames, int start, int len) {
  if (start < 0 || len < 1 || start + len > frames.n_frames()) {
    throw std::invalid_argument("window_frames: range outside frame matrix");
  }
  StftFrames out;
  out.n_fft = frames.n_fft;
  out.hop = frames.hop;
  out.sample_rate_hz = frames.sample_rate_hz;
  out.data.resize(static_cast<size_t>(frames.n_bins()) * len);
  for (int k = 0; k < frames.n_bins(); ++k) {
    for (int f = 0; f < len; ++f) {
      out.data[static_cast<size_t>(k) * len + f] = frames.at(k, start + f);
    }
  }
  return out;
}

}  // namespace rtfdoa
