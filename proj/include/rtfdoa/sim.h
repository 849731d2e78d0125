// include/rtfdoa/sim.h
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#ifndef RTFDOA_SIM_H_
#define RTFDOA_SIM_H_

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rtfdoa/signal.h"

namespace rtfdoa {

struct SimScene {
  std::array<double, 3> room_dims_m{6.0, 5.0, 3.0};
  double rt60_s = 0.5;  // 0 = anechoic (use free_space_ir)
  std::array<double, 3> mic_midpoint_m{3.0, 2.5, 1.5};
  double mic_spacing_m = 0.085;
  double source_doa_deg = 0.0;     // [-90, 90], broadside = 0
  double source_range_m = 1.5;
  double sample_rate_hz = 16000.0;
  double sound_speed_mps = 343.0;

  // Mic axis is x: mic 1 at midpoint + (r/2)x, mic 2 at midpoint - (r/2)x.
  // Source at midpoint + range*(sin θ, cos θ, 0), so mic 2 lags for θ > 0.
  std::array<double, 3> mic1_pos() const;
  std::array<double, 3> mic2_pos() const;
  std::array<double, 3> source_pos() const;
};

struct ImpulseResponsePair {
  std::vector<double> h1, h2;
  double sample_rate_hz = 0.0;
};

struct MixtureRecording {
  RealSignal d1, d2;
  double snr_db = 0.0;
  uint64_t seed = 0;
};

// Sabine inversion: alpha = 0.161*V/(S*RT60), clipped to (0, 1].
double rt60_to_absorption(const std::array<double, 3>& room_dims_m, double rt60_s);

// Allen-Berkley image method with uniform reflection coefficient
// beta = sqrt(1 - alpha); amplitude beta^order/(4*pi*dist); fractional delays
// via the 81-tap Hann-windowed sinc.
ImpulseResponsePair image_source_ir(const SimScene& scene, int max_order);

// Free-space pair: mic 1 at fixed 40-sample reference delay, mic 2 offset by
// tau*f_s samples with tau = (r/c)*sin(theta).
ImpulseResponsePair free_space_ir(const SimScene& scene, int length);

enum class SourceKind { kWhiteNoise, kSpeechLike, kTone };

// SpeechLike: white noise through a slowly varying 8-pole all-pole cascade
// with 4 Hz syllabic amplitude modulation (never silent); output RMS
// normalized to 1. Tone uses tone_hz; other kinds ignore it.
RealSignal synth_source(SourceKind kind, double tone_hz, double duration_s,
                        double f_s, uint64_t seed);

// d_i = (h_i * s) + u_i, white Gaussian u_i with per-channel power set from
// that channel's reverberant-signal power: 10*log10(Ps/Pn) = snr_db.
// snr_db = +inf disables noise. A zero IR yields pure noise at power
// 10^(-snr/10) referenced to unit signal power.
MixtureRecording render_mixture(const ImpulseResponsePair& ir,
                                const RealSignal& source, double snr_db,
                                uint64_t seed);

// 81-tap Hann-windowed sinc accumulation used by both IR generators:
// h[n] += amp * sinc(n - delay) * w(n - delay) for n within +-40 of the delay.
void add_frac_impulse(std::vector<double>* h, double delay_samples, double amp);

// IR cache file name for a scene: ir_doa{±DDD}_range{R}m.wav.
std::string ir_cache_name(double doa_deg, double range_m);

}  // namespace rtfdoa

#endif  // RTFDOA_SIM_H_
