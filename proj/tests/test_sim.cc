// tests/test_sim.cc
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "rtfdoa/signal.h"
#include "rtfdoa/sim.h"

using namespace rtfdoa;

namespace {

constexpr double kPi = std::numbers::pi;

double dist(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) +
                   (a[1] - b[1]) * (a[1] - b[1]) +
                   (a[2] - b[2]) * (a[2] - b[2]));
}

// Independent re-statement of the windowed-sinc tap value: the 81 taps live
// on the integers centred on the rounded delay, each weighted by a Hann
// window (normalized by half-width + 1, so the edge taps stay nonzero).
double frac_tap_at(int n, double delay) {
  if (std::abs(n - std::lround(delay)) > 40) return 0.0;
  const double t = static_cast<double>(n) - delay;
  const double w = 0.5 * (1.0 + std::cos(kPi * t / 41.0));
  const double s = std::abs(t) < 1e-12 ? 1.0 : std::sin(kPi * t) / (kPi * t);
  return s * w;
}

double signal_power(const std::vector<double>& v) {
  double p = 0.0;
  for (double x : v) p += x * x;
  return p / static_cast<double>(v.size());
}

// Schroeder backward integration -> RT60 from the -5..-25 dB slope.
double estimate_rt60(const std::vector<double>& h, double fs) {
  std::vector<double> edc(h.size());
  double acc = 0.0;
  for (size_t i = h.size(); i-- > 0;) {
    acc += h[i] * h[i];
    edc[i] = acc;
  }
  const double e0 = edc[0];
  int i5 = -1, i25 = -1;
  for (size_t i = 0; i < edc.size(); ++i) {
    const double db = 10.0 * std::log10(edc[i] / e0 + 1e-300);
    if (i5 < 0 && db <= -5.0) i5 = static_cast<int>(i);
    if (i25 < 0 && db <= -25.0) {
      i25 = static_cast<int>(i);
      break;
    }
  }
  REQUIRE(i5 >= 0);
  REQUIRE(i25 > i5);
  return 60.0 / 20.0 * (i25 - i5) / fs;
}

}  // namespace

TEST_CASE("scene geometry") {
  SimScene s;
  s.mic_midpoint_m = {3.0, 2.5, 1.5};
  s.mic_spacing_m = 0.085;
  s.source_doa_deg = 90.0;
  s.source_range_m = 1.5;
  const auto m1 = s.mic1_pos(), m2 = s.mic2_pos(), src = s.source_pos();
  CHECK_EQ(m1[0], doctest::Approx(3.0425));
  CHECK_EQ(m2[0], doctest::Approx(2.9575));
  // Endfire at +90 deg: source on the mic-1 side of the axis.
  CHECK_EQ(src[0], doctest::Approx(4.5));
  CHECK_EQ(src[1], doctest::Approx(2.5));
  CHECK(dist(src, m1) < dist(src, m2));
}

TEST_CASE("order-0 image equals the direct-path windowed sinc") {
  SimScene s;
  s.rt60_s = 0.3;
  s.source_doa_deg = 30.0;
  const ImpulseResponsePair ir = image_source_ir(s, 0);
  CHECK_EQ(ir.h1.size(), ir.h2.size());

  const double c = s.sound_speed_mps, fs = s.sample_rate_hz;
  const double d1 = dist(s.source_pos(), s.mic1_pos());
  const double amp = 1.0 / (4.0 * kPi * d1);
  const double delay = d1 / c * fs;
  double max_err = 0.0;
  for (size_t n = 0; n < ir.h1.size(); ++n) {
    const double want = amp * frac_tap_at(static_cast<int>(n), delay);
    max_err = std::max(max_err, std::abs(ir.h1[n] - want));
  }
  CHECK(max_err < 1e-12);
}

TEST_CASE("order-1 image set has the seven textbook arrivals") {
  SimScene s;
  s.room_dims_m = {4.0, 3.0, 2.5};
  s.mic_midpoint_m = {2.0, 1.5, 1.25};
  s.rt60_s = 0.4;
  s.source_doa_deg = -20.0;
  s.source_range_m = 1.0;
  const ImpulseResponsePair ir = image_source_ir(s, 1);

  const double alpha = rt60_to_absorption(s.room_dims_m, s.rt60_s);
  const double beta = std::sqrt(1.0 - alpha);
  const auto src = s.source_pos();
  const auto mic = s.mic1_pos();
  const double L = s.room_dims_m[0], W = s.room_dims_m[1],
               H = s.room_dims_m[2];
  const std::array<std::array<double, 3>, 7> images = {{
      {src[0], src[1], src[2]},
      {-src[0], src[1], src[2]},
      {2 * L - src[0], src[1], src[2]},
      {src[0], -src[1], src[2]},
      {src[0], 2 * W - src[1], src[2]},
      {src[0], src[1], -src[2]},
      {src[0], src[1], 2 * H - src[2]},
  }};
  // Reconstruct the full response from the seven arrivals and compare.
  std::vector<double> want(ir.h1.size(), 0.0);
  for (int i = 0; i < 7; ++i) {
    const double d = dist(images[static_cast<size_t>(i)], mic);
    const double g = (i == 0 ? 1.0 : beta) / (4.0 * kPi * d);
    const double delay = d / s.sound_speed_mps * s.sample_rate_hz;
    for (size_t n = 0; n < want.size(); ++n) {
      want[n] += g * frac_tap_at(static_cast<int>(n), delay);
    }
  }
  double max_err = 0.0;
  for (size_t n = 0; n < want.size(); ++n) {
    max_err = std::max(max_err, std::abs(want[n] - ir.h1[n]));
  }
  CHECK(max_err < 1e-12);
}

TEST_CASE("reverberant tail matches the requested decay time") {
  SimScene s;
  s.rt60_s = 0.3;
  s.source_doa_deg = 0.0;
  const ImpulseResponsePair ir = image_source_ir(s, 40);
  const double t60 = estimate_rt60(ir.h1, s.sample_rate_hz);
  CHECK(t60 > 0.7 * s.rt60_s);
  CHECK(t60 < 1.3 * s.rt60_s);
}

TEST_CASE("free-space pair lag follows (r/c) sin(theta)") {
  for (double doa : {-90.0, -60.0, -30.0, 0.0, 30.0, 60.0, 90.0}) {
    SimScene s;
    s.rt60_s = 0.0;
    s.source_doa_deg = doa;
    const ImpulseResponsePair ir = free_space_ir(s, 256);
    const double tau_samples = s.mic_spacing_m / s.sound_speed_mps *
                               std::sin(doa * kPi / 180.0) *
                               s.sample_rate_hz;
    // Cross-correlate the two channels over small lags.
    int best_lag = 0;
    double best = -1.0;
    for (int lag = -8; lag <= 8; ++lag) {
      double acc = 0.0;
      for (int n = 0; n < 256; ++n) {
        const int j = n + lag;
        if (j < 0 || j >= 256) continue;
        acc += ir.h1[static_cast<size_t>(n)] * ir.h2[static_cast<size_t>(j)];
      }
      if (acc > best) {
        best = acc;
        best_lag = lag;
      }
    }
    CHECK_EQ(best_lag, static_cast<int>(std::lround(tau_samples)));
  }
  SimScene s;
  s.rt60_s = 0.0;
  CHECK_THROWS_AS(free_space_ir(s, 81), std::invalid_argument);
}

TEST_CASE("scene validation") {
  SimScene s;
  s.source_doa_deg = 95.0;
  CHECK_THROWS_AS(image_source_ir(s, 1), std::invalid_argument);
  s.source_doa_deg = 0.0;
  s.source_range_m = 100.0;  // outside the room
  CHECK_THROWS_AS(image_source_ir(s, 1), std::invalid_argument);
  s.source_range_m = 1.5;
  CHECK_THROWS_AS(image_source_ir(s, -1), std::invalid_argument);
  CHECK_THROWS_AS(rt60_to_absorption({6, 5, 3}, 0.0), std::invalid_argument);
}

TEST_CASE("sources are deterministic and unit power") {
  const RealSignal a = synth_source(SourceKind::kSpeechLike, 0.0, 1.0,
                                    16000.0, 7);
  const RealSignal b = synth_source(SourceKind::kSpeechLike, 0.0, 1.0,
                                    16000.0, 7);
  const RealSignal c = synth_source(SourceKind::kSpeechLike, 0.0, 1.0,
                                    16000.0, 8);
  REQUIRE_EQ(a.samples.size(), 16000u);
  CHECK(a.samples == b.samples);
  CHECK(a.samples != c.samples);
  CHECK_EQ(signal_power(a.samples), doctest::Approx(1.0).epsilon(1e-9));

  // Syllabic modulation never gates the signal to silence.
  for (size_t off = 0; off + 800 <= a.samples.size(); off += 800) {
    double p = 0.0;
    for (size_t i = off; i < off + 800; ++i) p += a.samples[i] * a.samples[i];
    CHECK(std::sqrt(p / 800.0) > 1e-3);
  }

  const RealSignal w = synth_source(SourceKind::kWhiteNoise, 0.0, 0.5,
                                    16000.0, 3);
  CHECK_EQ(signal_power(w.samples), doctest::Approx(1.0).epsilon(1e-9));
  const RealSignal t = synth_source(SourceKind::kTone, 500.0, 0.5, 16000.0, 3);
  CHECK_EQ(signal_power(t.samples), doctest::Approx(1.0).epsilon(1e-9));
  CHECK_THROWS_AS(synth_source(SourceKind::kTone, 500.0, 0.0, 16000.0, 0),
                  std::invalid_argument);
}

TEST_CASE("mixture SNR lands on target") {
  SimScene s;
  s.rt60_s = 0.2;
  s.source_doa_deg = 40.0;
  const ImpulseResponsePair ir = image_source_ir(s, 10);
  const RealSignal src = synth_source(SourceKind::kWhiteNoise, 0.0, 2.0,
                                      16000.0, 11);
  const double snr_db = 10.0;
  const MixtureRecording mix = render_mixture(ir, src, snr_db, 5);
  REQUIRE_EQ(mix.d1.samples.size(), src.samples.size());

  const std::vector<double> clean1 = fft_filter(src.samples, ir.h1);
  std::vector<double> noise(mix.d1.samples.size());
  for (size_t i = 0; i < noise.size(); ++i) {
    noise[i] = mix.d1.samples[i] - clean1[i];
  }
  const double measured =
      10.0 * std::log10(signal_power(clean1) / signal_power(noise));
  CHECK(std::abs(measured - snr_db) < 0.2);

  // Infinite SNR adds nothing.
  const MixtureRecording quiet = render_mixture(
      ir, src, std::numeric_limits<double>::infinity(), 5);
  CHECK(quiet.d1.samples == clean1);

  // Determinism in the noisy path.
  const MixtureRecording again = render_mixture(ir, src, snr_db, 5);
  CHECK(mix.d1.samples == again.d1.samples);
  CHECK(mix.d2.samples == again.d2.samples);
}

TEST_CASE("ir cache naming") {
  CHECK_EQ(ir_cache_name(30.0, 1.5), "ir_doa+030_range1.5m.wav");
  CHECK_EQ(ir_cache_name(-90.0, 1.0), "ir_doa-090_range1m.wav");
  CHECK_EQ(ir_cache_name(0.0, 1.5), "ir_doa+000_range1.5m.wav");
}
