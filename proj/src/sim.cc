// src/sim.cc
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#include "rtfdoa/sim.h"

#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "rtfdoa/rng.h"

namespace rtfdoa {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr int kSincHalf = 40;  // 81 taps

double deg2rad(double d) { return d * kPi / 180.0; }

double dist3(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  const double dx = a[0] - b[0], dy = a[1] - b[1], dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

bool inside_room(const std::array<double, 3>& p,
                 const std::array<double, 3>& dims) {
  for (int i = 0; i < 3; ++i) {
    if (p[i] <= 0.0 || p[i] >= dims[i]) return false;
  }
  return true;
}

void validate_scene(const SimScene& s, bool need_room) {
  if (s.sample_rate_hz <= 0 || s.sound_speed_mps <= 0 || s.mic_spacing_m <= 0 ||
      s.source_range_m <= 0) {
    throw std::invalid_argument("scene: nonpositive physical parameter");
  }
  if (s.source_doa_deg < -90.0 || s.source_doa_deg > 90.0) {
    throw std::invalid_argument("scene: source_doa_deg outside [-90, 90]");
  }
  if (!need_room) return;
  for (double d : s.room_dims_m) {
    if (d <= 0) throw std::invalid_argument("scene: nonpositive room dimension");
  }
  if (s.mic_spacing_m >= std::min({s.room_dims_m[0], s.room_dims_m[1],
                                   s.room_dims_m[2]})) {
    throw std::invalid_argument("scene: mic spacing exceeds room dimension");
  }
  if (!inside_room(s.mic1_pos(), s.room_dims_m) ||
      !inside_room(s.mic2_pos(), s.room_dims_m)) {
    throw std::invalid_argument("scene: microphones outside room");
  }
  if (!inside_room(s.source_pos(), s.room_dims_m)) {
    throw std::invalid_argument("scene: source outside room");
  }
}

}  // namespace

std::array<double, 3> SimScene::mic1_pos() const {
  return {mic_midpoint_m[0] + 0.5 * mic_spacing_m, mic_midpoint_m[1],
          mic_midpoint_m[2]};
}

std::array<double, 3> SimScene::mic2_pos() const {
  return {mic_midpoint_m[0] - 0.5 * mic_spacing_m, mic_midpoint_m[1],
          mic_midpoint_m[2]};
}

std::array<double, 3> SimScene::source_pos() const {
  const double th = deg2rad(source_doa_deg);
  return {mic_midpoint_m[0] + source_range_m * std::sin(th),
          mic_midpoint_m[1] + source_range_m * std::cos(th), mic_midpoint_m[2]};
}

double rt60_to_absorption(const std::array<double, 3>& d, double rt60_s) {
  if (rt60_s <= 0) {
    throw std::invalid_argument("rt60_to_absorption: rt60_s must be > 0");
  }
  const double v = d[0] * d[1] * d[2];
  const double s = 2.0 * (d[0] * d[1] + d[0] * d[2] + d[1] * d[2]);
  const double alpha = 0.161 * v / (s * rt60_s);
  return std::min(alpha, 1.0);
}

void add_frac_impulse(std::vector<double>* h, double delay_samples, double amp) {
  const int n0 = static_cast<int>(std::lround(delay_samples));
  const int len = static_cast<int>(h->size());
  const int lo = std::max(0, n0 - kSincHalf);
  const int hi = std::min(len - 1, n0 + kSincHalf);
  for (int n = lo; n <= hi; ++n) {
    const double t = n - delay_samples;
    const double w = 0.5 * (1.0 + std::cos(kPi * t / (kSincHalf + 1)));
    const double s = (std::abs(t) < 1e-12) ? 1.0 : std::sin(kPi * t) / (kPi * t);
    (*h)[n] += amp * s * w;
  }
}

ImpulseResponsePair image_source_ir(const SimScene& scene, int max_order) {
  validate_scene(scene, /*need_room=*/true);
  if (max_order < 0) throw std::invalid_argument("image_source_ir: max_order < 0");

  const double alpha = scene.rt60_s > 0
                           ? rt60_to_absorption(scene.room_dims_m, scene.rt60_s)
                           : 1.0;
  const double beta = std::sqrt(std::max(0.0, 1.0 - alpha));
  const auto src = scene.source_pos();
  const auto mics = std::array{scene.mic1_pos(), scene.mic2_pos()};
  const double fs = scene.sample_rate_hz, c = scene.sound_speed_mps;

  // Enumerate image positions (1-2p)*xs + 2nL per axis; the image in cell
  // index 2n-p has crossed |2n-p| walls on that axis.
  struct Arrival {
    double delay;
    double amp;
  };
  std::array<std::vector<Arrival>, 2> arrivals;
  double max_delay = 0.0;
  const int nmax = (max_order + 1) / 2 + 1;
  for (int px = 0; px <= 1; ++px) {
    for (int nx = -nmax; nx <= nmax; ++nx) {
      const int ox = std::abs(2 * nx - px);
      if (ox > max_order) continue;
      const double xi = (1 - 2 * px) * src[0] + 2.0 * nx * scene.room_dims_m[0];
      for (int py = 0; py <= 1; ++py) {
        for (int ny = -nmax; ny <= nmax; ++ny) {
          const int oy = std::abs(2 * ny - py);
          if (ox + oy > max_order) continue;
          const double yi =
              (1 - 2 * py) * src[1] + 2.0 * ny * scene.room_dims_m[1];
          for (int pz = 0; pz <= 1; ++pz) {
            for (int nz = -nmax; nz <= nmax; ++nz) {
              const int oz = std::abs(2 * nz - pz);
              const int order = ox + oy + oz;
              if (order > max_order) continue;
              const double zi =
                  (1 - 2 * pz) * src[2] + 2.0 * nz * scene.room_dims_m[2];
              const std::array<double, 3> img{xi, yi, zi};
              const double g = std::pow(beta, order);
              for (int m = 0; m < 2; ++m) {
                const double d = dist3(img, mics[m]);
                const double delay = d / c * fs;
                arrivals[m].push_back({delay, g / (4.0 * kPi * d)});
                max_delay = std::max(max_delay, delay);
              }
            }
          }
        }
      }
    }
  }

  ImpulseResponsePair out;
  out.sample_rate_hz = fs;
  const int len = static_cast<int>(std::ceil(max_delay)) + kSincHalf + 2;
  out.h1.assign(len, 0.0);
  out.h2.assign(len, 0.0);
  for (const auto& a : arrivals[0]) add_frac_impulse(&out.h1, a.delay, a.amp);
  for (const auto& a : arrivals[1]) add_frac_impulse(&out.h2, a.delay, a.amp);
  return out;
}

ImpulseResponsePair free_space_ir(const SimScene& scene, int length) {
  validate_scene(scene, /*need_room=*/false);
  if (length <= 81) throw std::invalid_argument("free_space_ir: length must be > 81");
  const double tau = scene.mic_spacing_m / scene.sound_speed_mps *
                     std::sin(deg2rad(scene.source_doa_deg));
  ImpulseResponsePair out;
  out.sample_rate_hz = scene.sample_rate_hz;
  out.h1.assign(length, 0.0);
  out.h2.assign(length, 0.0);
  add_frac_impulse(&out.h1, 40.0, 1.0);
  add_frac_impulse(&out.h2, 40.0 + tau * scene.sample_rate_hz, 1.0);
  return out;
}

RealSignal synth_source(SourceKind kind, double tone_hz, double duration_s,
                        double f_s, uint64_t seed) {
  if (duration_s <= 0) throw std::invalid_argument("synth_source: duration <= 0");
  if (f_s <= 0) throw std::invalid_argument("synth_source: f_s <= 0");
  const int n = static_cast<int>(std::llround(duration_s * f_s));
  RealSignal out;
  out.sample_rate_hz = f_s;
  out.samples.assign(n, 0.0);
  Rng rng(seed, 0x5157);

  switch (kind) {
    case SourceKind::kWhiteNoise:
      for (double& v : out.samples) v = rng.gauss();
      break;
    case SourceKind::kTone:
      for (int i = 0; i < n; ++i) {
        out.samples[i] = std::sqrt(2.0) * std::sin(2.0 * kPi * tone_hz * i / f_s);
      }
      break;
    case SourceKind::kSpeechLike: {
      // 4 cascaded two-pole resonators (8 poles total), centre frequencies on
      // a random walk inside formant-ish bands, refreshed every 20 ms.
      const int block = std::max(1, static_cast<int>(f_s * 0.02));
      const double fmin[4] = {250.0, 700.0, 1600.0, 2800.0};
      const double fmax[4] = {600.0, 1400.0, 2600.0, 3600.0};
      double fc[4], radius = 0.96;
      for (int s = 0; s < 4; ++s) fc[s] = fmin[s] + rng.uniform() * (fmax[s] - fmin[s]);
      double a1[4], a2[4], z1[4] = {0, 0, 0, 0}, z2[4] = {0, 0, 0, 0};
      auto refresh = [&]() {
        for (int s = 0; s < 4; ++s) {
          fc[s] += (rng.uniform() - 0.5) * 0.1 * (fmax[s] - fmin[s]);
          fc[s] = std::min(fmax[s], std::max(fmin[s], fc[s]));
          a1[s] = -2.0 * radius * std::cos(2.0 * kPi * fc[s] / f_s);
          a2[s] = radius * radius;
        }
      };
      refresh();
      const double am_phase = rng.uniform() * 2.0 * kPi;
      for (int i = 0; i < n; ++i) {
        if (i % block == 0 && i > 0) refresh();
        double v = rng.gauss();
        for (int s = 0; s < 4; ++s) {
          const double y = v - a1[s] * z1[s] - a2[s] * z2[s];
          z2[s] = z1[s];
          z1[s] = y;
          v = y;
        }
        // syllabic 4 Hz modulation with a floor so frames are never silent
        const double am =
            0.35 + 0.65 * 0.5 * (1.0 + std::sin(2.0 * kPi * 4.0 * i / f_s + am_phase));
        out.samples[i] = v * am;
      }
      break;
    }
  }

  double p = 0.0;
  for (double v : out.samples) p += v * v;
  const double rms = std::sqrt(p / n);
  if (rms > 0) {
    for (double& v : out.samples) v /= rms;
  }
  return out;
}

MixtureRecording render_mixture(const ImpulseResponsePair& ir,
                                const RealSignal& source, double snr_db,
                                uint64_t seed) {
  if (source.samples.empty()) {
    throw std::invalid_argument("render_mixture: empty source");
  }
  if (ir.h1.size() != ir.h2.size()) {
    throw std::invalid_argument("render_mixture: IR length mismatch");
  }
  if (ir.sample_rate_hz != source.sample_rate_hz) {
    throw std::invalid_argument("render_mixture: sample-rate mismatch");
  }
  MixtureRecording out;
  out.snr_db = snr_db;
  out.seed = seed;
  out.d1.sample_rate_hz = source.sample_rate_hz;
  out.d2.sample_rate_hz = source.sample_rate_hz;
  out.d1.samples = fft_filter(source.samples, ir.h1);
  out.d2.samples = fft_filter(source.samples, ir.h2);

  if (std::isinf(snr_db)) return out;

  const size_t n = source.samples.size();
  RealSignal* chans[2] = {&out.d1, &out.d2};
  for (int m = 0; m < 2; ++m) {
    double p = 0.0;
    for (double v : chans[m]->samples) p += v * v;
    p /= static_cast<double>(n);
    const double ref = p > 0 ? p : 1.0;  // zero IR: unit reference power
    const double sigma = std::sqrt(ref * std::pow(10.0, -snr_db / 10.0));
    Rng rng(seed, 0xA0D10 + static_cast<uint64_t>(m));
    for (double& v : chans[m]->samples) v += sigma * rng.gauss();
  }
  return out;
}

std::string ir_cache_name(double doa_deg, double range_m) {
  const int d = static_cast<int>(std::lround(doa_deg));
  char buf[64];
  std::snprintf(buf, sizeof(buf), "ir_doa%+04d_range%gm.wav", d, range_m);
  return buf;
}

}  // namespace rtfdoa
