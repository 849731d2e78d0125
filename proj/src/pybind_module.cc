// src/pybind_module.cc
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0
//
// Python bindings for the main library operations: room simulation,
// RTF-phase features, classical baselines, evaluation, and trained-model
// inference/generation.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <array>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rtfdoa/baselines.h"
#include "rtfdoa/dataset.h"
#include "rtfdoa/eval.h"
#include "rtfdoa/rtf.h"
#include "rtfdoa/sim.h"
#include "rtfdoa/vae.h"
#include "rtfdoa/wav.h"

namespace py = pybind11;
using namespace rtfdoa;

namespace {

SourceKind kind_from(const std::string& name) {
  if (name == "white") return SourceKind::kWhiteNoise;
  if (name == "tone") return SourceKind::kTone;
  if (name == "speech") return SourceKind::kSpeechLike;
  throw std::invalid_argument("source kind must be speech, white, or tone");
}

DoaGrid grid_from(const std::vector<double>& angles) {
  DoaGrid g;
  g.angles_deg = angles;
  g.validate();
  return g;
}

StftFrames frames_from(const std::vector<double>& samples, double fs,
                       int n_fft) {
  WindowSpec w;
  w.kind = WindowKind::kHamming;
  w.length = n_fft;
  return stft({samples, fs}, n_fft, w);
}

RtfPhaseSequence seq_from(const std::vector<float>& x, int n_bins,
                          int seq_len) {
  if (x.size() != static_cast<size_t>(n_bins) * seq_len) {
    throw std::invalid_argument("phase matrix size must be n_bins*seq_len");
  }
  RtfPhaseSequence s;
  s.x = x;
  s.n_bins = n_bins;
  s.seq_len = seq_len;
  return s;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Two-microphone RTF-phase DOA estimation core";

  // ---- physics ---------------------------------------------------------
  m.def("free_space_rtf_phase", &free_space_rtf_phase, py::arg("f_hz"),
        py::arg("theta_deg"), py::arg("mic_dist_m"),
        py::arg("speed_of_sound") = 343.0,
        "Unwrapped free-space RTF phase 2*pi*f*r*sin(theta)/c");
  m.def(
      "phase_wrap_frequency",
      [](double theta, double r, double c) -> std::optional<double> {
        return phase_wrap_frequency(theta, r, c);
      },
      py::arg("theta_deg"), py::arg("mic_dist_m"),
      py::arg("speed_of_sound") = 343.0,
      "Lowest wrapping frequency c/(2 r |sin theta|); None at broadside");
  m.def("expected_delay", &expected_delay, py::arg("theta_deg"),
        py::arg("mic_dist_m"), py::arg("speed_of_sound") = 343.0,
        "Inter-microphone delay (r/c) sin(theta) in seconds");
  m.def("wrap_phase", &wrap_phase, py::arg("phi"),
        "Wrap a phase value into (-pi, pi]");

  // ---- simulation ------------------------------------------------------
  m.def(
      "simulate_ir",
      [](std::array<double, 3> dims, double rt60, double mic_spacing,
         double doa_deg, double range_m, double fs, int max_order) {
        SimScene scene;
        scene.room_dims_m = dims;
        scene.rt60_s = rt60;
        scene.mic_midpoint_m = {dims[0] / 2, dims[1] / 2, dims[2] / 2};
        scene.mic_spacing_m = mic_spacing;
        scene.source_doa_deg = doa_deg;
        scene.source_range_m = range_m;
        scene.sample_rate_hz = fs;
        const ImpulseResponsePair ir = rt60 > 0.0
                                           ? image_source_ir(scene, max_order)
                                           : free_space_ir(scene, 256);
        return std::make_pair(ir.h1, ir.h2);
      },
      py::arg("room_dims"), py::arg("rt60"), py::arg("mic_spacing"),
      py::arg("doa_deg"), py::arg("range_m"), py::arg("fs") = 16000.0,
      py::arg("max_order") = 40,
      "Stereo impulse response pair (image method; rt60 = 0 -> free space)");
  m.def(
      "synth_source",
      [](const std::string& kind, double duration_s, double fs, uint64_t seed,
         double tone_hz) {
        return synth_source(kind_from(kind), tone_hz, duration_s, fs, seed)
            .samples;
      },
      py::arg("kind"), py::arg("duration_s"), py::arg("fs") = 16000.0,
      py::arg("seed") = 0, py::arg("tone_hz") = 500.0,
      "Unit-RMS test source: speech | white | tone");
  m.def(
      "render_mixture",
      [](const std::vector<double>& h1, const std::vector<double>& h2,
         const std::vector<double>& source, double fs, double snr_db,
         uint64_t seed) {
        ImpulseResponsePair ir{h1, h2, fs};
        const MixtureRecording mix =
            render_mixture(ir, {source, fs}, snr_db, seed);
        return std::make_pair(mix.d1.samples, mix.d2.samples);
      },
      py::arg("h1"), py::arg("h2"), py::arg("source"), py::arg("fs") = 16000.0,
      py::arg("snr_db") = std::numeric_limits<double>::infinity(),
      py::arg("seed") = 0, "Two-channel reverberant mixture with sensor noise");

  // ---- features --------------------------------------------------------
  m.def(
      "rtf_phase_frames",
      [](const std::vector<double>& d1, const std::vector<double>& d2,
         double fs, int n_fft) {
        const StftFrames f1 = frames_from(d1, fs, n_fft);
        const StftFrames f2 = frames_from(d2, fs, n_fft);
        const std::vector<float> flat = phase_frames(f1, f2);
        return std::make_tuple(flat, f1.n_frames(), n_fft / 2 - 1);
      },
      py::arg("d1"), py::arg("d2"), py::arg("fs") = 16000.0,
      py::arg("n_fft") = 256,
      "(flat [F x K] phase/pi matrix, F, K) for bins 1..n_fft/2-1");
  m.def(
      "phase_sequence",
      [](const std::vector<double>& d1, const std::vector<double>& d2,
         double fs, int n_fft, int start, int seq_len) {
        const StftFrames f1 = frames_from(d1, fs, n_fft);
        const StftFrames f2 = frames_from(d2, fs, n_fft);
        return phase_sequence(f1, f2, start, seq_len).x;
      },
      py::arg("d1"), py::arg("d2"), py::arg("fs") = 16000.0,
      py::arg("n_fft") = 256, py::arg("start") = 0, py::arg("seq_len") = 31,
      "Flat [K x P] phase/pi sequence starting at the given frame");
  m.def("expected_sequence_count", &expected_sequence_count,
        py::arg("duration_s"), py::arg("fs") = 16000.0, py::arg("n_fft") = 256,
        py::arg("seq_len") = 31);

  // ---- classical baselines ---------------------------------------------
  m.def(
      "srp_phat",
      [](const std::vector<double>& d1, const std::vector<double>& d2,
         const std::vector<double>& grid_deg, double mic_spacing, double fs,
         int n_fft) {
        const SteeringContext ctx =
            make_steering_context(grid_from(grid_deg), mic_spacing, fs, n_fft);
        return srp_phat(frames_from(d1, fs, n_fft), frames_from(d2, fs, n_fft),
                        ctx);
      },
      py::arg("d1"), py::arg("d2"), py::arg("grid_deg"),
      py::arg("mic_spacing") = 0.085, py::arg("fs") = 16000.0,
      py::arg("n_fft") = 256, "SRP-PHAT estimate -> (grid index, angle)");
  m.def(
      "music",
      [](const std::vector<double>& d1, const std::vector<double>& d2,
         const std::vector<double>& grid_deg, double mic_spacing, double fs,
         int n_fft) {
        const SteeringContext ctx =
            make_steering_context(grid_from(grid_deg), mic_spacing, fs, n_fft);
        return music(frames_from(d1, fs, n_fft), frames_from(d2, fs, n_fft),
                     ctx, 1);
      },
      py::arg("d1"), py::arg("d2"), py::arg("grid_deg"),
      py::arg("mic_spacing") = 0.085, py::arg("fs") = 16000.0,
      py::arg("n_fft") = 256, "MUSIC estimate -> (grid index, angle)");

  // ---- evaluation ------------------------------------------------------
  m.def("mae", &mae, py::arg("estimates_deg"), py::arg("truths_deg"));
  m.def("accuracy", &accuracy, py::arg("estimates_idx"), py::arg("truth_idx"));
  m.def(
      "delay_analysis",
      [](const std::vector<double>& phase_rad, int n_bins, int seq_len,
         int n_fft, double fs) {
        const DelayAnalysis da =
            delay_analysis(phase_rad, n_bins, seq_len, n_fft, fs);
        return std::make_tuple(da.frame_delays, da.frame_delays_s,
                               da.mean_profile);
      },
      py::arg("phase_rad"), py::arg("n_bins"), py::arg("seq_len"),
      py::arg("n_fft") = 256, py::arg("fs") = 16000.0,
      "(per-frame lags, lags in seconds, centered mean |IFFT| profile)");
  m.def(
      "phase_histogram",
      [](const std::vector<std::vector<float>>& seqs, int n_bins, int seq_len,
         int bins) {
        std::vector<RtfPhaseSequence> s;
        s.reserve(seqs.size());
        for (const std::vector<float>& x : seqs) {
          s.push_back(seq_from(x, n_bins, seq_len));
        }
        return phase_histogram(s, -1, bins);
      },
      py::arg("sequences"), py::arg("n_bins"), py::arg("seq_len"),
      py::arg("bins") = 64);

  // ---- trained models ----------------------------------------------------
  py::class_<VaeSslModel>(m, "VaeModel")
      .def_static("load", &load_model, py::arg("path"))
      .def_property_readonly(
          "grid", [](const VaeSslModel& mm) { return mm.grid.angles_deg; })
      .def_property_readonly(
          "n_bins", [](const VaeSslModel& mm) { return mm.dims.n_bins; })
      .def_property_readonly(
          "seq_len", [](const VaeSslModel& mm) { return mm.dims.seq_len; })
      .def(
          "estimate",
          [](const VaeSslModel& mm, const std::vector<float>& x) {
            return estimate_doa(mm, seq_from(x, mm.dims.n_bins,
                                             mm.dims.seq_len));
          },
          py::arg("phase_seq"), "(grid index, angle) for a flat K x P input")
      .def(
          "generate",
          [](const VaeSslModel& mm, int doa_index, int n, uint64_t seed) {
            const GenerateResult g = conditional_generate(mm, doa_index, n, seed);
            std::vector<std::vector<float>> samples, means;
            for (const RtfPhaseSequence& s : g.samples) samples.push_back(s.x);
            for (const RtfPhaseSequence& s : g.means) means.push_back(s.x);
            return std::make_pair(samples, means);
          },
          py::arg("doa_index"), py::arg("n") = 1, py::arg("seed") = 0,
          "(samples, decoder means) as flat K x P phase/pi rows");

  py::class_<CnnModel>(m, "CnnModel")
      .def_static("load", &load_cnn_model, py::arg("path"))
      .def_property_readonly(
          "grid", [](const CnnModel& mm) { return mm.grid.angles_deg; })
      .def(
          "estimate",
          [](const CnnModel& mm, const std::vector<float>& x) {
            return cnn_predict(mm, seq_from(x, mm.dims.n_bins,
                                            mm.dims.seq_len));
          },
          py::arg("phase_seq"));
}
