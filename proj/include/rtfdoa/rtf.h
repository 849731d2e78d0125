// include/rtfdoa/rtf.h
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#ifndef RTFDOA_RTF_H_
#define RTFDOA_RTF_H_

#include <complex>
#include <optional>
#include <vector>

#include "rtfdoa/dataset.h"
#include "rtfdoa/signal.h"

namespace rtfdoa {

// Wraps an angle to the principal interval [-pi, pi].
double wrap_phase(double phi);

// Instantaneous relative transfer function of one frame:
//   h(k) = d2(k) * conj(d1(k)) / (|d1(k)|^2 + 1e-12)
// over all K_full = n_fft/2 + 1 one-sided bins.
std::vector<cplx> instantaneous_rtf(const StftFrames& frames1,
                                    const StftFrames& frames2,
                                    int frame_index);

// Spectrally averaged RTF over the frame set:
//   h(k) = sum_s d2 * conj(d1) / (sum_s |d1|^2 + 1e-12)
std::vector<cplx> spectrally_averaged_rtf(const StftFrames& frames1,
                                          const StftFrames& frames2,
                                          const std::vector<int>& frame_set);

// One frame of pi-normalized RTF phase restricted to bins 1..K,
// K = n_fft/2 - 1 (DC and the top bin dropped).
std::vector<float> phase_frame(const StftFrames& frames1,
                               const StftFrames& frames2, int frame_index);

// All frames stacked row-major [F x K]; convenience for dataset building.
std::vector<float> phase_frames(const StftFrames& frames1,
                                const StftFrames& frames2);

// Sequence of P consecutive phase frames starting at `start`:
// x[k-1, p] = arg(h_{start+p}(k)) / pi for bins k = 1..K.
RtfPhaseSequence phase_sequence(const StftFrames& frames1,
                                const StftFrames& frames2, int start,
                                int seq_len);

// Number of stride-1 RTF-phase sequences in a segment of duration_s seconds:
//   N_seg = floor(2 * f_s * t / n_fft) - P
// Throws std::invalid_argument when the segment yields fewer than one.
int expected_sequence_count(double duration_s, double sample_rate_hz,
                            int n_fft, int seq_len);

// Free-space RTF phase at f_hz for a source at theta_deg (unwrapped):
//   2 * pi * f * r * sin(theta) / c
double free_space_rtf_phase(double f_hz, double theta_deg, double mic_dist_m,
                            double speed_of_sound);

// Lowest frequency whose free-space RTF phase wraps: c / (2 r |sin theta|).
// Empty at theta = 0 (no wrap below any finite frequency).
std::optional<double> phase_wrap_frequency(double theta_deg, double mic_dist_m,
                                           double speed_of_sound);

// Inter-microphone time delay tau = (r / c) * sin(theta), in seconds.
double expected_delay(double theta_deg, double mic_dist_m,
                      double speed_of_sound);

// Energy voice-activity mask over STFT frame positions: frame f is kept when
// its time-domain RMS over [f*hop, f*hop + n_fft) is within 40 dB of the
// loudest frame.  Intended for ingested recordings; synthetic sources skip it.
std::vector<uint8_t> energy_vad_mask(const RealSignal& signal, int n_fft,
                                     int hop);

// Removes the columns (frames) of `frames` whose mask entry is zero.
StftFrames filter_frames(const StftFrames& frames,
                         const std::vector<uint8_t>& keep);

// Joins frame matrices end to end along the frame axis (shared bin layout).
StftFrames concat_frames(const std::vector<StftFrames>& parts);

// Copies the frame columns [start, start + len) into a new frame matrix.
StftFrames window_frames(const StftFrames& frames, int start, int len);

}  // namespace rtfdoa

#endif  // RTFDOA_RTF_H_
