// include/rtfdoa/eval.h
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#ifndef RTFDOA_EVAL_H_
#define RTFDOA_EVAL_H_

#include <string>
#include <vector>

#include "rtfdoa/dataset.h"

namespace rtfdoa {

// Mean absolute error in degrees; truths may be off-grid continuous angles.
double mae(const std::vector<double>& estimates_deg,
           const std::vector<double>& truths_deg);

// 100 x fraction of exact index matches.
double accuracy(const std::vector<int>& estimates_idx,
                const std::vector<int>& truth_idx);

// Time-delay read-out from an RTF-phase sequence (phase in RADIANS, K x P
// row-major, bins 1..n_fft/2-1): each frame's phase is embedded as a
// unit-magnitude one-sided spectrum (DC and top bin set to 1), inverted with
// ifft_one_sided, and circularly centered so profile index i corresponds to
// lag i - n_fft/2; the per-frame delay is the integer lag of the magnitude
// peak.
struct DelayAnalysis {
  std::vector<int> frame_delays;       // peak lag per frame, in samples
  std::vector<double> frame_delays_s;  // the same delays in seconds
  std::vector<double> mean_profile;    // mean |IFFT| over frames, length n_fft
  int n_fft = 0;

  int lag_at(int index) const { return index - n_fft / 2; }
};
DelayAnalysis delay_analysis(const std::vector<double>& phase_rad, int n_bins,
                             int seq_len, int n_fft, double f_s);

// Unit-sum histogram of the de-normalized (x pi) phase entries over uniform
// bins spanning [-pi, pi].  doa >= 0 keeps only sequences with that label;
// doa = -1 uses every sequence.
std::vector<double> phase_histogram(const std::vector<RtfPhaseSequence>& seqs,
                                    int doa, int bins = 64);

struct EvalReport {
  std::string method;
  int j_labeled = 0;
  std::string split;  // train-unlabeled | validation | off-grid | off-range
  double mae_deg = 0.0;
  double accuracy_pct = 0.0;
  int n_sequences = 0;
};

// CSV with header method,J,split,mae_deg,accuracy_pct,n_sequences, rows
// ordered by (method, J, split) regardless of insertion order.
void emit_report(const std::vector<EvalReport>& reports,
                 const std::string& path);
std::vector<EvalReport> read_report(const std::string& path);

}  // namespace rtfdoa

#endif  // RTFDOA_EVAL_H_
