// include/rtfdoa/dataset.h
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#ifndef RTFDOA_DATASET_H_
#define RTFDOA_DATASET_H_

#include <cstdint>
#include <string>
#include <vector>

namespace rtfdoa {

// Candidate DOA grid: strictly increasing angles in [-90, 90] degrees.
struct DoaGrid {
  std::vector<double> angles_deg;

  int t_count() const { return static_cast<int>(angles_deg.size()); }
  double angle(int t) const { return angles_deg.at(static_cast<size_t>(t)); }
  // Index of the grid angle closest to deg (lowest index wins ties).
  int nearest_index(double deg) const;
  void validate() const;  // throws std::invalid_argument on bad grids
};

DoaGrid make_uniform_grid(double min_deg, double max_deg, int t_count);

// One RTF-phase sequence: x is a K x P row-major matrix of wrapped phase
// divided by pi, so every entry lies in [-1, 1].  doa_index is -1 when the
// sequence is unlabeled.
struct RtfPhaseSequence {
  std::vector<float> x;  // [K * P], row-major, k fastest over P columns
  int n_bins = 0;        // K
  int seq_len = 0;       // P
  int doa_index = -1;
  int start_frame = 0;

  float at(int k, int p) const { return x[static_cast<size_t>(k) * seq_len + p]; }
};

// Training view of a dataset.  Deliberately carries no ground truth for the
// unlabeled sequences so that training and model selection cannot read it.
struct TrainSet {
  DoaGrid grid;
  std::vector<RtfPhaseSequence> labeled;    // doa_index in [0, T)
  std::vector<RtfPhaseSequence> unlabeled;  // doa_index == -1
};

// Full dataset: the training view plus the sealed evaluation truth, which is
// index-aligned with train.unlabeled and must only be read by evaluation.
struct Dataset {
  TrainSet train;
  std::vector<int> held_out_truth;
};

// Assembles a dataset from per-DOA RTF-phase frame matrices.
//
// frames_per_doa[d] holds F_d frames of DOA grid.angles_deg[d], row-major
// [F_d x n_bins] with phase/pi entries.  The per-DOA matrices are
// concatenated in grid order into one global frame stream; every stride-1
// window of P frames is a candidate sequence, so windows straddling a DOA
// boundary exist.  J/T labeled sequences per DOA are drawn uniformly without
// replacement from the windows lying fully inside that DOA's span; all
// remaining windows become unlabeled.  A straddling window's held-out truth
// is the majority frame DOA, with ties resolved by the center frame.
// Deterministic for a fixed seed.
Dataset build_dataset(const DoaGrid& grid,
                      const std::vector<std::vector<float>>& frames_per_doa,
                      int n_bins, int seq_len, int labeled_total,
                      uint64_t seed);

// Binary dataset cache ("RTFD"), plus a sidecar file "<path>.truth.json"
// holding the sealed evaluation truth.
void save_dataset_cache(const std::string& path, const Dataset& dataset);
Dataset load_dataset_cache(const std::string& path);

}  // namespace rtfdoa

#endif  // RTFDOA_DATASET_H_
