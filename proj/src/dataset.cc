// src/dataset.cc
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#include "rtfdoa/dataset.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "rtfdoa/rng.h"

namespace rtfdoa {

int DoaGrid::nearest_index(double deg) const {
  validate();
  int best = 0;
  double best_dist = std::abs(angles_deg[0] - deg);
  for (int t = 1; t < t_count(); ++t) {
    const double d = std::abs(angles_deg[static_cast<size_t>(t)] - deg);
    if (d < best_dist) {
      best = t;
      best_dist = d;
    }
  }
  return best;
}

void DoaGrid::validate() const {
  if (t_count() < 2) throw std::invalid_argument("DoaGrid: need at least two angles");
  for (size_t i = 0; i + 1 < angles_deg.size(); ++i) {
    if (!(angles_deg[i] < angles_deg[i + 1])) {
      throw std::invalid_argument("DoaGrid: angles must be strictly increasing");
    }
  }
  if (angles_deg.front() < -90.0 || angles_deg.back() > 90.0) {
    throw std::invalid_argument("DoaGrid: angles must lie in [-90, 90]");
  }
}

DoaGrid make_uniform_grid(double min_deg, double max_deg, int t_count) {
  if (t_count < 2) throw std::invalid_argument("make_uniform_grid: need at least two angles");
  if (!(min_deg < max_deg)) throw std::invalid_argument("make_uniform_grid: min must be below max");
  DoaGrid grid;
  grid.angles_deg.resize(static_cast<size_t>(t_count));
  for (int t = 0; t < t_count; ++t) {
    grid.angles_deg[static_cast<size_t>(t)] =
        min_deg + (max_deg - min_deg) * t / (t_count - 1);
  }
  grid.validate();
  return grid;
}

namespace {

// Majority frame DOA of the window [start, start+P); ties go to the DOA of
// the center frame.
int window_truth(const std::vector<int>& frame_doa, int start, int seq_len,
                 int t_count) {
  std::vector<int> votes(static_cast<size_t>(t_count), 0);
  for (int p = 0; p < seq_len; ++p) {
    ++votes[static_cast<size_t>(frame_doa[static_cast<size_t>(start + p)])];
  }
  int best = 0;
  for (int t = 1; t < t_count; ++t) {
    if (votes[static_cast<size_t>(t)] > votes[static_cast<size_t>(best)]) best = t;
  }
  const int center = frame_doa[static_cast<size_t>(start + seq_len / 2)];
  if (votes[static_cast<size_t>(center)] == votes[static_cast<size_t>(best)]) return center;
  return best;
}

RtfPhaseSequence make_sequence(const std::vector<float>& frames, int n_bins,
                               int start, int seq_len, int doa_index) {
  RtfPhaseSequence seq;
  seq.n_bins = n_bins;
  seq.seq_len = seq_len;
  seq.start_frame = start;
  seq.doa_index = doa_index;
  seq.x.resize(static_cast<size_t>(n_bins) * seq_len);
  for (int p = 0; p < seq_len; ++p) {
    const float* row = frames.data() + static_cast<size_t>(start + p) * n_bins;
    for (int k = 0; k < n_bins; ++k) {
      seq.x[static_cast<size_t>(k) * seq_len + p] = row[k];
    }
  }
  return seq;
}

template <typename T>
void write_pod(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
void read_pod(std::ifstream& in, T* value) {
  in.read(reinterpret_cast<char*>(value), sizeof(T));
  if (!in) throw std::runtime_error("dataset cache: truncated file");
}

}  // namespace

Dataset build_dataset(const DoaGrid& grid,
                      const std::vector<std::vector<float>>& frames_per_doa,
                      int n_bins, int seq_len, int labeled_total,
                      uint64_t seed) {
  grid.validate();
  const int t_count = grid.t_count();
  if (static_cast<int>(frames_per_doa.size()) != t_count) {
    throw std::invalid_argument("build_dataset: one frame matrix per DOA required");
  }
  if (n_bins < 1 || seq_len < 1) {
    throw std::invalid_argument("build_dataset: bad feature dimensions");
  }
  if (labeled_total < 0 || labeled_total % t_count != 0) {
    throw std::invalid_argument("build_dataset: J must be a non-negative multiple of T");
  }
  const int per_doa = labeled_total / t_count;

  // Concatenate per-DOA frame matrices into one global stream.
  std::vector<float> frames;
  std::vector<int> frame_doa;
  std::vector<int> offsets(static_cast<size_t>(t_count), 0);
  for (int t = 0; t < t_count; ++t) {
    const std::vector<float>& mat = frames_per_doa[static_cast<size_t>(t)];
    if (mat.size() % static_cast<size_t>(n_bins) != 0) {
      throw std::invalid_argument("build_dataset: frame matrix size not a multiple of K");
    }
    const int f_count = static_cast<int>(mat.size() / static_cast<size_t>(n_bins));
    if (f_count - seq_len + 1 < per_doa) {
      throw std::invalid_argument("build_dataset: labeled request exceeds per-DOA pool");
    }
    offsets[static_cast<size_t>(t)] = static_cast<int>(frame_doa.size());
    frames.insert(frames.end(), mat.begin(), mat.end());
    frame_doa.insert(frame_doa.end(), static_cast<size_t>(f_count), t);
  }
  const int total_frames = static_cast<int>(frame_doa.size());
  if (total_frames < seq_len) {
    throw std::invalid_argument("build_dataset: not enough frames for one sequence");
  }
  const int total_windows = total_frames - seq_len + 1;

  // Draw J/T labeled windows per DOA, uniformly without replacement, from the
  // windows fully inside that DOA's span.
  Rng rng(seed, 0xDA7A);
  std::vector<uint8_t> is_labeled(static_cast<size_t>(total_windows), 0);
  Dataset dataset;
  dataset.train.grid = grid;
  for (int t = 0; t < t_count; ++t) {
    const int f_count =
        static_cast<int>(frames_per_doa[static_cast<size_t>(t)].size() /
                         static_cast<size_t>(n_bins));
    const int pool = f_count - seq_len + 1;
    std::vector<int> order(static_cast<size_t>(pool));
    for (int i = 0; i < pool; ++i) order[static_cast<size_t>(i)] = i;
    for (int i = 0; i < per_doa; ++i) {  // partial Fisher-Yates
      const int j = i + static_cast<int>(rng.below(static_cast<uint64_t>(pool - i)));
      std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
    }
    std::sort(order.begin(), order.begin() + per_doa);
    for (int i = 0; i < per_doa; ++i) {
      const int start = offsets[static_cast<size_t>(t)] + order[static_cast<size_t>(i)];
      is_labeled[static_cast<size_t>(start)] = 1;
      dataset.train.labeled.push_back(make_sequence(frames, n_bins, start, seq_len, t));
    }
  }

  // Every remaining stride-1 window (boundary straddlers included) is
  // unlabeled; its truth is recorded only in the sealed evaluation list.
  for (int start = 0; start < total_windows; ++start) {
    if (is_labeled[static_cast<size_t>(start)]) continue;
    dataset.train.unlabeled.push_back(make_sequence(frames, n_bins, start, seq_len, -1));
    dataset.held_out_truth.push_back(window_truth(frame_doa, start, seq_len, t_count));
  }
  return dataset;
}

void save_dataset_cache(const std::string& path, const Dataset& dataset) {
  const TrainSet& train = dataset.train;
  if (dataset.held_out_truth.size() != train.unlabeled.size()) {
    throw std::invalid_argument("save_dataset_cache: truth/unlabeled size mismatch");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_dataset_cache: cannot open " + path);
  out.write("RTFD", 4);
  write_pod(out, static_cast<uint32_t>(1));  // version
  write_pod(out, static_cast<uint32_t>(train.grid.t_count()));
  for (double a : train.grid.angles_deg) write_pod(out, a);
  const int n_bins = train.labeled.empty()
                         ? (train.unlabeled.empty() ? 0 : train.unlabeled[0].n_bins)
                         : train.labeled[0].n_bins;
  const int seq_len = train.labeled.empty()
                          ? (train.unlabeled.empty() ? 0 : train.unlabeled[0].seq_len)
                          : train.labeled[0].seq_len;
  write_pod(out, static_cast<uint32_t>(n_bins));
  write_pod(out, static_cast<uint32_t>(seq_len));
  write_pod(out, static_cast<uint32_t>(train.labeled.size()));
  write_pod(out, static_cast<uint32_t>(train.unlabeled.size()));
  auto write_seq = [&](const RtfPhaseSequence& seq, uint8_t label) {
    if (seq.n_bins != n_bins || seq.seq_len != seq_len) {
      throw std::invalid_argument("save_dataset_cache: inconsistent sequence shape");
    }
    write_pod(out, label);
    write_pod(out, static_cast<int32_t>(seq.start_frame));
    out.write(reinterpret_cast<const char*>(seq.x.data()),
              static_cast<std::streamsize>(seq.x.size() * sizeof(float)));
  };
  for (const RtfPhaseSequence& seq : train.labeled) {
    write_seq(seq, static_cast<uint8_t>(seq.doa_index));
  }
  for (const RtfPhaseSequence& seq : train.unlabeled) write_seq(seq, 255);
  if (!out) throw std::runtime_error("save_dataset_cache: write failed for " + path);
  out.close();

  nlohmann::json truth;
  truth["held_out_truth"] = dataset.held_out_truth;
  std::ofstream side(path + ".truth.json");
  if (!side) throw std::runtime_error("save_dataset_cache: cannot open truth sidecar");
  side << truth.dump();
  if (!side) throw std::runtime_error("save_dataset_cache: sidecar write failed");
}

Dataset load_dataset_cache(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_dataset_cache: cannot open " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "RTFD", 4) != 0) {
    throw std::runtime_error("load_dataset_cache: bad magic");
  }
  uint32_t version = 0;
  read_pod(in, &version);
  if (version != 1) throw std::runtime_error("load_dataset_cache: unsupported version");
  uint32_t t_count = 0;
  read_pod(in, &t_count);
  Dataset dataset;
  dataset.train.grid.angles_deg.resize(t_count);
  for (uint32_t t = 0; t < t_count; ++t) read_pod(in, &dataset.train.grid.angles_deg[t]);
  dataset.train.grid.validate();
  uint32_t n_bins = 0, seq_len = 0, n_labeled = 0, n_unlabeled = 0;
  read_pod(in, &n_bins);
  read_pod(in, &seq_len);
  read_pod(in, &n_labeled);
  read_pod(in, &n_unlabeled);
  auto read_seq = [&](int expect_label) {
    uint8_t label = 0;
    int32_t start = 0;
    read_pod(in, &label);
    read_pod(in, &start);
    RtfPhaseSequence seq;
    seq.n_bins = static_cast<int>(n_bins);
    seq.seq_len = static_cast<int>(seq_len);
    seq.start_frame = start;
    seq.doa_index = label == 255 ? -1 : static_cast<int>(label);
    if (expect_label >= 0 && seq.doa_index < 0) {
      throw std::runtime_error("load_dataset_cache: unlabeled entry in labeled block");
    }
    if (expect_label < 0 && seq.doa_index >= 0) {
      throw std::runtime_error("load_dataset_cache: labeled entry in unlabeled block");
    }
    if (seq.doa_index >= static_cast<int>(t_count)) {
      throw std::runtime_error("load_dataset_cache: label out of range");
    }
    seq.x.resize(static_cast<size_t>(n_bins) * seq_len);
    in.read(reinterpret_cast<char*>(seq.x.data()),
            static_cast<std::streamsize>(seq.x.size() * sizeof(float)));
    if (!in) throw std::runtime_error("dataset cache: truncated file");
    return seq;
  };
  dataset.train.labeled.reserve(n_labeled);
  for (uint32_t i = 0; i < n_labeled; ++i) dataset.train.labeled.push_back(read_seq(0));
  dataset.train.unlabeled.reserve(n_unlabeled);
  for (uint32_t i = 0; i < n_unlabeled; ++i) dataset.train.unlabeled.push_back(read_seq(-1));

  std::ifstream side(path + ".truth.json");
  if (side) {
    nlohmann::json truth = nlohmann::json::parse(side, nullptr, false);
    if (!truth.is_discarded() && truth.contains("held_out_truth")) {
      dataset.held_out_truth = truth["held_out_truth"].get<std::vector<int>>();
    }
  }
  if (!dataset.held_out_truth.empty() &&
      dataset.held_out_truth.size() != dataset.train.unlabeled.size()) {
    throw std::runtime_error("load_dataset_cache: sidecar truth size mismatch");
  }
  return dataset;
}

}  // namespace rtfdoa
