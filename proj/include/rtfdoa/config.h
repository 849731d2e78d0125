// include/rtfdoa/config.h
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#ifndef RTFDOA_CONFIG_H_
#define RTFDOA_CONFIG_H_

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "rtfdoa/dataset.h"

namespace rtfdoa {

// INI-style run configuration: [section] key = value lines, '#'/';' comments.
// Unknown sections or keys are rejected by name; flags override fields after
// loading.  Defaults mirror the reference experiment (19 DOAs at 10 deg,
// r = 0.085 m, RT60 = 0.5 s, n_fft = 256, P = 31, lr = 5e-5, batch 256).

struct RoomSection {
  std::array<double, 3> dims{6.0, 5.0, 3.0};
  double rt60 = 0.5;  // 0 = anechoic (free-space propagation)
  double mic_spacing = 0.085;
  double range = 1.5;
  double fs = 16000.0;
  double snr_db = std::numeric_limits<double>::infinity();
  double duration_s = 5.0;
  std::string source = "speech";  // speech | white | tone
  double tone_hz = 500.0;
  int max_order = 40;
};

struct GridSection {
  double min_deg = -90.0;
  double max_deg = 90.0;
  int count = 19;
  std::vector<double> angles;  // explicit grid wins over min/max/count
};

struct StftSection {
  int n_fft = 256;
  int seq_len = 31;
};

struct TrainSection {
  int j_labeled = 152;  // multiple of the default 19-point grid
  double alpha = 1000.0;
  double lr = 5e-5;
  int batch = 256;
  int epochs = 6;
  uint64_t seed = 1;
  int latent_dim = 50;
  std::string likelihood = "truncated_normal";  // or "normal"
};

struct EvalSection {
  std::string splits = "train-unlabeled,validation";
  int n_off = 10;           // off-grid / off-range source count
  double off_range_m = 1.0;  // source range for the off-range split
};

struct PathsSection {
  std::string cache = "cache";
  std::string checkpoints = "checkpoints";
  std::string reports = "reports";
};

struct RunConfig {
  RoomSection room;
  GridSection grid;
  StftSection stft;
  TrainSection train;
  EvalSection eval;
  PathsSection paths;
};

// Parses + validates; RTFDOA_CACHE (when set) overrides [paths] cache.
// Errors are std::invalid_argument naming the offending section.key.
RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

// Cross-field validation shared by load and flag overrides.
void validate_config(const RunConfig& config);

DoaGrid config_grid(const RunConfig& config);

// Canonical key=value renderings of the config subsections that produce each
// cache artifact, and the FNV-1a hash used to stamp/check them.
std::string canonical_sim_text(const RunConfig& config);      // room + grid
std::string canonical_dataset_text(const RunConfig& config);  // + stft, J, seed
std::string canonical_train_text(const RunConfig& config);    // + train section
uint64_t fnv1a_hash(const std::string& text);
std::string config_hash_hex(const std::string& text);

}  // namespace rtfdoa

#endif  // RTFDOA_CONFIG_H_
