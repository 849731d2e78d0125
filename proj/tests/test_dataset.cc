// tests/test_dataset.cc
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtfdoa/dataset.h"

using namespace rtfdoa;

namespace {

// Frame matrix whose entries encode (doa, frame, bin) so sequences can be
// traced back to their source windows.
std::vector<float> coded_frames(int doa, int f_count, int n_bins) {
  std::vector<float> mat(static_cast<size_t>(f_count) * n_bins);
  for (int f = 0; f < f_count; ++f) {
    for (int k = 0; k < n_bins; ++k) {
      mat[static_cast<size_t>(f) * n_bins + k] =
          static_cast<float>(doa * 1000 + f + k * 0.001f);
    }
  }
  return mat;
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name)
      : path((std::filesystem::temp_directory_path() / name).string()) {}
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
    std::filesystem::remove(path + ".truth.json", ec);
  }
};

}  // namespace

TEST_CASE("grid helpers") {
  const DoaGrid g = make_uniform_grid(-90.0, 90.0, 19);
  CHECK_EQ(g.t_count(), 19);
  CHECK_EQ(g.angle(0), -90.0);
  CHECK_EQ(g.angle(18), 90.0);
  CHECK_EQ(g.angle(9), 0.0);
  CHECK_EQ(g.angles_deg[1] - g.angles_deg[0], doctest::Approx(10.0));

  CHECK_EQ(g.nearest_index(-90.0), 0);
  CHECK_EQ(g.nearest_index(14.0), 10);
  CHECK_EQ(g.nearest_index(5.0), 9);  // tie 0 vs 10 -> lowest index
  CHECK_EQ(g.nearest_index(200.0), 18);

  DoaGrid bad;
  bad.angles_deg = {0.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.angles_deg = {10.0, 10.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.angles_deg = {-100.0, 0.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  CHECK_THROWS_AS(make_uniform_grid(10.0, -10.0, 5), std::invalid_argument);
}

TEST_CASE("dataset splits windows into labeled and unlabeled pools") {
  DoaGrid grid;
  grid.angles_deg = {-30.0, 30.0};
  const int n_bins = 3, seq_len = 3, f_count = 10;
  const std::vector<std::vector<float>> frames = {
      coded_frames(0, f_count, n_bins), coded_frames(1, f_count, n_bins)};

  const Dataset ds = build_dataset(grid, frames, n_bins, seq_len, 4, 7);
  // 20 frames total -> 18 stride-1 windows; 4 labeled leaves 14 unlabeled.
  CHECK_EQ(ds.train.labeled.size(), 4u);
  CHECK_EQ(ds.train.unlabeled.size(), 14u);
  CHECK_EQ(ds.held_out_truth.size(), 14u);

  int per_doa[2] = {0, 0};
  for (const RtfPhaseSequence& s : ds.train.labeled) {
    REQUIRE(s.doa_index >= 0);
    REQUIRE(s.doa_index < 2);
    ++per_doa[s.doa_index];
    // Labeled windows never straddle the DOA boundary.
    const int lo = s.doa_index * f_count;
    CHECK(s.start_frame >= lo);
    CHECK(s.start_frame + seq_len <= lo + f_count);
    // Content matches the source frames (k-major layout).
    for (int p = 0; p < seq_len; ++p) {
      for (int k = 0; k < n_bins; ++k) {
        const float want = static_cast<float>(s.doa_index * 1000 +
                                              (s.start_frame - lo + p) +
                                              k * 0.001f);
        CHECK_EQ(s.at(k, p), want);
      }
    }
  }
  CHECK_EQ(per_doa[0], 2);
  CHECK_EQ(per_doa[1], 2);

  for (size_t i = 0; i < ds.train.unlabeled.size(); ++i) {
    const RtfPhaseSequence& s = ds.train.unlabeled[i];
    CHECK_EQ(s.doa_index, -1);
    const int truth = ds.held_out_truth[i];
    if (s.start_frame + seq_len <= f_count) {
      CHECK_EQ(truth, 0);
    } else if (s.start_frame >= f_count) {
      CHECK_EQ(truth, 1);
    } else if (s.start_frame == 8) {
      CHECK_EQ(truth, 0);  // frames {8,9,10}: majority in DOA 0
    } else {
      CHECK_EQ(s.start_frame, 9);
      CHECK_EQ(truth, 1);  // frames {9,10,11}: majority in DOA 1
    }
  }
}

TEST_CASE("dataset draw is deterministic in the seed") {
  DoaGrid grid;
  grid.angles_deg = {-30.0, 30.0};
  const std::vector<std::vector<float>> frames = {coded_frames(0, 40, 2),
                                                  coded_frames(1, 40, 2)};
  const Dataset a = build_dataset(grid, frames, 2, 5, 10, 42);
  const Dataset b = build_dataset(grid, frames, 2, 5, 10, 42);
  const Dataset c = build_dataset(grid, frames, 2, 5, 10, 43);

  REQUIRE_EQ(a.train.labeled.size(), b.train.labeled.size());
  bool same_as_b = true, same_as_c = true;
  for (size_t i = 0; i < a.train.labeled.size(); ++i) {
    same_as_b &= a.train.labeled[i].start_frame == b.train.labeled[i].start_frame;
    same_as_c &= a.train.labeled[i].start_frame == c.train.labeled[i].start_frame;
  }
  CHECK(same_as_b);
  CHECK_FALSE(same_as_c);
  CHECK(a.held_out_truth == b.held_out_truth);
}

TEST_CASE("straddler ties go to the center frame") {
  DoaGrid grid;
  grid.angles_deg = {-30.0, 30.0};
  const std::vector<std::vector<float>> frames = {coded_frames(0, 6, 1),
                                                  coded_frames(1, 6, 1)};
  // P = 4: window starting at 4 holds frames {4,5,6,7}, two per DOA; the
  // center frame (index 6) lies in DOA 1.
  const Dataset ds = build_dataset(grid, frames, 1, 4, 0, 0);
  bool checked = false;
  for (size_t i = 0; i < ds.train.unlabeled.size(); ++i) {
    if (ds.train.unlabeled[i].start_frame == 4) {
      CHECK_EQ(ds.held_out_truth[i], 1);
      checked = true;
    }
  }
  CHECK(checked);
}

TEST_CASE("dataset request validation") {
  DoaGrid grid;
  grid.angles_deg = {-30.0, 30.0};
  const std::vector<std::vector<float>> frames = {coded_frames(0, 10, 2),
                                                  coded_frames(1, 10, 2)};
  // J not a multiple of T.
  CHECK_THROWS_AS(build_dataset(grid, frames, 2, 3, 3, 0),
                  std::invalid_argument);
  // J/T exceeds the per-DOA pool of 8 windows.
  CHECK_THROWS_AS(build_dataset(grid, frames, 2, 3, 18, 0),
                  std::invalid_argument);
  // One frame matrix per DOA.
  CHECK_THROWS_AS(build_dataset(grid, {frames[0]}, 2, 3, 2, 0),
                  std::invalid_argument);
  // Matrix size must divide into rows of K bins.
  std::vector<std::vector<float>> ragged = frames;
  ragged[0].push_back(0.0f);
  CHECK_THROWS_AS(build_dataset(grid, ragged, 2, 3, 2, 0),
                  std::invalid_argument);
}

TEST_CASE("cache round-trip preserves the dataset and sealed truth") {
  DoaGrid grid;
  grid.angles_deg = {-60.0, 0.0, 60.0};
  const std::vector<std::vector<float>> frames = {coded_frames(0, 12, 4),
                                                  coded_frames(1, 12, 4),
                                                  coded_frames(2, 12, 4)};
  const Dataset ds = build_dataset(grid, frames, 4, 5, 6, 3);

  TempFile tmp("rtfdoa_test_dataset.rtfd");
  save_dataset_cache(tmp.path, ds);
  CHECK(std::filesystem::exists(tmp.path + ".truth.json"));

  const Dataset back = load_dataset_cache(tmp.path);
  CHECK(back.train.grid.angles_deg == ds.train.grid.angles_deg);
  REQUIRE_EQ(back.train.labeled.size(), ds.train.labeled.size());
  REQUIRE_EQ(back.train.unlabeled.size(), ds.train.unlabeled.size());
  CHECK(back.held_out_truth == ds.held_out_truth);
  for (size_t i = 0; i < ds.train.labeled.size(); ++i) {
    CHECK_EQ(back.train.labeled[i].doa_index, ds.train.labeled[i].doa_index);
    CHECK_EQ(back.train.labeled[i].start_frame,
             ds.train.labeled[i].start_frame);
    CHECK(back.train.labeled[i].x == ds.train.labeled[i].x);
  }
  for (size_t i = 0; i < ds.train.unlabeled.size(); ++i) {
    CHECK_EQ(back.train.unlabeled[i].doa_index, -1);
    CHECK(back.train.unlabeled[i].x == ds.train.unlabeled[i].x);
  }
}

TEST_CASE("cache loader rejects corrupted files") {
  DoaGrid grid;
  grid.angles_deg = {-30.0, 30.0};
  const std::vector<std::vector<float>> frames = {coded_frames(0, 8, 2),
                                                  coded_frames(1, 8, 2)};
  const Dataset ds = build_dataset(grid, frames, 2, 3, 2, 0);

  TempFile tmp("rtfdoa_test_dataset_bad.rtfd");
  save_dataset_cache(tmp.path, ds);
  {
    std::fstream f(tmp.path, std::ios::binary | std::ios::in | std::ios::out);
    f.write("XXXX", 4);
  }
  CHECK_THROWS_AS(load_dataset_cache(tmp.path), std::runtime_error);
  CHECK_THROWS_AS(load_dataset_cache("/nonexistent/rtfdoa_nope.rtfd"),
                  std::runtime_error);
}
