// tests/test_wav.cc
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtfdoa/wav.h"

using namespace rtfdoa;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name)
      : path((std::filesystem::temp_directory_path() / name).string()) {}
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path, ec);
  }
};

void put_u32(std::ofstream* f, uint32_t v) {
  f->write(reinterpret_cast<const char*>(&v), 4);
}
void put_u16(std::ofstream* f, uint16_t v) {
  f->write(reinterpret_cast<const char*>(&v), 2);
}

// Hand-assembled PCM16 mono file, independent of the writer under test.
void write_pcm16(const std::string& path, const std::vector<int16_t>& samples,
                 uint32_t fs, uint16_t channels) {
  std::ofstream f(path, std::ios::binary);
  const uint32_t data_bytes = static_cast<uint32_t>(samples.size() * 2);
  f.write("RIFF", 4);
  put_u32(&f, 36 + data_bytes);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  put_u32(&f, 16);
  put_u16(&f, 1);  // PCM
  put_u16(&f, channels);
  put_u32(&f, fs);
  put_u32(&f, fs * channels * 2);
  put_u16(&f, static_cast<uint16_t>(channels * 2));
  put_u16(&f, 16);
  f.write("data", 4);
  put_u32(&f, data_bytes);
  f.write(reinterpret_cast<const char*>(samples.data()), data_bytes);
}

}  // namespace

TEST_CASE("float32 mono round-trip") {
  TempFile tmp("rtfdoa_test_mono.wav");
  RealSignal s;
  s.sample_rate_hz = 16000.0;
  s.samples = {0.0, 0.25, -0.75, 1.0, -1.0, 0.125};
  write_wav(tmp.path, s);

  const RealSignal r = load_wav(tmp.path);
  CHECK_EQ(r.sample_rate_hz, 16000.0);
  REQUIRE_EQ(r.samples.size(), s.samples.size());
  for (size_t i = 0; i < s.samples.size(); ++i) {
    // Exact: these values are representable in float32.
    CHECK_EQ(r.samples[i], s.samples[i]);
  }
}

TEST_CASE("pcm16 scaling is 1/32768") {
  TempFile tmp("rtfdoa_test_pcm16.wav");
  write_pcm16(tmp.path, {0, 16384, -32768, 32767}, 8000, 1);
  const RealSignal r = load_wav(tmp.path);
  CHECK_EQ(r.sample_rate_hz, 8000.0);
  REQUIRE_EQ(r.samples.size(), 4u);
  CHECK_EQ(r.samples[0], 0.0);
  CHECK_EQ(r.samples[1], 0.5);
  CHECK_EQ(r.samples[2], -1.0);
  CHECK_EQ(r.samples[3], doctest::Approx(32767.0 / 32768.0).epsilon(1e-12));
}

TEST_CASE("mono loader rejects stereo and missing files") {
  TempFile tmp("rtfdoa_test_stereo_reject.wav");
  write_pcm16(tmp.path, {0, 0, 100, -100}, 16000, 2);
  CHECK_THROWS_AS(load_wav(tmp.path), std::runtime_error);
  CHECK_THROWS_AS(load_wav("/nonexistent/rtfdoa_nope.wav"),
                  std::runtime_error);
}

TEST_CASE("stereo pair round-trip") {
  TempFile tmp("rtfdoa_test_pair.wav");
  std::vector<double> a = {0.0, 0.5, -0.5, 0.0625};
  std::vector<double> b = {1.0, -1.0, 0.25, 0.0};
  write_wav_pair(tmp.path, a, b, 16000.0);

  std::vector<double> a2, b2;
  double fs = 0.0;
  load_wav_pair(tmp.path, &a2, &b2, &fs);
  CHECK_EQ(fs, 16000.0);
  REQUIRE_EQ(a2.size(), a.size());
  REQUIRE_EQ(b2.size(), b.size());
  for (size_t i = 0; i < a.size(); ++i) {
    CHECK_EQ(a2[i], a[i]);
    CHECK_EQ(b2[i], b[i]);
  }
}

TEST_CASE("pair loader rejects mono input") {
  TempFile tmp("rtfdoa_test_pair_mono.wav");
  RealSignal s;
  s.sample_rate_hz = 16000.0;
  s.samples = {0.0, 0.5};
  write_wav(tmp.path, s);
  std::vector<double> a, b;
  double fs = 0.0;
  CHECK_THROWS_AS(load_wav_pair(tmp.path, &a, &b, &fs), std::runtime_error);
}
