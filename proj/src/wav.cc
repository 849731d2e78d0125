// src/wav.cc
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#include "rtfdoa/wav.h"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace rtfdoa {

namespace {

struct FmtChunk {
  uint16_t format = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits = 0;
};

void write_u32(std::ofstream& f, uint32_t v) {
  f.write(reinterpret_cast<const char*>(&v), 4);
}
void write_u16(std::ofstream& f, uint16_t v) {
  f.write(reinterpret_cast<const char*>(&v), 2);
}

// Interleaved float32 WAV with the given channel count.
void write_wav_f32(const std::string& path, const std::vector<float>& inter,
                   int channels, double rate) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("write_wav: cannot open " + path);
  const uint32_t data_bytes = static_cast<uint32_t>(inter.size() * 4);
  f.write("RIFF", 4);
  write_u32(f, 36 + data_bytes);
  f.write("WAVE", 4);
  f.write("fmt ", 4);
  write_u32(f, 16);
  write_u16(f, 3);  // IEEE float
  write_u16(f, static_cast<uint16_t>(channels));
  write_u32(f, static_cast<uint32_t>(rate));
  write_u32(f, static_cast<uint32_t>(rate) * channels * 4);
  write_u16(f, static_cast<uint16_t>(channels * 4));
  write_u16(f, 32);
  f.write("data", 4);
  write_u32(f, data_bytes);
  f.write(reinterpret_cast<const char*>(inter.data()), data_bytes);
  if (!f) throw std::runtime_error("write_wav: write failed for " + path);
}

// Parses the RIFF container; returns interleaved samples as doubles.
void read_wav_file(const std::string& path, FmtChunk* fmt,
                   std::vector<double>* inter) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("load_wav: cannot open " + path);
  char id[4];
  uint32_t riff_size = 0;
  f.read(id, 4);
  f.read(reinterpret_cast<char*>(&riff_size), 4);
  if (!f || std::memcmp(id, "RIFF", 4) != 0) {
    throw std::runtime_error("load_wav: not a RIFF file: " + path);
  }
  f.read(id, 4);
  if (!f || std::memcmp(id, "WAVE", 4) != 0) {
    throw std::runtime_error("load_wav: not a WAVE file: " + path);
  }
  bool have_fmt = false, have_data = false;
  std::vector<char> raw;
  while (f.read(id, 4)) {
    uint32_t size = 0;
    f.read(reinterpret_cast<char*>(&size), 4);
    if (!f) break;
    if (std::memcmp(id, "fmt ", 4) == 0) {
      std::vector<char> buf(size);
      f.read(buf.data(), size);
      if (size < 16) throw std::runtime_error("load_wav: short fmt chunk");
      std::memcpy(&fmt->format, buf.data() + 0, 2);
      std::memcpy(&fmt->channels, buf.data() + 2, 2);
      std::memcpy(&fmt->sample_rate, buf.data() + 4, 4);
      std::memcpy(&fmt->bits, buf.data() + 14, 2);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      raw.resize(size);
      f.read(raw.data(), size);
      have_data = true;
    } else {
      f.seekg(size + (size & 1), std::ios::cur);
      continue;
    }
    if (size & 1) f.seekg(1, std::ios::cur);
  }
  if (!have_fmt || !have_data) {
    throw std::runtime_error("load_wav: missing fmt/data chunk in " + path);
  }
  if (fmt->format == 1 && fmt->bits == 16) {
    const size_t n = raw.size() / 2;
    inter->resize(n);
    for (size_t i = 0; i < n; ++i) {
      int16_t v;
      std::memcpy(&v, raw.data() + 2 * i, 2);
      (*inter)[i] = static_cast<double>(v) / 32768.0;
    }
  } else if (fmt->format == 3 && fmt->bits == 32) {
    const size_t n = raw.size() / 4;
    inter->resize(n);
    for (size_t i = 0; i < n; ++i) {
      float v;
      std::memcpy(&v, raw.data() + 4 * i, 4);
      (*inter)[i] = v;
    }
  } else {
    throw std::runtime_error("load_wav: unsupported codec (need PCM16 or float32): " +
                             path);
  }
}

}  // namespace

RealSignal load_wav(const std::string& path) {
  FmtChunk fmt;
  std::vector<double> inter;
  read_wav_file(path, &fmt, &inter);
  if (fmt.channels != 1) {
    throw std::runtime_error("load_wav: expected mono, got " +
                             std::to_string(fmt.channels) + " channels: " + path);
  }
  RealSignal out;
  out.sample_rate_hz = fmt.sample_rate;
  out.samples = std::move(inter);
  return out;
}

void write_wav(const std::string& path, const RealSignal& signal) {
  std::vector<float> inter(signal.samples.begin(), signal.samples.end());
  write_wav_f32(path, inter, 1, signal.sample_rate_hz);
}

void write_wav_pair(const std::string& path, const std::vector<double>& ch1,
                    const std::vector<double>& ch2, double sample_rate_hz) {
  if (ch1.size() != ch2.size()) {
    throw std::invalid_argument("write_wav_pair: channel lengths differ");
  }
  std::vector<float> inter(ch1.size() * 2);
  for (size_t i = 0; i < ch1.size(); ++i) {
    inter[2 * i] = static_cast<float>(ch1[i]);
    inter[2 * i + 1] = static_cast<float>(ch2[i]);
  }
  write_wav_f32(path, inter, 2, sample_rate_hz);
}

void load_wav_pair(const std::string& path, std::vector<double>* ch1,
                   std::vector<double>* ch2, double* sample_rate_hz) {
  FmtChunk fmt;
  std::vector<double> inter;
  read_wav_file(path, &fmt, &inter);
  if (fmt.channels != 2) {
    throw std::runtime_error("load_wav_pair: expected 2 channels in " + path);
  }
  const size_t n = inter.size() / 2;
  ch1->resize(n);
  ch2->resize(n);
  for (size_t i = 0; i < n; ++i) {
    (*ch1)[i] = inter[2 * i];
    (*ch2)[i] = inter[2 * i + 1];
  }
  *sample_rate_hz = fmt.sample_rate;
}

}  // namespace rtfdoa
