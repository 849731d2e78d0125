// src/params.cc
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#include "rtfdoa/params.h"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace rtfdoa {

namespace {

constexpr char kMagic[4] = {'R', 'T', 'F', 'N'};
constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& f, T v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& f, const std::string& what) {
  T v{};
  f.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!f) throw std::runtime_error("checkpoint: truncated reading " + what);
  return v;
}

}  // namespace

void checkpoint_save(const ParameterStore<float>& store,
                     const std::map<std::string, std::string>& metadata,
                     const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint_save: cannot open " + path);
  f.write(kMagic, 4);
  put<uint32_t>(f, kVersion);
  put<uint32_t>(f, static_cast<uint32_t>(store.size()));
  for (const auto& [name, p] : store) {
    put<uint16_t>(f, static_cast<uint16_t>(name.size()));
    f.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<uint8_t>(f, 0);  // f32
    put<uint8_t>(f, static_cast<uint8_t>(p.value.shape.size()));
    for (int d : p.value.shape) put<uint32_t>(f, static_cast<uint32_t>(d));
    f.write(reinterpret_cast<const char*>(p.value.data.data()),
            static_cast<std::streamsize>(p.value.size() * sizeof(float)));
  }
  std::string meta;
  for (const auto& [k, v] : metadata) meta += k + "=" + v + "\n";
  put<uint32_t>(f, static_cast<uint32_t>(meta.size()));
  f.write(meta.data(), static_cast<std::streamsize>(meta.size()));
  if (!f) throw std::runtime_error("checkpoint_save: write failed for " + path);
}

ParameterStore<float> checkpoint_load(const std::string& path,
                                      std::map<std::string, std::string>* metadata) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("checkpoint_load: cannot open " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("checkpoint_load: bad magic in " + path);
  }
  const auto version = get<uint32_t>(f, "version");
  if (version != kVersion) {
    throw std::runtime_error("checkpoint_load: unsupported version " +
                             std::to_string(version));
  }
  const auto count = get<uint32_t>(f, "tensor count");
  ParameterStore<float> store;
  for (uint32_t i = 0; i < count; ++i) {
    const auto name_len = get<uint16_t>(f, "name length");
    std::string name(name_len, '\0');
    f.read(name.data(), name_len);
    if (!f) throw std::runtime_error("checkpoint: truncated reading name");
    const auto dtype = get<uint8_t>(f, "dtype");
    if (dtype != 0) {
      throw std::runtime_error("checkpoint_load: unsupported dtype for " + name);
    }
    const auto rank = get<uint8_t>(f, "rank");
    std::vector<int> shape(rank);
    for (auto& d : shape) d = static_cast<int>(get<uint32_t>(f, "dim"));
    Tensor<float>& t = store.create(name, shape);
    f.read(reinterpret_cast<char*>(t.data.data()),
           static_cast<std::streamsize>(t.size() * sizeof(float)));
    if (!f) throw std::runtime_error("checkpoint: truncated reading data of " + name);
  }
  const auto meta_len = get<uint32_t>(f, "metadata length");
  std::string meta(meta_len, '\0');
  f.read(meta.data(), meta_len);
  if (!f) throw std::runtime_error("checkpoint: truncated reading metadata");
  if (metadata) {
    metadata->clear();
    size_t pos = 0;
    while (pos < meta.size()) {
      size_t nl = meta.find('\n', pos);
      if (nl == std::string::npos) nl = meta.size();
      const std::string line = meta.substr(pos, nl - pos);
      const size_t eq = line.find('=');
      if (eq != std::string::npos) {
        (*metadata)[line.substr(0, eq)] = line.substr(eq + 1);
      }
      pos = nl + 1;
    }
  }
  return store;
}

}  // namespace rtfdoa
