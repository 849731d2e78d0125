// include/rtfdoa/params.h
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#ifndef RTFDOA_PARAMS_H_
#define RTFDOA_PARAMS_H_

#include <cmath>
#include <map>
#include <string>

#include "rtfdoa/rng.h"
#include "rtfdoa/tensor.h"

namespace rtfdoa {

template <typename S>
struct Param {
  Tensor<S> value, grad, adam_m, adam_v;
};

// Named trainable parameters with their gradient and Adam state.  Ordered map
// so iteration (and thus every reduction over parameters) is name-sorted and
// independent of creation order.
template <typename S>
class ParameterStore {
 public:
  Tensor<S>& create(const std::string& name, std::vector<int> shape) {
    if (params_.count(name)) {
      throw std::invalid_argument("param already exists: " + name);
    }
    Param<S>& p = params_[name];
    p.value = Tensor<S>(shape);
    p.grad = Tensor<S>(shape);
    p.adam_m = Tensor<S>(shape);
    p.adam_v = Tensor<S>(std::move(shape));
    return p.value;
  }

  bool has(const std::string& name) const { return params_.count(name) > 0; }

  Param<S>& at(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::invalid_argument("no such param: " + name);
    return it->second;
  }
  const Param<S>& at(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::invalid_argument("no such param: " + name);
    return it->second;
  }

  Tensor<S>& value(const std::string& name) { return at(name).value; }
  const Tensor<S>& value(const std::string& name) const { return at(name).value; }
  Tensor<S>& grad(const std::string& name) { return at(name).grad; }

  void zero_grad() {
    for (auto& [_, p] : params_) {
      std::fill(p.grad.data.begin(), p.grad.data.end(), S(0));
    }
  }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }
  size_t size() const { return params_.size(); }

  // Glorot-uniform init for a weight tensor, seeded by (seed, name) so the
  // result is independent of creation order.  fan counts given by the caller.
  void glorot_init(const std::string& name, int fan_in, int fan_out,
                   uint64_t seed) {
    Tensor<S>& t = value(name);
    uint64_t h = 14695981039346656037ULL;  // FNV-1a over the name
    for (char c : name) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
    Rng rng(seed, h);
    const double lim = std::sqrt(6.0 / (fan_in + fan_out));
    for (S& v : t.data) v = static_cast<S>((2.0 * rng.uniform() - 1.0) * lim);
  }

  template <typename U>
  ParameterStore<U> cast() const {
    ParameterStore<U> out;
    for (const auto& [name, p] : params_) {
      out.create(name, p.value.shape);
      out.value(name) = p.value.template cast<U>();
    }
    return out;
  }

 private:
  std::map<std::string, Param<S>> params_;
};

struct AdamConfig {
  double lr = 5e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step_count = 0;
};

// Standard bias-corrected Adam over every parameter; increments step_count
// once and zeroes gradients afterwards.
template <typename S>
void adam_step(ParameterStore<S>* store, AdamConfig* cfg) {
  cfg->step_count += 1;
  const double t = static_cast<double>(cfg->step_count);
  const double bc1 = 1.0 - std::pow(cfg->beta1, t);
  const double bc2 = 1.0 - std::pow(cfg->beta2, t);
  for (auto& [name, p] : *store) {
    for (size_t i = 0; i < p.value.size(); ++i) {
      const double g = static_cast<double>(p.grad.data[i]);
      const double m = cfg->beta1 * p.adam_m.data[i] + (1.0 - cfg->beta1) * g;
      const double v = cfg->beta2 * p.adam_v.data[i] + (1.0 - cfg->beta2) * g * g;
      p.adam_m.data[i] = static_cast<S>(m);
      p.adam_v.data[i] = static_cast<S>(v);
      const double mh = m / bc1;
      const double vh = v / bc2;
      p.value.data[i] -= static_cast<S>(cfg->lr * mh / (std::sqrt(vh) + cfg->eps));
    }
    std::fill(p.grad.data.begin(), p.grad.data.end(), S(0));
  }
}

// Binary checkpoint: magic "RTFN", u32 LE version = 1, u32 tensor count; per
// tensor u16 name length, name, u8 dtype (0 = f32), u8 rank, rank x u32 dims,
// raw LE data; then u32 metadata length and UTF-8 key=value lines.
void checkpoint_save(const ParameterStore<float>& store,
                     const std::map<std::string, std::string>& metadata,
                     const std::string& path);
ParameterStore<float> checkpoint_load(const std::string& path,
                                      std::map<std::string, std::string>* metadata);

}  // namespace rtfdoa

#endif  // RTFDOA_PARAMS_H_
