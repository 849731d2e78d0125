// include/rtfdoa/tensor.h
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#ifndef RTFDOA_TENSOR_H_
#define RTFDOA_TENSOR_H_

#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace rtfdoa {

// Dense row-major tensor (last dim fastest).  S is float for training
// storage, double for gradient verification.
template <typename S>
struct Tensor {
  std::vector<int> shape;
  std::vector<S> data;

  Tensor() = default;
  explicit Tensor(std::vector<int> shp) : shape(std::move(shp)) {
    data.assign(count(shape), S(0));
  }

  static size_t count(const std::vector<int>& shp) {
    size_t n = 1;
    for (int d : shp) {
      if (d <= 0) throw std::invalid_argument("tensor: nonpositive dim");
      n *= static_cast<size_t>(d);
    }
    return n;
  }

  size_t size() const { return data.size(); }
  int dim(int i) const { return shape.at(i); }
  S* ptr() { return data.data(); }
  const S* ptr() const { return data.data(); }

  template <typename U>
  Tensor<U> cast() const {
    Tensor<U> out;
    out.shape = shape;
    out.data.assign(data.begin(), data.end());
    return out;
  }
};

inline std::string shape_str(const std::vector<int>& s) {
  std::string out = "[";
  for (size_t i = 0; i < s.size(); ++i) {
    out += std::to_string(s[i]);
    if (i + 1 < s.size()) out += ",";
  }
  return out + "]";
}

}  // namespace rtfdoa

#endif  // RTFDOA_TENSOR_H_
