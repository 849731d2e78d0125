// include/rtfdoa/gradcheck.h
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#ifndef RTFDOA_GRADCHECK_H_
#define RTFDOA_GRADCHECK_H_

#include <cmath>
#include <functional>

#include "rtfdoa/params.h"
#include "rtfdoa/rng.h"

namespace rtfdoa {

struct GradCheckResult {
  double max_rel_error = 0.0;
  int coords_checked = 0;
};

// Central-difference verification of analytic parameter gradients.
//
// loss_fn() evaluates the scalar objective with the store's current values
// (it must not touch gradients); grad_fn() zeroes the store's gradients and
// fills them analytically for the same objective.  Both must be
// deterministic (fixed noise sample, dropout off).  Checks min(min_coords,
// total) coordinates: every coordinate of tensors smaller than 16 entries,
// plus uniformly sampled coordinates elsewhere, with step 1e-4 and
// rel = |a - n| / (max(|a|, |n|) + 1e-6).
template <typename S>
GradCheckResult finite_diff_check(ParameterStore<S>* store,
                                  const std::function<double()>& loss_fn,
                                  const std::function<void()>& grad_fn,
                                  int min_coords, uint64_t seed) {
  grad_fn();
  // Snapshot analytic grads before the probing evaluations overwrite state.
  std::vector<std::pair<std::string, std::vector<S>>> analytic;
  size_t total = 0;
  for (auto& [name, p] : *store) {
    analytic.emplace_back(name, p.grad.data);
    total += p.value.size();
  }

  Rng rng(seed, 0x96AD);
  GradCheckResult result;
  const double h = 1e-4;
  size_t param_idx = 0;
  for (auto& [name, p] : *store) {
    const std::vector<S>& g = analytic[param_idx++].second;
    const size_t n = p.value.size();
    // small tensors: exhaustive; large: proportional share of min_coords
    size_t want = n <= 16 ? n
                          : std::max<size_t>(
                                1, static_cast<size_t>(min_coords) * n / total);
    for (size_t c = 0; c < want; ++c) {
      const size_t i = n <= 16 ? c : rng.below(n);
      const S saved = p.value.data[i];
      p.value.data[i] = saved + static_cast<S>(h);
      const double lp = loss_fn();
      p.value.data[i] = saved - static_cast<S>(h);
      const double lm = loss_fn();
      p.value.data[i] = saved;
      const double numeric = (lp - lm) / (2.0 * h);
      const double a = static_cast<double>(g[i]);
      const double rel = std::abs(a - numeric) /
                         (std::max(std::abs(a), std::abs(numeric)) + 1e-6);
      if (rel > result.max_rel_error) result.max_rel_error = rel;
      ++result.coords_checked;
    }
  }
  return result;
}

}  // namespace rtfdoa

#endif  // RTFDOA_GRADCHECK_H_
