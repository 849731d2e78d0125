// include/rtfdoa/distributions.h
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#ifndef RTFDOA_DISTRIBUTIONS_H_
#define RTFDOA_DISTRIBUTIONS_H_

#include <cstddef>

#include "rtfdoa/rng.h"

namespace rtfdoa {

double norm_pdf(double t);
double norm_cdf(double t);
// Inverse standard-normal CDF (Acklam's rational approximation plus one
// Newton step); p in (0,1).
double norm_cdf_inv(double p);

// log N(x | mu, var) for one element.
double normal_log_prob_1(double x, double mu, double var);

// Sum over a vector.
double normal_log_prob(const double* x, const double* mu, const double* var,
                       size_t n);

// log pi[index]; pi[index] clamped below so the result is >= -1e30.
double categorical_log_prob(const double* pi, int t_count, int index);

struct TruncNormGrad {
  double d_mu = 0.0;
  double d_var = 0.0;
};

// log of the [-1,1]-truncated normal density at x:
//   log N(x;mu,var) - log(Phi((1-mu)/sigma) - Phi((-1-mu)/sigma))
// with the normalizer clamped below at 1e-12.  Throws if |x| > 1.
// Optionally returns d/dmu and d/dvar.
double trunc_normal_log_prob_1(double x, double mu, double var,
                               TruncNormGrad* grad);

// Rejection sampling from N(mu, var) until the draw lands in [-1, 1]; after
// 1000 attempts falls back to inverse-CDF sampling.  Deterministic given rng.
double trunc_normal_sample_1(double mu, double var, Rng* rng);

// Analytic mean/variance of the [-1,1]-truncated normal (test oracle support).
void trunc_normal_moments(double mu, double var, double* mean, double* variance);

}  // namespace rtfdoa

#endif  // RTFDOA_DISTRIBUTIONS_H_
