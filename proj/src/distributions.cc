// src/distributions.cc
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#include "rtfdoa/distributions.h"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rtfdoa {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kZFloor = 1e-12;
}  // namespace

double norm_pdf(double t) {
  return std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi);
}

double norm_cdf(double t) { return 0.5 * std::erfc(-t / std::numbers::sqrt2); }

double norm_cdf_inv(double p) {
  if (p <= 0.0 || p >= 1.0) {
    throw std::invalid_argument("norm_cdf_inv: p must be in (0,1)");
  }
  // Acklam's rational approximation
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  double x;
  if (p < plow) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= phigh) {
    const double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
        q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    const double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  // one Newton step on Phi(x) - p
  const double e = norm_cdf(x) - p;
  x -= e / std::max(norm_pdf(x), 1e-300);
  return x;
}

double normal_log_prob_1(double x, double mu, double var) {
  if (var <= 0) throw std::invalid_argument("normal_log_prob: var <= 0");
  const double d = x - mu;
  return -0.5 * (kLog2Pi + std::log(var) + d * d / var);
}

double normal_log_prob(const double* x, const double* mu, const double* var,
                       size_t n) {
  double acc = 0.0;
  for (size_t i = 0; i < n; ++i) acc += normal_log_prob_1(x[i], mu[i], var[i]);
  return acc;
}

double categorical_log_prob(const double* pi, int t_count, int index) {
  if (index < 0 || index >= t_count) {
    throw std::invalid_argument("categorical_log_prob: index out of range");
  }
  const double p = pi[index];
  if (p <= 1e-300) return -1e30;
  return std::log(p);
}

double trunc_normal_log_prob_1(double x, double mu, double var,
                               TruncNormGrad* grad) {
  if (x < -1.0 || x > 1.0) {
    throw std::invalid_argument("trunc_normal_log_prob: x outside [-1,1]");
  }
  if (var <= 0) throw std::invalid_argument("trunc_normal_log_prob: var <= 0");
  const double sigma = std::sqrt(var);
  const double a = (-1.0 - mu) / sigma;
  const double b = (1.0 - mu) / sigma;
  const double z_raw = norm_cdf(b) - norm_cdf(a);
  const bool clamped = z_raw < kZFloor;
  const double z = clamped ? kZFloor : z_raw;
  const double d = x - mu;
  const double logp = -0.5 * (kLog2Pi + std::log(var) + d * d / var) - std::log(z);
  if (grad) {
    const double pa = norm_pdf(a), pb = norm_pdf(b);
    // d(-log Z)/dmu = (pb - pa)/(Z*sigma); d(-log Z)/dsigma = (b*pb - a*pa)/Z/sigma
    const double zmu = clamped ? 0.0 : (pb - pa) / (z * sigma);
    const double zsig = clamped ? 0.0 : (b * pb - a * pa) / (z * sigma);
    const double d_mu = d / var + zmu;
    const double d_sigma = -1.0 / sigma + d * d / (var * sigma) + zsig;
    grad->d_mu = d_mu;
    grad->d_var = d_sigma / (2.0 * sigma);
  }
  return logp;
}

double trunc_normal_sample_1(double mu, double var, Rng* rng) {
  const double sigma = std::sqrt(std::max(var, 0.0));
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const double x = mu + sigma * rng->gauss();
    if (x >= -1.0 && x <= 1.0) return x;
  }
  // inverse-CDF fallback (guaranteed in-support)
  const double ca = norm_cdf((-1.0 - mu) / std::max(sigma, 1e-300));
  const double cb = norm_cdf((1.0 - mu) / std::max(sigma, 1e-300));
  const double span = std::max(cb - ca, kZFloor);
  const double u = ca + span * std::min(std::max(rng->uniform(), 1e-16), 1.0 - 1e-16);
  const double x = mu + sigma * norm_cdf_inv(std::min(std::max(u, 1e-16), 1.0 - 1e-16));
  return std::min(1.0, std::max(-1.0, x));
}

void trunc_normal_moments(double mu, double var, double* mean, double* variance) {
  const double sigma = std::sqrt(var);
  const double a = (-1.0 - mu) / sigma;
  const double b = (1.0 - mu) / sigma;
  const double z = std::max(norm_cdf(b) - norm_cdf(a), kZFloor);
  const double pa = norm_pdf(a), pb = norm_pdf(b);
  if (mean) *mean = mu + sigma * (pa - pb) / z;
  if (variance) {
    const double r1 = (a * pa - b * pb) / z;
    const double r2 = (pa - pb) / z;
    *variance = var * (1.0 + r1 - r2 * r2);
  }
}

}  // namespace rtfdoa
