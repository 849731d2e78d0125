// include/rtfdoa/baselines.h
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#ifndef RTFDOA_BASELINES_H_
#define RTFDOA_BASELINES_H_

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rtfdoa/dataset.h"
#include "rtfdoa/signal.h"
#include "rtfdoa/vae.h"

namespace rtfdoa {

// Shared geometry for the steered classical methods.  bin_lo..bin_hi is the
// inclusive one-sided bin range scored, matching the feature slice.
struct SteeringContext {
  DoaGrid grid;
  double mic_spacing_m = 0.085;
  double sound_speed = 343.0;
  double f_s = 16000.0;
  int n_fft = 256;
  int bin_lo = 1;
  int bin_hi = 127;
};

// bin range 1 .. n_fft/2 - 1 (DC and Nyquist carry no usable phase).
SteeringContext make_steering_context(const DoaGrid& grid, double mic_spacing_m,
                                      double f_s, int n_fft);

// Steered response power with phase transform:
//   score(theta) = sum_p sum_k Re[ psi_p(k) e^{+j 2 pi f_k tau(theta)} ],
//   psi_p(k) = d2 d1* / (|d2 d1*| + 1e-12),  tau(theta) = (r/c) sin(theta).
// Returns (grid index, angle); ties to the lowest index.
std::pair<int, double> srp_phat(const StftFrames& frames1,
                                const StftFrames& frames2,
                                const SteeringContext& ctx);

// Narrowband MUSIC per bin on the 2x2 sample covariance (P >= 2 snapshots),
// noise direction = minor eigenvector, steering [1, e^{-j 2 pi f_k tau}]/sqrt2;
// bins aggregate by summing 1/(|u^H v|^2 + 1e-12).
std::pair<int, double> music(const StftFrames& frames1,
                             const StftFrames& frames2,
                             const SteeringContext& ctx, int n_sources = 1);

// Smallest-eigenvalue unit eigenvector of the Hermitian 2x2 matrix
// [[a, b], [conj(b), d]] (a, d real), via the trace/determinant closed form.
void hermitian2_minor_eigen(double a, std::complex<double> b, double d,
                            double* lambda_min,
                            std::complex<double> u[2]);

// One spectrally averaged RTF template per DOA.  frames_per_doa[t] lists the
// frame indices (repeats allowed) of DOA t's labeled data within the shared
// frame matrices; every DOA needs at least one frame.  Each template holds
// bins ctx.bin_lo..ctx.bin_hi.
std::vector<std::vector<cplx>> rtf_1nn_train(
    const StftFrames& frames1, const StftFrames& frames2,
    const std::vector<std::vector<int>>& frames_per_doa,
    const SteeringContext& ctx);

// Averages the query's own frames, then nearest template by complex l2
// distance; ties to the lowest index.
std::pair<int, double> rtf_1nn_classify(
    const StftFrames& frames1, const StftFrames& frames2,
    const std::vector<std::vector<cplx>>& templates, const SteeringContext& ctx);

// ---- supervised CNN ---------------------------------------------------------
// The VAE's classifier architecture trained on labeled data alone with
// categorical cross-entropy and the same Adam settings.

struct CnnModel {
  ModelDims dims;
  DoaGrid grid;
  ParameterStore<float> params;
};

struct CnnTrainResult {
  CnnModel model;
  std::vector<EpochStats> history;  // loss_unlabeled stays 0
  int best_epoch = 0;
};

// Mean cross-entropy -log q(y|x) over the batch; accumulates parameter
// gradients (dL/dlogits = (q - onehot)/B) when compute_grads.
template <typename S>
double classifier_cross_entropy(ParameterStore<S>* params,
                                const ModelDims& dims, const Tensor<S>& x,
                                const std::vector<int>& labels, bool training,
                                Rng rng, bool compute_grads);

// Same validation split and best-epoch selection as the semi-supervised
// trainer; partial batches are kept (labeled sets are small).
CnnTrainResult cnn_train(const std::vector<RtfPhaseSequence>& labeled,
                         const DoaGrid& grid, const TrainConfig& config);

std::pair<int, double> cnn_predict(const CnnModel& model,
                                   const RtfPhaseSequence& seq);

void save_cnn_model(const CnnModel& model, int epoch, uint64_t seed,
                    const std::string& path);
CnnModel load_cnn_model(const std::string& path);

}  // namespace rtfdoa

#endif  // RTFDOA_BASELINES_H_
