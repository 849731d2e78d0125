// include/rtfdoa/vae.h
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#ifndef RTFDOA_VAE_H_
#define RTFDOA_VAE_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rtfdoa/dataset.h"
#include "rtfdoa/nets.h"
#include "rtfdoa/params.h"

namespace rtfdoa {

enum class Likelihood { kTruncatedNormal, kNormal };

// Semi-supervised VAE: classifier q(y|x), latent encoder q(z|x,y), decoder
// p(x|y,z), uniform class prior, standard-normal latent prior.
struct VaeSslModel {
  ModelDims dims;
  DoaGrid grid;
  ParameterStore<float> params;
  Likelihood likelihood = Likelihood::kTruncatedNormal;
};

struct TrainConfig {
  double alpha = 1000.0;  // auxiliary classification weight
  int batch_size = 256;
  double lr = 5e-5;
  int epochs = 10;
  uint64_t seed = 0;
  int latent_dim = 50;
  int mc_samples = 1;  // z draws per datum; 1 is sufficient here
  Likelihood likelihood = Likelihood::kTruncatedNormal;
};

struct EpochStats {
  int epoch = 0;
  double loss_labeled = 0.0;
  double loss_unlabeled = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  VaeSslModel model;
  std::vector<EpochStats> history;
  int best_epoch = 0;
};

// Knobs shared by training, the per-sequence objectives, and gradient checks.
template <typename S>
struct ObjectiveOptions {
  Likelihood likelihood = Likelihood::kTruncatedNormal;
  double alpha = 1000.0;
  bool training = false;  // dropout active only when true
  uint64_t seed = 0;
  uint64_t stream = 0;  // unique per batch for independent noise
  // Injected reparameterization noise (gradient checks): labeled objective
  // reads [B, M]; unlabeled reads [B, T, M].  nullptr = draw from the rng.
  const S* fixed_eps = nullptr;
};

// Mean over the batch of C(x_b, y_b) + alpha * CE_b where
//   C = -[log p(x|y,z) + log p(y) + log p(z) - log q(z|x,y)],
// z drawn once per datum by reparameterization.  Accumulates parameter
// gradients when compute_grads.  ce_out receives the mean cross-entropy.
template <typename S>
double labeled_batch_objective(ParameterStore<S>* params, const ModelDims& dims,
                               const Tensor<S>& x, const std::vector<int>& labels,
                               const ObjectiveOptions<S>& opt,
                               bool compute_grads, double* ce_out = nullptr);

// Mean over the batch of D = sum_t q_t*C_t + sum_t q_t*log q_t, the label
// marginalization with one independent z sample per candidate label.
// q_out/c_out (optional) receive the row-major [B, T] classifier posteriors
// and per-label C values actually used.
template <typename S>
double unlabeled_batch_objective(ParameterStore<S>* params,
                                 const ModelDims& dims, const Tensor<S>& x,
                                 const ObjectiveOptions<S>& opt,
                                 bool compute_grads,
                                 std::vector<double>* q_out = nullptr,
                                 std::vector<double>* c_out = nullptr);

// The marginalization combiner the unlabeled objective uses:
// sum_t q[t]*c[t] + sum_t q[t]*log q[t].  Exposed so identity tests can
// re-run the exact code path on extracted (q, C) pairs.
double unlabeled_combine(const double* q, const double* c, int t_count);

// Single-sequence conveniences over the batch objectives (B = 1, no grads).
double labeled_objective(const VaeSslModel& model, const RtfPhaseSequence& seq,
                         int label, double alpha, uint64_t seed);
double unlabeled_objective(const VaeSslModel& model, const RtfPhaseSequence& seq,
                           uint64_t seed);

// SVI training: per epoch the unlabeled pool is shuffled into batches; one
// labeled batch runs after every round(N/J) unlabeled batches (drawn with
// replacement when fewer labeled sequences than the batch size remain).
// ceil(J/5) labeled sequences, taken round-robin across DOAs, form the
// validation set; the returned model carries the parameters of the epoch
// with the highest validation accuracy (earliest on ties).
TrainResult train_vae(const TrainSet& data, const TrainConfig& config);

// Deterministic stratified validation split used by train_vae: ceil(J/5)
// indices into `labeled`, round-robin over DOA groups in grid order.
std::vector<int> validation_split(const std::vector<RtfPhaseSequence>& labeled,
                                  int t_count);

// argmax_t q(y=t|x); ties to the lowest index.  Returns (index, angle).
std::pair<int, double> estimate_doa(const VaeSslModel& model,
                                    const RtfPhaseSequence& seq);

// n draws of z ~ N(0, I) pushed through the decoder for the given class:
// samples
//   x_j ~ p(x|y, z_j)   and the decoder means mu(y, z_j).
// All outputs are pi-normalized sequences in [-1, 1].
struct GenerateResult {
  std::vector<RtfPhaseSequence> samples;
  std::vector<RtfPhaseSequence> means;
};
GenerateResult conditional_generate(const VaeSslModel& model, int doa_index,
                                    int n, uint64_t seed);

// z ~ q(z|x,y), xhat ~ p(x|y,z); also returns the decoder mean.
struct ReconstructResult {
  RtfPhaseSequence sample;
  RtfPhaseSequence mean;
};
ReconstructResult reconstruct(const VaeSslModel& model,
                              const RtfPhaseSequence& seq, int doa_index,
                              uint64_t seed);

// Packs seqs[idx] (each K x P, pi-normalized) into a [B, K, P, 1] tensor.
template <typename S>
Tensor<S> pack_batch(const std::vector<RtfPhaseSequence>& seqs,
                     const std::vector<int>& idx);

// CSV: header epoch,loss_labeled,loss_unlabeled,val_accuracy + one row/epoch.
void write_history_csv(const std::string& path,
                       const std::vector<EpochStats>& history);

// Checkpoint round-trip with metadata (epoch, seed, alpha, grid angles plus
// the architecture dims and likelihood needed to rebuild the model).
void save_model(const VaeSslModel& model, int epoch, uint64_t seed,
                double alpha, const std::string& path);
VaeSslModel load_model(const std::string& path);

}  // namespace rtfdoa

#endif  // RTFDOA_VAE_H_
