// include/rtfdoa/nets.h
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#ifndef RTFDOA_NETS_H_
#define RTFDOA_NETS_H_

#include <cstdint>

#include "rtfdoa/layers.h"
#include "rtfdoa/params.h"
#include "rtfdoa/tensor.h"

namespace rtfdoa {

// Fixed architecture dimensions shared by the classifier, latent encoder and
// decoder.  K and P must survive two stride-2 valid 3x3 convolutions
// (K, P odd with (K-1)/2 and (P-1)/2 odd as well, i.e. K, P = 3 mod 4).
struct ModelDims {
  int n_bins = 127;     // K
  int seq_len = 31;     // P
  int t_count = 0;      // T, grid size
  int latent_dim = 50;  // M

  int k1() const { return (n_bins - 1) / 2; }
  int p1() const { return (seq_len - 1) / 2; }
  int k2() const { return (k1() - 1) / 2; }
  int p2() const { return (p1() - 1) / 2; }
  int flat() const { return k2() * p2() * 64; }      // conv stack output
  int x_size() const { return n_bins * seq_len; }    // K*P
  void validate() const;  // throws std::invalid_argument
};

// Parameter registration + Glorot init.  Classifier names are prefixed
// "cls.", encoder "enc.", decoder "dec." so one store holds all three.
template <typename S>
void init_classifier_params(ParameterStore<S>* store, const ModelDims& dims,
                            uint64_t seed);
template <typename S>
void init_vae_params(ParameterStore<S>* store, const ModelDims& dims,
                     uint64_t seed);  // classifier + encoder + decoder

// ---- classifier q(y|x) ------------------------------------------------------

template <typename S>
struct ClsCache {
  ConvCache<S> conv1, conv2;
  Tensor<S> a1, a2;  // relu outputs
  DropoutCache<S> drop;
  DenseCache<S> fc1, fc2;
  Tensor<S> h1;     // relu(fc1)
  Tensor<S> probs;  // softmax output
};

// x: [B, K, P, 1] -> probabilities [B, T].  Dropout active only in training.
template <typename S>
Tensor<S> classifier_forward(const ParameterStore<S>& params,
                             const ModelDims& dims, const Tensor<S>& x,
                             bool training, Rng rng, ClsCache<S>* cache);

// dlogits: gradient w.r.t. the pre-softmax logits [B, T]; accumulates into
// parameter grads and returns dx [B, K, P, 1].
template <typename S>
Tensor<S> classifier_backward(ParameterStore<S>* params, const ModelDims& dims,
                              const Tensor<S>& dlogits,
                              const ClsCache<S>& cache);

// ---- latent encoder q(z|x,y) ------------------------------------------------
// Split into an x-only trunk (conv stack + FC1x, computable once per batch)
// and a y-dependent head, so the T-way label enumeration reuses the trunk.

template <typename S>
struct EncTrunkCache {
  ConvCache<S> conv1, conv2;
  Tensor<S> a1, a2;
  DenseCache<S> fc1;
  Tensor<S> hx;  // relu(fc1x), [B, 200]
};

template <typename S>
Tensor<S> encoder_trunk_forward(const ParameterStore<S>& params,
                                const ModelDims& dims, const Tensor<S>& x,
                                EncTrunkCache<S>* cache);
template <typename S>
Tensor<S> encoder_trunk_backward(ParameterStore<S>* params,
                                 const ModelDims& dims, const Tensor<S>& dhx,
                                 const EncTrunkCache<S>& cache);

template <typename S>
struct EncHeadCache {
  DenseCache<S> fc1y, fc3m, fc3s;
  Tensor<S> hy;    // relu(fc1y)
  Tensor<S> h;     // hx + hy
  Tensor<S> sp;    // softplus(fc3s)
};

// hx from the trunk, y one-hot [B, T]; outputs mu [B, M] and
// var = softplus(FC3s) + 1e-6 (strictly positive).
template <typename S>
void encoder_head_forward(const ParameterStore<S>& params,
                          const ModelDims& dims, const Tensor<S>& hx,
                          const Tensor<S>& y, EncHeadCache<S>* cache,
                          Tensor<S>* mu, Tensor<S>* var);

// Returns the head's gradient contribution w.r.t. hx [B, 200].
template <typename S>
Tensor<S> encoder_head_backward(ParameterStore<S>* params,
                                const ModelDims& dims, const Tensor<S>& dmu,
                                const Tensor<S>& dvar,
                                const EncHeadCache<S>& cache);

// ---- decoder p(x|y,z) ---------------------------------------------------------

template <typename S>
struct DecCache {
  DenseCache<S> fc4, fc1y, fc5;
  Tensor<S> a4, ay;   // relu outputs of fc4 / fc1y
  Tensor<S> a5;       // relu(fc5)
  DropoutCache<S> drop;
  TconvCache<S> t1, t2m, t2v;
  Tensor<S> a_t1;     // relu(tconv1)
  Tensor<S> mu_act;   // tanh output  [B, K, P, 1]
  Tensor<S> var_act;  // 10*sigmoid   [B, K, P, 1]
};

// y one-hot [B, T], z [B, M]; outputs mu [B, K*P] in [-1,1] and
// var [B, K*P] in (0, 10).  Dropout on FC5 active only in training.
template <typename S>
void decoder_forward(const ParameterStore<S>& params, const ModelDims& dims,
                     const Tensor<S>& y, const Tensor<S>& z, bool training,
                     Rng rng, DecCache<S>* cache, Tensor<S>* mu,
                     Tensor<S>* var);

// Returns dz [B, M]; accumulates parameter grads.
template <typename S>
Tensor<S> decoder_backward(ParameterStore<S>* params, const ModelDims& dims,
                           const Tensor<S>& dmu, const Tensor<S>& dvar,
                           const DecCache<S>& cache);

// Batched argmax prediction in inference mode; returns one index per row.
template <typename S>
std::vector<int> classify_batch(const ParameterStore<S>& params,
                                const ModelDims& dims, const Tensor<S>& x);

}  // namespace rtfdoa

#endif  // RTFDOA_NETS_H_
