// src/nets.cc
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#include "rtfdoa/nets.h"

#include <stdexcept>

namespace rtfdoa {

void ModelDims::validate() const {
  if (t_count < 1) throw std::invalid_argument("ModelDims: t_count must be >= 1");
  if (latent_dim < 1) throw std::invalid_argument("ModelDims: latent_dim must be >= 1");
  if (n_bins < 3 || n_bins % 4 != 3) {
    throw std::invalid_argument("ModelDims: n_bins must be 3 mod 4 and >= 3");
  }
  if (seq_len < 3 || seq_len % 4 != 3) {
    throw std::invalid_argument("ModelDims: seq_len must be 3 mod 4 and >= 3");
  }
  if (k2() < 1 || p2() < 1) {
    throw std::invalid_argument("ModelDims: dims collapse under the conv stack");
  }
}

namespace {

// Registers the conv trunk + FC1x shared topology under the given prefix.
template <typename S>
void init_trunk(ParameterStore<S>* store, const ModelDims& d,
                const std::string& prefix, uint64_t seed) {
  store->create(prefix + ".conv1.w", {9, 32});
  store->create(prefix + ".conv1.b", {32});
  store->create(prefix + ".conv2.w", {9 * 32, 64});
  store->create(prefix + ".conv2.b", {64});
  store->create(prefix + ".fc1x.w", {d.flat(), 200});
  store->create(prefix + ".fc1x.b", {200});
  store->glorot_init(prefix + ".conv1.w", 9, 9 * 32, seed);
  store->glorot_init(prefix + ".conv2.w", 9 * 32, 9 * 64, seed);
  store->glorot_init(prefix + ".fc1x.w", d.flat(), 200, seed);
}

}  // namespace

template <typename S>
void init_classifier_params(ParameterStore<S>* store, const ModelDims& d,
                            uint64_t seed) {
  d.validate();
  init_trunk(store, d, "cls", seed);
  store->create("cls.fc2.w", {200, d.t_count});
  store->create("cls.fc2.b", {d.t_count});
  store->glorot_init("cls.fc2.w", 200, d.t_count, seed);
}

template <typename S>
void init_vae_params(ParameterStore<S>* store, const ModelDims& d,
                     uint64_t seed) {
  init_classifier_params(store, d, seed);

  init_trunk(store, d, "enc", seed);
  store->create("enc.fc1y.w", {d.t_count, 200});
  store->create("enc.fc1y.b", {200});
  store->create("enc.fc3mu.w", {200, d.latent_dim});
  store->create("enc.fc3mu.b", {d.latent_dim});
  store->create("enc.fc3s.w", {200, d.latent_dim});
  store->create("enc.fc3s.b", {d.latent_dim});
  store->glorot_init("enc.fc1y.w", d.t_count, 200, seed);
  store->glorot_init("enc.fc3mu.w", 200, d.latent_dim, seed);
  store->glorot_init("enc.fc3s.w", 200, d.latent_dim, seed);

  store->create("dec.fc4.w", {d.latent_dim, 200});
  store->create("dec.fc4.b", {200});
  store->create("dec.fc1y.w", {d.t_count, 200});
  store->create("dec.fc1y.b", {200});
  store->create("dec.fc5.w", {200, d.flat()});
  store->create("dec.fc5.b", {d.flat()});
  store->create("dec.tconv1.w", {9 * 32, 64});  // [9*Cout, Cin]
  store->create("dec.tconv1.b", {32});
  store->create("dec.tconv2m.w", {9, 32});
  store->create("dec.tconv2m.b", {1});
  store->create("dec.tconv2v.w", {9, 32});
  store->create("dec.tconv2v.b", {1});
  store->glorot_init("dec.fc4.w", d.latent_dim, 200, seed);
  store->glorot_init("dec.fc1y.w", d.t_count, 200, seed);
  store->glorot_init("dec.fc5.w", 200, d.flat(), seed);
  store->glorot_init("dec.tconv1.w", 9 * 64, 9 * 32, seed);
  store->glorot_init("dec.tconv2m.w", 9 * 32, 9, seed);
  store->glorot_init("dec.tconv2v.w", 9 * 32, 9, seed);
}

namespace {

template <typename S>
void check_x(const Tensor<S>& x, const ModelDims& d) {
  if (x.shape.size() != 4 || x.dim(1) != d.n_bins || x.dim(2) != d.seq_len ||
      x.dim(3) != 1) {
    throw std::invalid_argument("net: input shape " + shape_str(x.shape) +
                                " does not match [B," + std::to_string(d.n_bins) +
                                "," + std::to_string(d.seq_len) + ",1]");
  }
}

template <typename S>
void check_y(const Tensor<S>& y, const ModelDims& d) {
  if (y.shape.size() != 2 || y.dim(1) != d.t_count) {
    throw std::invalid_argument("net: label shape " + shape_str(y.shape) +
                                " does not match [B," +
                                std::to_string(d.t_count) + "]");
  }
}

template <typename S>
Tensor<S> flatten2(const Tensor<S>& t, int cols) {
  Tensor<S> out = t;
  out.shape = {static_cast<int>(t.size()) / cols, cols};
  return out;
}

}  // namespace

template <typename S>
Tensor<S> classifier_forward(const ParameterStore<S>& params,
                             const ModelDims& d, const Tensor<S>& x,
                             bool training, Rng rng, ClsCache<S>* cache) {
  check_x(x, d);
  ClsCache<S> local;
  ClsCache<S>& c = cache ? *cache : local;
  Tensor<S> z1 = conv2d_forward(x, params.value("cls.conv1.w"),
                                params.value("cls.conv1.b"), &c.conv1);
  c.a1 = relu_forward(z1);
  Tensor<S> z2 = conv2d_forward(c.a1, params.value("cls.conv2.w"),
                                params.value("cls.conv2.b"), &c.conv2);
  c.a2 = relu_forward(z2);
  Tensor<S> flat = flatten2(c.a2, d.flat());
  Tensor<S> dropped = dropout_forward(flat, 0.5, training, rng, &c.drop);
  Tensor<S> h1 = dense_forward(dropped, params.value("cls.fc1x.w"),
                               params.value("cls.fc1x.b"), &c.fc1);
  c.h1 = relu_forward(h1);
  Tensor<S> logits = dense_forward(c.h1, params.value("cls.fc2.w"),
                                   params.value("cls.fc2.b"), &c.fc2);
  c.probs = softmax_forward(logits);
  return c.probs;
}

template <typename S>
Tensor<S> classifier_backward(ParameterStore<S>* params, const ModelDims&,
                              const Tensor<S>& dlogits,
                              const ClsCache<S>& c) {
  Tensor<S> dh1 = dense_backward(dlogits, c.fc2, params->value("cls.fc2.w"),
                                 &params->grad("cls.fc2.w"),
                                 &params->grad("cls.fc2.b"));
  dh1 = relu_backward(dh1, c.h1);
  Tensor<S> dflat = dense_backward(dh1, c.fc1, params->value("cls.fc1x.w"),
                                   &params->grad("cls.fc1x.w"),
                                   &params->grad("cls.fc1x.b"));
  dflat = dropout_backward(dflat, c.drop);
  Tensor<S> da2 = dflat;
  da2.shape = c.a2.shape;
  da2 = relu_backward(da2, c.a2);
  Tensor<S> da1 = conv2d_backward(da2, c.conv2, params->value("cls.conv2.w"),
                                  &params->grad("cls.conv2.w"),
                                  &params->grad("cls.conv2.b"));
  da1 = relu_backward(da1, c.a1);
  return conv2d_backward(da1, c.conv1, params->value("cls.conv1.w"),
                         &params->grad("cls.conv1.w"),
                         &params->grad("cls.conv1.b"));
}

template <typename S>
Tensor<S> encoder_trunk_forward(const ParameterStore<S>& params,
                                const ModelDims& d, const Tensor<S>& x,
                                EncTrunkCache<S>* cache) {
  check_x(x, d);
  Tensor<S> z1 = conv2d_forward(x, params.value("enc.conv1.w"),
                                params.value("enc.conv1.b"), &cache->conv1);
  cache->a1 = relu_forward(z1);
  Tensor<S> z2 = conv2d_forward(cache->a1, params.value("enc.conv2.w"),
                                params.value("enc.conv2.b"), &cache->conv2);
  cache->a2 = relu_forward(z2);
  Tensor<S> flat = flatten2(cache->a2, d.flat());
  Tensor<S> h = dense_forward(flat, params.value("enc.fc1x.w"),
                              params.value("enc.fc1x.b"), &cache->fc1);
  cache->hx = relu_forward(h);
  return cache->hx;
}

template <typename S>
Tensor<S> encoder_trunk_backward(ParameterStore<S>* params, const ModelDims&,
                                 const Tensor<S>& dhx,
                                 const EncTrunkCache<S>& c) {
  Tensor<S> dh = relu_backward(dhx, c.hx);
  Tensor<S> dflat = dense_backward(dh, c.fc1, params->value("enc.fc1x.w"),
                                   &params->grad("enc.fc1x.w"),
                                   &params->grad("enc.fc1x.b"));
  Tensor<S> da2 = dflat;
  da2.shape = c.a2.shape;
  da2 = relu_backward(da2, c.a2);
  Tensor<S> da1 = conv2d_backward(da2, c.conv2, params->value("enc.conv2.w"),
                                  &params->grad("enc.conv2.w"),
                                  &params->grad("enc.conv2.b"));
  da1 = relu_backward(da1, c.a1);
  return conv2d_backward(da1, c.conv1, params->value("enc.conv1.w"),
                         &params->grad("enc.conv1.w"),
                         &params->grad("enc.conv1.b"));
}

template <typename S>
void encoder_head_forward(const ParameterStore<S>& params, const ModelDims& d,
                          const Tensor<S>& hx, const Tensor<S>& y,
                          EncHeadCache<S>* cache, Tensor<S>* mu,
                          Tensor<S>* var) {
  check_y(y, d);
  Tensor<S> hy = dense_forward(y, params.value("enc.fc1y.w"),
                               params.value("enc.fc1y.b"), &cache->fc1y);
  cache->hy = relu_forward(hy);
  cache->h = hx;
  for (size_t i = 0; i < cache->h.size(); ++i) {
    cache->h.data[i] += cache->hy.data[i];
  }
  *mu = dense_forward(cache->h, params.value("enc.fc3mu.w"),
                      params.value("enc.fc3mu.b"), &cache->fc3m);
  Tensor<S> s = dense_forward(cache->h, params.value("enc.fc3s.w"),
                              params.value("enc.fc3s.b"), &cache->fc3s);
  cache->sp = softplus_forward(s);
  *var = cache->sp;
  for (S& v : var->data) v += S(1e-6);
}

template <typename S>
Tensor<S> encoder_head_backward(ParameterStore<S>* params, const ModelDims& d,
                                const Tensor<S>& dmu, const Tensor<S>& dvar,
                                const EncHeadCache<S>& c) {
  (void)d;
  Tensor<S> ds = softplus_backward(dvar, c.sp);
  Tensor<S> dh = dense_backward(dmu, c.fc3m, params->value("enc.fc3mu.w"),
                                &params->grad("enc.fc3mu.w"),
                                &params->grad("enc.fc3mu.b"));
  Tensor<S> dh2 = dense_backward(ds, c.fc3s, params->value("enc.fc3s.w"),
                                 &params->grad("enc.fc3s.w"),
                                 &params->grad("enc.fc3s.b"));
  for (size_t i = 0; i < dh.size(); ++i) dh.data[i] += dh2.data[i];
  Tensor<S> dhy = relu_backward(dh, c.hy);
  dense_backward(dhy, c.fc1y, params->value("enc.fc1y.w"),
                 &params->grad("enc.fc1y.w"), &params->grad("enc.fc1y.b"));
  return dh;  // the sum node passes the same gradient to hx
}

template <typename S>
void decoder_forward(const ParameterStore<S>& params, const ModelDims& d,
                     const Tensor<S>& y, const Tensor<S>& z, bool training,
                     Rng rng, DecCache<S>* cache, Tensor<S>* mu,
                     Tensor<S>* var) {
  check_y(y, d);
  if (z.shape.size() != 2 || z.dim(1) != d.latent_dim) {
    throw std::invalid_argument("decoder: z shape " + shape_str(z.shape) +
                                " does not match [B," +
                                std::to_string(d.latent_dim) + "]");
  }
  if (y.dim(0) != z.dim(0)) {
    throw std::invalid_argument("decoder: y and z batch sizes differ");
  }
  const int B = z.dim(0);
  DecCache<S> local;
  DecCache<S>& c = cache ? *cache : local;
  Tensor<S> h4 = dense_forward(z, params.value("dec.fc4.w"),
                               params.value("dec.fc4.b"), &c.fc4);
  c.a4 = relu_forward(h4);
  Tensor<S> hy = dense_forward(y, params.value("dec.fc1y.w"),
                               params.value("dec.fc1y.b"), &c.fc1y);
  c.ay = relu_forward(hy);
  Tensor<S> h = c.a4;
  for (size_t i = 0; i < h.size(); ++i) h.data[i] += c.ay.data[i];
  Tensor<S> h5 = dense_forward(h, params.value("dec.fc5.w"),
                               params.value("dec.fc5.b"), &c.fc5);
  c.a5 = relu_forward(h5);
  Tensor<S> dropped = dropout_forward(c.a5, 0.5, training, rng, &c.drop);
  dropped.shape = {B, d.k2(), d.p2(), 64};
  Tensor<S> t1 = tconv2d_forward(dropped, params.value("dec.tconv1.w"),
                                 params.value("dec.tconv1.b"), &c.t1);
  c.a_t1 = relu_forward(t1);
  Tensor<S> m = tconv2d_forward(c.a_t1, params.value("dec.tconv2m.w"),
                                params.value("dec.tconv2m.b"), &c.t2m);
  c.mu_act = tanh_forward(m);
  Tensor<S> v = tconv2d_forward(c.a_t1, params.value("dec.tconv2v.w"),
                                params.value("dec.tconv2v.b"), &c.t2v);
  c.var_act = sigmoid_scaled_forward(v, S(10));
  *mu = flatten2(c.mu_act, d.x_size());
  *var = flatten2(c.var_act, d.x_size());
}

template <typename S>
Tensor<S> decoder_backward(ParameterStore<S>* params, const ModelDims& d,
                           const Tensor<S>& dmu, const Tensor<S>& dvar,
                           const DecCache<S>& c) {
  const int B = dmu.dim(0);
  Tensor<S> dm = dmu;
  dm.shape = c.mu_act.shape;
  dm = tanh_backward(dm, c.mu_act);
  Tensor<S> dv = dvar;
  dv.shape = c.var_act.shape;
  dv = sigmoid_scaled_backward(dv, c.var_act, S(10));

  Tensor<S> da_t1 = tconv2d_backward(dm, c.t2m, params->value("dec.tconv2m.w"),
                                     &params->grad("dec.tconv2m.w"),
                                     &params->grad("dec.tconv2m.b"));
  Tensor<S> da_t1v = tconv2d_backward(dv, c.t2v, params->value("dec.tconv2v.w"),
                                      &params->grad("dec.tconv2v.w"),
                                      &params->grad("dec.tconv2v.b"));
  for (size_t i = 0; i < da_t1.size(); ++i) da_t1.data[i] += da_t1v.data[i];
  da_t1 = relu_backward(da_t1, c.a_t1);
  Tensor<S> ddropped = tconv2d_backward(da_t1, c.t1, params->value("dec.tconv1.w"),
                                        &params->grad("dec.tconv1.w"),
                                        &params->grad("dec.tconv1.b"));
  ddropped.shape = {B, d.flat()};
  Tensor<S> da5 = dropout_backward(ddropped, c.drop);
  da5 = relu_backward(da5, c.a5);
  Tensor<S> dh = dense_backward(da5, c.fc5, params->value("dec.fc5.w"),
                                &params->grad("dec.fc5.w"),
                                &params->grad("dec.fc5.b"));
  Tensor<S> da4 = relu_backward(dh, c.a4);
  Tensor<S> dz = dense_backward(da4, c.fc4, params->value("dec.fc4.w"),
                                &params->grad("dec.fc4.w"),
                                &params->grad("dec.fc4.b"));
  Tensor<S> day = relu_backward(dh, c.ay);
  dense_backward(day, c.fc1y, params->value("dec.fc1y.w"),
                 &params->grad("dec.fc1y.w"), &params->grad("dec.fc1y.b"));
  return dz;
}

template <typename S>
std::vector<int> classify_batch(const ParameterStore<S>& params,
                                const ModelDims& d, const Tensor<S>& x) {
  Tensor<S> probs = classifier_forward<S>(params, d, x, /*training=*/false,
                                          Rng(0, 0), nullptr);
  const int B = probs.dim(0), T = probs.dim(1);
  std::vector<int> out(static_cast<size_t>(B));
  for (int b = 0; b < B; ++b) {
    const S* row = probs.ptr() + static_cast<size_t>(b) * T;
    int best = 0;
    for (int t = 1; t < T; ++t) {
      if (row[t] > row[best]) best = t;
    }
    out[static_cast<size_t>(b)] = best;
  }
  return out;
}

#define RTFDOA_INSTANTIATE(S)                                                  \
  template void init_classifier_params<S>(ParameterStore<S>*,                 \
                                          const ModelDims&, uint64_t);        \
  template void init_vae_params<S>(ParameterStore<S>*, const ModelDims&,      \
                                   uint64_t);                                  \
  template Tensor<S> classifier_forward<S>(const ParameterStore<S>&,          \
                                           const ModelDims&, const Tensor<S>&,\
                                           bool, Rng, ClsCache<S>*);          \
  template Tensor<S> classifier_backward<S>(ParameterStore<S>*,               \
                                            const ModelDims&,                 \
                                            const Tensor<S>&,                 \
                                            const ClsCache<S>&);              \
  template Tensor<S> encoder_trunk_forward<S>(const ParameterStore<S>&,       \
                                              const ModelDims&,               \
                                              const Tensor<S>&,               \
                                              EncTrunkCache<S>*);             \
  template Tensor<S> encoder_trunk_backward<S>(ParameterStore<S>*,            \
                                               const ModelDims&,              \
                                               const Tensor<S>&,              \
                                               const EncTrunkCache<S>&);      \
  template void encoder_head_forward<S>(const ParameterStore<S>&,             \
                                        const ModelDims&, const Tensor<S>&,   \
                                        const Tensor<S>&, EncHeadCache<S>*,   \
                                        Tensor<S>*, Tensor<S>*);              \
  template Tensor<S> encoder_head_backward<S>(ParameterStore<S>*,             \
                                              const ModelDims&,               \
                                              const Tensor<S>&,               \
                                              const Tensor<S>&,               \
                                              const EncHeadCache<S>&);        \
  template void decoder_forward<S>(const ParameterStore<S>&, const ModelDims&,\
                                   const Tensor<S>&, const Tensor<S>&, bool,  \
                                   Rng, DecCache<S>*, Tensor<S>*, Tensor<S>*);\
  template Tensor<S> decoder_backward<S>(ParameterStore<S>*, const ModelDims&,\
                                         const Tensor<S>&, const Tensor<S>&,  \
                                         const DecCache<S>&);                 \
  template std::vector<int> classify_batch<S>(const ParameterStore<S>&,       \
                                              const ModelDims&,               \
                                              const Tensor<S>&);

RTFDOA_INSTANTIATE(float)
RTFDOA_INSTANTIATE(double)
#undef RTFDOA_INSTANTIATE

}  // namespace rtfdoa
