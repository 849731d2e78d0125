// src/vae.cc
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#include "rtfdoa/vae.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rtfdoa/distributions.h"
#include "rtfdoa/rng.h"

namespace rtfdoa {

namespace {

constexpr double kTinyProb = 1e-300;

// Rng substreams for one objective evaluation (base = Rng(seed, stream)).
constexpr uint64_t kStreamClsDropout = 1;
constexpr uint64_t kStreamDecDropout = 2;  // + t for the label enumeration
constexpr uint64_t kStreamEps = 3;

struct LikGrad {
  double d_mu = 0.0;
  double d_var = 0.0;
};

// log p(x | mu, var) for one decoder output element under the configured
// likelihood, with gradients w.r.t. mu and var when requested.  The variance
// activation can underflow to zero in float; the clamp keeps the log finite
// (the activation's own backward already kills the gradient there).
double elem_log_prob(Likelihood lik, double x, double mu, double var,
                     LikGrad* g) {
  var = std::max(var, 1e-12);
  if (lik == Likelihood::kTruncatedNormal) {
    TruncNormGrad tg;
    const double lp = trunc_normal_log_prob_1(x, mu, var, g ? &tg : nullptr);
    if (g) {
      g->d_mu = tg.d_mu;
      g->d_var = tg.d_var;
    }
    return lp;
  }
  const double lp = normal_log_prob_1(x, mu, var);
  if (g) {
    const double d = x - mu;
    g->d_mu = d / var;
    g->d_var = -0.5 / var + d * d / (2.0 * var * var);
  }
  return lp;
}

template <typename S>
Tensor<S> one_hot_rows(const std::vector<int>& labels, int t_count) {
  Tensor<S> y({static_cast<int>(labels.size()), t_count});
  for (size_t b = 0; b < labels.size(); ++b) {
    y.data[b * t_count + labels[b]] = S(1);
  }
  return y;
}

template <typename S>
Tensor<S> const_one_hot(int batch, int label, int t_count) {
  Tensor<S> y({batch, t_count});
  for (int b = 0; b < batch; ++b) y.data[b * (size_t)t_count + label] = S(1);
  return y;
}

// One encoder-head + decoder pass for a fixed label assignment y:
//   z_b = mu_b + sigma_b * eps_b,
//   C_b = -log p(x_b|y_b,z_b) + log T + sum_m 0.5 (z^2 - log var - eps^2),
// writing C_b to c_out.  When dhx is non-null the weighted backward pass
// (per-row weights w[b], which fold in the batch mean) runs immediately:
// parameter grads accumulate and the head's trunk gradient adds into *dhx.
template <typename S>
void label_conditional_pass(ParameterStore<S>* params, const ModelDims& dims,
                            const Tensor<S>& x, const Tensor<S>& hx,
                            const Tensor<S>& y, const ObjectiveOptions<S>& opt,
                            const S* eps, Rng dec_rng, const double* w,
                            double* c_out, Tensor<S>* dhx) {
  const int B = hx.dim(0);
  const int M = dims.latent_dim;
  const int X = dims.x_size();
  const double log_t = std::log(static_cast<double>(dims.t_count));

  EncHeadCache<S> head_cache;
  Tensor<S> mu, var;
  encoder_head_forward(*params, dims, hx, y, &head_cache, &mu, &var);

  Tensor<S> z({B, M});
  std::vector<double> sigma(static_cast<size_t>(B) * M);
  for (size_t i = 0; i < z.size(); ++i) {
    sigma[i] = std::sqrt(static_cast<double>(var.data[i]));
    z.data[i] = static_cast<S>(static_cast<double>(mu.data[i]) +
                               sigma[i] * static_cast<double>(eps[i]));
  }

  DecCache<S> dec_cache;
  Tensor<S> mu_x, var_x;
  decoder_forward(*params, dims, y, z, opt.training, dec_rng, &dec_cache,
                  &mu_x, &var_x);

  const bool grads = dhx != nullptr;
  Tensor<S> dmu_x, dvar_x;
  if (grads) {
    dmu_x = Tensor<S>({B, X});
    dvar_x = Tensor<S>({B, X});
  }

  for (int b = 0; b < B; ++b) {
    double c = log_t;
    for (int m = 0; m < M; ++m) {
      const size_t i = static_cast<size_t>(b) * M + m;
      const double e = static_cast<double>(eps[i]);
      c += 0.5 * (static_cast<double>(z.data[i]) * z.data[i] -
                  std::log(static_cast<double>(var.data[i])) - e * e);
    }
    for (int i = 0; i < X; ++i) {
      const size_t bi = static_cast<size_t>(b) * X + i;
      LikGrad g;
      c -= elem_log_prob(opt.likelihood, x.data[bi], mu_x.data[bi],
                         var_x.data[bi], grads ? &g : nullptr);
      if (grads) {
        dmu_x.data[bi] = static_cast<S>(-w[b] * g.d_mu);
        dvar_x.data[bi] = static_cast<S>(-w[b] * g.d_var);
      }
    }
    c_out[b] = c;
  }

  if (!grads) return;

  Tensor<S> dz = decoder_backward(params, dims, dmu_x, dvar_x, dec_cache);
  Tensor<S> dmu({B, M});
  Tensor<S> dvar({B, M});
  for (int b = 0; b < B; ++b) {
    for (int m = 0; m < M; ++m) {
      const size_t i = static_cast<size_t>(b) * M + m;
      // dC/dz carries the prior term z as well as the decoder path; z feeds
      // back into mu directly and into var through sigma * eps.
      const double dz_total =
          static_cast<double>(dz.data[i]) + w[b] * static_cast<double>(z.data[i]);
      dmu.data[i] = static_cast<S>(dz_total);
      dvar.data[i] = static_cast<S>(
          dz_total * static_cast<double>(eps[i]) / (2.0 * sigma[i]) -
          w[b] * 0.5 / static_cast<double>(var.data[i]));
    }
  }
  Tensor<S> dhx_head = encoder_head_backward(params, dims, dmu, dvar, head_cache);
  for (size_t i = 0; i < dhx->size(); ++i) dhx->data[i] += dhx_head.data[i];
}

template <typename S>
void check_labels(const std::vector<int>& labels, int batch, int t_count) {
  if (static_cast<int>(labels.size()) != batch) {
    throw std::invalid_argument("objective: one label per batch row required");
  }
  for (int l : labels) {
    if (l < 0 || l >= t_count) {
      throw std::invalid_argument("objective: label outside grid");
    }
  }
}

template <typename S>
std::vector<S> draw_eps(const ObjectiveOptions<S>& opt, Rng base, size_t n) {
  std::vector<S> eps(n);
  if (opt.fixed_eps != nullptr) {
    std::copy(opt.fixed_eps, opt.fixed_eps + n, eps.begin());
  } else {
    Rng rng = base.split(kStreamEps);
    for (size_t i = 0; i < n; ++i) eps[i] = static_cast<S>(rng.gauss());
  }
  return eps;
}

}  // namespace

double unlabeled_combine(const double* q, const double* c, int t_count) {
  double acc = 0.0;
  for (int t = 0; t < t_count; ++t) {
    acc += q[t] * c[t];
    if (q[t] > 0.0) acc += q[t] * std::log(q[t]);
  }
  return acc;
}

template <typename S>
double labeled_batch_objective(ParameterStore<S>* params, const ModelDims& dims,
                               const Tensor<S>& x, const std::vector<int>& labels,
                               const ObjectiveOptions<S>& opt,
                               bool compute_grads, double* ce_out) {
  dims.validate();
  const int B = x.dim(0);
  const int T = dims.t_count;
  const int M = dims.latent_dim;
  check_labels<S>(labels, B, T);

  Rng base(opt.seed, opt.stream);
  ClsCache<S> cls_cache;
  Tensor<S> probs = classifier_forward(*params, dims, x, opt.training,
                                       base.split(kStreamClsDropout), &cls_cache);
  EncTrunkCache<S> trunk_cache;
  Tensor<S> hx = encoder_trunk_forward(*params, dims, x, &trunk_cache);
  Tensor<S> y = one_hot_rows<S>(labels, T);

  const std::vector<S> eps = draw_eps(opt, base, static_cast<size_t>(B) * M);
  std::vector<double> w(B, 1.0 / B);
  std::vector<double> c(B);
  Tensor<S> dhx;
  if (compute_grads) dhx = Tensor<S>(hx.shape);
  label_conditional_pass(params, dims, x, hx, y, opt, eps.data(),
                         base.split(kStreamDecDropout), w.data(), c.data(),
                         compute_grads ? &dhx : nullptr);

  double loss_c = 0.0;
  for (int b = 0; b < B; ++b) loss_c += c[b];
  loss_c /= B;

  double ce = 0.0;
  for (int b = 0; b < B; ++b) {
    const double p = static_cast<double>(probs.data[b * (size_t)T + labels[b]]);
    ce -= std::log(std::max(p, kTinyProb));
  }
  ce /= B;
  if (ce_out != nullptr) *ce_out = ce;

  if (compute_grads) {
    encoder_trunk_backward(params, dims, dhx, trunk_cache);
    // Softmax + cross-entropy collapse to (alpha/B) (q - onehot) per logit.
    Tensor<S> dlogits({B, T});
    const double scale = opt.alpha / B;
    for (size_t i = 0; i < dlogits.size(); ++i) {
      dlogits.data[i] =
          static_cast<S>(scale * (static_cast<double>(probs.data[i]) -
                                  static_cast<double>(y.data[i])));
    }
    classifier_backward(params, dims, dlogits, cls_cache);
  }
  return loss_c + opt.alpha * ce;
}

template <typename S>
double unlabeled_batch_objective(ParameterStore<S>* params,
                                 const ModelDims& dims, const Tensor<S>& x,
                                 const ObjectiveOptions<S>& opt,
                                 bool compute_grads,
                                 std::vector<double>* q_out,
                                 std::vector<double>* c_out) {
  dims.validate();
  const int B = x.dim(0);
  const int T = dims.t_count;
  const int M = dims.latent_dim;

  Rng base(opt.seed, opt.stream);
  ClsCache<S> cls_cache;
  Tensor<S> probs = classifier_forward(*params, dims, x, opt.training,
                                       base.split(kStreamClsDropout), &cls_cache);
  EncTrunkCache<S> trunk_cache;
  Tensor<S> hx = encoder_trunk_forward(*params, dims, x, &trunk_cache);

  // One independent z draw per candidate label, eps laid out [B, T, M].
  const std::vector<S> eps_all =
      draw_eps(opt, base, static_cast<size_t>(B) * T * M);

  std::vector<double> q(static_cast<size_t>(B) * T);
  for (size_t i = 0; i < q.size(); ++i) q[i] = static_cast<double>(probs.data[i]);
  std::vector<double> c(static_cast<size_t>(B) * T);

  Tensor<S> dhx;
  if (compute_grads) dhx = Tensor<S>(hx.shape);
  std::vector<S> eps_t(static_cast<size_t>(B) * M);
  std::vector<double> c_t(B);
  std::vector<double> w(B);
  for (int t = 0; t < T; ++t) {
    Tensor<S> y = const_one_hot<S>(B, t, T);
    for (int b = 0; b < B; ++b) {
      const S* src = eps_all.data() + (static_cast<size_t>(b) * T + t) * M;
      std::copy(src, src + M, eps_t.begin() + static_cast<size_t>(b) * M);
      w[b] = q[static_cast<size_t>(b) * T + t] / B;
    }
    label_conditional_pass(params, dims, x, hx, y, opt, eps_t.data(),
                           base.split(kStreamDecDropout + t), w.data(),
                           c_t.data(), compute_grads ? &dhx : nullptr);
    for (int b = 0; b < B; ++b) c[static_cast<size_t>(b) * T + t] = c_t[b];
  }

  double total = 0.0;
  for (int b = 0; b < B; ++b) {
    total += unlabeled_combine(&q[static_cast<size_t>(b) * T],
                               &c[static_cast<size_t>(b) * T], T);
  }
  const double loss = total / B;
  if (q_out != nullptr) *q_out = q;
  if (c_out != nullptr) *c_out = c;

  if (compute_grads) {
    encoder_trunk_backward(params, dims, dhx, trunk_cache);
    // dD/dq_t = C_t + log q_t + 1 (C does not depend on the classifier).
    Tensor<S> dq({B, T});
    for (size_t i = 0; i < dq.size(); ++i) {
      dq.data[i] = static_cast<S>(
          (c[i] + std::log(std::max(q[i], kTinyProb)) + 1.0) / B);
    }
    Tensor<S> dlogits = softmax_backward(dq, probs);
    classifier_backward(params, dims, dlogits, cls_cache);
  }
  return loss;
}

template <typename S>
Tensor<S> pack_batch(const std::vector<RtfPhaseSequence>& seqs,
                     const std::vector<int>& idx) {
  if (idx.empty()) throw std::invalid_argument("pack_batch: empty selection");
  const RtfPhaseSequence& first = seqs.at(idx[0]);
  const int K = first.n_bins;
  const int P = first.seq_len;
  Tensor<S> x({static_cast<int>(idx.size()), K, P, 1});
  const size_t n = static_cast<size_t>(K) * P;
  for (size_t b = 0; b < idx.size(); ++b) {
    const RtfPhaseSequence& s = seqs.at(idx[b]);
    if (s.n_bins != K || s.seq_len != P || s.x.size() != n) {
      throw std::invalid_argument("pack_batch: inconsistent sequence shape");
    }
    for (size_t i = 0; i < n; ++i) {
      x.data[b * n + i] = static_cast<S>(s.x[i]);
    }
  }
  return x;
}

double labeled_objective(const VaeSslModel& model, const RtfPhaseSequence& seq,
                         int label, double alpha, uint64_t seed) {
  const std::vector<RtfPhaseSequence> one{seq};
  const Tensor<float> x = pack_batch<float>(one, {0});
  ObjectiveOptions<float> opt;
  opt.likelihood = model.likelihood;
  opt.alpha = alpha;
  opt.seed = seed;
  // Forward-only evaluation never mutates the store.
  auto* params = const_cast<ParameterStore<float>*>(&model.params);
  return labeled_batch_objective(params, model.dims, x, {label}, opt, false);
}

double unlabeled_objective(const VaeSslModel& model, const RtfPhaseSequence& seq,
                           uint64_t seed) {
  const std::vector<RtfPhaseSequence> one{seq};
  const Tensor<float> x = pack_batch<float>(one, {0});
  ObjectiveOptions<float> opt;
  opt.likelihood = model.likelihood;
  opt.seed = seed;
  auto* params = const_cast<ParameterStore<float>*>(&model.params);
  return unlabeled_batch_objective(params, model.dims, x, opt, false);
}

std::vector<int> validation_split(const std::vector<RtfPhaseSequence>& labeled,
                                  int t_count) {
  if (labeled.empty()) return {};
  if (t_count <= 0) throw std::invalid_argument("validation_split: bad t_count");
  std::vector<std::vector<int>> groups(t_count);
  for (size_t i = 0; i < labeled.size(); ++i) {
    const int d = labeled[i].doa_index;
    if (d < 0 || d >= t_count) {
      throw std::invalid_argument("validation_split: unlabeled sequence");
    }
    groups[d].push_back(static_cast<int>(i));
  }
  const size_t want = (labeled.size() + 4) / 5;  // ceil(J/5)
  std::vector<int> val;
  for (size_t round = 0; val.size() < want; ++round) {
    bool any = false;
    for (int d = 0; d < t_count && val.size() < want; ++d) {
      if (round < groups[d].size()) {
        val.push_back(groups[d][round]);
        any = true;
      }
    }
    if (!any) break;
  }
  return val;
}

namespace {

// `want` indices from the pool: without replacement when the pool is large
// enough, with replacement otherwise.
std::vector<int> draw_labeled_batch(const std::vector<int>& pool, int want,
                                    Rng* rng) {
  std::vector<int> out;
  out.reserve(want);
  if (static_cast<int>(pool.size()) < want) {
    for (int i = 0; i < want; ++i) {
      out.push_back(pool[rng->below(pool.size())]);
    }
  } else {
    std::vector<int> tmp = pool;
    for (int i = 0; i < want; ++i) {
      const size_t j = i + rng->below(tmp.size() - i);
      std::swap(tmp[i], tmp[j]);
      out.push_back(tmp[i]);
    }
  }
  return out;
}

double batch_accuracy(const ParameterStore<float>& params, const ModelDims& dims,
                      const std::vector<RtfPhaseSequence>& seqs,
                      const std::vector<int>& idx, int chunk) {
  if (idx.empty()) return 0.0;
  long correct = 0;
  for (size_t lo = 0; lo < idx.size(); lo += chunk) {
    const size_t hi = std::min(idx.size(), lo + chunk);
    const std::vector<int> part(idx.begin() + lo, idx.begin() + hi);
    const Tensor<float> x = pack_batch<float>(seqs, part);
    const std::vector<int> pred = classify_batch(params, dims, x);
    for (size_t i = 0; i < part.size(); ++i) {
      if (pred[i] == seqs[part[i]].doa_index) ++correct;
    }
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(idx.size());
}

}  // namespace

TrainResult train_vae(const TrainSet& data, const TrainConfig& config) {
  data.grid.validate();
  const int T = data.grid.t_count();
  const int J = static_cast<int>(data.labeled.size());
  const long N = static_cast<long>(data.unlabeled.size());
  if (J < T) {
    throw std::invalid_argument("train: need a labeled sequence per DOA class");
  }
  if (N == 0) throw std::invalid_argument("train: empty unlabeled set");
  if (config.epochs < 1 || config.batch_size < 1) {
    throw std::invalid_argument("train: bad epoch/batch configuration");
  }

  ModelDims dims;
  dims.n_bins = data.labeled[0].n_bins;
  dims.seq_len = data.labeled[0].seq_len;
  dims.t_count = T;
  dims.latent_dim = config.latent_dim;
  dims.validate();

  VaeSslModel model;
  model.dims = dims;
  model.grid = data.grid;
  model.likelihood = config.likelihood;
  init_vae_params(&model.params, dims, config.seed);
  AdamConfig adam;
  adam.lr = config.lr;

  const std::vector<int> val_idx = validation_split(data.labeled, T);
  std::vector<char> in_val(J, 0);
  for (int i : val_idx) in_val[i] = 1;
  std::vector<int> train_idx;
  for (int i = 0; i < J; ++i) {
    if (!in_val[i]) train_idx.push_back(i);
  }
  if (train_idx.empty()) train_idx = val_idx;

  // One labeled batch after every round(N/J) unlabeled batches.
  const long cadence = std::max<long>(
      1, std::lround(static_cast<double>(N) / static_cast<double>(J)));
  const long full_batches = N / config.batch_size;
  const long batches_per_epoch = std::max<long>(1, full_batches);

  Rng shuffle_rng(config.seed, 0x5AFFu);
  Rng labeled_rng(config.seed, 0x1AB7u);

  std::vector<int> order(N);
  std::iota(order.begin(), order.end(), 0);

  TrainResult out;
  ParameterStore<float> best_params = model.params;
  double best_acc = -1.0;
  long global_batch = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (long i = N - 1; i > 0; --i) {
      const size_t j = shuffle_rng.below(static_cast<uint64_t>(i) + 1);
      std::swap(order[i], order[j]);
    }
    double unl_sum = 0.0, lab_sum = 0.0;
    long unl_count = 0, lab_count = 0;

    for (long bi = 0; bi < batches_per_epoch; ++bi) {
      const long lo = bi * config.batch_size;
      const long hi = std::min<long>(lo + config.batch_size, N);
      const std::vector<int> bidx(order.begin() + lo, order.begin() + hi);
      const Tensor<float> x = pack_batch<float>(data.unlabeled, bidx);

      ObjectiveOptions<float> opt;
      opt.likelihood = config.likelihood;
      opt.alpha = config.alpha;
      opt.training = true;
      opt.seed = config.seed;
      opt.stream = 2 * static_cast<uint64_t>(global_batch) + 1;
      model.params.zero_grad();
      unl_sum += unlabeled_batch_objective(&model.params, dims, x, opt, true);
      ++unl_count;
      adam_step(&model.params, &adam);
      ++global_batch;

      if (global_batch % cadence == 0) {
        const std::vector<int> lidx =
            draw_labeled_batch(train_idx, config.batch_size, &labeled_rng);
        const Tensor<float> xl = pack_batch<float>(data.labeled, lidx);
        std::vector<int> labels(lidx.size());
        for (size_t i = 0; i < lidx.size(); ++i) {
          labels[i] = data.labeled[lidx[i]].doa_index;
        }
        opt.stream = 2 * static_cast<uint64_t>(global_batch);
        model.params.zero_grad();
        lab_sum += labeled_batch_objective(&model.params, dims, xl, labels,
                                           opt, true);
        ++lab_count;
        adam_step(&model.params, &adam);
      }
    }

    double loss_labeled;
    if (lab_count > 0) {
      loss_labeled = lab_sum / lab_count;
    } else {
      // No labeled batch fell in this epoch; report a forward-only value so
      // the history stays complete.
      const int n = std::min<int>(config.batch_size,
                                  static_cast<int>(train_idx.size()));
      const std::vector<int> lidx(train_idx.begin(), train_idx.begin() + n);
      const Tensor<float> xl = pack_batch<float>(data.labeled, lidx);
      std::vector<int> labels(lidx.size());
      for (size_t i = 0; i < lidx.size(); ++i) {
        labels[i] = data.labeled[lidx[i]].doa_index;
      }
      ObjectiveOptions<float> opt;
      opt.likelihood = config.likelihood;
      opt.alpha = config.alpha;
      opt.seed = config.seed;
      opt.stream = 0x0D1A0000u + static_cast<uint64_t>(epoch);
      loss_labeled =
          labeled_batch_objective(&model.params, dims, xl, labels, opt, false);
    }

    const double acc = batch_accuracy(model.params, dims, data.labeled, val_idx,
                                      config.batch_size);
    out.history.push_back(
        {epoch, loss_labeled, unl_sum / unl_count, acc});
    if (acc > best_acc) {
      best_acc = acc;
      out.best_epoch = epoch;
      best_params = model.params;
    }
  }

  model.params = std::move(best_params);
  out.model = std::move(model);
  return out;
}

std::pair<int, double> estimate_doa(const VaeSslModel& model,
                                    const RtfPhaseSequence& seq) {
  const std::vector<RtfPhaseSequence> one{seq};
  const Tensor<float> x = pack_batch<float>(one, {0});
  const int t = classify_batch(model.params, model.dims, x)[0];
  return {t, model.grid.angle(t)};
}

namespace {

RtfPhaseSequence sequence_from_row(const float* row, const ModelDims& dims,
                                   int doa_index) {
  RtfPhaseSequence s;
  s.n_bins = dims.n_bins;
  s.seq_len = dims.seq_len;
  s.doa_index = doa_index;
  s.start_frame = -1;
  s.x.assign(row, row + dims.x_size());
  return s;
}

// Per-element draw from the decoder output distribution; normal-likelihood
// draws are clamped to the phase range so every sequence stays in [-1, 1].
float sample_output(Likelihood lik, double mu, double var, Rng* rng) {
  var = std::max(var, 1e-12);
  if (lik == Likelihood::kTruncatedNormal) {
    return static_cast<float>(trunc_normal_sample_1(mu, var, rng));
  }
  const double draw = mu + std::sqrt(var) * rng->gauss();
  return static_cast<float>(std::min(1.0, std::max(-1.0, draw)));
}

}  // namespace

GenerateResult conditional_generate(const VaeSslModel& model, int doa_index,
                                    int n, uint64_t seed) {
  const ModelDims& dims = model.dims;
  dims.validate();
  if (doa_index < 0 || doa_index >= dims.t_count) {
    throw std::invalid_argument("generate: DOA index outside grid");
  }
  if (n < 1) throw std::invalid_argument("generate: n must be positive");

  Rng z_rng(seed, 0x6E2Au);
  Rng s_rng(seed, 0x5A37u);
  const Tensor<float> y = const_one_hot<float>(n, doa_index, dims.t_count);
  Tensor<float> z({n, dims.latent_dim});
  for (size_t i = 0; i < z.size(); ++i) z.data[i] = static_cast<float>(z_rng.gauss());

  DecCache<float> cache;
  Tensor<float> mu, var;
  decoder_forward(model.params, dims, y, z, false, Rng(seed, 0xDECu), &cache,
                  &mu, &var);

  GenerateResult out;
  const int X = dims.x_size();
  std::vector<float> draw(X);
  for (int j = 0; j < n; ++j) {
    const float* mu_row = mu.ptr() + static_cast<size_t>(j) * X;
    const float* var_row = var.ptr() + static_cast<size_t>(j) * X;
    for (int i = 0; i < X; ++i) {
      draw[i] = sample_output(model.likelihood, mu_row[i], var_row[i], &s_rng);
    }
    out.samples.push_back(sequence_from_row(draw.data(), dims, doa_index));
    out.means.push_back(sequence_from_row(mu_row, dims, doa_index));
  }
  return out;
}

ReconstructResult reconstruct(const VaeSslModel& model,
                              const RtfPhaseSequence& seq, int doa_index,
                              uint64_t seed) {
  const ModelDims& dims = model.dims;
  dims.validate();
  if (doa_index < 0 || doa_index >= dims.t_count) {
    throw std::invalid_argument("reconstruct: DOA index outside grid");
  }
  if (seq.n_bins != dims.n_bins || seq.seq_len != dims.seq_len) {
    throw std::invalid_argument("reconstruct: sequence shape mismatch");
  }

  const std::vector<RtfPhaseSequence> one{seq};
  const Tensor<float> x = pack_batch<float>(one, {0});
  EncTrunkCache<float> trunk_cache;
  const Tensor<float> hx =
      encoder_trunk_forward(model.params, dims, x, &trunk_cache);
  const Tensor<float> y = const_one_hot<float>(1, doa_index, dims.t_count);
  EncHeadCache<float> head_cache;
  Tensor<float> mu_z, var_z;
  encoder_head_forward(model.params, dims, hx, y, &head_cache, &mu_z, &var_z);

  Rng eps_rng(seed, 0xE125u);
  Rng s_rng(seed, 0x5A37u);
  Tensor<float> z({1, dims.latent_dim});
  for (size_t i = 0; i < z.size(); ++i) {
    z.data[i] = static_cast<float>(
        static_cast<double>(mu_z.data[i]) +
        std::sqrt(static_cast<double>(var_z.data[i])) * eps_rng.gauss());
  }

  DecCache<float> dec_cache;
  Tensor<float> mu, var;
  decoder_forward(model.params, dims, y, z, false, Rng(seed, 0xDECu),
                  &dec_cache, &mu, &var);

  const int X = dims.x_size();
  std::vector<float> draw(X);
  for (int i = 0; i < X; ++i) {
    draw[i] = sample_output(model.likelihood, mu.data[i], var.data[i], &s_rng);
  }
  ReconstructResult out;
  out.sample = sequence_from_row(draw.data(), dims, doa_index);
  out.mean = sequence_from_row(mu.ptr(), dims, doa_index);
  return out;
}

void write_history_csv(const std::string& path,
                       const std::vector<EpochStats>& history) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "epoch,loss_labeled,loss_unlabeled,val_accuracy\n";
  char line[160];
  for (const EpochStats& h : history) {
    std::snprintf(line, sizeof line, "%d,%.9g,%.9g,%.9g\n", h.epoch,
                  h.loss_labeled, h.loss_unlabeled, h.val_accuracy);
    f << line;
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

void save_model(const VaeSslModel& model, int epoch, uint64_t seed,
                double alpha, const std::string& path) {
  std::map<std::string, std::string> md;
  char buf[64];
  md["epoch"] = std::to_string(epoch);
  md["seed"] = std::to_string(seed);
  std::snprintf(buf, sizeof buf, "%.17g", alpha);
  md["alpha"] = buf;
  std::string grid;
  for (size_t t = 0; t < model.grid.angles_deg.size(); ++t) {
    std::snprintf(buf, sizeof buf, "%.17g", model.grid.angles_deg[t]);
    if (t) grid += ',';
    grid += buf;
  }
  md["grid"] = grid;
  md["n_bins"] = std::to_string(model.dims.n_bins);
  md["seq_len"] = std::to_string(model.dims.seq_len);
  md["latent_dim"] = std::to_string(model.dims.latent_dim);
  md["likelihood"] =
      model.likelihood == Likelihood::kNormal ? "normal" : "truncated_normal";
  checkpoint_save(model.params, md, path);
}

VaeSslModel load_model(const std::string& path) {
  std::map<std::string, std::string> md;
  VaeSslModel m;
  m.params = checkpoint_load(path, &md);
  for (const char* key :
       {"grid", "n_bins", "seq_len", "latent_dim", "likelihood"}) {
    if (md.find(key) == md.end()) {
      throw std::runtime_error(std::string("checkpoint missing metadata: ") +
                               key);
    }
  }
  std::stringstream ss(md["grid"]);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    m.grid.angles_deg.push_back(std::stod(tok));
  }
  m.grid.validate();
  m.dims.n_bins = std::stoi(md["n_bins"]);
  m.dims.seq_len = std::stoi(md["seq_len"]);
  m.dims.latent_dim = std::stoi(md["latent_dim"]);
  m.dims.t_count = static_cast<int>(m.grid.angles_deg.size());
  m.dims.validate();
  m.likelihood = md["likelihood"] == "normal" ? Likelihood::kNormal
                                              : Likelihood::kTruncatedNormal;
  return m;
}

template double labeled_batch_objective<float>(
    ParameterStore<float>*, const ModelDims&, const Tensor<float>&,
    const std::vector<int>&, const ObjectiveOptions<float>&, bool, double*);
template double labeled_batch_objective<double>(
    ParameterStore<double>*, const ModelDims&, const Tensor<double>&,
    const std::vector<int>&, const ObjectiveOptions<double>&, bool, double*);
template double unlabeled_batch_objective<float>(
    ParameterStore<float>*, const ModelDims&, const Tensor<float>&,
    const ObjectiveOptions<float>&, bool, std::vector<double>*,
    std::vector<double>*);
template double unlabeled_batch_objective<double>(
    ParameterStore<double>*, const ModelDims&, const Tensor<double>&,
    const ObjectiveOptions<double>&, bool, std::vector<double>*,
    std::vector<double>*);
template Tensor<float> pack_batch<float>(const std::vector<RtfPhaseSequence>&,
                                         const std::vector<int>&);
template Tensor<double> pack_batch<double>(const std::vector<RtfPhaseSequence>&,
                                           const std::vector<int>&);

}  // namespace rtfdoa
