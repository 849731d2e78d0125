// src/baselines.cc
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#include "rtfdoa/baselines.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "rtfdoa/rtf.h"

namespace rtfdoa {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEps = 1e-12;

void check_context(const SteeringContext& ctx, const StftFrames& f1,
                   const StftFrames& f2) {
  ctx.grid.validate();
  if (ctx.mic_spacing_m <= 0.0) {
    throw std::invalid_argument("steering: mic spacing must be positive");
  }
  if (ctx.bin_lo < 0 || ctx.bin_hi < ctx.bin_lo ||
      ctx.bin_hi > ctx.n_fft / 2) {
    throw std::invalid_argument("steering: bin range outside spectrum");
  }
  if (f1.n_bins() != f2.n_bins() || f1.n_frames() != f2.n_frames()) {
    throw std::invalid_argument("steering: channel frame shapes differ");
  }
  if (ctx.bin_hi >= f1.n_bins()) {
    throw std::invalid_argument("steering: bin range outside frame matrix");
  }
}

int argmax_lowest(const std::vector<double>& score) {
  int best = 0;
  for (int t = 1; t < static_cast<int>(score.size()); ++t) {
    if (score[t] > score[best]) best = t;
  }
  return best;
}

}  // namespace

SteeringContext make_steering_context(const DoaGrid& grid, double mic_spacing_m,
                                      double f_s, int n_fft) {
  SteeringContext ctx;
  ctx.grid = grid;
  ctx.mic_spacing_m = mic_spacing_m;
  ctx.f_s = f_s;
  ctx.n_fft = n_fft;
  ctx.bin_lo = 1;
  ctx.bin_hi = n_fft / 2 - 1;
  return ctx;
}

std::pair<int, double> srp_phat(const StftFrames& frames1,
                                const StftFrames& frames2,
                                const SteeringContext& ctx) {
  check_context(ctx, frames1, frames2);
  const int P = frames1.n_frames();
  if (P < 1) throw std::invalid_argument("srp_phat: empty frames");

  const int T = ctx.grid.t_count();
  const int n_bins_used = ctx.bin_hi - ctx.bin_lo + 1;

  // Frame-summed PHAT-weighted cross-spectrum per bin; the steering rotation
  // distributes over the frame sum.
  std::vector<cplx> psi_sum(n_bins_used, cplx(0.0, 0.0));
  for (int k = ctx.bin_lo; k <= ctx.bin_hi; ++k) {
    cplx acc(0.0, 0.0);
    for (int p = 0; p < P; ++p) {
      const cplx cross = frames2.at(k, p) * std::conj(frames1.at(k, p));
      acc += cross / (std::abs(cross) + kEps);
    }
    psi_sum[k - ctx.bin_lo] = acc;
  }

  std::vector<double> score(T, 0.0);
  for (int t = 0; t < T; ++t) {
    const double tau =
        expected_delay(ctx.grid.angle(t), ctx.mic_spacing_m, ctx.sound_speed);
    double s = 0.0;
    for (int k = ctx.bin_lo; k <= ctx.bin_hi; ++k) {
      const double f_k = static_cast<double>(k) * ctx.f_s / ctx.n_fft;
      const double phi = 2.0 * kPi * f_k * tau;
      const cplx steer(std::cos(phi), std::sin(phi));
      s += (psi_sum[k - ctx.bin_lo] * steer).real();
    }
    score[t] = s;
  }
  const int t_hat = argmax_lowest(score);
  return {t_hat, ctx.grid.angle(t_hat)};
}

void hermitian2_minor_eigen(double a, std::complex<double> b, double d,
                            double* lambda_min, std::complex<double> u[2]) {
  const double tr = a + d;
  const double diff = a - d;
  const double disc = std::sqrt(diff * diff + 4.0 * std::norm(b));
  const double lam = 0.5 * (tr - disc);
  if (lambda_min != nullptr) *lambda_min = lam;
  if (std::abs(b) < 1e-300) {
    // Diagonal: pick the axis of the smaller diagonal entry.
    u[0] = a <= d ? 1.0 : 0.0;
    u[1] = a <= d ? 0.0 : 1.0;
    return;
  }
  // (R - lam I) [u0, u1] = 0 with first row: (a - lam) u0 + b u1 = 0.
  u[0] = b;
  u[1] = lam - a;
  const double n = std::sqrt(std::norm(u[0]) + std::norm(u[1]));
  u[0] /= n;
  u[1] /= n;
}

std::pair<int, double> music(const StftFrames& frames1,
                             const StftFrames& frames2,
                             const SteeringContext& ctx, int n_sources) {
  check_context(ctx, frames1, frames2);
  const int P = frames1.n_frames();
  if (P < 2) throw std::invalid_argument("music: need at least 2 snapshots");
  if (n_sources != 1) {
    throw std::invalid_argument("music: only one source supported");
  }

  const int T = ctx.grid.t_count();
  std::vector<double> score(T, 0.0);
  for (int k = ctx.bin_lo; k <= ctx.bin_hi; ++k) {
    double r11 = 0.0, r22 = 0.0;
    cplx r12(0.0, 0.0);
    for (int p = 0; p < P; ++p) {
      const cplx d1 = frames1.at(k, p);
      const cplx d2 = frames2.at(k, p);
      r11 += std::norm(d1);
      r22 += std::norm(d2);
      r12 += d1 * std::conj(d2);
    }
    r11 /= P;
    r22 /= P;
    r12 /= static_cast<double>(P);

    cplx u[2];
    hermitian2_minor_eigen(r11, r12, r22, nullptr, u);

    const double f_k = static_cast<double>(k) * ctx.f_s / ctx.n_fft;
    for (int t = 0; t < T; ++t) {
      const double tau =
          expected_delay(ctx.grid.angle(t), ctx.mic_spacing_m, ctx.sound_speed);
      const double phi = -2.0 * kPi * f_k * tau;
      const cplx v1(1.0 / std::sqrt(2.0), 0.0);
      const cplx v2 = cplx(std::cos(phi), std::sin(phi)) / std::sqrt(2.0);
      const cplx proj = std::conj(u[0]) * v1 + std::conj(u[1]) * v2;
      score[t] += 1.0 / (std::norm(proj) + kEps);
    }
  }
  const int t_hat = argmax_lowest(score);
  return {t_hat, ctx.grid.angle(t_hat)};
}

std::vector<std::vector<cplx>> rtf_1nn_train(
    const StftFrames& frames1, const StftFrames& frames2,
    const std::vector<std::vector<int>>& frames_per_doa,
    const SteeringContext& ctx) {
  check_context(ctx, frames1, frames2);
  if (static_cast<int>(frames_per_doa.size()) != ctx.grid.t_count()) {
    throw std::invalid_argument("rtf_1nn: one frame set per grid DOA required");
  }
  std::vector<std::vector<cplx>> templates;
  templates.reserve(frames_per_doa.size());
  for (const std::vector<int>& set : frames_per_doa) {
    if (set.empty()) {
      throw std::invalid_argument("rtf_1nn: a DOA has no labeled frames");
    }
    const std::vector<cplx> full = spectrally_averaged_rtf(frames1, frames2, set);
    templates.emplace_back(full.begin() + ctx.bin_lo,
                           full.begin() + ctx.bin_hi + 1);
  }
  return templates;
}

std::pair<int, double> rtf_1nn_classify(
    const StftFrames& frames1, const StftFrames& frames2,
    const std::vector<std::vector<cplx>>& templates,
    const SteeringContext& ctx) {
  check_context(ctx, frames1, frames2);
  if (templates.empty()) throw std::invalid_argument("rtf_1nn: no templates");
  const int P = frames1.n_frames();
  if (P < 1) throw std::invalid_argument("rtf_1nn: empty frames");

  std::vector<int> all(P);
  std::iota(all.begin(), all.end(), 0);
  const std::vector<cplx> full = spectrally_averaged_rtf(frames1, frames2, all);
  const std::vector<cplx> query(full.begin() + ctx.bin_lo,
                                full.begin() + ctx.bin_hi + 1);

  int best = 0;
  double best_d = -1.0;
  for (size_t t = 0; t < templates.size(); ++t) {
    if (templates[t].size() != query.size()) {
      throw std::invalid_argument("rtf_1nn: template bin count mismatch");
    }
    double d = 0.0;
    for (size_t k = 0; k < query.size(); ++k) {
      d += std::norm(templates[t][k] - query[k]);
    }
    if (best_d < 0.0 || d < best_d) {
      best_d = d;
      best = static_cast<int>(t);
    }
  }
  return {best, ctx.grid.angle(best)};
}

template <typename S>
double classifier_cross_entropy(ParameterStore<S>* params,
                                const ModelDims& dims, const Tensor<S>& x,
                                const std::vector<int>& labels, bool training,
                                Rng rng, bool compute_grads) {
  const int B = x.dim(0);
  const int T = dims.t_count;
  if (static_cast<int>(labels.size()) != B) {
    throw std::invalid_argument("cross_entropy: one label per row required");
  }
  for (int l : labels) {
    if (l < 0 || l >= T) {
      throw std::invalid_argument("cross_entropy: label outside grid");
    }
  }
  ClsCache<S> cache;
  const Tensor<S> probs =
      classifier_forward(*params, dims, x, training, rng, &cache);
  double ce = 0.0;
  for (int b = 0; b < B; ++b) {
    const double p = static_cast<double>(probs.data[b * (size_t)T + labels[b]]);
    ce -= std::log(std::max(p, 1e-300));
  }
  ce /= B;
  if (compute_grads) {
    Tensor<S> dlogits({B, T});
    for (int b = 0; b < B; ++b) {
      for (int t = 0; t < T; ++t) {
        const size_t i = static_cast<size_t>(b) * T + t;
        const double onehot = t == labels[b] ? 1.0 : 0.0;
        dlogits.data[i] =
            static_cast<S>((static_cast<double>(probs.data[i]) - onehot) / B);
      }
    }
    classifier_backward(params, dims, dlogits, cache);
  }
  return ce;
}

CnnTrainResult cnn_train(const std::vector<RtfPhaseSequence>& labeled,
                         const DoaGrid& grid, const TrainConfig& config) {
  grid.validate();
  const int T = grid.t_count();
  const int J = static_cast<int>(labeled.size());
  if (J < T) throw std::invalid_argument("cnn: need a labeled sequence per DOA");
  if (config.epochs < 1 || config.batch_size < 1) {
    throw std::invalid_argument("cnn: bad epoch/batch configuration");
  }

  CnnModel model;
  model.dims.n_bins = labeled[0].n_bins;
  model.dims.seq_len = labeled[0].seq_len;
  model.dims.t_count = T;
  model.dims.latent_dim = config.latent_dim;
  model.dims.validate();
  model.grid = grid;
  init_classifier_params(&model.params, model.dims, config.seed);
  AdamConfig adam;
  adam.lr = config.lr;

  const std::vector<int> val_idx = validation_split(labeled, T);
  std::vector<char> in_val(J, 0);
  for (int i : val_idx) in_val[i] = 1;
  std::vector<int> train_idx;
  for (int i = 0; i < J; ++i) {
    if (!in_val[i]) train_idx.push_back(i);
  }
  if (train_idx.empty()) train_idx = val_idx;

  Rng shuffle_rng(config.seed, 0xC4Au);
  CnnTrainResult out;
  ParameterStore<float> best_params = model.params;
  double best_acc = -1.0;
  uint64_t global_batch = 0;

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<int> order = train_idx;
    for (size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[shuffle_rng.below(i + 1)]);
    }
    double ce_sum = 0.0;
    long n_batches = 0;
    for (size_t lo = 0; lo < order.size(); lo += config.batch_size) {
      const size_t hi = std::min(order.size(), lo + config.batch_size);
      const std::vector<int> bidx(order.begin() + lo, order.begin() + hi);
      const Tensor<float> x = pack_batch<float>(labeled, bidx);
      std::vector<int> labels(bidx.size());
      for (size_t i = 0; i < bidx.size(); ++i) {
        labels[i] = labeled[bidx[i]].doa_index;
      }
      model.params.zero_grad();
      ce_sum += classifier_cross_entropy(
          &model.params, model.dims, x, labels, true,
          Rng(config.seed, 0xC0DEu + global_batch), true);
      ++n_batches;
      ++global_batch;
      adam_step(&model.params, &adam);
    }
    // Validation accuracy for model selection.
    long correct = 0;
    for (size_t lo = 0; lo < val_idx.size(); lo += config.batch_size) {
      const size_t hi = std::min(val_idx.size(), lo + config.batch_size);
      const std::vector<int> part(val_idx.begin() + lo, val_idx.begin() + hi);
      const Tensor<float> x = pack_batch<float>(labeled, part);
      const std::vector<int> pred = classify_batch(model.params, model.dims, x);
      for (size_t i = 0; i < part.size(); ++i) {
        if (pred[i] == labeled[part[i]].doa_index) ++correct;
      }
    }
    const double acc =
        100.0 * static_cast<double>(correct) / static_cast<double>(val_idx.size());
    out.history.push_back({epoch, ce_sum / n_batches, 0.0, acc});
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

std::pair<int, double> cnn_predict(const CnnModel& model,
                                   const RtfPhaseSequence& seq) {
  const std::vector<RtfPhaseSequence> one{seq};
  const Tensor<float> x = pack_batch<float>(one, {0});
  const int t = classify_batch(model.params, model.dims, x)[0];
  return {t, model.grid.angle(t)};
}

void save_cnn_model(const CnnModel& model, int epoch, uint64_t seed,
                    const std::string& path) {
  std::map<std::string, std::string> md;
  char buf[64];
  md["kind"] = "cnn";
  md["epoch"] = std::to_string(epoch);
  md["seed"] = std::to_string(seed);
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
  checkpoint_save(model.params, md, path);
}

CnnModel load_cnn_model(const std::string& path) {
  std::map<std::string, std::string> md;
  CnnModel m;
  m.params = checkpoint_load(path, &md);
  for (const char* key : {"grid", "n_bins", "seq_len", "latent_dim"}) {
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
  return m;
}

template double classifier_cross_entropy<float>(ParameterStore<float>*,
                                                const ModelDims&,
                                                const Tensor<float>&,
                                                const std::vector<int>&, bool,
                                                Rng, bool);
template double classifier_cross_entropy<double>(ParameterStore<double>*,
                                                 const ModelDims&,
                                                 const Tensor<double>&,
                                                 const std::vector<int>&, bool,
                                                 Rng, bool);

}  // namespace rtfdoa
