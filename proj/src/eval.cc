// src/eval.cc
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#include "rtfdoa/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "rtfdoa/signal.h"

namespace rtfdoa {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double mae(const std::vector<double>& estimates_deg,
           const std::vector<double>& truths_deg) {
  if (estimates_deg.empty() || estimates_deg.size() != truths_deg.size()) {
    throw std::invalid_argument("mae: need equal nonempty angle lists");
  }
  double acc = 0.0;
  for (size_t i = 0; i < estimates_deg.size(); ++i) {
    acc += std::abs(estimates_deg[i] - truths_deg[i]);
  }
  return acc / static_cast<double>(estimates_deg.size());
}

double accuracy(const std::vector<int>& estimates_idx,
                const std::vector<int>& truth_idx) {
  if (estimates_idx.empty() || estimates_idx.size() != truth_idx.size()) {
    throw std::invalid_argument("accuracy: need equal nonempty index lists");
  }
  long hits = 0;
  for (size_t i = 0; i < estimates_idx.size(); ++i) {
    if (estimates_idx[i] == truth_idx[i]) ++hits;
  }
  return 100.0 * static_cast<double>(hits) /
         static_cast<double>(estimates_idx.size());
}

DelayAnalysis delay_analysis(const std::vector<double>& phase_rad, int n_bins,
                             int seq_len, int n_fft, double f_s) {
  if (n_fft < 4 || n_bins != n_fft / 2 - 1) {
    throw std::invalid_argument(
        "delay_analysis: phase must cover bins 1..n_fft/2-1");
  }
  if (seq_len < 1 ||
      phase_rad.size() != static_cast<size_t>(n_bins) * seq_len) {
    throw std::invalid_argument("delay_analysis: phase matrix size mismatch");
  }
  for (double p : phase_rad) {
    if (!(std::abs(p) <= kPi)) {
      throw std::invalid_argument("delay_analysis: phase outside [-pi, pi]");
    }
  }
  const int half = n_fft / 2;
  DelayAnalysis out;
  out.n_fft = n_fft;
  out.mean_profile.assign(n_fft, 0.0);
  std::vector<cplx> spec(half + 1);
  for (int p = 0; p < seq_len; ++p) {
    spec[0] = cplx(1.0, 0.0);
    spec[half] = cplx(1.0, 0.0);
    for (int k = 1; k < half; ++k) {
      const double phi = phase_rad[static_cast<size_t>(k - 1) * seq_len + p];
      spec[k] = cplx(std::cos(phi), std::sin(phi));
    }
    const std::vector<double> ir = ifft_one_sided(spec, n_fft);
    // Circular centering: output index i holds lag i - n_fft/2.
    int best = 0;
    double best_mag = -1.0;
    for (int i = 0; i < n_fft; ++i) {
      const int lag = i - half;
      const double mag = std::abs(ir[(lag + n_fft) % n_fft]);
      out.mean_profile[i] += mag;
      if (mag > best_mag) {
        best_mag = mag;
        best = lag;
      }
    }
    out.frame_delays.push_back(best);
    out.frame_delays_s.push_back(static_cast<double>(best) / f_s);
  }
  for (double& v : out.mean_profile) v /= seq_len;
  return out;
}

std::vector<double> phase_histogram(const std::vector<RtfPhaseSequence>& seqs,
                                    int doa, int bins) {
  if (bins < 1) throw std::invalid_argument("phase_histogram: bad bin count");
  std::vector<double> hist(bins, 0.0);
  long total = 0;
  for (const RtfPhaseSequence& s : seqs) {
    if (doa >= 0 && s.doa_index != doa) continue;
    for (float v : s.x) {
      const double phi = static_cast<double>(v) * kPi;  // de-normalize
      int b = static_cast<int>(std::floor((phi + kPi) / (2.0 * kPi) * bins));
      b = std::min(bins - 1, std::max(0, b));
      hist[b] += 1.0;
      ++total;
    }
  }
  if (total == 0) {
    throw std::invalid_argument("phase_histogram: no matching sequences");
  }
  for (double& v : hist) v /= static_cast<double>(total);
  return hist;
}

void emit_report(const std::vector<EvalReport>& reports,
                 const std::string& path) {
  std::vector<EvalReport> sorted = reports;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const EvalReport& a, const EvalReport& b) {
                     if (a.method != b.method) return a.method < b.method;
                     if (a.j_labeled != b.j_labeled) {
                       return a.j_labeled < b.j_labeled;
                     }
                     return a.split < b.split;
                   });
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  f << "method,J,split,mae_deg,accuracy_pct,n_sequences\n";
  char line[256];
  for (const EvalReport& r : sorted) {
    std::snprintf(line, sizeof line, "%s,%d,%s,%.17g,%.17g,%d\n",
                  r.method.c_str(), r.j_labeled, r.split.c_str(), r.mae_deg,
                  r.accuracy_pct, r.n_sequences);
    f << line;
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

std::vector<EvalReport> read_report(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(f, line) ||
      line != "method,J,split,mae_deg,accuracy_pct,n_sequences") {
    throw std::runtime_error("report header mismatch in " + path);
  }
  std::vector<EvalReport> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string tok;
    EvalReport r;
    std::getline(ss, r.method, ',');
    std::getline(ss, tok, ',');
    r.j_labeled = std::stoi(tok);
    std::getline(ss, r.split, ',');
    std::getline(ss, tok, ',');
    r.mae_deg = std::stod(tok);
    std::getline(ss, tok, ',');
    r.accuracy_pct = std::stod(tok);
    if (!std::getline(ss, tok)) {
      throw std::runtime_error("short report row in " + path);
    }
    r.n_sequences = std::stoi(tok);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace rtfdoa
