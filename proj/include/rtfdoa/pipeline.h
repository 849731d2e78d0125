// include/rtfdoa/pipeline.h
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0

#ifndef RTFDOA_PIPELINE_H_
#define RTFDOA_PIPELINE_H_

#include <cstdint>
#include <string>

#include "rtfdoa/config.h"

namespace rtfdoa {

// Flag overrides shared by the pipeline commands.  A --seed flag replaces
// [train] seed before cache hashes are computed, so different seeds key
// different cache generations.
struct CmdOptions {
  std::string method;  // train/eval method; empty = vae-ssl
  std::string split;   // eval split; empty = the [eval] splits list
  bool has_doa = false;
  double doa_deg = 0.0;
  int n_generate = 16;
  bool has_seed = false;
  uint64_t seed = 0;
  int threads = 1;
};

// Commands throw std::invalid_argument for validation problems (bad flags,
// missing/stale caches — messages name the producing command) and other
// exceptions for runtime failures.  Producers skip work and report "up to
// date" when their stamp already matches the config hash.
void cmd_simulate(const RunConfig& config, const CmdOptions& opt);
void cmd_featurize(const RunConfig& config, const CmdOptions& opt);
void cmd_train(const RunConfig& config, const CmdOptions& opt);
void cmd_eval(const RunConfig& config, const CmdOptions& opt);
void cmd_generate(const RunConfig& config, const CmdOptions& opt);

// Finite-difference verification of both training objectives at reduced
// architecture dims; prints one line per objective and returns 0 when every
// max relative error is within 1e-3, else 2.
int cmd_gradcheck(const RunConfig& config, const CmdOptions& opt);

}  // namespace rtfdoa

#endif  // RTFDOA_PIPELINE_H_
