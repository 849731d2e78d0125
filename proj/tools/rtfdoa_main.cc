// tools/rtfdoa_main.cc
//
// Copyright 2026 rtfdoa authors
//
// Licensed under the Apache License, Version 2.0;
// see http://www.apache.org/licenses/LICENSE-2.0
//
// rtfdoa <simulate|featurize|train|eval|generate|gradcheck> --config path
//        [--method m] [--split s] [--doa d] [--n k] [--seed s] [--threads t]

#include <cstdio>
#include <exception>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "rtfdoa/config.h"
#include "rtfdoa/pipeline.h"

namespace {

struct Cli {
  std::string config_path;
  rtfdoa::CmdOptions opt;
};

void add_common(CLI::App* cmd, Cli* cli, bool* seed_set) {
  cmd->add_option("--config", cli->config_path, "run configuration file")
      ->required();
  cmd->add_option("--seed", cli->opt.seed, "override [train] seed")
      ->each([seed_set](const std::string&) { *seed_set = true; });
  cmd->add_option("--threads", cli->opt.threads, "worker threads")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RTF-phase DOA estimation pipeline"};
  app.require_subcommand(1);

  Cli cli;
  bool seed_set = false;
  bool doa_set = false;

  CLI::App* simulate = app.add_subcommand("simulate", "render IRs and mixtures");
  CLI::App* featurize =
      app.add_subcommand("featurize", "build the RTF-phase dataset cache");
  CLI::App* train = app.add_subcommand("train", "train a model");
  CLI::App* eval = app.add_subcommand("eval", "evaluate a method on splits");
  CLI::App* generate =
      app.add_subcommand("generate", "sample the decoder at a grid DOA");
  CLI::App* gradcheck =
      app.add_subcommand("gradcheck", "finite-difference objective check");

  for (CLI::App* cmd :
       {simulate, featurize, train, eval, generate, gradcheck}) {
    add_common(cmd, &cli, &seed_set);
  }
  train->add_option("--method", cli.opt.method, "vae-ssl | cnn");
  eval->add_option("--method", cli.opt.method,
                   "vae-ssl | cnn | srp-phat | music | rtf-1nn");
  eval->add_option("--split", cli.opt.split,
                   "train-unlabeled | validation | off-grid | off-range");
  generate->add_option("--doa", cli.opt.doa_deg, "grid DOA in degrees")
      ->each([&doa_set](const std::string&) { doa_set = true; });
  generate->add_option("--n", cli.opt.n_generate, "number of draws");

  CLI11_PARSE(app, argc, argv);
  cli.opt.has_seed = seed_set;
  cli.opt.has_doa = doa_set;

  try {
    const rtfdoa::RunConfig config = rtfdoa::load_config(cli.config_path);
    if (simulate->parsed()) {
      rtfdoa::cmd_simulate(config, cli.opt);
    } else if (featurize->parsed()) {
      rtfdoa::cmd_featurize(config, cli.opt);
    } else if (train->parsed()) {
      rtfdoa::cmd_train(config, cli.opt);
    } else if (eval->parsed()) {
      rtfdoa::cmd_eval(config, cli.opt);
    } else if (generate->parsed()) {
      rtfdoa::cmd_generate(config, cli.opt);
    } else if (gradcheck->parsed()) {
      return rtfdoa::cmd_gradcheck(config, cli.opt);
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "runtime error: %s\n", e.what());
    return 2;
  }
  return 0;
}
