// Copyright 2026 The genconv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "app.hpp"
#include "genconv/checkpoint.hpp"
#include "genconv/learner.hpp"
#include "run_config.hpp"

namespace {

using genconv::tools::RunConfig;

struct Flags {
  std::string config;
  std::string preset;
  std::string out;
  std::string data;
  std::string checkpoint;
  std::optional<std::uint64_t> seed;
  std::optional<int> steps;
  std::optional<int> iterations;
  std::optional<int> chains;
  std::optional<std::size_t> workers;
};

void add_common(CLI::App& cmd, Flags& f) {
  cmd.add_option("--config", f.config, "JSON run configuration");
  std::string names;
  for (auto n : genconv::tools::preset_names()) names += (names.empty() ? "" : "|") + std::string(n);
  cmd.add_option("--preset", f.preset, "built-in configuration {" + names + "}");
  cmd.add_option("--seed", f.seed, "master random seed");
  cmd.add_option("--out", f.out, "output directory");
  cmd.add_option("--workers", f.workers, "worker threads");
}

RunConfig resolve(const Flags& f) {
  std::optional<RunConfig> base;
  if (!f.preset.empty()) base = genconv::tools::preset(f.preset);
  RunConfig cfg;
  if (!f.config.empty()) {
    cfg = genconv::tools::load_run_config(f.config, base);
  } else if (base) {
    cfg = *base;
  } else {
    cfg = genconv::tools::parse_run_config("{}");
  }
  if (!f.data.empty()) cfg.data_dir = f.data;
  if (!f.out.empty()) cfg.out_dir = f.out;
  if (f.seed) cfg.seed = *f.seed;
  if (f.steps) cfg.sample_steps = *f.steps;
  if (f.iterations) cfg.train.iterations = *f.iterations;
  if (f.chains) {
    cfg.sample_chains = *f.chains;
    cfg.train.num_chains = *f.chains;
  }
  if (f.workers) cfg.train.workers = *f.workers;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  namespace gt = genconv::tools;
  CLI::App app{"Generative ConvNet: training, sampling, reconstruction and verification"};
  app.require_subcommand(1);
  Flags f;

  CLI::App* train = app.add_subcommand("train", "learn a model from a directory of PGM/PPM images");
  add_common(*train, f);
  train->add_option("--data", f.data, "directory of training images");
  train->add_option("--chains", f.chains, "number of synthesis chains");
  train->add_option("--steps", f.iterations, "learning iterations T");

  CLI::App* sample = app.add_subcommand("sample", "run fresh Langevin chains under a saved model");
  add_common(*sample, f);
  sample->add_option("--checkpoint", f.checkpoint, "checkpoint file (default OUT/checkpoint.json)");
  sample->add_option("--steps", f.steps, "Langevin steps");
  sample->add_option("--chains", f.chains, "number of chains");

  CLI::App* recon = app.add_subcommand("reconstruct", "auto-encode images through a saved model");
  add_common(*recon, f);
  recon->add_option("--checkpoint", f.checkpoint, "checkpoint file (default OUT/checkpoint.json)");
  recon->add_option("--data", f.data, "directory of images to reconstruct");

  CLI::App* verify = app.add_subcommand("verify", "run the oracle checks; one JSON object per line");
  verify->add_option("--seed", f.seed, "seed for the random instances");

  CLI::App* info = app.add_subcommand("info", "print architecture and parameter counts");
  add_common(*info, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? gt::kExitOk : gt::kExitConfigError;
  }

  try {
    if (verify->parsed()) {
      return gt::run_verify(f.seed.value_or(1), std::cout) ? gt::kExitOk : gt::kExitVerifyFailed;
    }
    const RunConfig cfg = resolve(f);
    const std::filesystem::path ckpt = f.checkpoint.empty() ? cfg.out_dir / "checkpoint.json" : std::filesystem::path(f.checkpoint);
    if (train->parsed()) {
      const gt::TrainOutputs out = gt::run_train(cfg, std::cerr);
      std::cout << out.checkpoint.string() << '\n';
    } else if (sample->parsed()) {
      for (const auto& p : gt::run_sample(cfg, ckpt, std::cerr)) std::cout << p.string() << '\n';
    } else if (recon->parsed()) {
      for (const auto& p : gt::run_reconstruct(cfg, ckpt, std::cerr)) std::cout << p.string() << '\n';
    } else if (info->parsed()) {
      gt::print_info(cfg, std::cout);
    }
  } catch (const genconv::DivergenceError& e) {
    std::cerr << "diverged: " << e.what() << '\n';
    return gt::kExitDiverged;
  } catch (const gt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return gt::kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return gt::kExitConfigError;
  }
  return gt::kExitOk;
}
