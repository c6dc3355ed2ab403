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


#ifndef GENCONV_TOOLS_APP_HPP_
#define GENCONV_TOOLS_APP_HPP_

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "genconv/image_io.hpp"
#include "genconv/learner.hpp"
#include "run_config.hpp"

namespace genconv::tools {

enum ExitCode : int {
  kExitOk = 0,
  kExitVerifyFailed = 1,
  kExitConfigError = 2,
  kExitDiverged = 3,
};

/// Loads every PGM/PPM under `cfg.data_dir` and applies the preprocessing.
Dataset load_dataset(const RunConfig& cfg);

struct TrainOutputs {
  std::filesystem::path checkpoint;
  std::filesystem::path history;
  std::vector<std::filesystem::path> synthesized;
  std::vector<std::filesystem::path> reconstructions;
  // In-memory results, in model space.
  Dataset data;
  TrainResult result;
};

/// Trains on `cfg.data_dir` and writes checkpoint.json, history.csv and the
/// final chain images into `cfg.out_dir`. Contrastive divergence runs also
/// write reconstruction.csv and the reconstructions of the training images.
TrainOutputs run_train(const RunConfig& cfg, std::ostream& log);

/// Fresh chains from zero images under a saved model.
std::vector<std::filesystem::path> run_sample(const RunConfig& cfg, const std::filesystem::path& checkpoint,
                                              std::ostream& log);

/// Auto-encoding reconstruction of every image in `cfg.data_dir`.
std::vector<std::filesystem::path> run_reconstruct(const RunConfig& cfg, const std::filesystem::path& checkpoint,
                                                   std::ostream& log);

/// Runs the oracle suite, printing one JSON object per check. Returns true
/// when every check passes.
bool run_verify(std::uint64_t seed, std::ostream& out);

void print_info(const RunConfig& cfg, std::ostream& out);

}  // namespace genconv::tools

#endif  // GENCONV_TOOLS_APP_HPP_
