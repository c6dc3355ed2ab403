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


#ifndef GENCONV_TOOLS_RUN_CONFIG_HPP_
#define GENCONV_TOOLS_RUN_CONFIG_HPP_

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "genconv/image_io.hpp"
#include "genconv/learner.hpp"
#include "genconv/net.hpp"

namespace genconv::tools {

/// Invalid configuration. `field` is the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::runtime_error(field.empty() ? message : field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

enum class GrowthMode { kAllAtOnce, kSequential, kExplicit };

struct RunConfig {
  std::string preset;  // empty when built from scratch
  std::filesystem::path data_dir;
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 1;

  // Layers below the optional fully connected top. The input shape comes
  // from the preprocessed images.
  std::vector<LayerShape> layers;
  bool fully_connected_top = false;

  PreprocessOptions preprocess;
  TrainConfig train;
  GrowthMode growth = GrowthMode::kAllAtOnce;

  int sample_steps = 100;
  int sample_chains = 8;

  /// Input shape implied by the preprocessing target, if fully determined.
  std::optional<Shape3> input_shape() const;
  ArchSpec arch(Shape3 input) const;
  /// Training settings with the growth schedule resolved for `arch`.
  TrainConfig resolved_train() const;
  void validate() const;
};

std::vector<std::string_view> preset_names();
RunConfig preset(std::string_view name);

/// Parses a JSON run configuration over `base` (the exp1-desk layers when
/// absent). A "preset" key replaces the base. Unknown keys are rejected.
RunConfig parse_run_config(const std::string& text, const std::optional<RunConfig>& base = std::nullopt);
RunConfig load_run_config(const std::filesystem::path& path, const std::optional<RunConfig>& base = std::nullopt);

std::string to_string(TrainMode mode);
std::string to_string(MeanMode mode);

}  // namespace genconv::tools

#endif  // GENCONV_TOOLS_RUN_CONFIG_HPP_
