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

#include <gtest/gtest.h>

#include <string>

#include "run_config.hpp"

namespace genconv::tools {
namespace {

std::string field_of(const std::string& text) {
  try {
    parse_run_config(text);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "<accepted>";
}

TEST(RunConfig, EveryPresetIsValid) {
  for (auto name : preset_names()) EXPECT_NO_THROW(preset(name).validate()) << name;
  EXPECT_EQ(preset_names().size(), 6u);
}

TEST(RunConfig, UnknownPresetNamesTheField) {
  try {
    preset("exp9");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "preset");
  }
}

TEST(RunConfig, FullSizePresetsUseTheReferenceArchitectures) {
  const RunConfig e1 = preset("exp1-paper");
  ASSERT_EQ(e1.layers.size(), 3u);
  EXPECT_EQ(e1.layers[0], (LayerShape{100, 15, 15, 3}));
  EXPECT_EQ(e1.layers[1], (LayerShape{64, 5, 5, 1}));
  EXPECT_EQ(e1.layers[2], (LayerShape{30, 3, 3, 1}));
  EXPECT_EQ(e1.train.num_chains, 16);
  EXPECT_EQ(e1.train.langevin_steps, 10);
  EXPECT_EQ(e1.resolved_train().growth.size(), 3u);
  for (const GrowthStage& s : e1.resolved_train().growth) EXPECT_EQ(s.iterations, 700);

  const RunConfig e2 = preset("exp2-paper");
  EXPECT_EQ(e2.layers[0], (LayerShape{100, 7, 7, 2}));
  EXPECT_EQ(e2.layers[1], (LayerShape{64, 5, 5, 1}));
  EXPECT_EQ(e2.layers[2], (LayerShape{20, 3, 3, 1}));
  EXPECT_TRUE(e2.fully_connected_top);

  const RunConfig e3 = preset("exp3-paper");
  EXPECT_EQ(e3.train.mode, TrainMode::kCd);
  EXPECT_EQ(e3.train.langevin_steps, 1);
  EXPECT_EQ(e3.train.iterations, 1200);
  EXPECT_TRUE(e3.resolved_train().growth.empty() || e3.resolved_train().growth.size() == 1u);
}

TEST(RunConfig, DeskPresetsMatchTheScaledExperiments) {
  const RunConfig e1 = preset("exp1-desk");
  EXPECT_EQ(e1.layers[0], (LayerShape{8, 7, 7, 3}));
  EXPECT_EQ(e1.train.num_chains, 8);
  EXPECT_EQ(e1.train.langevin_steps, 10);
  EXPECT_EQ(e1.train.learning_rate, 0.01);
  EXPECT_EQ(e1.train.iterations, 200);
  EXPECT_EQ(e1.preprocess.height, 64);
  const RunConfig e3 = preset("exp3-desk");
  EXPECT_EQ(e3.train.langevin_steps, 1);
  EXPECT_EQ(e3.train.iterations, 300);
  EXPECT_EQ(e3.preprocess.height, 32);
}

TEST(RunConfig, FileOverridesBaseAndKeepsTheRest) {
  const RunConfig cfg = parse_run_config(R"({"seed": 9, "training": {"epsilon": 0.2}})", preset("exp1-desk"));
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.train.epsilon, 0.2);
  EXPECT_EQ(cfg.train.num_chains, 8);
  EXPECT_EQ(cfg.preset, "exp1-desk");
}

TEST(RunConfig, FullSchema) {
  const RunConfig cfg = parse_run_config(R"({
    "data_dir": "imgs", "out_dir": "o", "seed": 3,
    "architecture": {"layers": [{"filters": 4, "kernel": 5, "stride": 2},
                                {"filters": 2, "kernel_h": 3, "kernel_w": 2}],
                     "fully_connected_top": true},
    "preprocess": {"height": 24, "width": 20, "grayscale": true, "mean": "channel", "scale": 0.5},
    "training": {"mode": "cd", "num_chains": 2, "langevin_steps": 1, "iterations": 7, "epsilon": 0.1,
                 "learning_rate": 0.02, "init_std": 0.05, "workers": 1,
                 "growth": [{"depth": 1, "iterations": 3}, {"depth": 2, "iterations": 4}],
                 "layer_lr_scale": [1.0, 0.5]},
    "sample": {"steps": 5, "chains": 2}})");
  EXPECT_EQ(cfg.data_dir, "imgs");
  EXPECT_EQ(cfg.layers[1], (LayerShape{2, 3, 2, 1}));
  EXPECT_EQ(cfg.preprocess.mean, MeanMode::kChannel);
  EXPECT_EQ(cfg.train.mode, TrainMode::kCd);
  EXPECT_EQ(cfg.growth, GrowthMode::kExplicit);
  const TrainConfig t = cfg.resolved_train();
  ASSERT_EQ(t.growth.size(), 2u);
  EXPECT_EQ(t.growth[1].iterations, 4);
  EXPECT_TRUE(t.fully_connected_top);
  EXPECT_EQ(t.seed, 3u);
  const ArchSpec arch = cfg.arch(*cfg.input_shape());
  EXPECT_EQ(arch.input, (Shape3{1, 24, 20}));
}

TEST(RunConfig, InvalidFieldsAreNamed) {
  EXPECT_EQ(field_of(R"({"training": {"epsilon": 0}})"), "training.epsilon");
  EXPECT_EQ(field_of(R"({"training": {"learning_rate": -1}})"), "training.learning_rate");
  EXPECT_EQ(field_of(R"({"training": {"num_chains": 0}})"), "training.num_chains");
  EXPECT_EQ(field_of(R"({"training": {"mode": "sgd"}})"), "training.mode");
  EXPECT_EQ(field_of(R"({"training": {"iterations": "ten"}})"), "training.iterations");
  EXPECT_EQ(field_of(R"({"training": {"layer_lr_scale": [1, 0]}})"), "training.layer_lr_scale[1]");
  EXPECT_EQ(field_of(R"({"preprocess": {"mean": "median"}})"), "preprocess.mean");
  EXPECT_EQ(field_of(R"({"preprocess": {"scale": 0}})"), "preprocess.scale");
  EXPECT_EQ(field_of(R"({"preprocess": {"height": 32}})"), "preprocess.height");
  EXPECT_EQ(field_of(R"({"architecture": {"layers": []}})"), "architecture.layers");
  EXPECT_EQ(field_of(R"({"architecture": {"layers": [{"filters": 0, "kernel": 3}]}})"),
            "architecture.layers[0].filters");
  EXPECT_EQ(field_of(R"({"sample": {"chains": 0}})"), "sample.chains");
  EXPECT_EQ(field_of(R"({"trainig": {}})"), "trainig");
  EXPECT_EQ(field_of(R"({"training": {"epsilonn": 0.1}})"), "training.epsilonn");
  EXPECT_EQ(field_of(R"({"preset": "nope"})"), "preset");
}

TEST(RunConfig, KernelMustFitThePreprocessedImage) {
  EXPECT_EQ(field_of(R"({"preprocess": {"height": 8, "width": 8},
                         "architecture": {"layers": [{"filters": 2, "kernel": 9}]}})"),
            "architecture.layers[0]");
}

TEST(RunConfig, MalformedJsonReportsTheLine) {
  try {
    parse_run_config("{\n  \"seed\": 1,\n  oops\n}");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

}  // namespace
}  // namespace genconv::tools
