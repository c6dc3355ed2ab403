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

#include "genconv/checkpoint.hpp"

#include <fstream>
#include <iterator>

#include <json.hpp>

namespace genconv {

using nlohmann::json;

namespace {

json shape_json(Shape3 s) { return json::array({s.channels, s.height, s.width}); }

Shape3 shape_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw CheckpointError("shape must be [channels, height, width]");
  return {j[0].get<int>(), j[1].get<int>(), j[2].get<int>()};
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& ckpt) {
  const Network& net = ckpt.net;
  json j;
  j["format"] = "genconv-checkpoint";
  j["format_version"] = ckpt.format_version;
  j["sigma_sq"] = net.sigma_sq;
  j["input"] = shape_json(net.input);
  j["top_mode"] = net.top_mode == TopMode::kConvSum ? "conv_sum" : "category_heads";
  j["fully_connected_top"] = ckpt.fully_connected_top;
  j["iteration"] = ckpt.iteration;
  j["seed"] = ckpt.seed;
  json layers = json::array();
  for (const LayerSpec& layer : net.layers) {
    layers.push_back({{"filters", layer.num_filters},
                      {"in_channels", layer.in_channels},
                      {"kernel", json::array({layer.kernel_h, layer.kernel_w})},
                      {"stride", layer.stride},
                      {"weights", layer.weights},
                      {"biases", layer.biases}});
  }
  j["layers"] = std::move(layers);
  if (net.top_mode == TopMode::kCategoryHeads) {
    j["heads"] = {{"categories", net.heads.num_categories},
                  {"weights", net.heads.weights},
                  {"biases", net.heads.biases}};
  }
  json prep;
  prep["scale"] = ckpt.prep.scale;
  if (!ckpt.prep.mean_image.empty()) {
    prep["mean_image"] = {{"shape", shape_json(ckpt.prep.mean_image.shape())},
                          {"data", ckpt.prep.mean_image.values()}};
  }
  j["preprocessing"] = std::move(prep);
  return j.dump(1) + "\n";
}

Checkpoint parse_checkpoint(const std::string& text) {
  Checkpoint ckpt;
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "genconv-checkpoint") throw CheckpointError("not a genconv checkpoint");
    ckpt.format_version = j.at("format_version").get<int>();
    if (ckpt.format_version != Checkpoint::kFormatVersion) {
      throw CheckpointError("unsupported checkpoint format version " + std::to_string(ckpt.format_version));
    }
    Network& net = ckpt.net;
    net.sigma_sq = j.at("sigma_sq").get<double>();
    net.input = shape_from(j.at("input"));
    const std::string mode = j.at("top_mode").get<std::string>();
    if (mode == "conv_sum") {
      net.top_mode = TopMode::kConvSum;
    } else if (mode == "category_heads") {
      net.top_mode = TopMode::kCategoryHeads;
    } else {
      throw CheckpointError("unknown top_mode '" + mode + "'");
    }
    ckpt.fully_connected_top = j.value("fully_connected_top", false);
    ckpt.iteration = j.value("iteration", std::int64_t{0});
    ckpt.seed = j.value("seed", std::uint64_t{0});
    for (const json& l : j.at("layers")) {
      const json& kernel = l.at("kernel");
      LayerSpec layer(l.at("filters").get<int>(), l.at("in_channels").get<int>(), kernel.at(0).get<int>(),
                      kernel.at(1).get<int>(), l.at("stride").get<int>());
      layer.weights = l.at("weights").get<std::vector<double>>();
      layer.biases = l.at("biases").get<std::vector<double>>();
      net.layers.push_back(std::move(layer));
    }
    if (net.top_mode == TopMode::kCategoryHeads) {
      const json& h = j.at("heads");
      net.heads.num_categories = h.at("categories").get<int>();
      net.heads.weights = h.at("weights").get<std::vector<double>>();
      net.heads.biases = h.at("biases").get<std::vector<double>>();
    }
    const json& prep = j.at("preprocessing");
    ckpt.prep.scale = prep.value("scale", 1.0);
    if (prep.contains("mean_image")) {
      const json& m = prep.at("mean_image");
      ckpt.prep.mean_image = Tensor3(shape_from(m.at("shape")), m.at("data").get<std::vector<double>>());
    }
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("malformed checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("inconsistent checkpoint: ") + e.what());
  }
  try {
    ckpt.net.validate();
  } catch (const std::invalid_argument& e) {
    throw CheckpointError(std::string("inconsistent checkpoint: ") + e.what());
  }
  return ckpt;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CheckpointError("cannot write " + path.string());
  out << serialize_checkpoint(ckpt);
  if (!out) throw CheckpointError("write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + path.string());
  return parse_checkpoint(std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>()));
}

}  // namespace genconv
