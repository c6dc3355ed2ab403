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


#include "run_config.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <type_traits>

#include "json.hpp"

namespace genconv::tools {
namespace {

using json = nlohmann::json;

std::string join(const std::string& parent, const std::string& key) {
  return parent.empty() ? key : parent + "." + key;
}

// Walks one JSON object and rejects keys that were never read.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_, "expected an object");
  }
  ~ObjectReader() = default;

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    const json* v = find(key);
    if (v == nullptr) return;
    out = convert<T>(*v, join(path_, key));
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError(join(path_, it.key()), "unknown key");
    }
  }

  const std::string& path() const { return path_; }

  template <typename T>
  static T convert(const json& v, const std::string& field) {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ConfigError(field, "expected true or false");
      return v.get<bool>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) throw ConfigError(field, "expected an integer");
      if constexpr (std::is_unsigned_v<T>) {
        if (v.is_number_unsigned()) return v.get<T>();
        if (v.get<std::int64_t>() < 0) throw ConfigError(field, "must be non-negative");
        return static_cast<T>(v.get<std::int64_t>());
      } else {
        const auto x = v.get<std::int64_t>();
        if (x < std::numeric_limits<T>::min() || x > std::numeric_limits<T>::max()) {
          throw ConfigError(field, "out of range");
        }
        return static_cast<T>(x);
      }
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ConfigError(field, "expected a number");
      return v.get<T>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ConfigError(field, "expected a string");
      return v.get<std::string>();
    } else {
      static_assert(std::is_same_v<T, std::filesystem::path>);
      if (!v.is_string()) throw ConfigError(field, "expected a string");
      return std::filesystem::path(v.get<std::string>());
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<LayerShape> exp1_layers_desk() { return {{8, 7, 7, 3}, {6, 3, 3, 1}, {4, 3, 3, 1}}; }
std::vector<LayerShape> exp1_layers_paper() { return {{100, 15, 15, 3}, {64, 5, 5, 1}, {30, 3, 3, 1}}; }

LayerShape parse_layer(const json& j, const std::string& path) {
  ObjectReader r(j, path);
  LayerShape s;
  r.read("filters", s.filters);
  int kernel = 0;
  r.read("kernel", kernel);
  if (kernel != 0) s.kernel_h = s.kernel_w = kernel;
  r.read("kernel_h", s.kernel_h);
  r.read("kernel_w", s.kernel_w);
  r.read("stride", s.stride);
  r.finish();
  if (s.filters < 1) throw ConfigError(join(path, "filters"), "must be >= 1");
  if (s.kernel_h < 1 || s.kernel_w < 1) throw ConfigError(join(path, "kernel"), "must be >= 1");
  if (s.stride < 1) throw ConfigError(join(path, "stride"), "must be >= 1");
  return s;
}

TrainMode parse_mode(const std::string& s, const std::string& field) {
  if (s == "mle") return TrainMode::kMle;
  if (s == "cd") return TrainMode::kCd;
  throw ConfigError(field, "expected \"mle\" or \"cd\"");
}

MeanMode parse_mean(const std::string& s, const std::string& field) {
  if (s == "none") return MeanMode::kNone;
  if (s == "pixel") return MeanMode::kPixel;
  if (s == "channel") return MeanMode::kChannel;
  throw ConfigError(field, "expected \"none\", \"pixel\" or \"channel\"");
}

void parse_growth(const json& j, RunConfig& cfg) {
  const std::string field = "training.growth";
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "all") {
      cfg.growth = GrowthMode::kAllAtOnce;
    } else if (s == "sequential") {
      cfg.growth = GrowthMode::kSequential;
    } else {
      throw ConfigError(field, "expected \"all\", \"sequential\" or a list of stages");
    }
    cfg.train.growth.clear();
    return;
  }
  if (!j.is_array() || j.empty()) throw ConfigError(field, "expected \"all\", \"sequential\" or a list of stages");
  cfg.growth = GrowthMode::kExplicit;
  cfg.train.growth.clear();
  for (std::size_t i = 0; i < j.size(); ++i) {
    ObjectReader r(j[i], field + "[" + std::to_string(i) + "]");
    GrowthStage st;
    r.read("depth", st.depth);
    r.read("iterations", st.iterations);
    r.finish();
    cfg.train.growth.push_back(st);
  }
}

void apply_json(const json& root, RunConfig& cfg) {
  ObjectReader top(root, "");
  top.find("preset");  // handled by the caller
  top.read("data_dir", cfg.data_dir);
  top.read("out_dir", cfg.out_dir);
  top.read("seed", cfg.seed);

  if (const json* a = top.find("architecture")) {
    ObjectReader r(*a, "architecture");
    if (const json* layers = r.find("layers")) {
      if (!layers->is_array()) throw ConfigError("architecture.layers", "expected a list");
      cfg.layers.clear();
      for (std::size_t i = 0; i < layers->size(); ++i) {
        cfg.layers.push_back(parse_layer((*layers)[i], "architecture.layers[" + std::to_string(i) + "]"));
      }
    }
    r.read("fully_connected_top", cfg.fully_connected_top);
    r.finish();
  }

  if (const json* p = top.find("preprocess")) {
    ObjectReader r(*p, "preprocess");
    r.read("height", cfg.preprocess.height);
    r.read("width", cfg.preprocess.width);
    r.read("grayscale", cfg.preprocess.grayscale);
    std::string mean;
    r.read("mean", mean);
    if (!mean.empty()) cfg.preprocess.mean = parse_mean(mean, "preprocess.mean");
    r.read("scale", cfg.preprocess.scale);
    r.finish();
  }

  if (const json* t = top.find("training")) {
    ObjectReader r(*t, "training");
    TrainConfig& tc = cfg.train;
    std::string mode;
    r.read("mode", mode);
    if (!mode.empty()) tc.mode = parse_mode(mode, "training.mode");
    r.read("num_chains", tc.num_chains);
    r.read("langevin_steps", tc.langevin_steps);
    r.read("iterations", tc.iterations);
    r.read("epsilon", tc.epsilon);
    r.read("learning_rate", tc.learning_rate);
    r.read("init_std", tc.init_std);
    r.read("workers", tc.workers);
    if (const json* g = r.find("growth")) parse_growth(*g, cfg);
    if (const json* s = r.find("layer_lr_scale")) {
      if (!s->is_array()) throw ConfigError("training.layer_lr_scale", "expected a list of numbers");
      tc.layer_lr_scale.clear();
      for (std::size_t i = 0; i < s->size(); ++i) {
        tc.layer_lr_scale.push_back(
            ObjectReader::convert<double>((*s)[i], "training.layer_lr_scale[" + std::to_string(i) + "]"));
      }
    }
    r.finish();
  }

  if (const json* s = top.find("sample")) {
    ObjectReader r(*s, "sample");
    r.read("steps", cfg.sample_steps);
    r.read("chains", cfg.sample_chains);
    r.finish();
  }
  top.finish();
}

}  // namespace

std::optional<Shape3> RunConfig::input_shape() const {
  if (preprocess.height <= 0 || preprocess.width <= 0) return std::nullopt;
  return Shape3{preprocess.grayscale ? 1 : 3, preprocess.height, preprocess.width};
}

ArchSpec RunConfig::arch(Shape3 input) const { return ArchSpec{input, layers, fully_connected_top}; }

TrainConfig RunConfig::resolved_train() const {
  TrainConfig tc = train;
  tc.seed = seed;
  tc.fully_connected_top = fully_connected_top;
  switch (growth) {
    case GrowthMode::kAllAtOnce:
      tc.growth.clear();
      break;
    case GrowthMode::kSequential:
      tc.growth = sequential_growth(layers.size(), train.iterations);
      break;
    case GrowthMode::kExplicit:
      break;
  }
  return tc;
}

void RunConfig::validate() const {
  if (layers.empty()) throw ConfigError("architecture.layers", "at least one layer is required");
  if (preprocess.height < 0) throw ConfigError("preprocess.height", "must be >= 0");
  if (preprocess.width < 0) throw ConfigError("preprocess.width", "must be >= 0");
  if ((preprocess.height == 0) != (preprocess.width == 0)) {
    throw ConfigError("preprocess.height", "height and width must be set together");
  }
  if (!(preprocess.scale > 0.0)) throw ConfigError("preprocess.scale", "must be > 0");
  const TrainConfig& t = train;
  if (t.num_chains < 1) throw ConfigError("training.num_chains", "must be >= 1");
  if (t.langevin_steps < 1) throw ConfigError("training.langevin_steps", "must be >= 1");
  if (t.iterations < 1 && growth != GrowthMode::kExplicit) throw ConfigError("training.iterations", "must be >= 1");
  if (!(t.epsilon > 0.0)) throw ConfigError("training.epsilon", "must be > 0");
  if (!(t.learning_rate > 0.0)) throw ConfigError("training.learning_rate", "must be > 0");
  if (!(t.init_std >= 0.0)) throw ConfigError("training.init_std", "must be >= 0");
  if (t.workers < 1) throw ConfigError("training.workers", "must be >= 1");
  for (std::size_t i = 0; i < t.layer_lr_scale.size(); ++i) {
    if (!(t.layer_lr_scale[i] > 0.0)) {
      throw ConfigError("training.layer_lr_scale[" + std::to_string(i) + "]", "must be > 0");
    }
  }
  const std::size_t conv = layers.size();
  if (growth == GrowthMode::kExplicit) {
    for (std::size_t i = 0; i < t.growth.size(); ++i) {
      const GrowthStage& s = t.growth[i];
      const std::string field = "training.growth[" + std::to_string(i) + "]";
      if (s.depth < 1 || s.depth > conv) throw ConfigError(field + ".depth", "must be between 1 and the layer count");
      if (s.iterations < 1) throw ConfigError(field + ".iterations", "must be >= 1");
    }
  }
  if (sample_steps < 0) throw ConfigError("sample.steps", "must be >= 0");
  if (sample_chains < 1) throw ConfigError("sample.chains", "must be >= 1");
  if (const auto shape = input_shape()) {
    Shape3 s = *shape;
    for (std::size_t l = 0; l < layers.size(); ++l) {
      const LayerShape& ls = layers[l];
      const int h = output_extent(s.height, ls.kernel_h, ls.stride);
      const int w = output_extent(s.width, ls.kernel_w, ls.stride);
      if (h < 1 || w < 1) {
        throw ConfigError("architecture.layers[" + std::to_string(l) + "]",
                          "kernel does not fit the " + std::to_string(s.height) + "x" + std::to_string(s.width) +
                              " map below it");
      }
      s = {ls.filters, h, w};
    }
  }
}

std::vector<std::string_view> preset_names() {
  return {"exp1-desk", "exp2-desk", "exp3-desk", "exp1-paper", "exp2-paper", "exp3-paper"};
}

RunConfig preset(std::string_view name) {
  RunConfig c;
  c.preset = std::string(name);
  TrainConfig& t = c.train;
  if (name == "exp1-desk") {
    c.layers = exp1_layers_desk();
    c.preprocess = {64, 64, true, MeanMode::kChannel, 0.01};
    t.num_chains = 8;
    t.langevin_steps = 10;
    t.iterations = 200;
    t.epsilon = 0.03;
    t.learning_rate = 0.01;
    t.layer_lr_scale = {1.0, 1e-4, 1e-5};
    c.growth = GrowthMode::kSequential;
  } else if (name == "exp2-desk") {
    c.layers = {{8, 7, 7, 2}, {6, 5, 5, 1}, {4, 3, 3, 1}};
    c.fully_connected_top = true;
    c.preprocess = {48, 48, true, MeanMode::kPixel, 0.01};
    t.num_chains = 8;
    t.langevin_steps = 10;
    t.iterations = 200;
    t.epsilon = 0.03;
    t.learning_rate = 0.01;
    t.layer_lr_scale = {1.0, 1e-4, 1e-5, 1e-5};
    c.growth = GrowthMode::kSequential;
  } else if (name == "exp3-desk") {
    c.layers = exp1_layers_desk();
    c.preprocess = {32, 32, true, MeanMode::kChannel, 0.1933};
    t.mode = TrainMode::kCd;
    t.num_chains = 1;
    t.langevin_steps = 1;
    t.iterations = 300;
    t.epsilon = 0.2092;
    t.learning_rate = 0.01;
    t.layer_lr_scale = {0.0663, 0.1378, 0.0326};
    t.init_std = 0.1188;
    c.growth = GrowthMode::kAllAtOnce;
  } else if (name == "exp1-paper") {
    c.layers = exp1_layers_paper();
    c.preprocess = {224, 224, false, MeanMode::kPixel, 1.0};
    t.num_chains = 16;
    t.langevin_steps = 10;
    t.iterations = 3 * 700;
    c.growth = GrowthMode::kSequential;
  } else if (name == "exp2-paper") {
    c.layers = {{100, 7, 7, 2}, {64, 5, 5, 1}, {20, 3, 3, 1}};
    c.fully_connected_top = true;
    c.preprocess = {224, 224, false, MeanMode::kPixel, 1.0};
    t.num_chains = 16;
    t.langevin_steps = 10;
    t.iterations = 3 * 700;
    c.growth = GrowthMode::kSequential;
  } else if (name == "exp3-paper") {
    c.layers = exp1_layers_paper();
    c.preprocess = {224, 224, false, MeanMode::kPixel, 1.0};
    t.mode = TrainMode::kCd;
    t.langevin_steps = 1;
    t.iterations = 1200;
    c.growth = GrowthMode::kAllAtOnce;
  } else {
    std::string names;
    for (std::string_view n : preset_names()) names += (names.empty() ? "" : ", ") + std::string(n);
    throw ConfigError("preset", "unknown preset \"" + std::string(name) + "\" (expected one of " + names + ")");
  }
  c.out_dir = std::filesystem::path("out") / std::string(name);
  return c;
}

RunConfig parse_run_config(const std::string& text, const std::optional<RunConfig>& base) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  if (!root.is_object()) throw ConfigError("", "expected a JSON object at the top level");
  RunConfig cfg;
  if (base) {
    cfg = *base;
  } else {
    cfg.layers = exp1_layers_desk();
  }
  if (auto it = root.find("preset"); it != root.end()) {
    cfg = preset(ObjectReader::convert<std::string>(*it, "preset"));
  }
  apply_json(root, cfg);
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path, const std::optional<RunConfig>& base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("--config", "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), base);
}

std::string to_string(TrainMode mode) { return mode == TrainMode::kMle ? "mle" : "cd"; }

std::string to_string(MeanMode mode) {
  switch (mode) {
    case MeanMode::kNone:
      return "none";
    case MeanMode::kPixel:
      return "pixel";
    case MeanMode::kChannel:
      return "channel";
  }
  return "pixel";
}

}  // namespace genconv::tools
