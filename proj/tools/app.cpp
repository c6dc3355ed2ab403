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


#include "app.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <string>

#include "genconv/checkpoint.hpp"
#include "genconv/learner.hpp"
#include "genconv/linearize.hpp"
#include "genconv/oracle.hpp"
#include "genconv/prototype.hpp"
#include "genconv/sampler.hpp"

namespace genconv::tools {
namespace {

namespace fs = std::filesystem;

std::string number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string indexed(const char* stem, std::size_t i, const Shape3& shape) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%03zu.%s", stem, i, shape.channels == 1 ? "pgm" : "ppm");
  return buf;
}

// Brings a raw image to the channel count and extent of `input`.
Tensor3 conform(Tensor3 img, const Shape3& input) {
  if (img.channels() != input.channels) {
    if (input.channels == 1 && img.channels() == 3) {
      img = to_grayscale(img);
    } else {
      throw DimensionError("image has " + std::to_string(img.channels()) + " channels, model expects " +
                           std::to_string(input.channels));
    }
  }
  if (img.height() != input.height || img.width() != input.width) {
    img = resize_nearest(img, input.height, input.width);
  }
  return img;
}

std::vector<Tensor3> load_raw(const fs::path& dir) {
  if (dir.empty()) throw ConfigError("data_dir", "no data directory given");
  if (!fs::is_directory(dir)) throw ConfigError("data_dir", dir.string() + " is not a directory");
  std::vector<Tensor3> raw;
  for (const fs::path& p : list_images(dir)) raw.push_back(load_image(p));
  if (raw.empty()) throw ConfigError("data_dir", "no .pgm or .ppm files in " + dir.string());
  return raw;
}

std::vector<fs::path> write_images(const std::vector<Tensor3>& images, const Preprocessing& prep,
                                   const fs::path& dir, const char* stem) {
  std::vector<fs::path> paths;
  for (std::size_t i = 0; i < images.size(); ++i) {
    paths.push_back(dir / indexed(stem, i, images[i].shape()));
    save_image(to_display(images[i], prep), paths.back());
  }
  return paths;
}

// Collapses per-instance reports that share a name into one line.
class ReportSink {
 public:
  void add(const CheckReport& r) {
    auto [it, fresh] = index_.try_emplace(r.name, reports_.size());
    if (fresh) {
      reports_.push_back(r);
      return;
    }
    CheckReport& acc = reports_[it->second];
    acc.max_abs_deviation = std::max(acc.max_abs_deviation, r.max_abs_deviation);
    acc.pass = acc.pass && r.pass;
    if (!r.pass && !r.note.empty()) acc.note = r.note;
  }
  void add(const std::vector<CheckReport>& rs) {
    for (const CheckReport& r : rs) add(r);
  }
  void add_prefixed(const std::string& prefix, std::vector<CheckReport> rs) {
    for (CheckReport& r : rs) {
      r.name = prefix + r.name;
      add(r);
    }
  }
  const std::vector<CheckReport>& reports() const { return reports_; }

 private:
  std::vector<CheckReport> reports_;
  std::map<std::string, std::size_t> index_;
};

Network tiny_net(Shape3 input, std::vector<LayerShape> layers, double init_std, SeededRng& rng) {
  return init_network(ArchSpec{input, std::move(layers), false}, init_std, rng);
}

}  // namespace

Dataset load_dataset(const RunConfig& cfg) { return prepare_dataset(load_raw(cfg.data_dir), cfg.preprocess); }

TrainOutputs run_train(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  TrainOutputs out;
  out.data = load_dataset(cfg);
  const Dataset& data = out.data;
  const Shape3 input = data.images.front().shape();
  const TrainConfig tc = cfg.resolved_train();
  SeededRng init_rng = SeededRng(cfg.seed).split(kInitStream);
  Network net0;
  try {
    net0 = init_network(cfg.arch(input), tc.init_std, init_rng);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("architecture.layers", e.what());
  }
  log << "training " << net0.num_parameters() << " parameters on " << data.images.size() << " image(s) of "
      << input.str() << " (" << to_string(tc.mode) << ")\n";

  fs::create_directories(cfg.out_dir);
  out.history = cfg.out_dir / "history.csv";
  std::ofstream history(out.history, std::ios::binary);
  history << "iter,grad_norm,mean_energy\n";
  std::ofstream recon_log;
  if (tc.mode == TrainMode::kCd) {
    recon_log.open(cfg.out_dir / "reconstruction.csv", std::ios::binary);
    recon_log << "iter,rmse\n";
  }
  out.result = train(net0, data.images, tc, [&](const HistoryRecord& r) {
    history << r.iteration << ',' << number(r.grad_norm) << ',' << number(r.mean_energy) << '\n';
    if (r.recon_rmse) recon_log << r.iteration << ',' << number(*r.recon_rmse) << '\n';
  });
  const TrainResult& result = out.result;
  if (!result.history.empty()) {
    const HistoryRecord& last = result.history.back();
    log << "iteration " << last.iteration << ": grad_norm " << last.grad_norm << ", mean energy " << last.mean_energy
        << '\n';
  }

  Checkpoint ckpt;
  ckpt.net = result.net;
  ckpt.prep = data.prep;
  ckpt.fully_connected_top = cfg.fully_connected_top;
  ckpt.iteration = static_cast<std::int64_t>(result.history.size());
  ckpt.seed = cfg.seed;
  out.checkpoint = cfg.out_dir / "checkpoint.json";
  save_checkpoint(ckpt, out.checkpoint);
  out.synthesized = write_images(result.synthesized, data.prep, cfg.out_dir, "synth");
  if (tc.mode == TrainMode::kCd) {
    std::vector<Tensor3> recon;
    for (const Tensor3& img : data.images) recon.push_back(reconstruct(result.net, img));
    out.reconstructions = write_images(recon, data.prep, cfg.out_dir, "recon");
  }
  return out;
}

std::vector<fs::path> run_sample(const RunConfig& cfg, const fs::path& checkpoint, std::ostream& log) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  std::vector<ChainState> chains;
  const Tensor3 zero(ckpt.net.input);
  for (int i = 0; i < cfg.sample_chains; ++i) {
    chains.push_back(make_chain(zero, cfg.seed, static_cast<std::uint64_t>(i)));
  }
  langevin_run_all(ckpt.net, chains, LangevinConfig{cfg.train.epsilon, cfg.sample_steps}, cfg.train.workers);
  std::vector<Tensor3> images;
  for (const ChainState& c : chains) {
    if (!c.image.all_finite()) throw DivergenceError("sampling produced non-finite pixels");
    images.push_back(c.image);
  }
  fs::create_directories(cfg.out_dir);
  log << "sampled " << images.size() << " chain(s) for " << cfg.sample_steps << " step(s)\n";
  return write_images(images, ckpt.prep, cfg.out_dir, "sample");
}

std::vector<fs::path> run_reconstruct(const RunConfig& cfg, const fs::path& checkpoint, std::ostream& log) {
  const Checkpoint ckpt = load_checkpoint(checkpoint);
  std::vector<Tensor3> recon;
  double rmse = 0.0;
  for (const Tensor3& raw : load_raw(cfg.data_dir)) {
    const Tensor3 img = to_model(conform(raw, ckpt.net.input), ckpt.prep);
    recon.push_back(reconstruct(ckpt.net, img));
    rmse += reconstruction_rmse(ckpt.net, img);
  }
  fs::create_directories(cfg.out_dir);
  log << "reconstructed " << recon.size() << " image(s), mean rmse " << rmse / static_cast<double>(recon.size())
      << '\n';
  return write_images(recon, ckpt.prep, cfg.out_dir, "recon");
}

bool run_verify(std::uint64_t seed, std::ostream& out) {
  ReportSink sink;
  SeededRng rng(seed);

  // A zero network is a single Gaussian piece with its mode at the origin.
  const Network zero = tiny_net({1, 6, 6}, {{2, 3, 3, 1}, {2, 2, 2, 1}}, 0.0, rng);
  sink.add_prefixed("zero_net/", check_linearization(zero, 5, seed));
  sink.add_prefixed("zero_net/", check_piecewise_gaussian(zero, 2, 5, seed));
  sink.add_prefixed("zero_net/", {check_mode_autoencoding(zero, 5, seed)});

  RandomNetOptions generic;
  generic.max_extent = 16;
  for (int i = 0; i < 8; ++i) {
    const Network net = random_network(generic, rng);
    sink.add(check_linearization(net, 5, seed + static_cast<std::uint64_t>(i)));
  }
  RandomNetOptions two_layer;
  two_layer.min_depth = two_layer.max_depth = 2;
  two_layer.max_extent = 12;
  two_layer.max_channels = 1;
  for (int i = 0; i < 3; ++i) {
    const Network net = random_network(two_layer, rng);
    sink.add(check_piecewise_gaussian(net, 3, 5, seed + static_cast<std::uint64_t>(i)));
  }
  RandomNetOptions convex = two_layer;
  convex.nonnegative_upper = true;
  for (int i = 0; i < 2; ++i) {
    sink.add(check_mode_autoencoding(random_network(convex, rng), 10, seed + static_cast<std::uint64_t>(i)));
  }
  for (int i = 0; i < 3; ++i) {
    const PrototypeModel model = random_prototype({1, 6, 6}, 1 + i * 2, 1.0, 0.5, rng);
    sink.add(check_prototype(model, 5, seed + static_cast<std::uint64_t>(i)));
  }

  RandomNetOptions small;
  small.min_depth = 1;
  small.max_depth = 2;
  small.min_extent = 3;
  small.max_extent = 5;
  small.max_channels = 1;
  small.max_filters = 2;
  small.max_kernel = 3;
  for (int i = 0; i < 3; ++i) {
    const Network net = random_network(small, rng);
    if (net.num_parameters() <= 50) sink.add(check_param_grad(net, 5, seed + static_cast<std::uint64_t>(i)));
  }

  const Network cd_net = tiny_net({1, 4, 4}, {{2, 2, 2, 1}, {1, 2, 2, 1}}, 0.7, rng);
  sink.add(check_cd_gradient(cd_net, random_image(cd_net.input, 1.0, rng), 2000, seed).report);

  const DiscreteImageSpace grid;
  Network grid_net = tiny_net(grid.shape, {{2, 2, 2, 1}}, 0.5, rng);
  for (double& b : grid_net.layers[0].biases) b = 0.2 * rng.normal();
  std::vector<Tensor3> observed;
  for (int m = 0; m < 3; ++m) observed.push_back(random_image(grid.shape, 0.5, rng));
  sink.add(check_loglik_grad(grid_net, observed, grid));

  CategoryModel cm;
  cm.net = tiny_net(grid.shape, {{2, 2, 2, 1}}, 0.5, rng);
  cm.net.top_mode = TopMode::kCategoryHeads;
  cm.net.heads = CategoryHeads{2, {0.0, 0.0, rng.normal(), rng.normal()}, {0.0, 0.0}};
  cm.priors = {0.4, 0.6};
  sink.add(check_posterior_identity(cm, grid));

  bool ok = true;
  for (const CheckReport& r : sink.reports()) {
    out << r.to_json() << '\n';
    ok = ok && r.pass;
  }
  return ok;
}

void print_info(const RunConfig& cfg, std::ostream& out) {
  out << "preset: " << (cfg.preset.empty() ? "(none)" : cfg.preset) << '\n';
  const auto shape = cfg.input_shape();
  if (!shape) {
    out << "input: taken from the training images\n";
    out << "layers:\n";
    for (const LayerShape& l : cfg.layers) {
      out << "  " << l.filters << " filters " << l.kernel_h << "x" << l.kernel_w << " stride " << l.stride << '\n';
    }
  } else {
    SeededRng rng(cfg.seed);
    const Network net = init_network(cfg.arch(*shape), 0.0, rng);
    out << "input: " << shape->str() << '\n';
    out << "layers:\n";
    for (std::size_t l = 0; l < net.depth(); ++l) {
      const LayerSpec& layer = net.layers[l];
      const bool fc = cfg.fully_connected_top && l + 1 == net.depth();
      out << "  " << l + 1 << ": " << layer.num_filters << " filters " << layer.kernel_h << "x" << layer.kernel_w
          << " stride " << layer.stride << " -> " << net.feature_shape(l + 1).str() << ", "
          << layer.weights.size() + layer.biases.size() << " parameters" << (fc ? " (fully connected top)" : "")
          << '\n';
    }
    out << "parameters: " << net.num_parameters() << '\n';
  }
  out << "sigma^2: " << number(1.0) << '\n';
  const TrainConfig tc = cfg.resolved_train();
  out << "training: " << to_string(tc.mode) << ", chains " << tc.num_chains << ", langevin steps "
      << tc.langevin_steps << ", epsilon " << tc.epsilon << ", learning rate " << tc.learning_rate << '\n';
  if (tc.growth.empty()) {
    out << "schedule: all layers, " << tc.iterations << " iterations\n";
  } else {
    out << "schedule:";
    for (const GrowthStage& s : tc.growth) out << " depth " << s.depth << " x " << s.iterations;
    out << '\n';
  }
  out << "preprocess: " << to_string(cfg.preprocess.mean) << " mean, scale " << cfg.preprocess.scale
      << (cfg.preprocess.grayscale ? ", grayscale" : "") << '\n';
}

}  // namespace genconv::tools
