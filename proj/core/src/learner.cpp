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

#include "genconv/learner.hpp"

#include <cmath>
#include <string>

#include "genconv/linearize.hpp"
#include "genconv/parallel.hpp"

namespace genconv {

ParamGrad ParamGrad::zeros_like(const Network& net) {
  ParamGrad g;
  g.layers.reserve(net.depth());
  for (const LayerSpec& layer : net.layers) {
    g.layers.push_back({std::vector<double>(layer.weights.size(), 0.0),
                        std::vector<double>(layer.biases.size(), 0.0)});
  }
  return g;
}

std::size_t ParamGrad::size() const {
  std::size_t n = 0;
  for (const LayerGrad& l : layers) n += l.weights.size() + l.biases.size();
  return n;
}

std::vector<double> ParamGrad::flat() const {
  std::vector<double> out;
  out.reserve(size());
  for (const LayerGrad& l : layers) {
    out.insert(out.end(), l.weights.begin(), l.weights.end());
    out.insert(out.end(), l.biases.begin(), l.biases.end());
  }
  return out;
}

double ParamGrad::mean_abs() const {
  double acc = 0.0;
  std::size_t n = 0;
  for (const LayerGrad& l : layers) {
    for (double v : l.weights) acc += std::abs(v);
    for (double v : l.biases) acc += std::abs(v);
    n += l.weights.size() + l.biases.size();
  }
  return n == 0 ? 0.0 : acc / static_cast<double>(n);
}

namespace {

template <typename Op>
void combine(ParamGrad& a, const ParamGrad& b, Op op) {
  if (a.layers.size() != b.layers.size()) throw DimensionError("ParamGrad depth mismatch");
  for (std::size_t l = 0; l < a.layers.size(); ++l) {
    auto& wa = a.layers[l].weights;
    auto& ba = a.layers[l].biases;
    const auto& wb = b.layers[l].weights;
    const auto& bb = b.layers[l].biases;
    if (wa.size() != wb.size() || ba.size() != bb.size()) throw DimensionError("ParamGrad shape mismatch");
    for (std::size_t j = 0; j < wa.size(); ++j) wa[j] = op(wa[j], wb[j]);
    for (std::size_t j = 0; j < ba.size(); ++j) ba[j] = op(ba[j], bb[j]);
  }
}

}  // namespace

ParamGrad& ParamGrad::operator+=(const ParamGrad& other) {
  combine(*this, other, [](double x, double y) { return x + y; });
  return *this;
}

ParamGrad& ParamGrad::operator-=(const ParamGrad& other) {
  combine(*this, other, [](double x, double y) { return x - y; });
  return *this;
}

ParamGrad& ParamGrad::operator*=(double s) {
  for (LayerGrad& l : layers) {
    for (double& v : l.weights) v *= s;
    for (double& v : l.biases) v *= s;
  }
  return *this;
}

ParamGrad grad_params(const Network& net, const Tensor3& image) {
  if (net.top_mode != TopMode::kConvSum) throw ParameterError("grad_params requires the conv-sum top mode");
  const ForwardPass pass = forward(net, image);
  const DeconvolutionTrace trace = deconvolve(net, pass.pattern);
  ParamGrad g = ParamGrad::zeros_like(net);
  for (std::size_t l = 1; l <= net.depth(); ++l) {
    const LayerSpec& layer = net.layers[l - 1];
    const Tensor3& upper = trace.basis[l];
    const Tensor3& delta = pass.pattern[l - 1];
    const Tensor3& below = pass.features[l - 1];
    LayerGrad& lg = g.layers[l - 1];
    for (int k = 0; k < layer.num_filters; ++k) {
      for (int oy = 0; oy < upper.height(); ++oy) {
        for (int ox = 0; ox < upper.width(); ++ox) {
          const double coef = upper(k, oy, ox) * delta(k, oy, ox);
          if (coef == 0.0) continue;
          lg.biases[k] += coef;
          for (int i = 0; i < layer.in_channels; ++i) {
            for (int ky = 0; ky < layer.kernel_h; ++ky) {
              double* dw = &lg.weights[layer.weight_index(k, i, ky, 0)];
              const int iy = oy * layer.stride + ky;
              const int ix0 = ox * layer.stride;
              for (int kx = 0; kx < layer.kernel_w; ++kx) dw[kx] += coef * below(i, iy, ix0 + kx);
            }
          }
        }
      }
    }
  }
  return g;
}

ParamGrad mean_grad_params(const Network& net, std::span<const Tensor3> images, std::size_t workers) {
  std::vector<ParamGrad> parts(images.size());
  parallel_for(images.size(), workers, [&](std::size_t m) { parts[m] = grad_params(net, images[m]); });
  ParamGrad total = ParamGrad::zeros_like(net);
  for (const ParamGrad& p : parts) total += p;
  if (!images.empty()) total *= 1.0 / static_cast<double>(images.size());
  return total;
}

void apply_update(Network& net, const ParamGrad& step, double learning_rate, std::span<const double> layer_scale) {
  if (step.layers.size() != net.depth()) throw DimensionError("apply_update: depth mismatch");
  for (std::size_t l = 0; l < net.depth(); ++l) {
    LayerSpec& layer = net.layers[l];
    const LayerGrad& lg = step.layers[l];
    if (lg.weights.size() != layer.weights.size() || lg.biases.size() != layer.biases.size()) {
      throw DimensionError("apply_update: layer shape mismatch");
    }
    const double rate = learning_rate * (l < layer_scale.size() ? layer_scale[l] : 1.0);
    for (std::size_t j = 0; j < layer.weights.size(); ++j) layer.weights[j] += rate * lg.weights[j];
    for (std::size_t j = 0; j < layer.biases.size(); ++j) layer.biases[j] += rate * lg.biases[j];
  }
}

std::vector<double> flat_parameters(const Network& net) {
  std::vector<double> out;
  for (const LayerSpec& layer : net.layers) {
    out.insert(out.end(), layer.weights.begin(), layer.weights.end());
    out.insert(out.end(), layer.biases.begin(), layer.biases.end());
  }
  return out;
}

void set_flat_parameters(Network& net, std::span<const double> values) {
  std::size_t pos = 0;
  for (LayerSpec& layer : net.layers) {
    for (double& w : layer.weights) {
      if (pos >= values.size()) throw DimensionError("set_flat_parameters: too few values");
      w = values[pos++];
    }
    for (double& b : layer.biases) {
      if (pos >= values.size()) throw DimensionError("set_flat_parameters: too few values");
      b = values[pos++];
    }
  }
  if (pos != values.size()) throw DimensionError("set_flat_parameters: too many values");
}

Tensor3 reconstruct(const Network& net, const Tensor3& image) {
  Tensor3 b = top_down(net, forward(net, image).pattern).basis;
  b *= net.sigma_sq;
  return b;
}

double reconstruction_rmse(const Network& net, const Tensor3& image) {
  return std::sqrt(sq_norm(image - reconstruct(net, image)) / static_cast<double>(image.size()));
}

void TrainConfig::validate() const {
  if (num_chains < 1) throw ParameterError("num_chains must be >= 1");
  if (langevin_steps < 0) throw ParameterError("langevin_steps must be >= 0");
  if (iterations < 0) throw ParameterError("iterations must be >= 0");
  if (!(epsilon >= 0.0)) throw ParameterError("epsilon must be >= 0");
  if (!(learning_rate > 0.0)) throw ParameterError("learning_rate must be > 0");
  if (!(init_std >= 0.0)) throw ParameterError("init_std must be >= 0");
  if (workers < 1) throw ParameterError("workers must be >= 1");
  for (const GrowthStage& s : growth) {
    if (s.depth < 1 || s.iterations < 0) throw ParameterError("growth stages need depth >= 1 and iterations >= 0");
  }
}

std::vector<GrowthStage> sequential_growth(std::size_t num_layers, int total_iterations) {
  std::vector<GrowthStage> stages;
  if (num_layers == 0) return stages;
  const int n = static_cast<int>(num_layers);
  const int base = total_iterations / n;
  const int extra = total_iterations % n;
  for (int s = 0; s < n; ++s) {
    stages.push_back({static_cast<std::size_t>(s + 1), base + (s < extra ? 1 : 0)});
  }
  return stages;
}

namespace {

double mean_energy(const Network& net, std::span<const ChainState> chains, std::size_t workers) {
  std::vector<double> values(chains.size());
  parallel_for(chains.size(), workers, [&](std::size_t i) { values[i] = energy(net, chains[i].image); });
  double acc = 0.0;
  for (double v : values) acc += v;
  return chains.empty() ? 0.0 : acc / static_cast<double>(chains.size());
}

std::vector<Tensor3> chain_images(std::span<const ChainState> chains) {
  std::vector<Tensor3> out;
  out.reserve(chains.size());
  for (const ChainState& c : chains) out.push_back(c.image);
  return out;
}

StepStats finish_step(Network& net, std::span<const Tensor3> observed, std::span<const ChainState> chains,
                      const TrainConfig& config) {
  StepStats stats;
  const std::vector<Tensor3> synthesized = chain_images(chains);
  stats.h_obs = mean_grad_params(net, observed, config.workers);
  stats.h_syn = mean_grad_params(net, synthesized, config.workers);
  stats.mean_energy = mean_energy(net, chains, config.workers);
  ParamGrad step = stats.h_obs - stats.h_syn;
  stats.grad_norm = step.mean_abs();
  apply_update(net, step, config.learning_rate, config.layer_lr_scale);
  return stats;
}

void check_finite(const Network& net, std::span<const ChainState> chains, int iteration) {
  for (const LayerSpec& layer : net.layers) {
    for (double v : layer.weights) {
      if (!std::isfinite(v)) throw DivergenceError("non-finite weight at iteration " + std::to_string(iteration));
    }
    for (double v : layer.biases) {
      if (!std::isfinite(v)) throw DivergenceError("non-finite bias at iteration " + std::to_string(iteration));
    }
  }
  for (const ChainState& c : chains) {
    if (!c.image.all_finite()) {
      throw DivergenceError("non-finite synthesized image at iteration " + std::to_string(iteration));
    }
  }
}

}  // namespace

StepStats mle_step(Network& net, std::span<const Tensor3> observed, std::span<ChainState> chains,
                   const TrainConfig& config) {
  langevin_run_all(net, chains, LangevinConfig{config.epsilon, config.langevin_steps}, config.workers);
  return finish_step(net, observed, chains, config);
}

StepStats cd_step(Network& net, std::span<const Tensor3> observed, std::span<ChainState> chains,
                  const TrainConfig& config) {
  if (chains.size() != observed.size()) throw DimensionError("cd_step needs one chain per observed image");
  for (std::size_t m = 0; m < observed.size(); ++m) chains[m].image = observed[m];
  langevin_run_all(net, chains, LangevinConfig{config.epsilon, config.langevin_steps}, config.workers);
  return finish_step(net, observed, chains, config);
}

namespace {

std::size_t conv_depth(const Network& net, const TrainConfig& config) {
  if (!config.fully_connected_top) return net.depth();
  if (net.depth() < 2) throw DimensionError("a fully connected top needs at least one layer below it");
  return net.depth() - 1;
}

// Network trained during a stage of the given conv depth.
Network stage_network(const Network& full, std::size_t depth, const TrainConfig& config, SeededRng& rng) {
  const std::size_t conv = conv_depth(full, config);
  if (!config.fully_connected_top || depth == conv) {
    return depth == full.depth() ? full : prefix_network(full, depth);
  }
  Network net = prefix_network(full, depth);
  const Shape3 top = net.feature_shape(depth);
  LayerSpec fc(1, top.channels, top.height, top.width, 1);
  if (config.init_std > 0.0) {
    for (double& w : fc.weights) w = config.init_std * rng.normal();
  }
  net.layers.push_back(std::move(fc));
  return net;
}

void merge_stage(Network& full, const Network& stage, std::size_t depth, const TrainConfig& config) {
  for (std::size_t l = 0; l < depth; ++l) full.layers[l] = stage.layers[l];
  if (config.fully_connected_top && depth == conv_depth(full, config)) full.layers.back() = stage.layers.back();
}

}  // namespace

TrainResult train(const Network& net0, std::span<const Tensor3> images, const TrainConfig& config,
                  const HistoryCallback& on_iteration) {
  config.validate();
  net0.validate();
  if (images.empty()) throw DimensionError("train: no training images");
  for (const Tensor3& img : images) {
    if (img.shape() != net0.input) throw DimensionError("train: image shape does not match network input");
  }

  const std::size_t conv = conv_depth(net0, config);
  std::vector<GrowthStage> stages = config.growth;
  if (stages.empty()) stages.push_back({conv, config.iterations});
  for (const GrowthStage& s : stages) {
    if (s.depth > conv) throw DimensionError("growth stage depth exceeds the network depth");
  }

  TrainResult result;
  result.net = net0;
  SeededRng growth_rng = SeededRng(config.seed).split(kGrowthStream);

  std::vector<ChainState> chains;
  const Tensor3 zero(net0.input);
  if (config.mode == TrainMode::kMle) {
    for (int i = 0; i < config.num_chains; ++i) chains.push_back(make_chain(zero, config.seed, static_cast<std::uint64_t>(i)));
  } else {
    for (std::size_t m = 0; m < images.size(); ++m) {
      chains.push_back(make_chain(images[m], config.seed, kContrastiveStream + m));
    }
  }

  int iteration = 0;
  for (const GrowthStage& stage : stages) {
    if (stage.iterations == 0) continue;
    Network net = stage_network(result.net, stage.depth, config, growth_rng);
    for (int t = 0; t < stage.iterations; ++t) {
      ++iteration;
      HistoryRecord record;
      record.iteration = iteration;
      record.depth = stage.depth;
      StepStats stats;
      if (config.mode == TrainMode::kMle) {
        stats = mle_step(net, images, chains, config);
      } else {
        double rmse = 0.0;
        for (const Tensor3& img : images) rmse += reconstruction_rmse(net, img);
        record.recon_rmse = rmse / static_cast<double>(images.size());
        stats = cd_step(net, images, chains, config);
      }
      record.grad_norm = stats.grad_norm;
      record.mean_energy = stats.mean_energy;
      check_finite(net, chains, iteration);
      if (!std::isfinite(record.grad_norm) || !std::isfinite(record.mean_energy)) {
        throw DivergenceError("non-finite training statistics at iteration " + std::to_string(iteration));
      }
      result.history.push_back(record);
      if (on_iteration) on_iteration(record);
    }
    merge_stage(result.net, net, stage.depth, config);
  }

  result.synthesized = chain_images(chains);
  return result;
}

}  // namespace genconv
