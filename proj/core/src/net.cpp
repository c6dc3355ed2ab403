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

#include "genconv/net.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace genconv {

int output_extent(int in, int kernel, int stride) {
  if (kernel <= 0 || stride <= 0 || in < kernel) return 0;
  return (in - kernel) / stride + 1;
}

LayerSpec::LayerSpec(int filters, int in_ch, int kh, int kw, int s)
    : num_filters(filters), in_channels(in_ch), kernel_h(kh), kernel_w(kw), stride(s) {
  if (filters <= 0 || in_ch <= 0 || kh <= 0 || kw <= 0 || s <= 0) {
    throw DimensionError("layer extents and stride must be positive");
  }
  weights.assign(static_cast<std::size_t>(filters) * kernel_size(), 0.0);
  biases.assign(static_cast<std::size_t>(filters), 0.0);
}

Shape3 Network::feature_shape(std::size_t l) const {
  Shape3 s = input;
  for (std::size_t j = 0; j < l; ++j) {
    const LayerSpec& layer = layers[j];
    s = {layer.num_filters, output_extent(s.height, layer.kernel_h, layer.stride),
         output_extent(s.width, layer.kernel_w, layer.stride)};
  }
  return s;
}

std::size_t Network::num_parameters() const {
  std::size_t n = 0;
  for (const LayerSpec& layer : layers) n += layer.weights.size() + layer.biases.size();
  if (top_mode == TopMode::kCategoryHeads) n += heads.weights.size() + heads.biases.size();
  return n;
}

ArchSpec Network::arch() const {
  ArchSpec a;
  a.input = input;
  for (const LayerSpec& layer : layers) a.layers.push_back(layer.geometry());
  return a;
}

namespace {

void require_finite(std::span<const double> values, const std::string& what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw ParameterError(what + " contains a non-finite value");
  }
}

}  // namespace

void Network::validate() const {
  if (!input.valid()) throw DimensionError("network input shape must be positive, got " + input.str());
  if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq)) {
    throw ParameterError("sigma_sq must be positive and finite");
  }
  Shape3 s = input;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerSpec& layer = layers[l];
    const std::string name = "layer " + std::to_string(l + 1);
    if (layer.num_filters <= 0 || layer.kernel_h <= 0 || layer.kernel_w <= 0 || layer.stride <= 0) {
      throw DimensionError(name + ": extents and stride must be positive");
    }
    if (layer.in_channels != s.channels) {
      throw DimensionError(name + ": expects " + std::to_string(layer.in_channels) +
                           " input channels, previous layer provides " + std::to_string(s.channels));
    }
    if (layer.weights.size() != static_cast<std::size_t>(layer.num_filters) * layer.kernel_size() ||
        layer.biases.size() != static_cast<std::size_t>(layer.num_filters)) {
      throw DimensionError(name + ": parameter array sizes do not match its geometry");
    }
    s = {layer.num_filters, output_extent(s.height, layer.kernel_h, layer.stride),
         output_extent(s.width, layer.kernel_w, layer.stride)};
    if (s.height < 1 || s.width < 1) {
      throw DimensionError(name + ": kernel does not fit its input, output extent would be empty");
    }
    require_finite(layer.weights, name + " weights");
    require_finite(layer.biases, name + " biases");
  }
  if (top_mode == TopMode::kCategoryHeads) {
    if (layers.empty()) throw DimensionError("category heads need at least one layer");
    if (heads.num_categories < 1 ||
        heads.weights.size() != static_cast<std::size_t>(heads.num_categories) * s.channels ||
        heads.biases.size() != static_cast<std::size_t>(heads.num_categories)) {
      throw DimensionError("category head arrays do not match the top layer");
    }
    require_finite(heads.weights, "category head weights");
    require_finite(heads.biases, "category head biases");
  }
}

ForwardPass forward(const Network& net, const Tensor3& image) {
  if (image.shape() != net.input) {
    throw DimensionError("forward: image shape " + image.shape().str() + " does not match network input " +
                         net.input.str());
  }
  ForwardPass pass;
  pass.features.reserve(net.depth() + 1);
  pass.pattern.reserve(net.depth());
  pass.pre_activations.reserve(net.depth());
  pass.features.push_back(image);

  for (std::size_t l = 0; l < net.depth(); ++l) {
    const LayerSpec& layer = net.layers[l];
    const Tensor3& in = pass.features.back();
    const Shape3 out_shape = net.feature_shape(l + 1);
    Tensor3 pre(out_shape);
    Tensor3 delta(out_shape);
    Tensor3 out(out_shape);
    for (int k = 0; k < layer.num_filters; ++k) {
      for (int oy = 0; oy < out_shape.height; ++oy) {
        for (int ox = 0; ox < out_shape.width; ++ox) {
          double acc = layer.biases[k];
          for (int i = 0; i < layer.in_channels; ++i) {
            for (int ky = 0; ky < layer.kernel_h; ++ky) {
              const double* w = &layer.weights[layer.weight_index(k, i, ky, 0)];
              const int iy = oy * layer.stride + ky;
              const int ix0 = ox * layer.stride;
              for (int kx = 0; kx < layer.kernel_w; ++kx) acc += w[kx] * in(i, iy, ix0 + kx);
            }
          }
          pre(k, oy, ox) = acc;
          const bool on = acc > 0.0;
          delta(k, oy, ox) = on ? 1.0 : 0.0;
          out(k, oy, ox) = on ? acc : 0.0;
        }
      }
    }
    pass.pre_activations.push_back(std::move(pre));
    pass.pattern.push_back(std::move(delta));
    pass.features.push_back(std::move(out));
  }
  return pass;
}

double score_conv(const Network& net, const ForwardPass& pass) {
  if (net.top_mode != TopMode::kConvSum) throw ParameterError("score_conv requires the conv-sum top mode");
  // A zero-layer network scores the raw image.
  return pass.features.back().sum();
}

double score_conv(const Network& net, const Tensor3& image) {
  if (net.top_mode != TopMode::kConvSum) throw ParameterError("score_conv requires the conv-sum top mode");
  return score_conv(net, forward(net, image));
}

std::vector<double> category_scores(const Network& net, const ForwardPass& pass) {
  if (net.top_mode != TopMode::kCategoryHeads) {
    throw ParameterError("category scores require the category-heads top mode");
  }
  const Tensor3& top = pass.features.back();
  if (top.height() != 1 || top.width() != 1) {
    throw DimensionError("category heads need 1x1 top-layer maps, got " + top.shape().str());
  }
  const int n = top.channels();
  std::vector<double> scores(static_cast<std::size_t>(net.heads.num_categories), 0.0);
  for (int c = 0; c < net.heads.num_categories; ++c) {
    double acc = 0.0;
    for (int k = 0; k < n; ++k) acc += net.heads.weights[static_cast<std::size_t>(c) * n + k] * top[k];
    scores[c] = acc;
  }
  return scores;
}

double score_category(const Network& net, const Tensor3& image, int category) {
  if (category < 0 || category >= net.heads.num_categories) {
    throw ParameterError("category index out of range");
  }
  return category_scores(net, forward(net, image))[category];
}

std::vector<double> softmax_posterior(std::span<const double> scores, std::span<const double> biases) {
  if (scores.size() != biases.size() || scores.empty()) {
    throw DimensionError("softmax_posterior: scores and biases must be non-empty and equally long");
  }
  std::vector<double> logits(scores.size());
  for (std::size_t c = 0; c < scores.size(); ++c) logits[c] = scores[c] + biases[c];
  const double top = *std::max_element(logits.begin(), logits.end());
  double total = 0.0;
  for (double& v : logits) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : logits) v /= total;
  return logits;
}

Network init_network(const ArchSpec& arch, double init_std, SeededRng& rng) {
  if (!(init_std >= 0.0) || !std::isfinite(init_std)) throw ParameterError("init_std must be >= 0");
  Network net;
  net.input = arch.input;
  if (!arch.input.valid()) throw DimensionError("architecture input shape must be positive");
  std::vector<LayerShape> shapes = arch.layers;
  Shape3 s = arch.input;
  for (const LayerShape& ls : arch.layers) {
    s = {ls.filters, output_extent(s.height, ls.kernel_h, ls.stride),
         output_extent(s.width, ls.kernel_w, ls.stride)};
    if (s.height < 1 || s.width < 1) break;  // reported by validate() below
  }
  if (arch.fully_connected_top) shapes.push_back({1, s.height, s.width, 1});

  int in_channels = arch.input.channels;
  for (const LayerShape& ls : shapes) {
    LayerSpec layer(ls.filters, in_channels, ls.kernel_h, ls.kernel_w, ls.stride);
    if (init_std > 0.0) {
      for (double& w : layer.weights) w = init_std * rng.normal();
    }
    net.layers.push_back(std::move(layer));
    in_channels = ls.filters;
  }
  net.validate();
  return net;
}

Network prefix_network(const Network& net, std::size_t depth) {
  if (depth > net.depth()) throw DimensionError("prefix_network: depth exceeds network depth");
  Network out;
  out.input = net.input;
  out.sigma_sq = net.sigma_sq;
  out.layers.assign(net.layers.begin(), net.layers.begin() + static_cast<std::ptrdiff_t>(depth));
  return out;
}

bool same_pattern(const ActivationPattern& a, const ActivationPattern& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t l = 0; l < a.size(); ++l) {
    if (!(a[l] == b[l])) return false;
  }
  return true;
}

std::size_t pattern_distance(const ActivationPattern& a, const ActivationPattern& b) {
  if (a.size() != b.size()) throw DimensionError("pattern_distance: depth mismatch");
  std::size_t n = 0;
  for (std::size_t l = 0; l < a.size(); ++l) {
    require_same_shape(a[l], b[l], "pattern_distance");
    for (std::size_t i = 0; i < a[l].size(); ++i) n += a[l][i] != b[l][i];
  }
  return n;
}

}  // namespace genconv
