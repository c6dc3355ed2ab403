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

#ifndef GENCONV_NET_HPP_
#define GENCONV_NET_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "genconv/rng.hpp"
#include "genconv/tensor.hpp"

namespace genconv {

/// How the top-layer feature maps are turned into a scalar score.
enum class TopMode {
  kConvSum,        // f(I) = sum over k, x of the top-layer responses
  kCategoryHeads,  // f_c(I) = sum_k w_{c,k} F_k(I), top maps must be 1x1
};

/// Geometry of one convolutional layer, without parameters.
struct LayerShape {
  int filters = 1;
  int kernel_h = 1;
  int kernel_w = 1;
  int stride = 1;

  friend bool operator==(const LayerShape&, const LayerShape&) = default;
};

/// Architecture description used to build a Network. When
/// `fully_connected_top` is set, one extra layer with a single filter covering
/// the whole output of the last listed layer is appended.
struct ArchSpec {
  Shape3 input;
  std::vector<LayerShape> layers;
  bool fully_connected_top = false;
};

/// Output extent of a valid (unpadded) strided convolution.
/// Returns 0 when the kernel does not fit.
int output_extent(int in, int kernel, int stride);

/// One layer of filters w^{(l,k)}_{i,y} and biases b_{l,k}.
/// Weights are stored flat in (k, i, ky, kx) order.
struct LayerSpec {
  int num_filters = 0;
  int in_channels = 0;
  int kernel_h = 0;
  int kernel_w = 0;
  int stride = 1;
  std::vector<double> weights;
  std::vector<double> biases;

  LayerSpec() = default;
  LayerSpec(int filters, int in_channels, int kernel_h, int kernel_w, int stride);

  std::size_t weight_index(int k, int i, int ky, int kx) const {
    return ((static_cast<std::size_t>(k) * in_channels + i) * kernel_h + ky) * kernel_w + kx;
  }
  double& weight(int k, int i, int ky, int kx) { return weights[weight_index(k, i, ky, kx)]; }
  double weight(int k, int i, int ky, int kx) const { return weights[weight_index(k, i, ky, kx)]; }
  std::size_t kernel_size() const {
    return static_cast<std::size_t>(in_channels) * kernel_h * kernel_w;
  }
  LayerShape geometry() const { return {num_filters, kernel_h, kernel_w, stride}; }

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// Per-category classification weights w_{c,k} (row-major c, k) and biases b_c.
struct CategoryHeads {
  int num_categories = 0;
  std::vector<double> weights;
  std::vector<double> biases;

  friend bool operator==(const CategoryHeads&, const CategoryHeads&) = default;
};

struct Network {
  Shape3 input;
  std::vector<LayerSpec> layers;
  TopMode top_mode = TopMode::kConvSum;
  CategoryHeads heads;
  double sigma_sq = 1.0;

  std::size_t depth() const { return layers.size(); }
  /// Shape of F^{(l)} * I; l = 0 is the input image.
  Shape3 feature_shape(std::size_t l) const;
  std::size_t num_parameters() const;
  ArchSpec arch() const;

  /// Throws DimensionError / ParameterError if the layer chain is inconsistent,
  /// a spatial extent collapses, or a parameter is non-finite.
  void validate() const;

  friend bool operator==(const Network&, const Network&) = default;
};

/// Entry l holds F^{(l)} * I; entry 0 is the input image itself.
using FeatureMaps = std::vector<Tensor3>;
/// Entry l - 1 holds the binary map delta^{(l)} for layer l = 1..L.
using ActivationPattern = std::vector<Tensor3>;

struct ForwardPass {
  FeatureMaps features;
  ActivationPattern pattern;
  /// Entry l - 1 holds the pre-activation <w_{k,x}, F^{(l-1)} I> + b_{l,k}.
  std::vector<Tensor3> pre_activations;
};

/// Bottom-up pass. delta = 1 iff the pre-activation is strictly positive and
/// every response equals delta * pre-activation.
ForwardPass forward(const Network& net, const Tensor3& image);

/// Sum of all top-layer responses (requires TopMode::kConvSum).
double score_conv(const Network& net, const Tensor3& image);
double score_conv(const Network& net, const ForwardPass& pass);

/// sum_k w_{c,k} [F_k^{(L)} * I] (requires TopMode::kCategoryHeads, 1x1 top).
double score_category(const Network& net, const Tensor3& image, int category);
std::vector<double> category_scores(const Network& net, const ForwardPass& pass);

/// Softmax of scores + biases, computed with max subtraction.
std::vector<double> softmax_posterior(std::span<const double> scores,
                                      std::span<const double> biases);

/// Gaussian N(0, init_std^2) weights and zero biases. init_std == 0 yields an
/// all-zero network.
Network init_network(const ArchSpec& arch, double init_std, SeededRng& rng);

/// Network made of the first `depth` layers of `net` (same input, sigma).
Network prefix_network(const Network& net, std::size_t depth);

bool same_pattern(const ActivationPattern& a, const ActivationPattern& b);
/// Number of entries where the two patterns differ.
std::size_t pattern_distance(const ActivationPattern& a, const ActivationPattern& b);

}  // namespace genconv

#endif  // GENCONV_NET_HPP_
