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

#include "genconv/linearize.hpp"

#include <algorithm>

namespace genconv {

DeconvolutionTrace deconvolve(const Network& net, const ActivationPattern& pattern) {
  if (net.top_mode != TopMode::kConvSum) {
    throw ParameterError("top-down linearization is defined for the conv-sum top mode");
  }
  const std::size_t depth = net.depth();
  if (pattern.size() != depth) throw DimensionError("top_down: pattern depth does not match network");
  for (std::size_t l = 0; l < depth; ++l) {
    if (pattern[l].shape() != net.feature_shape(l + 1)) {
      throw DimensionError("top_down: pattern shape mismatch at layer " + std::to_string(l + 1));
    }
  }

  DeconvolutionTrace trace;
  trace.basis.resize(depth + 1);
  trace.alpha.assign(depth + 1, 0.0);
  trace.basis[depth] = Tensor3(net.feature_shape(depth), 1.0);

  for (std::size_t l = depth; l > 0; --l) {
    const LayerSpec& layer = net.layers[l - 1];
    const Tensor3& upper = trace.basis[l];
    const Tensor3& delta = pattern[l - 1];
    Tensor3 lower(net.feature_shape(l - 1));
    double alpha = trace.alpha[l];
    for (int k = 0; k < upper.channels(); ++k) {
      for (int oy = 0; oy < upper.height(); ++oy) {
        for (int ox = 0; ox < upper.width(); ++ox) {
          const double coef = upper(k, oy, ox) * delta(k, oy, ox);
          if (coef == 0.0) continue;
          alpha += coef * layer.biases[k];
          for (int i = 0; i < layer.in_channels; ++i) {
            for (int ky = 0; ky < layer.kernel_h; ++ky) {
              const double* w = &layer.weights[layer.weight_index(k, i, ky, 0)];
              const int iy = oy * layer.stride + ky;
              const int ix0 = ox * layer.stride;
              for (int kx = 0; kx < layer.kernel_w; ++kx) lower(i, iy, ix0 + kx) += coef * w[kx];
            }
          }
        }
      }
    }
    trace.alpha[l - 1] = alpha;
    trace.basis[l - 1] = std::move(lower);
  }
  return trace;
}

LinearPiece top_down(const Network& net, const ActivationPattern& pattern) {
  DeconvolutionTrace trace = deconvolve(net, pattern);
  return {trace.alpha.front(), std::move(trace.basis.front())};
}

Tensor3 grad_score(const Network& net, const Tensor3& image) {
  if (net.top_mode != TopMode::kConvSum) throw ParameterError("grad_score requires the conv-sum top mode");
  const ForwardPass pass = forward(net, image);
  // Adjoint of the top-layer sum.
  Tensor3 grad(pass.features.back().shape(), 1.0);
  for (std::size_t l = net.depth(); l > 0; --l) {
    const LayerSpec& layer = net.layers[l - 1];
    const Tensor3& response = pass.features[l];
    Tensor3 gated = grad;
    for (std::size_t j = 0; j < gated.size(); ++j) {
      if (!(response[j] > 0.0)) gated[j] = 0.0;
    }
    const Shape3 in_shape = pass.features[l - 1].shape();
    const int out_h = gated.height();
    const int out_w = gated.width();
    const int s = layer.stride;
    Tensor3 below(in_shape);
    for (int i = 0; i < in_shape.channels; ++i) {
      for (int iy = 0; iy < in_shape.height; ++iy) {
        // Output rows oy whose window covers iy: oy * s <= iy < oy * s + kernel_h.
        const int oy_lo = std::max(0, (iy - layer.kernel_h + s) / s);
        const int oy_hi = std::min(out_h - 1, iy / s);
        for (int ix = 0; ix < in_shape.width; ++ix) {
          const int ox_lo = std::max(0, (ix - layer.kernel_w + s) / s);
          const int ox_hi = std::min(out_w - 1, ix / s);
          double acc = 0.0;
          for (int oy = oy_lo; oy <= oy_hi; ++oy) {
            const int ky = iy - oy * s;
            if (ky < 0 || ky >= layer.kernel_h) continue;
            for (int ox = ox_lo; ox <= ox_hi; ++ox) {
              const int kx = ix - ox * s;
              if (kx < 0 || kx >= layer.kernel_w) continue;
              for (int k = 0; k < layer.num_filters; ++k) {
                acc += gated(k, oy, ox) * layer.weight(k, i, ky, kx);
              }
            }
          }
          below(i, iy, ix) = acc;
        }
      }
    }
    grad = std::move(below);
  }
  return grad;
}

double energy(const Network& net, const Tensor3& image) {
  return sq_norm(image) / (2.0 * net.sigma_sq) - score_conv(net, image);
}

std::optional<Tensor3> perturb_within_piece(const Network& net, const Tensor3& image,
                                            const Tensor3& direction, double radius, int max_shrinks) {
  require_same_shape(image, direction, "perturb_within_piece");
  const ActivationPattern reference = forward(net, image).pattern;
  double r = radius;
  for (int attempt = 0; attempt <= max_shrinks; ++attempt, r *= 0.5) {
    Tensor3 candidate = image;
    candidate.axpy(r, direction);
    if (same_pattern(forward(net, candidate).pattern, reference)) return candidate;
  }
  return std::nullopt;
}

}  // namespace genconv
