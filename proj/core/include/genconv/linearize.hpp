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

#ifndef GENCONV_LINEARIZE_HPP_
#define GENCONV_LINEARIZE_HPP_

#include <optional>
#include <vector>

#include "genconv/net.hpp"
#include "genconv/tensor.hpp"

namespace genconv {

/// On the piece of image space sharing one activation pattern the score is
/// affine: f(I) = alpha + <I, basis>.
struct LinearPiece {
  double alpha = 0.0;
  Tensor3 basis;  // B, same shape as the input image
};

/// Every level of the top-down pass: basis[l] = B^{(l)} (shape of F^{(l)} I)
/// and alpha[l] = alpha_l with f = alpha_l + <B^{(l)}, F^{(l)} I>.
struct DeconvolutionTrace {
  std::vector<Tensor3> basis;
  std::vector<double> alpha;
};

/// Top-down deconvolution for a fixed activation pattern. B^{(L)} is all ones
/// and alpha_L = 0; going down one layer,
///   B^{(l-1)} = sum_{k,x} B^{(l)}_k(x) delta^{(l)}_{k,x} w^{(l)}_{k,x}
///   alpha_{l-1} = alpha_l + sum_{k,x} B^{(l)}_k(x) delta^{(l)}_{k,x} b_{l,k}
/// where w^{(l)}_{k,x} is the kernel k translated to window x (a scatter-add).
DeconvolutionTrace deconvolve(const Network& net, const ActivationPattern& pattern);
LinearPiece top_down(const Network& net, const ActivationPattern& pattern);

/// Reverse-mode gradient df/dI of the conv-sum score. ReLU gates are read off
/// the forward responses, so the sub-gradient at a zero pre-activation is 0.
/// Implemented as a gather over output windows, independently of deconvolve().
Tensor3 grad_score(const Network& net, const Tensor3& image);

/// U(I) = ||I||^2 / (2 sigma^2) - f(I; w).
double energy(const Network& net, const Tensor3& image);

/// Largest of radius, radius/2, radius/4, ... (at most `max_shrinks` halvings)
/// such that image + r * direction keeps the activation pattern of `image`.
/// Returns nullopt when every candidate leaves the piece, which means the image
/// sits on (or extremely close to) a piece boundary.
std::optional<Tensor3> perturb_within_piece(const Network& net, const Tensor3& image,
                                            const Tensor3& direction, double radius,
                                            int max_shrinks = 40);

}  // namespace genconv

#endif  // GENCONV_LINEARIZE_HPP_
