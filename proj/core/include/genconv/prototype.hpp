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

#ifndef GENCONV_PROTOTYPE_HPP_
#define GENCONV_PROTOTYPE_HPP_

#include <cstdint>
#include <vector>

#include "genconv/net.hpp"
#include "genconv/tensor.hpp"

namespace genconv {

/// Single-layer, non-convolutional model: K whole-patch filters w_k with
/// biases b_k, scored by sum_k ReLU(<I, w_k> + b_k) against a Gaussian
/// reference of variance sigma_sq.
struct PrototypeModel {
  Shape3 patch{1, 10, 10};
  std::vector<Tensor3> filters;
  std::vector<double> biases;
  double sigma_sq = 1.0;

  std::size_t num_filters() const { return filters.size(); }
  void validate() const;
};

using BinaryCode = std::vector<std::uint8_t>;

BinaryCode proto_activation(const PrototypeModel& m, const Tensor3& patch);
/// sum_k delta_k w_k
Tensor3 proto_mean(const PrototypeModel& m, const BinaryCode& delta);
double proto_score(const PrototypeModel& m, const Tensor3& patch);
double proto_energy(const PrototypeModel& m, const Tensor3& patch);

struct PrototypePiece {
  BinaryCode delta;
  Tensor3 mean;  // sigma^2 * sum_k delta_k w_k
  bool mean_in_piece = false;
};

inline constexpr std::size_t kMaxEnumeratedFilters = 20;

/// All 2^K activation codes in increasing binary order (filter 0 is the least
/// significant bit), each with its Gaussian mean and whether that mean falls
/// inside its own piece, i.e. is an exactly auto-encoding local mode.
std::vector<PrototypePiece> enumerate_pieces(const PrototypeModel& m);

/// The same model as a one-layer conv-sum Network: each filter becomes a
/// full-patch kernel with a 1x1 output map.
Network to_network(const PrototypeModel& m);

/// Random model with N(0, weight_std^2) filter entries and N(0, bias_std^2)
/// biases.
PrototypeModel random_prototype(Shape3 patch, std::size_t num_filters, double weight_std,
                                double bias_std, SeededRng& rng);

}  // namespace genconv

#endif  // GENCONV_PROTOTYPE_HPP_
