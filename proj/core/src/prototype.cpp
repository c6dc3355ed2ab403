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

#include "genconv/prototype.hpp"

#include <algorithm>
#include <string>

namespace genconv {

void PrototypeModel::validate() const {
  if (!patch.valid()) throw DimensionError("prototype patch shape must be positive");
  if (biases.size() != filters.size()) throw DimensionError("prototype needs one bias per filter");
  if (!(sigma_sq > 0.0)) throw ParameterError("prototype sigma_sq must be positive");
  for (const Tensor3& w : filters) {
    if (w.shape() != patch) throw DimensionError("prototype filter shape differs from patch shape");
    if (!w.all_finite()) throw ParameterError("prototype filter is not finite");
  }
}

BinaryCode proto_activation(const PrototypeModel& m, const Tensor3& patch) {
  if (patch.shape() != m.patch) throw DimensionError("proto_activation: patch shape mismatch");
  BinaryCode delta(m.num_filters());
  for (std::size_t k = 0; k < m.num_filters(); ++k) {
    delta[k] = inner_product(patch, m.filters[k]) + m.biases[k] > 0.0 ? 1 : 0;
  }
  return delta;
}

Tensor3 proto_mean(const PrototypeModel& m, const BinaryCode& delta) {
  if (delta.size() != m.num_filters()) throw DimensionError("proto_mean: code length differs from K");
  Tensor3 mean(m.patch);
  for (std::size_t k = 0; k < delta.size(); ++k) {
    if (delta[k]) mean += m.filters[k];
  }
  return mean;
}

double proto_score(const PrototypeModel& m, const Tensor3& patch) {
  if (patch.shape() != m.patch) throw DimensionError("proto_score: patch shape mismatch");
  double score = 0.0;
  for (std::size_t k = 0; k < m.num_filters(); ++k) {
    const double r = inner_product(patch, m.filters[k]) + m.biases[k];
    if (r > 0.0) score += r;
  }
  return score;
}

double proto_energy(const PrototypeModel& m, const Tensor3& patch) {
  return sq_norm(patch) / (2.0 * m.sigma_sq) - proto_score(m, patch);
}

std::vector<PrototypePiece> enumerate_pieces(const PrototypeModel& m) {
  m.validate();
  const std::size_t k_count = m.num_filters();
  if (k_count > kMaxEnumeratedFilters) {
    throw ParameterError("enumerate_pieces: K = " + std::to_string(k_count) + " exceeds the limit of " +
                         std::to_string(kMaxEnumeratedFilters));
  }
  const std::size_t count = std::size_t{1} << k_count;
  std::vector<PrototypePiece> pieces;
  pieces.reserve(count);
  for (std::size_t code = 0; code < count; ++code) {
    PrototypePiece piece;
    piece.delta.resize(k_count);
    for (std::size_t k = 0; k < k_count; ++k) piece.delta[k] = (code >> k) & 1U;
    piece.mean = proto_mean(m, piece.delta);
    piece.mean *= m.sigma_sq;
    piece.mean_in_piece = proto_activation(m, piece.mean) == piece.delta;
    pieces.push_back(std::move(piece));
  }
  return pieces;
}

Network to_network(const PrototypeModel& m) {
  m.validate();
  Network net;
  net.input = m.patch;
  net.sigma_sq = m.sigma_sq;
  const int stride = std::max(m.patch.height, m.patch.width);
  // K = 0 becomes a single dead filter so the score is identically zero.
  LayerSpec layer(std::max(1, static_cast<int>(m.num_filters())), m.patch.channels, m.patch.height, m.patch.width, stride);
  for (std::size_t k = 0; k < m.num_filters(); ++k) {
    const auto values = m.filters[k].data();
    std::copy(values.begin(), values.end(), layer.weights.begin() + static_cast<std::ptrdiff_t>(k * layer.kernel_size()));
    layer.biases[k] = m.biases[k];
  }
  net.layers.push_back(std::move(layer));
  return net;
}

PrototypeModel random_prototype(Shape3 patch, std::size_t num_filters, double weight_std, double bias_std,
                                SeededRng& rng) {
  PrototypeModel m;
  m.patch = patch;
  for (std::size_t k = 0; k < num_filters; ++k) {
    Tensor3 w(patch);
    for (double& v : w.data()) v = weight_std * rng.normal();
    m.filters.push_back(std::move(w));
    m.biases.push_back(bias_std * rng.normal());
  }
  return m;
}

}  // namespace genconv
