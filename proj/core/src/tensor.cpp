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

#include "genconv/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace genconv {

std::string Shape3::str() const {
  return std::to_string(channels) + "x" + std::to_string(height) + "x" + std::to_string(width);
}

Tensor3::Tensor3(Shape3 shape, double fill) : shape_(shape) {
  if (!shape.valid()) throw DimensionError("tensor extents must be positive, got " + shape.str());
  data_.assign(shape.size(), fill);
}

Tensor3::Tensor3(Shape3 shape, std::vector<double> data) : shape_(shape), data_(std::move(data)) {
  if (!shape.valid()) throw DimensionError("tensor extents must be positive, got " + shape.str());
  if (data_.size() != shape.size()) {
    throw DimensionError("tensor data length " + std::to_string(data_.size()) +
                         " does not match shape " + shape.str());
  }
}

void Tensor3::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

double Tensor3::sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

bool Tensor3::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor3& Tensor3::operator+=(const Tensor3& other) {
  require_same_shape(*this, other, "operator+=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor3& Tensor3::operator-=(const Tensor3& other) {
  require_same_shape(*this, other, "operator-=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Tensor3& Tensor3::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

Tensor3& Tensor3::axpy(double s, const Tensor3& other) {
  require_same_shape(*this, other, "axpy");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += s * other.data_[i];
  return *this;
}

void require_same_shape(const Tensor3& a, const Tensor3& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(what) + ": shape mismatch " + a.shape().str() + " vs " +
                         b.shape().str());
  }
}

double inner_product(const Tensor3& a, const Tensor3& b) {
  require_same_shape(a, b, "inner_product");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double sq_norm(const Tensor3& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += v * v;
  return acc;
}

double max_abs(const Tensor3& a) {
  double m = 0.0;
  for (double v : a.data()) m = std::max(m, std::abs(v));
  return m;
}

double max_abs_diff(const Tensor3& a, const Tensor3& b) {
  require_same_shape(a, b, "max_abs_diff");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Tensor3 gaussian_noise(Shape3 shape, double sigma, SeededRng& rng) {
  if (!(sigma > 0.0)) throw ParameterError("gaussian_noise: sigma must be positive");
  Tensor3 out(shape);
  for (double& v : out.data()) v = sigma * rng.normal();
  return out;
}

}  // namespace genconv
