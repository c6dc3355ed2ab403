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

#ifndef GENCONV_TENSOR_HPP_
#define GENCONV_TENSOR_HPP_

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "genconv/rng.hpp"

namespace genconv {

/// Operand shapes or sizes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A scalar argument is outside its admissible range.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Shape3 {
  int channels = 0;
  int height = 0;
  int width = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(channels) * static_cast<std::size_t>(height) *
           static_cast<std::size_t>(width);
  }
  bool valid() const { return channels > 0 && height > 0 && width > 0; }
  std::string str() const;

  friend bool operator==(const Shape3&, const Shape3&) = default;
};

/// Dense channels x height x width array of doubles. Storage is channel-major,
/// then row-major: element (c, y, x) lives at (c * height + y) * width + x.
/// This layout is also the on-disk order used by checkpoints.
class Tensor3 {
 public:
  Tensor3() = default;
  explicit Tensor3(Shape3 shape, double fill = 0.0);
  Tensor3(Shape3 shape, std::vector<double> data);

  const Shape3& shape() const { return shape_; }
  int channels() const { return shape_.channels; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(int c, int y, int x) { return data_[index(c, y, x)]; }
  double operator()(int c, int y, int x) const { return data_[index(c, y, x)]; }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  void fill(double v);
  double sum() const;
  bool all_finite() const;

  Tensor3& operator+=(const Tensor3& other);
  Tensor3& operator-=(const Tensor3& other);
  Tensor3& operator*=(double s);
  /// this += s * other
  Tensor3& axpy(double s, const Tensor3& other);

  friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
  friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
  friend Tensor3 operator*(Tensor3 a, double s) { return a *= s; }
  friend Tensor3 operator*(double s, Tensor3 a) { return a *= s; }
  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * shape_.height + y) * shape_.width + x;
  }

  Shape3 shape_;
  std::vector<double> data_;
};

void require_same_shape(const Tensor3& a, const Tensor3& b, const char* what);

/// Sum over all entries of a * b.
double inner_product(const Tensor3& a, const Tensor3& b);
double sq_norm(const Tensor3& a);
double max_abs(const Tensor3& a);
double max_abs_diff(const Tensor3& a, const Tensor3& b);

/// I.i.d. N(0, sigma^2) entries drawn from `rng` in storage order.
Tensor3 gaussian_noise(Shape3 shape, double sigma, SeededRng& rng);

}  // namespace genconv

#endif  // GENCONV_TENSOR_HPP_
