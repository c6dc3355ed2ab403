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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "genconv/rng.hpp"
#include "genconv/tensor.hpp"
#include "test_util.hpp"

namespace genconv {
namespace {

using testing::gray;

TEST(Tensor, InnerProductHandCases) {
  const Tensor3 ones({1, 2, 2}, 1.0);
  EXPECT_EQ(inner_product(ones, ones), 4.0);
  EXPECT_EQ(inner_product(gray(2, 2, {1, 2, 3, 4}), Tensor3({1, 2, 2})), 0.0);
  EXPECT_EQ(inner_product(gray(2, 2, {1, 2, 3, 4}), gray(2, 2, {4, 3, 2, 1})), 20.0);
}

TEST(Tensor, InnerProductShapeMismatchThrows) {
  EXPECT_THROW(inner_product(Tensor3({1, 2, 2}), Tensor3({1, 2, 3})), DimensionError);
  EXPECT_THROW(inner_product(Tensor3({1, 2, 2}), Tensor3({2, 2, 1})), DimensionError);
}

TEST(Tensor, SqNorm) {
  EXPECT_EQ(sq_norm(Tensor3({2, 3, 3})), 0.0);
  EXPECT_EQ(sq_norm(gray(1, 2, {3, 4})), 25.0);
  SeededRng rng(5);
  const Tensor3 a = gaussian_noise({2, 4, 3}, 1.0, rng);
  EXPECT_NEAR(sq_norm(2.5 * a), 6.25 * sq_norm(a), 1e-12 * sq_norm(a));
  EXPECT_EQ(sq_norm(a), inner_product(a, a));
}

TEST(Tensor, InnerProductSymmetricAndBilinear) {
  SeededRng rng(11);
  for (int t = 0; t < 20; ++t) {
    const Shape3 s{1 + t % 3, 2 + t % 5, 3 + t % 4};
    const Tensor3 a = gaussian_noise(s, 1.0, rng);
    const Tensor3 b = gaussian_noise(s, 1.0, rng);
    const Tensor3 c = gaussian_noise(s, 1.0, rng);
    const double x = rng.normal();
    const double y = rng.normal();
    EXPECT_EQ(inner_product(a, b), inner_product(b, a));
    const double lhs = inner_product(x * a + y * b, c);
    const double rhs = x * inner_product(a, c) + y * inner_product(b, c);
    const double size = (std::abs(x) * std::sqrt(sq_norm(a)) + std::abs(y) * std::sqrt(sq_norm(b))) * std::sqrt(sq_norm(c));
    EXPECT_LE(std::abs(lhs - rhs), 1e-12 * size);
  }
}

TEST(Tensor, LayoutIsChannelMajorThenRowMajor) {
  Tensor3 t({2, 3, 4});
  t(1, 2, 3) = 7.0;
  EXPECT_EQ(t[(1 * 3 + 2) * 4 + 3], 7.0);
  EXPECT_THROW(Tensor3({1, 2, 2}, std::vector<double>(3)), DimensionError);
  EXPECT_THROW(Tensor3({0, 2, 2}), DimensionError);
}

TEST(GaussianNoise, TinySigmaIsTiny) {
  SeededRng rng(3);
  EXPECT_LT(max_abs(gaussian_noise({1, 32, 32}, 1e-12, rng)), 1e-9);
}

TEST(GaussianNoise, NonPositiveSigmaThrows) {
  SeededRng rng(3);
  EXPECT_THROW(gaussian_noise({1, 2, 2}, 0.0, rng), ParameterError);
  EXPECT_THROW(gaussian_noise({1, 2, 2}, -1.0, rng), ParameterError);
}

TEST(GaussianNoise, MillionDrawMoments) {
  SeededRng rng(2024);
  const Tensor3 z = gaussian_noise({1, 1000, 1000}, 1.0, rng);
  const double n = static_cast<double>(z.size());
  const double mean = z.sum() / n;
  const double var = sq_norm(z) / n - mean * mean;
  EXPECT_GE(mean, -0.01);
  EXPECT_LE(mean, 0.01);
  EXPECT_GE(var, 0.99);
  EXPECT_LE(var, 1.01);
}

TEST(GaussianNoise, SameSeedSameBytes) {
  SeededRng a(99);
  SeededRng b(99);
  const Tensor3 x = gaussian_noise({3, 7, 5}, 0.7, a);
  const Tensor3 y = gaussian_noise({3, 7, 5}, 0.7, b);
  EXPECT_EQ(0, std::memcmp(x.data().data(), y.data().data(), x.size() * sizeof(double)));
}

TEST(SeededRng, SplitUsesXorRule) {
  SeededRng master(0x1234);
  SeededRng child = master.split(5);
  SeededRng direct(0x1234 ^ 5);
  EXPECT_EQ(child.seed(), direct.seed());
  for (int i = 0; i < 10; ++i) EXPECT_EQ(child.normal(), direct.normal());
}

TEST(SeededRng, UniformInUnitInterval) {
  SeededRng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

}  // namespace
}  // namespace genconv
