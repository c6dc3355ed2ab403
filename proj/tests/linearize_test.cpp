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

#include "genconv/linearize.hpp"
#include "genconv/net.hpp"
#include "genconv/oracle.hpp"
#include "test_util.hpp"

namespace genconv {
namespace {

using testing::single_layer;

TEST(TopDown, DeadPatternGivesZeroPiece) {
  SeededRng rng(1);
  const Network net = random_network({}, rng);
  ActivationPattern dead = forward(net, random_image(net.input, 1.0, rng)).pattern;
  for (Tensor3& d : dead) d.fill(0.0);
  const LinearPiece piece = top_down(net, dead);
  EXPECT_EQ(piece.alpha, 0.0);
  EXPECT_EQ(max_abs(piece.basis), 0.0);
}

TEST(TopDown, SingleWindowReturnsKernelAndBias) {
  SeededRng rng(2);
  Network net = single_layer({1, 3, 3}, 1, 3, 3, 1, 0.0, 0.4);
  for (double& w : net.layers[0].weights) w = rng.normal();
  const LinearPiece piece = top_down(net, {Tensor3({1, 1, 1}, 1.0)});
  EXPECT_EQ(piece.alpha, 0.4);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(piece.basis[i], net.layers[0].weights[i]);
}

TEST(TopDown, KernelIsPlacedAtItsWindow) {
  SeededRng rng(3);
  Network net = single_layer({1, 4, 4}, 1, 2, 2, 2, 0.0, -0.25);
  for (double& w : net.layers[0].weights) w = rng.normal();
  Tensor3 delta({1, 2, 2});
  delta(0, 1, 0) = 1.0;  // window rows 2..3, columns 0..1
  const LinearPiece piece = top_down(net, {delta});
  EXPECT_EQ(piece.alpha, -0.25);
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) {
      const bool inside = y >= 2 && x < 2;
      EXPECT_EQ(piece.basis(0, y, x), inside ? net.layers[0].weight(0, 0, y - 2, x) : 0.0);
    }
}

TEST(TopDown, ReproducesTheScore) {
  SeededRng rng(4);
  for (int t = 0; t < 25; ++t) {
    const Network net = random_network({}, rng);
    const Tensor3 img = random_image(net.input, 1.0, rng);
    const double f = score_conv(net, img);
    const LinearPiece piece = top_down(net, forward(net, img).pattern);
    EXPECT_LE(std::abs(f - (piece.alpha + inner_product(img, piece.basis))), 1e-8 * (1.0 + std::abs(f)));
  }
}

TEST(TopDown, EveryLevelOfTheTraceIsAffine) {
  SeededRng rng(5);
  RandomNetOptions opt;
  opt.min_depth = 3;
  const Network net = random_network(opt, rng);
  const Tensor3 img = random_image(net.input, 1.0, rng);
  const ForwardPass pass = forward(net, img);
  const DeconvolutionTrace trace = deconvolve(net, pass.pattern);
  const double f = score_conv(net, pass);
  ASSERT_EQ(trace.basis.size(), net.depth() + 1);
  for (std::size_t l = 0; l <= net.depth(); ++l) {
    const double g = trace.alpha[l] + inner_product(trace.basis[l], pass.features[l]);
    EXPECT_LE(std::abs(f - g), 1e-8 * (1.0 + std::abs(f)));
  }
  for (double v : trace.basis.back().data()) EXPECT_EQ(v, 1.0);
}

TEST(GradScore, ZeroNetHasZeroGradient) {
  const Network net = single_layer({1, 6, 6}, 3, 3, 3, 1, 0.0, 0.0);
  SeededRng rng(6);
  EXPECT_EQ(max_abs(grad_score(net, random_image(net.input, 1.0, rng))), 0.0);
}

TEST(GradScore, EqualsTopDownBasis) {
  SeededRng rng(7);
  for (int t = 0; t < 25; ++t) {
    const Network net = random_network({}, rng);
    const Tensor3 img = random_image(net.input, 1.0, rng);
    const LinearPiece piece = top_down(net, forward(net, img).pattern);
    EXPECT_LE(max_abs_diff(grad_score(net, img), piece.basis), 1e-10);
  }
}

TEST(GradScore, AgreesOnBoundaryPoints) {
  // A zero image sits on a boundary of every bias-free net.
  SeededRng rng(8);
  RandomNetOptions opt;
  opt.bias_std = 0.0;
  for (int t = 0; t < 10; ++t) {
    const Network net = random_network(opt, rng);
    const Tensor3 zero(net.input);
    EXPECT_LE(max_abs_diff(grad_score(net, zero), top_down(net, forward(net, zero).pattern).basis), 1e-10);
  }
}

TEST(GradScore, DirectionalCentralDifferences) {
  SeededRng rng(9);
  const double h = 1e-4;
  int checked = 0;
  for (int t = 0; t < 40 && checked < 20; ++t) {
    const Network net = random_network({}, rng);
    const Tensor3 img = random_image(net.input, 1.0, rng);
    Tensor3 v = random_image(net.input, 1.0, rng);
    v *= 1.0 / std::sqrt(sq_norm(v));
    // Skip images whose +-h probes leave the piece.
    const ActivationPattern p = forward(net, img).pattern;
    if (!same_pattern(forward(net, img + h * v).pattern, p) || !same_pattern(forward(net, img - h * v).pattern, p))
      continue;
    const double fd = (score_conv(net, img + h * v) - score_conv(net, img - h * v)) / (2 * h);
    const double an = inner_product(grad_score(net, img), v);
    EXPECT_LE(std::abs(fd - an), 1e-5 * std::max({std::abs(fd), std::abs(an), 1e-3}));
    ++checked;
  }
  EXPECT_GE(checked, 20);
}

TEST(Energy, ZeroNet) {
  const Network net = single_layer({1, 4, 4}, 2, 2, 2, 1, 0.0, 0.0);
  EXPECT_EQ(energy(net, Tensor3(net.input)), 0.0);
  SeededRng rng(10);
  const Tensor3 img = random_image(net.input, 2.0, rng);
  EXPECT_NEAR(energy(net, img), 0.5 * sq_norm(img), 1e-12);
}

TEST(Energy, CompletedSquareIsConstantOnAPiece) {
  SeededRng rng(11);
  int used = 0;
  for (int t = 0; t < 10; ++t) {
    const Network net = random_network({}, rng);
    const Tensor3 img = random_image(net.input, 1.0, rng);
    const LinearPiece piece = top_down(net, forward(net, img).pattern);
    std::vector<double> residual;
    for (int p = 0; p < 10; ++p) {
      const auto probe = perturb_within_piece(net, img, random_image(net.input, 1.0, rng), 0.3);
      if (!probe) continue;
      residual.push_back(energy(net, *probe) - 0.5 * sq_norm(*probe - piece.basis));
    }
    if (residual.size() < 2) continue;
    double mean = 0.0;
    for (double r : residual) mean += r / residual.size();
    double var = 0.0;
    for (double r : residual) var += (r - mean) * (r - mean) / residual.size();
    EXPECT_LT(var, 1e-16);
    ++used;
  }
  EXPECT_GE(used, 5);
}

TEST(PerturbWithinPiece, KeepsThePattern) {
  SeededRng rng(12);
  const Network net = random_network({}, rng);
  const Tensor3 img = random_image(net.input, 1.0, rng);
  const auto probe = perturb_within_piece(net, img, random_image(net.input, 1.0, rng), 10.0);
  ASSERT_TRUE(probe.has_value());
  EXPECT_TRUE(same_pattern(forward(net, *probe).pattern, forward(net, img).pattern));
}

TEST(PerturbWithinPiece, FailsOnABoundary) {
  // Single filter, zero bias: the zero image has pre-activation exactly 0, and
  // every step along +w flips it on.
  const Network net = single_layer({1, 3, 3}, 1, 3, 3, 1, 1.0, 0.0);
  EXPECT_FALSE(perturb_within_piece(net, Tensor3(net.input), Tensor3(net.input, 1.0), 1.0).has_value());
}

}  // namespace
}  // namespace genconv
