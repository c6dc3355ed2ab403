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
#include <numeric>

#include "genconv/linearize.hpp"
#include "genconv/net.hpp"
#include "genconv/oracle.hpp"
#include "test_util.hpp"

namespace genconv {
namespace {

using testing::single_layer;

TEST(Forward, AllOnesFilterAboveThreshold) {
  const Network net = single_layer({1, 3, 3}, 1, 2, 2, 1, 1.0, -2.0);
  const ForwardPass pass = forward(net, Tensor3({1, 3, 3}, 1.0));
  ASSERT_EQ(pass.features.size(), 2u);
  EXPECT_EQ(pass.features[1].shape(), (Shape3{1, 2, 2}));
  for (double v : pass.features[1].data()) EXPECT_EQ(v, 2.0);
  for (double d : pass.pattern[0].data()) EXPECT_EQ(d, 1.0);
  EXPECT_EQ(score_conv(net, Tensor3({1, 3, 3}, 1.0)), 8.0);
}

TEST(Forward, AllOnesFilterBelowThreshold) {
  const Network net = single_layer({1, 3, 3}, 1, 2, 2, 1, 1.0, -5.0);
  const ForwardPass pass = forward(net, Tensor3({1, 3, 3}, 1.0));
  for (double v : pass.features[1].data()) EXPECT_EQ(v, 0.0);
  for (double d : pass.pattern[0].data()) EXPECT_EQ(d, 0.0);
  for (double p : pass.pre_activations[0].data()) EXPECT_EQ(p, -1.0);
}

TEST(Forward, ZeroNetIsDeadEverywhere) {
  ArchSpec arch{{2, 9, 9}, {{3, 3, 3, 2}, {2, 2, 2, 1}}};
  SeededRng rng(1);
  const Network net = init_network(arch, 0.0, rng);
  SeededRng img_rng(2);
  const ForwardPass pass = forward(net, random_image(net.input, 1.0, img_rng));
  for (const Tensor3& d : pass.pattern)
    for (double v : d.data()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(score_conv(net, pass), 0.0);
}

TEST(Forward, EntryZeroIsTheImage) {
  SeededRng rng(4);
  const Network net = random_network({}, rng);
  const Tensor3 img = random_image(net.input, 1.0, rng);
  EXPECT_EQ(forward(net, img).features[0], img);
}

TEST(Forward, ShapeMismatchThrows) {
  const Network net = single_layer({1, 3, 3}, 1, 2, 2, 1, 1.0, 0.0);
  EXPECT_THROW(forward(net, Tensor3({1, 4, 3})), DimensionError);
}

TEST(Forward, ValidConvolutionExtent) {
  EXPECT_EQ(output_extent(64, 7, 3), 20);
  EXPECT_EQ(output_extent(3, 2, 1), 2);
  EXPECT_EQ(output_extent(4, 5, 1), 0);
  EXPECT_EQ(output_extent(224, 15, 3), 70);
}

TEST(Forward, ReluFactorizationIsExact) {
  SeededRng rng(21);
  for (int t = 0; t < 30; ++t) {
    const Network net = random_network({}, rng);
    const ForwardPass pass = forward(net, random_image(net.input, 1.0, rng));
    for (std::size_t l = 0; l < net.depth(); ++l) {
      const Tensor3& pre = pass.pre_activations[l];
      for (std::size_t i = 0; i < pre.size(); ++i) {
        const double d = pass.pattern[l][i];
        ASSERT_TRUE(d == 0.0 || d == 1.0);
        ASSERT_EQ(d, pre[i] > 0.0 ? 1.0 : 0.0);
        ASSERT_EQ(pass.features[l + 1][i], d * pre[i]);
      }
    }
  }
}

TEST(Score, ZeroParameterNetScoresZero) {
  const Network net = single_layer({1, 5, 5}, 2, 3, 3, 1, 0.0, 0.0);
  SeededRng rng(8);
  EXPECT_EQ(score_conv(net, random_image(net.input, 3.0, rng)), 0.0);
}

TEST(Score, TopFilterOrderDoesNotMatter) {
  SeededRng rng(31);
  RandomNetOptions opt;
  opt.min_depth = 2;
  opt.max_depth = 2;
  for (int t = 0; t < 10; ++t) {
    const Network net = random_network(opt, rng);
    Network swapped = net;
    LayerSpec& top = swapped.layers.back();
    const std::size_t per = top.kernel_size();
    for (int k = 0; k < top.num_filters / 2; ++k) {
      const int j = top.num_filters - 1 - k;
      std::swap_ranges(top.weights.begin() + k * per, top.weights.begin() + (k + 1) * per,
                       top.weights.begin() + j * per);
      std::swap(top.biases[k], top.biases[j]);
    }
    const Tensor3 img = random_image(net.input, 1.0, rng);
    EXPECT_NEAR(score_conv(net, img), score_conv(swapped, img), 1e-12 * (1.0 + std::abs(score_conv(net, img))));
  }
}

TEST(Score, PiecewiseLinearWithinOnePiece) {
  SeededRng rng(41);
  int checked = 0;
  for (int t = 0; t < 20; ++t) {
    const Network net = random_network({}, rng);
    const Tensor3 a = random_image(net.input, 1.0, rng);
    const auto b = perturb_within_piece(net, a, random_image(net.input, 1.0, rng), 0.5);
    if (!b) continue;
    const ForwardPass pa = forward(net, a);
    for (double s : {0.1, 0.5, 0.9}) {
      const Tensor3 mid = s * a + (1.0 - s) * *b;
      if (!same_pattern(forward(net, mid).pattern, pa.pattern)) continue;
      const double want = s * score_conv(net, a) + (1.0 - s) * score_conv(net, *b);
      EXPECT_LE(std::abs(score_conv(net, mid) - want), 1e-8 * std::max(1.0, std::abs(want)));
      ++checked;
    }
  }
  EXPECT_GT(checked, 30);
}

TEST(Score, PositivelyHomogeneousWithoutBiases) {
  SeededRng rng(51);
  RandomNetOptions opt;
  opt.bias_std = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Network net = random_network(opt, rng);
    const Tensor3 img = random_image(net.input, 1.0, rng);
    const double f = score_conv(net, img);
    for (double c : {0.25, 3.0, 17.0}) {
      const double fc = score_conv(net, c * img);
      EXPECT_LE(std::abs(fc - c * f), 1e-9 * std::max(std::abs(c * f), 1e-12));
    }
  }
}

Network heads_net(SeededRng& rng, int categories) {
  ArchSpec arch{{1, 4, 4}, {{2, 3, 3, 1}, {3, 2, 2, 1}}};
  Network net = init_network(arch, 0.5, rng);
  for (double& b : net.layers[0].biases) b = 0.1 * rng.normal();
  net.top_mode = TopMode::kCategoryHeads;
  net.heads.num_categories = categories;
  net.heads.weights.resize(static_cast<std::size_t>(categories) * 3);
  for (double& w : net.heads.weights) w = rng.normal();
  net.heads.biases.assign(categories, 0.0);
  net.validate();
  return net;
}

TEST(ScoreCategory, ZeroRowScoresZero) {
  SeededRng rng(61);
  Network net = heads_net(rng, 2);
  std::fill(net.heads.weights.begin(), net.heads.weights.begin() + 3, 0.0);
  EXPECT_EQ(score_category(net, random_image(net.input, 1.0, rng), 0), 0.0);
}

TEST(ScoreCategory, UnitRowEqualsConvSum) {
  SeededRng rng(62);
  Network net = heads_net(rng, 1);
  std::fill(net.heads.weights.begin(), net.heads.weights.end(), 1.0);
  Network plain = net;
  plain.top_mode = TopMode::kConvSum;
  plain.heads = {};
  for (int t = 0; t < 5; ++t) {
    const Tensor3 img = random_image(net.input, 1.0, rng);
    EXPECT_NEAR(score_category(net, img, 0), score_conv(plain, img), 1e-12);
  }
}

TEST(ScoreCategory, MatchesDotProductOfTopResponses) {
  SeededRng rng(63);
  const Network net = heads_net(rng, 3);
  const Tensor3 img = random_image(net.input, 1.0, rng);
  const Tensor3 top = forward(net, img).features.back();
  for (int c = 0; c < 3; ++c) {
    double want = 0.0;
    for (int k = 0; k < 3; ++k) want += net.heads.weights[c * 3 + k] * top(k, 0, 0);
    EXPECT_NEAR(score_category(net, img, c), want, 1e-12);
    EXPECT_NEAR(reference::category_scores(net, img)[c], want, 1e-12);
  }
}

TEST(ScoreCategory, NeedsOneByOneTop) {
  SeededRng rng(64);
  Network net = single_layer({1, 4, 4}, 2, 2, 2, 1, 0.3, 0.0);
  net.top_mode = TopMode::kCategoryHeads;
  net.heads = {1, {1.0, 1.0}, {0.0}};
  EXPECT_THROW(score_category(net, Tensor3({1, 4, 4}, 1.0), 0), DimensionError);
}

TEST(Softmax, HandCases) {
  const std::vector<double> zero{0.0, 0.0, 0.0};
  for (double p : softmax_posterior(std::vector<double>{2.0, 2.0, 2.0}, zero)) EXPECT_NEAR(p, 1.0 / 3.0, 1e-15);
  const auto p = softmax_posterior(std::vector<double>{0.0, std::log(3.0)}, std::vector<double>{0.0, 0.0});
  EXPECT_NEAR(p[0], 0.25, 1e-15);
  EXPECT_NEAR(p[1], 0.75, 1e-15);
}

TEST(Softmax, ShiftInvariantAndOverflowSafe) {
  const std::vector<double> f{0.3, -1.2, 2.0};
  const std::vector<double> b{0.1, 0.5, -0.4};
  const auto p = softmax_posterior(f, b);
  const auto q = softmax_posterior(std::vector<double>{1000.3, 998.8, 1002.0}, b);
  EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-12);
  for (int c = 0; c < 3; ++c) {
    EXPECT_GT(q[c], 0.0);
    EXPECT_NEAR(p[c], q[c], 1e-12);
  }
  EXPECT_THROW(softmax_posterior(f, std::vector<double>{0.0}), DimensionError);
}

TEST(InitNetwork, ZeroStdGivesZeroWeights) {
  SeededRng rng(1);
  const Network net = init_network({{1, 16, 16}, {{4, 5, 5, 2}, {3, 3, 3, 1}}}, 0.0, rng);
  for (const LayerSpec& l : net.layers) {
    for (double w : l.weights) EXPECT_EQ(w, 0.0);
    for (double b : l.biases) EXPECT_EQ(b, 0.0);
  }
}

TEST(InitNetwork, ReproducibleFromSeed) {
  const ArchSpec arch{{3, 16, 16}, {{4, 5, 5, 2}, {3, 3, 3, 1}}};
  SeededRng a(77);
  SeededRng b(77);
  EXPECT_EQ(init_network(arch, 0.01, a), init_network(arch, 0.01, b));
}

TEST(InitNetwork, WeightStandardDeviation) {
  // 100 filters of 1000 weights each.
  const ArchSpec arch{{10, 10, 10}, {{100, 10, 10, 1}}};
  SeededRng rng(2025);
  const Network net = init_network(arch, 0.01, rng);
  const auto& w = net.layers[0].weights;
  ASSERT_EQ(w.size(), 100000u);
  double sum = 0.0;
  double sq = 0.0;
  for (double v : w) {
    sum += v;
    sq += v * v;
  }
  const double n = static_cast<double>(w.size());
  const double sd = std::sqrt(sq / n - (sum / n) * (sum / n));
  EXPECT_GE(sd, 0.0095);
  EXPECT_LE(sd, 0.0105);
  for (double b : net.layers[0].biases) EXPECT_EQ(b, 0.0);
}

TEST(InitNetwork, FullyConnectedTopCoversTheMap) {
  SeededRng rng(3);
  const Network net = init_network({{1, 48, 48}, {{8, 7, 7, 2}, {6, 5, 5, 1}}, true}, 0.01, rng);
  ASSERT_EQ(net.depth(), 3u);
  EXPECT_EQ(net.feature_shape(3), (Shape3{1, 1, 1}));
  EXPECT_EQ(net.layers[2].kernel_h, net.feature_shape(2).height);
}

TEST(InitNetwork, RejectsKernelLargerThanInput) {
  SeededRng rng(3);
  EXPECT_THROW(init_network({{1, 4, 4}, {{1, 5, 5, 1}}}, 0.01, rng), DimensionError);
}

}  // namespace
}  // namespace genconv
