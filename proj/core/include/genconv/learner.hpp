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

#ifndef GENCONV_LEARNER_HPP_
#define GENCONV_LEARNER_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "genconv/net.hpp"
#include "genconv/sampler.hpp"
#include "genconv/tensor.hpp"

namespace genconv {

/// Training produced a non-finite parameter or chain value.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LayerGrad {
  std::vector<double> weights;
  std::vector<double> biases;
};

/// Gradient with respect to every weight and bias, laid out like Network.
struct ParamGrad {
  std::vector<LayerGrad> layers;

  static ParamGrad zeros_like(const Network& net);
  std::size_t size() const;
  /// Flat view in layer order, weights before biases within a layer.
  std::vector<double> flat() const;
  double mean_abs() const;

  ParamGrad& operator+=(const ParamGrad& other);
  ParamGrad& operator-=(const ParamGrad& other);
  ParamGrad& operator*=(double s);
  friend ParamGrad operator-(ParamGrad a, const ParamGrad& b) { return a -= b; }
};

/// d f(I; w) / d w for the conv-sum score, with ReLU gates held at the forward
/// activation pattern.
ParamGrad grad_params(const Network& net, const Tensor3& image);

/// Mean of grad_params over `images`, reduced in index order.
ParamGrad mean_grad_params(const Network& net, std::span<const Tensor3> images, std::size_t workers = 1);

/// w <- w + learning_rate * scale[l] * step. Missing scales default to 1.
void apply_update(Network& net, const ParamGrad& step, double learning_rate,
                  std::span<const double> layer_scale = {});

/// Copy of the flat parameter vector, in the same order as ParamGrad::flat().
std::vector<double> flat_parameters(const Network& net);
void set_flat_parameters(Network& net, std::span<const double> values);

/// sigma^2 * B_{w, delta(I)}: bottom-up encode then top-down decode.
Tensor3 reconstruct(const Network& net, const Tensor3& image);
/// ||I - reconstruct(I)|| / sqrt(|D|)
double reconstruction_rmse(const Network& net, const Tensor3& image);

enum class TrainMode { kMle, kCd };

/// One growth stage trains the first `depth` layers for `iterations` steps.
struct GrowthStage {
  std::size_t depth = 1;
  int iterations = 1;
};

struct TrainConfig {
  int num_chains = 16;
  int langevin_steps = 10;
  /// Used when `growth` is empty: all layers trained together.
  int iterations = 700;
  double epsilon = 0.3;
  double learning_rate = 0.01;
  double init_std = 0.01;
  TrainMode mode = TrainMode::kMle;
  std::vector<GrowthStage> growth;
  /// The last layer of the network is a single filter covering the whole map
  /// below it. During growth it is rebuilt for every stage.
  bool fully_connected_top = false;
  std::vector<double> layer_lr_scale;
  std::uint64_t seed = 1;
  std::size_t workers = 1;

  void validate() const;
};

/// Splits `total_iterations` over depths 1..num_layers as evenly as possible,
/// earlier stages taking the remainder.
std::vector<GrowthStage> sequential_growth(std::size_t num_layers, int total_iterations);

/// Sub-stream identifiers below 2^32 are reserved for chain indices.
inline constexpr std::uint64_t kInitStream = std::uint64_t{1} << 32;
inline constexpr std::uint64_t kGrowthStream = std::uint64_t{1} << 33;
inline constexpr std::uint64_t kContrastiveStream = std::uint64_t{1} << 34;

struct StepStats {
  ParamGrad h_obs;
  ParamGrad h_syn;
  double grad_norm = 0.0;    // mean |H_obs - H_syn|
  double mean_energy = 0.0;  // over synthesized images
};

/// One iteration of maximum-likelihood learning: advance every chain by
/// `langevin_steps`, then w <- w + eta (H_obs - H_syn).
StepStats mle_step(Network& net, std::span<const Tensor3> observed, std::span<ChainState> chains,
                   const TrainConfig& config);

/// One iteration of contrastive divergence. Each chain m is restarted at
/// observed[m] and advanced `langevin_steps`; chains[m].image holds the
/// synthesized image afterwards.
StepStats cd_step(Network& net, std::span<const Tensor3> observed, std::span<ChainState> chains,
                  const TrainConfig& config);

struct HistoryRecord {
  int iteration = 0;  // 1-based, counted across stages
  std::size_t depth = 0;
  double grad_norm = 0.0;
  double mean_energy = 0.0;
  std::optional<double> recon_rmse;  // contrastive divergence only
};

struct TrainResult {
  Network net;
  std::vector<Tensor3> synthesized;
  std::vector<HistoryRecord> history;
};

using HistoryCallback = std::function<void(const HistoryRecord&)>;

/// Learning and sampling. In MLE mode the chains start at zero images and
/// persist across iterations and growth stages; in CD mode every iteration
/// restarts from the observed images.
TrainResult train(const Network& net0, std::span<const Tensor3> images, const TrainConfig& config,
                  const HistoryCallback& on_iteration = {});

}  // namespace genconv

#endif  // GENCONV_LEARNER_HPP_
