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

#include "genconv/sampler.hpp"

#include <limits>

#include "genconv/linearize.hpp"
#include "genconv/parallel.hpp"

namespace genconv {

void LangevinConfig::validate() const {
  if (!(epsilon >= 0.0)) throw ParameterError("Langevin epsilon must be non-negative");
  if (steps < 0) throw ParameterError("Langevin steps must be non-negative");
}

ChainState make_chain(const Tensor3& start, std::uint64_t master_seed, std::uint64_t index) {
  return ChainState{start, 0, SeededRng(master_seed).split(index)};
}

Tensor3 energy_gradient(const Network& net, const Tensor3& image) {
  const ForwardPass pass = forward(net, image);
  Tensor3 grad = image;
  grad *= 1.0 / net.sigma_sq;
  grad -= top_down(net, pass.pattern).basis;
  return grad;
}

Tensor3 drift_step(const Network& net, const Tensor3& image, double epsilon) {
  Tensor3 next = image;
  next.axpy(-0.5 * epsilon * epsilon, energy_gradient(net, image));
  return next;
}

Tensor3 langevin_step(const Network& net, const Tensor3& image, double epsilon, SeededRng& rng) {
  if (epsilon < 0.0) throw ParameterError("langevin_step: epsilon must be non-negative");
  if (epsilon == 0.0) return image;
  Tensor3 next = drift_step(net, image, epsilon);
  for (double& v : next.data()) v += epsilon * rng.normal();
  return next;
}

void langevin_run(const Network& net, ChainState& chain, const LangevinConfig& config) {
  config.validate();
  for (int s = 0; s < config.steps; ++s) {
    chain.image = langevin_step(net, chain.image, config.epsilon, chain.rng);
    ++chain.step_count;
  }
}

void langevin_run_all(const Network& net, std::span<ChainState> chains, const LangevinConfig& config,
                      std::size_t workers) {
  parallel_for(chains.size(), workers, [&](std::size_t i) { langevin_run(net, chains[i], config); });
}

DescentResult descend(const Network& net, const Tensor3& image, double epsilon, int max_steps, double tol) {
  if (!(tol > 0.0)) throw ParameterError("descend: tol must be positive");
  if (!(epsilon > 0.0)) throw ParameterError("descend: epsilon must be positive");
  DescentResult result{image, false, 0};
  const double rate = 0.5 * epsilon * epsilon;
  double change = std::numeric_limits<double>::infinity();
  while (true) {
    // energy_gradient is I/sigma^2 - B, so it doubles as the mode residual.
    const Tensor3 grad = energy_gradient(net, result.image);
    if (change < tol && max_abs(grad) < tol) {
      result.converged = true;
      break;
    }
    if (result.steps >= max_steps) break;
    Tensor3 next = result.image;
    next.axpy(-rate, grad);
    change = max_abs_diff(next, result.image);
    result.image = std::move(next);
    ++result.steps;
  }
  return result;
}

}  // namespace genconv
