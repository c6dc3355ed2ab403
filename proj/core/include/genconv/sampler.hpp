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

#ifndef GENCONV_SAMPLER_HPP_
#define GENCONV_SAMPLER_HPP_

#include <cstdint>
#include <span>

#include "genconv/net.hpp"
#include "genconv/rng.hpp"
#include "genconv/tensor.hpp"

namespace genconv {

struct LangevinConfig {
  double epsilon = 0.3;
  int steps = 10;

  void validate() const;
};

/// One persistent Langevin chain. The rng is owned by the chain and never
/// shared.
struct ChainState {
  Tensor3 image;
  std::int64_t step_count = 0;
  SeededRng rng;
};

/// Chain i of a run seeded with `master_seed` starts at `start` and draws from
/// the stream master_seed ^ i.
ChainState make_chain(const Tensor3& start, std::uint64_t master_seed, std::uint64_t index);

/// Gradient of the energy: I / sigma^2 - B_{w, delta(I)}. This is the
/// auto-encoding reconstruction error that drives the dynamics.
Tensor3 energy_gradient(const Network& net, const Tensor3& image);

/// Noise-free update I - (eps^2 / 2) (I / sigma^2 - B).
Tensor3 drift_step(const Network& net, const Tensor3& image, double epsilon);

/// I - (eps^2 / 2) (I / sigma^2 - B) + eps Z, Z ~ N(0, 1) per pixel.
/// epsilon == 0 returns the image unchanged and draws nothing.
Tensor3 langevin_step(const Network& net, const Tensor3& image, double epsilon, SeededRng& rng);

/// Applies `config.steps` Langevin steps to the chain in place.
void langevin_run(const Network& net, ChainState& chain, const LangevinConfig& config);

/// Runs every chain; chains are independent so the schedule does not affect
/// the outcome.
void langevin_run_all(const Network& net, std::span<ChainState> chains, const LangevinConfig& config,
                      std::size_t workers = 1);

struct DescentResult {
  Tensor3 image;
  bool converged = false;
  int steps = 0;
};

/// Deterministic attractor dynamics: repeats drift_step until both the largest
/// per-pixel change and the residual max|I/sigma^2 - B| drop below `tol`, or
/// `max_steps` is reached.
DescentResult descend(const Network& net, const Tensor3& image, double epsilon, int max_steps,
                      double tol = 1e-8);

}  // namespace genconv

#endif  // GENCONV_SAMPLER_HPP_
