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

#ifndef GENCONV_ORACLE_HPP_
#define GENCONV_ORACLE_HPP_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "genconv/learner.hpp"
#include "genconv/net.hpp"
#include "genconv/prototype.hpp"
#include "genconv/tensor.hpp"

namespace genconv {

/// A finite image space: every pixel takes one of `levels`. Index j maps to
/// the image whose pixel p (storage order) has level (j / n^p) mod n, with
/// n = levels.size().
struct DiscreteImageSpace {
  Shape3 shape{1, 2, 2};
  std::vector<double> levels{-1.0, -0.5, 0.0, 0.5, 1.0};

  static constexpr std::size_t kMaxStates = 1'000'000;

  std::size_t count() const;
  Tensor3 image(std::size_t index) const;
  void validate() const;
};

/// `count` evenly spaced levels from lo to hi inclusive.
std::vector<double> uniform_levels(double lo, double hi, int count);

namespace reference {

/// Dense-matrix re-implementation of the network used by the oracles. Every
/// layer is materialized as an explicit (outputs x inputs) matrix; nothing is
/// shared with the convolution, deconvolution or gradient code it certifies.
double score(const Network& net, const Tensor3& image);
std::vector<double> category_scores(const Network& net, const Tensor3& image);
ActivationPattern pattern(const Network& net, const Tensor3& image);
/// B for a fixed pattern, computed as M_1^T D_1 M_2^T D_2 ... M_L^T D_L 1.
Tensor3 basis(const Network& net, const ActivationPattern& pattern);
/// df/dw in ParamGrad::flat() order.
std::vector<double> param_grad(const Network& net, const Tensor3& image);

}  // namespace reference

/// log of sum_I exp(score(I)) q(I) over the grid, q being the Gaussian
/// N(0, sigma_sq) density renormalized over the grid points. Log-sum-exp
/// stabilized.
double log_partition(const DiscreteImageSpace& space, double sigma_sq,
                     const std::function<double(const Tensor3&)>& score);

/// Z = E_q exp(f_c) on the grid. `category` is ignored for conv-sum networks.
double partition_brute(const Network& net, int category, const DiscreteImageSpace& space);

/// Grid-normalized model probabilities p(I; w) for every grid index.
std::vector<double> model_probabilities(const Network& net, const DiscreteImageSpace& space);

/// E_p[df/dw] under the grid-normalized model.
ParamGrad model_expectation_grad(const Network& net, const DiscreteImageSpace& space);

/// (1/M) sum_m df(I_m)/dw - E_p[df/dw], the exact log-likelihood gradient on
/// the grid.
ParamGrad loglik_grad_exact(const Network& net, std::span<const Tensor3> images, const DiscreteImageSpace& space);

/// Mean score of `images` minus log Z: the grid log-likelihood up to the
/// w-independent reference term.
double loglik_exact(const Network& net, std::span<const Tensor3> images, const DiscreteImageSpace& space);

struct CategoryModel {
  Network net;  // TopMode::kCategoryHeads
  std::vector<double> priors;

  void validate() const;
};

struct CheckReport {
  std::string name;
  double max_abs_deviation = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string note;

  /// One-line JSON object: name, max_abs_deviation, tolerance, pass, note.
  std::string to_json() const;
};

/// Generative/discriminative equivalence on the grid:
///  (a) posteriors from the class-conditional densities equal the softmax with
///      b_c = log rho_c - log Z_c;
///  (b) with category 0 as the reference category (f_0 = 0, b_0 = 0), the
///      softmax with b_c = log rho_c - log rho_0 - log Z_c implies the
///      class-conditional densities exp(f_c) q / Z_c.
std::vector<CheckReport> check_posterior_identity(const CategoryModel& model, const DiscreteImageSpace& space,
                                     double tolerance = 1e-10);

struct RandomNetOptions {
  int min_depth = 1;
  int max_depth = 3;
  int min_extent = 6;
  int max_extent = 32;
  int max_channels = 2;
  int max_filters = 4;
  int max_kernel = 5;
  int max_stride = 2;
  double bias_std = 0.1;
  // Non-negative weights above the first layer make the score convex.
  bool nonnegative_upper = false;
};

/// Random dimension-consistent conv-sum network with He-scaled Gaussian
/// weights.
Network random_network(const RandomNetOptions& options, SeededRng& rng);
Tensor3 random_image(Shape3 shape, double scale, SeededRng& rng);

/// Linearization identity |f - (alpha + <I, B>)| / (1 + |f|) and the agreement
/// of top_down with grad_score, over `trials` random images.
std::vector<CheckReport> check_linearization(const Network& net, int trials, std::uint64_t seed,
                                             double image_scale = 1.0);

/// Piecewise-Gaussian structure: U(I) - ||I - sigma^2 B||^2 / (2 sigma^2) is
/// constant over in-piece probes, and second differences of U along unit
/// directions equal 1 / sigma^2.
std::vector<CheckReport> check_piecewise_gaussian(const Network& net, int trials, int probes_per_trial,
                                        std::uint64_t seed, double image_scale = 1.0);

struct DescentOptions {
  double epsilon = 0.3;
  int max_steps = 20000;
  double tol = 1e-8;
};

/// Local modes auto-encode: every descent endpoint satisfies
/// ||I - sigma^2 B_{w, delta(I)}||_inf <= tolerance.
CheckReport check_mode_autoencoding(const Network& net, std::span<const Tensor3> starts, const DescentOptions& options = {},
                        double tolerance = 1e-6);
CheckReport check_mode_autoencoding(const Network& net, int starts, std::uint64_t seed, const DescentOptions& options = {},
                        double tolerance = 1e-6, double start_scale = 1.0);

struct CdGradientResult {
  CheckReport report;
  double epsilon = 0.0;
  std::vector<double> empirical_mean;
  std::vector<double> standard_error;
  std::vector<double> expected;
};

/// One-step CD gradient versus the reconstruction gradient. epsilon is halved
/// from `initial_epsilon` until none of the `draws` one-step samples leaves
/// the activation pattern of `image`. The deviation is reported in standard
/// errors.
CdGradientResult check_cd_gradient(const Network& net, const Tensor3& image, int draws, std::uint64_t seed,
                        double initial_epsilon = 0.3, double tolerance_se = 3.0);

/// grad_params against central differences of the reference score at
/// `points` random images.
CheckReport check_param_grad(const Network& net, int points, std::uint64_t seed, double image_scale = 1.0,
                             double tolerance = 1e-5);

/// loglik_grad_exact against central differences of loglik_exact.
CheckReport check_loglik_grad(const Network& net, std::span<const Tensor3> images, const DiscreteImageSpace& space,
                              double tolerance = 1e-6);

/// Synthesis statistics of one mle_step (chains started at 0) against the
/// exact model expectation summed over `fine`. Deviation is in standard
/// errors of the chain average.
CheckReport check_mle_expectation(const Network& net, const DiscreteImageSpace& fine, int chains, int steps,
                                  double epsilon, std::uint64_t seed, double tolerance_se = 3.0);

/// Exact auto-encoding of every in-piece mean, and noise-free descent from
/// random starts ending on one of them.
std::vector<CheckReport> check_prototype(const PrototypeModel& model, int starts, std::uint64_t seed,
                                         const DescentOptions& options = {}, double tolerance = 1e-6);

}  // namespace genconv

#endif  // GENCONV_ORACLE_HPP_
