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

#include "genconv/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include <json.hpp>

#include "genconv/learner.hpp"
#include "genconv/linearize.hpp"
#include "genconv/prototype.hpp"
#include "genconv/sampler.hpp"

namespace genconv {

std::size_t DiscreteImageSpace::count() const {
  std::size_t n = 1;
  const std::size_t base = levels.size();
  for (std::size_t p = 0; p < shape.size(); ++p) {
    if (n > kMaxStates) return n;
    n *= base;
  }
  return n;
}

void DiscreteImageSpace::validate() const {
  if (!shape.valid()) throw DimensionError("discrete image space needs a positive shape");
  if (levels.empty()) throw ParameterError("discrete image space needs at least one level");
  if (count() > kMaxStates) {
    throw ParameterError("discrete image space has more than " + std::to_string(kMaxStates) + " states");
  }
}

Tensor3 DiscreteImageSpace::image(std::size_t index) const {
  Tensor3 img(shape);
  const std::size_t base = levels.size();
  for (std::size_t p = 0; p < img.size(); ++p) {
    img[p] = levels[index % base];
    index /= base;
  }
  return img;
}

std::vector<double> uniform_levels(double lo, double hi, int count) {
  if (count < 1) throw ParameterError("uniform_levels: count must be >= 1");
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    out[j] = count == 1 ? lo : lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(count - 1);
  }
  return out;
}

namespace reference {
namespace {

struct DenseLayer {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> matrix;         // rows x cols, row-major
  std::vector<std::int64_t> source;   // kernel weight index per matrix entry, -1 if structurally zero
  std::vector<double> bias;           // per row
  std::vector<int> bias_source;       // filter index per row
};

DenseLayer densify(const LayerSpec& layer, Shape3 in, Shape3 out) {
  DenseLayer d;
  d.rows = out.size();
  d.cols = in.size();
  d.matrix.assign(d.rows * d.cols, 0.0);
  d.source.assign(d.rows * d.cols, -1);
  d.bias.resize(d.rows);
  d.bias_source.resize(d.rows);
  for (int k = 0; k < out.channels; ++k) {
    for (int oy = 0; oy < out.height; ++oy) {
      for (int ox = 0; ox < out.width; ++ox) {
        const std::size_t r = (static_cast<std::size_t>(k) * out.height + oy) * out.width + ox;
        d.bias[r] = layer.biases[k];
        d.bias_source[r] = k;
        for (int i = 0; i < in.channels; ++i) {
          for (int ky = 0; ky < layer.kernel_h; ++ky) {
            for (int kx = 0; kx < layer.kernel_w; ++kx) {
              const std::size_t c = (static_cast<std::size_t>(i) * in.height + oy * layer.stride + ky) * in.width +
                                    ox * layer.stride + kx;
              const std::size_t w = layer.weight_index(k, i, ky, kx);
              d.matrix[r * d.cols + c] = layer.weights[w];
              d.source[r * d.cols + c] = static_cast<std::int64_t>(w);
            }
          }
        }
      }
    }
  }
  return d;
}

class DenseNetwork {
 public:
  explicit DenseNetwork(const Network& net) : net_(net) {
    net.validate();
    for (std::size_t l = 0; l < net.depth(); ++l) {
      layers_.push_back(densify(net.layers[l], net.feature_shape(l), net.feature_shape(l + 1)));
    }
  }

  // Pre-activations z_1..z_L and activations a_0..a_L.
  void run(const Tensor3& image, std::vector<std::vector<double>>& z, std::vector<std::vector<double>>& a) const {
    if (image.shape() != net_.input) throw DimensionError("reference: image shape mismatch");
    z.assign(layers_.size(), {});
    a.assign(layers_.size() + 1, {});
    a[0].assign(image.data().begin(), image.data().end());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      const DenseLayer& d = layers_[l];
      z[l].assign(d.rows, 0.0);
      a[l + 1].assign(d.rows, 0.0);
      for (std::size_t r = 0; r < d.rows; ++r) {
        double acc = 0.0;
        const double* row = &d.matrix[r * d.cols];
        for (std::size_t c = 0; c < d.cols; ++c) acc += row[c] * a[l][c];
        acc += d.bias[r];
        z[l][r] = acc;
        a[l + 1][r] = acc > 0.0 ? acc : 0.0;
      }
    }
  }

  double score(const Tensor3& image) const {
    std::vector<std::vector<double>> z, a;
    run(image, z, a);
    double s = 0.0;
    for (double v : a.back()) s += v;
    return s;
  }

  std::vector<double> category_scores(const Tensor3& image) const {
    std::vector<std::vector<double>> z, a;
    run(image, z, a);
    const std::vector<double>& top = a.back();
    const CategoryHeads& heads = net_.heads;
    std::vector<double> out(static_cast<std::size_t>(heads.num_categories), 0.0);
    for (int c = 0; c < heads.num_categories; ++c) {
      for (std::size_t k = 0; k < top.size(); ++k) out[c] += heads.weights[c * top.size() + k] * top[k];
    }
    return out;
  }

  // g <- M^T (g * gate)
  std::vector<double> pull_back(std::size_t l, const std::vector<double>& gated) const {
    const DenseLayer& d = layers_[l];
    std::vector<double> below(d.cols, 0.0);
    for (std::size_t r = 0; r < d.rows; ++r) {
      if (gated[r] == 0.0) continue;
      const double* row = &d.matrix[r * d.cols];
      for (std::size_t c = 0; c < d.cols; ++c) below[c] += row[c] * gated[r];
    }
    return below;
  }

  Tensor3 basis(const ActivationPattern& pattern) const {
    if (pattern.size() != layers_.size()) throw DimensionError("reference::basis: pattern depth mismatch");
    std::vector<double> g(layers_.empty() ? net_.input.size() : layers_.back().rows, 1.0);
    for (std::size_t l = layers_.size(); l > 0; --l) {
      const Tensor3& delta = pattern[l - 1];
      if (delta.size() != g.size()) throw DimensionError("reference::basis: pattern shape mismatch");
      for (std::size_t r = 0; r < g.size(); ++r) g[r] *= delta[r];
      g = pull_back(l - 1, g);
    }
    return Tensor3(net_.input, std::move(g));
  }

  std::vector<double> param_grad(const Tensor3& image) const {
    std::vector<std::vector<double>> z, a;
    run(image, z, a);
    std::vector<std::vector<double>> weight_grads(layers_.size());
    std::vector<std::vector<double>> bias_grads(layers_.size());
    std::vector<double> g(a.back().size(), 1.0);
    for (std::size_t l = layers_.size(); l > 0; --l) {
      const DenseLayer& d = layers_[l - 1];
      const LayerSpec& spec = net_.layers[l - 1];
      std::vector<double> gz(d.rows);
      for (std::size_t r = 0; r < d.rows; ++r) gz[r] = z[l - 1][r] > 0.0 ? g[r] : 0.0;
      // dL/dM = gz a^T, folded back onto the shared kernel entries.
      std::vector<double>& dw = weight_grads[l - 1];
      std::vector<double>& db = bias_grads[l - 1];
      dw.assign(spec.weights.size(), 0.0);
      db.assign(spec.biases.size(), 0.0);
      for (std::size_t r = 0; r < d.rows; ++r) {
        db[d.bias_source[r]] += gz[r];
        for (std::size_t c = 0; c < d.cols; ++c) {
          const std::int64_t src = d.source[r * d.cols + c];
          if (src >= 0) dw[static_cast<std::size_t>(src)] += gz[r] * a[l - 1][c];
        }
      }
      g = pull_back(l - 1, gz);
    }
    std::vector<double> flat;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      flat.insert(flat.end(), weight_grads[l].begin(), weight_grads[l].end());
      flat.insert(flat.end(), bias_grads[l].begin(), bias_grads[l].end());
    }
    return flat;
  }

  ActivationPattern pattern(const Tensor3& image) const {
    std::vector<std::vector<double>> z, a;
    run(image, z, a);
    ActivationPattern out;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      Tensor3 delta(net_.feature_shape(l + 1));
      for (std::size_t r = 0; r < delta.size(); ++r) delta[r] = z[l][r] > 0.0 ? 1.0 : 0.0;
      out.push_back(std::move(delta));
    }
    return out;
  }

 private:
  const Network& net_;
  std::vector<DenseLayer> layers_;
};

}  // namespace

double score(const Network& net, const Tensor3& image) { return DenseNetwork(net).score(image); }
std::vector<double> category_scores(const Network& net, const Tensor3& image) {
  return DenseNetwork(net).category_scores(image);
}
ActivationPattern pattern(const Network& net, const Tensor3& image) { return DenseNetwork(net).pattern(image); }
Tensor3 basis(const Network& net, const ActivationPattern& p) { return DenseNetwork(net).basis(p); }
std::vector<double> param_grad(const Network& net, const Tensor3& image) {
  return DenseNetwork(net).param_grad(image);
}

}  // namespace reference

namespace {

double log_sum_exp(std::span<const double> values) {
  double top = -std::numeric_limits<double>::infinity();
  for (double v : values) top = std::max(top, v);
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - top);
  return top + std::log(acc);
}

// -||I||^2 / (2 sigma^2) for every grid image.
std::vector<double> log_reference_weights(const DiscreteImageSpace& space, double sigma_sq) {
  space.validate();
  std::vector<double> out(space.count());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = -sq_norm(space.image(j)) / (2.0 * sigma_sq);
  return out;
}

std::vector<double> scores_on_grid(const DiscreteImageSpace& space,
                                   const std::function<double(const Tensor3&)>& score) {
  std::vector<double> out(space.count());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = score(space.image(j));
  return out;
}

}  // namespace

double log_partition(const DiscreteImageSpace& space, double sigma_sq,
                     const std::function<double(const Tensor3&)>& score) {
  const std::vector<double> log_q = log_reference_weights(space, sigma_sq);
  const std::vector<double> f = scores_on_grid(space, score);
  std::vector<double> tilted(f.size());
  for (std::size_t j = 0; j < f.size(); ++j) tilted[j] = f[j] + log_q[j];
  return log_sum_exp(tilted) - log_sum_exp(log_q);
}

double partition_brute(const Network& net, int category, const DiscreteImageSpace& space) {
  const reference::DenseNetwork dense(net);
  if (net.top_mode == TopMode::kCategoryHeads) {
    if (category < 0 || category >= net.heads.num_categories) throw ParameterError("category out of range");
    return std::exp(log_partition(space, net.sigma_sq, [&](const Tensor3& img) {
      return dense.category_scores(img)[static_cast<std::size_t>(category)];
    }));
  }
  return std::exp(log_partition(space, net.sigma_sq, [&](const Tensor3& img) { return dense.score(img); }));
}

std::vector<double> model_probabilities(const Network& net, const DiscreteImageSpace& space) {
  const reference::DenseNetwork dense(net);
  const std::vector<double> log_q = log_reference_weights(space, net.sigma_sq);
  std::vector<double> logp(log_q.size());
  for (std::size_t j = 0; j < logp.size(); ++j) logp[j] = dense.score(space.image(j)) + log_q[j];
  const double norm = log_sum_exp(logp);
  for (double& v : logp) v = std::exp(v - norm);
  return logp;
}

namespace {

ParamGrad unflatten_like(const Network& net, std::span<const double> flat) {
  ParamGrad g = ParamGrad::zeros_like(net);
  std::size_t pos = 0;
  for (LayerGrad& l : g.layers) {
    for (double& v : l.weights) v = flat[pos++];
    for (double& v : l.biases) v = flat[pos++];
  }
  return g;
}

}  // namespace

ParamGrad model_expectation_grad(const Network& net, const DiscreteImageSpace& space) {
  const reference::DenseNetwork dense(net);
  const std::vector<double> p = model_probabilities(net, space);
  std::vector<double> acc(net.num_parameters(), 0.0);
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (p[j] == 0.0) continue;
    const std::vector<double> g = dense.param_grad(space.image(j));
    for (std::size_t q = 0; q < acc.size(); ++q) acc[q] += p[j] * g[q];
  }
  return unflatten_like(net, acc);
}

ParamGrad loglik_grad_exact(const Network& net, std::span<const Tensor3> images, const DiscreteImageSpace& space) {
  if (images.empty()) throw DimensionError("loglik_grad_exact: no observed images");
  const reference::DenseNetwork dense(net);
  std::vector<double> obs(net.num_parameters(), 0.0);
  for (const Tensor3& img : images) {
    const std::vector<double> g = dense.param_grad(img);
    for (std::size_t q = 0; q < obs.size(); ++q) obs[q] += g[q];
  }
  for (double& v : obs) v /= static_cast<double>(images.size());
  ParamGrad out = unflatten_like(net, obs);
  out -= model_expectation_grad(net, space);
  return out;
}

double loglik_exact(const Network& net, std::span<const Tensor3> images, const DiscreteImageSpace& space) {
  const reference::DenseNetwork dense(net);
  double mean_f = 0.0;
  for (const Tensor3& img : images) mean_f += dense.score(img);
  mean_f /= static_cast<double>(images.size());
  return mean_f - log_partition(space, net.sigma_sq, [&](const Tensor3& img) { return dense.score(img); });
}

void CategoryModel::validate() const {
  net.validate();
  if (net.top_mode != TopMode::kCategoryHeads) throw ParameterError("category model needs category heads");
  if (priors.size() != static_cast<std::size_t>(net.heads.num_categories)) {
    throw DimensionError("category model needs one prior per category");
  }
  double total = 0.0;
  for (double r : priors) {
    if (!(r > 0.0)) throw ParameterError("category priors must be positive");
    total += r;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ParameterError("category priors must sum to 1");
}

std::string CheckReport::to_json() const {
  nlohmann::json j;
  j["name"] = name;
  j["max_abs_deviation"] = max_abs_deviation;
  j["tolerance"] = tolerance;
  j["pass"] = pass;
  if (!note.empty()) j["note"] = note;
  return j.dump();
}

std::vector<CheckReport> check_posterior_identity(const CategoryModel& model, const DiscreteImageSpace& space, double tolerance) {
  model.validate();
  space.validate();
  const Network& net = model.net;
  const reference::DenseNetwork dense(net);
  const std::size_t n = space.count();
  const std::size_t cats = model.priors.size();

  const std::vector<double> log_q_raw = log_reference_weights(space, net.sigma_sq);
  const double log_q_norm = log_sum_exp(log_q_raw);
  std::vector<std::vector<double>> f(n);
  for (std::size_t j = 0; j < n; ++j) f[j] = dense.category_scores(space.image(j));

  // Class-conditional densities p_c on the grid, normalized directly.
  std::vector<double> log_z(cats);
  std::vector<std::vector<double>> density(cats, std::vector<double>(n));
  for (std::size_t c = 0; c < cats; ++c) {
    std::vector<double> tilted(n);
    for (std::size_t j = 0; j < n; ++j) tilted[j] = f[j][c] + log_q_raw[j];
    const double norm = log_sum_exp(tilted);
    log_z[c] = norm - log_q_norm;
    for (std::size_t j = 0; j < n; ++j) density[c][j] = std::exp(tilted[j] - norm);
  }

  const std::string grid_note = "identity verified for the grid-normalized reference measure (" + std::to_string(n) +
                                " states, " + std::to_string(space.levels.size()) + " levels per pixel)";

  CheckReport a{"posterior_generative_to_discriminative", 0.0, tolerance, false, grid_note};
  std::vector<double> bias_a(cats);
  for (std::size_t c = 0; c < cats; ++c) bias_a[c] = std::log(model.priors[c]) - log_z[c];
  for (std::size_t j = 0; j < n; ++j) {
    double total = 0.0;
    std::vector<double> joint(cats);
    for (std::size_t c = 0; c < cats; ++c) {
      joint[c] = model.priors[c] * density[c][j];
      total += joint[c];
    }
    const std::vector<double> post = softmax_posterior(f[j], bias_a);
    for (std::size_t c = 0; c < cats; ++c) {
      a.max_abs_deviation = std::max(a.max_abs_deviation, std::abs(joint[c] / total - post[c]));
    }
  }
  a.pass = a.max_abs_deviation < tolerance;

  CheckReport b{"posterior_discriminative_to_generative", 0.0, tolerance, false, grid_note};
  bool reference_category_is_null = true;
  for (int k = 0; k < net.feature_shape(net.depth()).channels; ++k) {
    if (net.heads.weights[static_cast<std::size_t>(k)] != 0.0) reference_category_is_null = false;
  }
  if (!reference_category_is_null) {
    b.max_abs_deviation = std::numeric_limits<double>::infinity();
    b.note = "category 0 must have an identically zero score (all head weights zero)";
    return {a, b};
  }
  auto derived_deviation = [&](double log_z_sign) {
    std::vector<double> bias(cats);
    for (std::size_t c = 0; c < cats; ++c) {
      bias[c] = c == 0 ? 0.0 : std::log(model.priors[c]) - std::log(model.priors[0]) + log_z_sign * log_z[c];
    }
    double dev = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const std::vector<double> post = softmax_posterior(f[j], bias);
      // Category 0 is generated by q, which fixes the image marginal.
      const double q = std::exp(log_q_raw[j] - log_q_norm);
      const double marginal = model.priors[0] * q / post[0];
      for (std::size_t c = 0; c < cats; ++c) {
        dev = std::max(dev, std::abs(post[c] * marginal / model.priors[c] - density[c][j]));
      }
    }
    return dev;
  };
  b.max_abs_deviation = derived_deviation(-1.0);
  b.pass = b.max_abs_deviation < tolerance;
  const double plus_sign = derived_deviation(+1.0);
  b.note += "; b_c = log rho_c - log rho_0 - log Z_c. With +log Z_c the deviation is " + std::to_string(plus_sign);
  return {a, b};
}

namespace {

int uniform_int(SeededRng& rng, int lo, int hi) {
  if (hi <= lo) return lo;
  const int span = hi - lo + 1;
  return lo + std::min(span - 1, static_cast<int>(rng.uniform() * span));
}

Tensor3 unit_direction(Shape3 shape, SeededRng& rng) {
  Tensor3 v(shape);
  for (double& x : v.data()) x = rng.normal();
  v *= 1.0 / std::sqrt(sq_norm(v));
  return v;
}

}  // namespace

Network random_network(const RandomNetOptions& o, SeededRng& rng) {
  Network net;
  net.input = {uniform_int(rng, 1, o.max_channels), uniform_int(rng, o.min_extent, o.max_extent),
               uniform_int(rng, o.min_extent, o.max_extent)};
  const int depth = uniform_int(rng, o.min_depth, o.max_depth);
  Shape3 s = net.input;
  for (int l = 0; l < depth; ++l) {
    const int kh = uniform_int(rng, 1, std::min(o.max_kernel, s.height));
    const int kw = uniform_int(rng, 1, std::min(o.max_kernel, s.width));
    const int stride = uniform_int(rng, 1, o.max_stride);
    LayerSpec layer(uniform_int(rng, 1, o.max_filters), s.channels, kh, kw, stride);
    const double std_w = std::sqrt(2.0 / static_cast<double>(layer.kernel_size()));
    for (double& w : layer.weights) w = std_w * rng.normal();
    if (o.nonnegative_upper && l > 0)
      for (double& w : layer.weights) w = std::abs(w);
    for (double& b : layer.biases) b = o.bias_std * rng.normal();
    s = {layer.num_filters, output_extent(s.height, kh, stride), output_extent(s.width, kw, stride)};
    net.layers.push_back(std::move(layer));
  }
  net.validate();
  return net;
}

Tensor3 random_image(Shape3 shape, double scale, SeededRng& rng) {
  Tensor3 img(shape);
  for (double& v : img.data()) v = scale * rng.normal();
  return img;
}

std::vector<CheckReport> check_linearization(const Network& net, int trials, std::uint64_t seed, double image_scale) {
  SeededRng rng(seed);
  CheckReport identity{"linearization_identity", 0.0, 1e-8, false, "|f - (alpha + <I,B>)| / (1 + |f|)"};
  CheckReport two_ways{"basis_top_down_vs_backprop", 0.0, 1e-10, false, ""};
  for (int t = 0; t < trials; ++t) {
    const Tensor3 image = random_image(net.input, image_scale, rng);
    const ForwardPass pass = forward(net, image);
    const LinearPiece piece = top_down(net, pass.pattern);
    const double f = score_conv(net, pass);
    identity.max_abs_deviation = std::max(
        identity.max_abs_deviation, std::abs(f - (piece.alpha + inner_product(image, piece.basis))) / (1.0 + std::abs(f)));
    two_ways.max_abs_deviation = std::max(two_ways.max_abs_deviation, max_abs_diff(grad_score(net, image), piece.basis));
  }
  identity.pass = identity.max_abs_deviation <= identity.tolerance;
  two_ways.pass = two_ways.max_abs_deviation <= two_ways.tolerance;
  return {identity, two_ways};
}

std::vector<CheckReport> check_piecewise_gaussian(const Network& net, int trials, int probes_per_trial, std::uint64_t seed,
                                        double image_scale) {
  constexpr int kCurvatureDirections = 5;
  SeededRng rng(seed);
  const double s2 = net.sigma_sq;
  CheckReport constant{"piecewise_gaussian_constant_residual", 0.0, 1e-8, false, ""};
  CheckReport curvature{"piecewise_gaussian_unit_curvature", 0.0, 1e-4, false, ""};
  int stuck = 0;
  for (int t = 0; t < trials; ++t) {
    const Tensor3 base = random_image(net.input, image_scale, rng);
    const LinearPiece piece = top_down(net, forward(net, base).pattern);
    const Tensor3 mean = piece.basis * s2;
    auto residual = [&](const Tensor3& img) { return energy(net, img) - sq_norm(img - mean) / (2.0 * s2); };
    const double r0 = residual(base);
    double lo = r0;
    double hi = r0;
    for (int p = 0; p < probes_per_trial; ++p) {
      const Tensor3 dir = unit_direction(net.input, rng);
      const std::optional<Tensor3> probe = perturb_within_piece(net, base, dir, image_scale);
      if (!probe) {
        ++stuck;
        continue;
      }
      const double r = residual(*probe);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
    constant.max_abs_deviation = std::max(constant.max_abs_deviation, hi - lo);

    const ActivationPattern reference = forward(net, base).pattern;
    const double u0 = energy(net, base);
    for (int d = 0; d < kCurvatureDirections; ++d) {
      const Tensor3 dir = unit_direction(net.input, rng);
      double h = image_scale;
      bool found = false;
      for (int attempt = 0; attempt <= 40; ++attempt, h *= 0.5) {
        if (same_pattern(forward(net, base + dir * h).pattern, reference) &&
            same_pattern(forward(net, base - dir * h).pattern, reference)) {
          found = true;
          break;
        }
      }
      if (!found) {
        ++stuck;
        continue;
      }
      const double second = (energy(net, base + dir * h) - 2.0 * u0 + energy(net, base - dir * h)) / (h * h);
      curvature.max_abs_deviation = std::max(curvature.max_abs_deviation, std::abs(second - 1.0 / s2));
    }
  }
  constant.pass = constant.max_abs_deviation < constant.tolerance;
  curvature.pass = curvature.max_abs_deviation <= curvature.tolerance;
  if (stuck > 0) {
    const std::string note = std::to_string(stuck) + " probe(s) skipped: base image on a piece boundary";
    constant.note = note;
    curvature.note = note;
  }
  return {constant, curvature};
}

CheckReport check_mode_autoencoding(const Network& net, std::span<const Tensor3> starts, const DescentOptions& options,
                        double tolerance) {
  CheckReport report{"modes_autoencode", 0.0, tolerance, false, ""};
  int failures = 0;
  for (const Tensor3& start : starts) {
    const DescentResult r = descend(net, start, options.epsilon, options.max_steps, options.tol);
    if (!r.converged) ++failures;
    const Tensor3 mode = reference::basis(net, reference::pattern(net, r.image)) * net.sigma_sq;
    const double dev = max_abs_diff(r.image, mode) / net.sigma_sq;
    report.max_abs_deviation = std::max(report.max_abs_deviation, dev);
  }
  report.pass = failures == 0 && report.max_abs_deviation <= tolerance;
  if (failures > 0) report.note = std::to_string(failures) + " descent(s) did not converge";
  return report;
}

CheckReport check_mode_autoencoding(const Network& net, int starts, std::uint64_t seed, const DescentOptions& options,
                        double tolerance, double start_scale) {
  SeededRng rng(seed);
  std::vector<Tensor3> points;
  for (int s = 0; s < starts; ++s) points.push_back(random_image(net.input, start_scale, rng));
  return check_mode_autoencoding(net, points, options, tolerance);
}

CdGradientResult check_cd_gradient(const Network& net, const Tensor3& image, int draws, std::uint64_t seed,
                        double initial_epsilon, double tolerance_se) {
  CdGradientResult out;
  out.report = {"cd_reconstruction_gradient", 0.0, tolerance_se, false, ""};
  const ActivationPattern pattern = forward(net, image).pattern;
  const std::vector<double> g_obs = grad_params(net, image).flat();
  const std::size_t n_params = g_obs.size();

  double epsilon = initial_epsilon;
  bool found = false;
  std::vector<double> mean(n_params), m2(n_params);
  for (int attempt = 0; attempt <= 40 && !found; ++attempt, epsilon *= 0.5) {
    SeededRng rng(seed);
    std::fill(mean.begin(), mean.end(), 0.0);
    std::fill(m2.begin(), m2.end(), 0.0);
    found = true;
    for (int d = 0; d < draws; ++d) {
      const Tensor3 syn = langevin_step(net, image, epsilon, rng);
      if (!same_pattern(forward(net, syn).pattern, pattern)) {
        found = false;
        break;
      }
      const std::vector<double> g_syn = grad_params(net, syn).flat();
      const double count = static_cast<double>(d + 1);
      for (std::size_t q = 0; q < n_params; ++q) {
        const double x = g_obs[q] - g_syn[q];
        const double delta = x - mean[q];
        mean[q] += delta / count;
        m2[q] += delta * (x - mean[q]);
      }
    }
    if (found) out.epsilon = epsilon;
  }
  if (!found) {
    out.report.max_abs_deviation = std::numeric_limits<double>::infinity();
    out.report.note = "no piece-preserving step size found; image on a piece boundary";
    return out;
  }

  // -(eps^2 / 2) d/dw ||I / sigma^2 - B_{w,delta}||^2 / 2 with delta frozen, by
  // central differences through the dense reference decoder.
  const double eps2 = out.epsilon * out.epsilon / 2.0;
  Tensor3 target = image;
  target *= 1.0 / net.sigma_sq;
  auto recon_loss = [&](const Network& candidate) {
    return 0.5 * sq_norm(target - reference::basis(candidate, pattern));
  };
  std::vector<double> params = flat_parameters(net);
  out.expected.assign(n_params, 0.0);
  Network probe = net;
  for (std::size_t q = 0; q < n_params; ++q) {
    const double h = 1e-5 * std::max(1.0, std::abs(params[q]));
    const double saved = params[q];
    params[q] = saved + h;
    set_flat_parameters(probe, params);
    const double up = recon_loss(probe);
    params[q] = saved - h;
    set_flat_parameters(probe, params);
    const double down = recon_loss(probe);
    params[q] = saved;
    out.expected[q] = -eps2 * (up - down) / (2.0 * h);
  }

  out.empirical_mean = mean;
  out.standard_error.resize(n_params);
  double worst = 0.0;
  int failures = 0;
  for (std::size_t q = 0; q < n_params; ++q) {
    const double var = draws > 1 ? m2[q] / static_cast<double>(draws - 1) : 0.0;
    const double se = std::sqrt(var / static_cast<double>(draws));
    out.standard_error[q] = se;
    const double gap = std::abs(mean[q] - out.expected[q]);
    const double in_se = se > 0.0 ? gap / se : (gap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    worst = std::max(worst, in_se);
    if (!(gap <= tolerance_se * se)) ++failures;
  }
  out.report.max_abs_deviation = worst;
  out.report.pass = failures == 0;
  out.report.note = "deviation in standard errors; epsilon = " + std::to_string(out.epsilon) + ", " +
                    std::to_string(draws) + " draws";
  return out;
}

namespace {

// Deviation of `got` from `want`, relative to the larger magnitude. Entries far
// below the gradient's overall scale are measured against 1e-6 of that scale,
// where rounding in the difference quotient dominates.
double relative_deviation(std::span<const double> got, std::span<const double> want) {
  double scale = 0.0;
  for (double v : want) scale = std::max(scale, std::abs(v));
  const double floor = std::max(1e-6 * scale, std::numeric_limits<double>::min());
  double worst = 0.0;
  for (std::size_t q = 0; q < got.size(); ++q) {
    const double denom = std::max({std::abs(got[q]), std::abs(want[q]), floor});
    worst = std::max(worst, std::abs(got[q] - want[q]) / denom);
  }
  return worst;
}

}  // namespace

CheckReport check_param_grad(const Network& net, int points, std::uint64_t seed, double image_scale,
                             double tolerance) {
  CheckReport report{"param_grad_vs_central_differences", 0.0, tolerance, false, ""};
  SeededRng rng(seed);
  const std::vector<double> theta = flat_parameters(net);
  Network probe = net;
  for (int p = 0; p < points; ++p) {
    const Tensor3 image = random_image(net.input, image_scale, rng);
    const std::vector<double> analytic = grad_params(net, image).flat();
    std::vector<double> numeric(theta.size());
    std::vector<double> shifted = theta;
    for (std::size_t q = 0; q < theta.size(); ++q) {
      const double h = 1e-5 * std::max(1.0, std::abs(theta[q]));
      shifted[q] = theta[q] + h;
      set_flat_parameters(probe, shifted);
      const double up = reference::score(probe, image);
      shifted[q] = theta[q] - h;
      set_flat_parameters(probe, shifted);
      const double down = reference::score(probe, image);
      shifted[q] = theta[q];
      numeric[q] = (up - down) / (2.0 * h);
    }
    report.max_abs_deviation = std::max(report.max_abs_deviation, relative_deviation(analytic, numeric));
  }
  report.pass = report.max_abs_deviation <= tolerance;
  report.note = "relative to max(|analytic|, |numeric|)";
  return report;
}

CheckReport check_loglik_grad(const Network& net, std::span<const Tensor3> images, const DiscreteImageSpace& space,
                              double tolerance) {
  CheckReport report{"loglik_grad_vs_central_differences", 0.0, tolerance, false, ""};
  const std::vector<double> theta = flat_parameters(net);
  const std::vector<double> exact = loglik_grad_exact(net, images, space).flat();
  std::vector<double> numeric(theta.size());
  Network probe = net;
  std::vector<double> shifted = theta;
  for (std::size_t q = 0; q < theta.size(); ++q) {
    const double h = 1e-5 * std::max(1.0, std::abs(theta[q]));
    shifted[q] = theta[q] + h;
    set_flat_parameters(probe, shifted);
    const double up = loglik_exact(probe, images, space);
    shifted[q] = theta[q] - h;
    set_flat_parameters(probe, shifted);
    const double down = loglik_exact(probe, images, space);
    shifted[q] = theta[q];
    numeric[q] = (up - down) / (2.0 * h);
  }
  report.max_abs_deviation = relative_deviation(exact, numeric);
  report.pass = report.max_abs_deviation <= tolerance;
  report.note = "relative to max(|exact|, |numeric|)";
  return report;
}

CheckReport check_mle_expectation(const Network& net, const DiscreteImageSpace& fine, int chains, int steps,
                                  double epsilon, std::uint64_t seed, double tolerance_se) {
  CheckReport report{"mle_synthesis_vs_exact_expectation", 0.0, tolerance_se, false, ""};
  TrainConfig config;
  config.num_chains = chains;
  config.langevin_steps = steps;
  config.epsilon = epsilon;
  config.seed = seed;
  std::vector<ChainState> states;
  const Tensor3 zero(net.input);
  for (int i = 0; i < chains; ++i) states.push_back(make_chain(zero, seed, static_cast<std::uint64_t>(i)));
  Network scratch = net;
  const std::vector<Tensor3> observed{zero};
  const std::vector<double> h_syn = mle_step(scratch, observed, states, config).h_syn.flat();

  const std::size_t n = h_syn.size();
  std::vector<double> mean(n, 0.0), m2(n, 0.0);
  for (int i = 0; i < chains; ++i) {
    const std::vector<double> g = reference::param_grad(net, states[static_cast<std::size_t>(i)].image);
    const double count = static_cast<double>(i + 1);
    for (std::size_t q = 0; q < n; ++q) {
      const double delta = g[q] - mean[q];
      mean[q] += delta / count;
      m2[q] += delta * (g[q] - mean[q]);
    }
  }
  const std::vector<double> expected = model_expectation_grad(net, fine).flat();
  double drift = 0.0;
  for (std::size_t q = 0; q < n; ++q) {
    drift = std::max(drift, std::abs(h_syn[q] - mean[q]));
    const double se = std::sqrt(m2[q] / (static_cast<double>(chains) - 1.0) / static_cast<double>(chains));
    const double gap = std::abs(h_syn[q] - expected[q]);
    const double z = se > 0.0 ? gap / se : (gap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
    report.max_abs_deviation = std::max(report.max_abs_deviation, z);
  }
  report.pass = report.max_abs_deviation <= tolerance_se && drift <= 1e-9;
  report.note = "deviation in standard errors of the chain average; exact expectation over " +
                std::to_string(fine.count()) + " grid states";
  return report;
}

std::vector<CheckReport> check_prototype(const PrototypeModel& model, int starts, std::uint64_t seed,
                                         const DescentOptions& options, double tolerance) {
  CheckReport exact{"prototype_means_autoencode", 0.0, 1e-12, false, "relative to 1 + |mean|"};
  CheckReport lands{"prototype_descent_lands_on_mean", 0.0, tolerance, false, ""};
  const std::vector<PrototypePiece> pieces = enumerate_pieces(model);
  std::vector<const Tensor3*> modes;
  for (const PrototypePiece& piece : pieces) {
    if (!piece.mean_in_piece) continue;
    modes.push_back(&piece.mean);
    const Tensor3 again = proto_mean(model, proto_activation(model, piece.mean)) * model.sigma_sq;
    exact.max_abs_deviation =
        std::max(exact.max_abs_deviation, max_abs_diff(again, piece.mean) / (1.0 + max_abs(piece.mean)));
  }
  exact.pass = exact.max_abs_deviation <= exact.tolerance;

  const Network net = to_network(model);
  SeededRng rng(seed);
  int failures = 0;
  for (int s = 0; s < starts; ++s) {
    const Tensor3 start = random_image(model.patch, 1.0, rng);
    const DescentResult r = descend(net, start, options.epsilon, options.max_steps, options.tol);
    if (!r.converged) ++failures;
    double nearest = std::numeric_limits<double>::infinity();
    for (const Tensor3* m : modes) nearest = std::min(nearest, max_abs_diff(r.image, *m));
    lands.max_abs_deviation = std::max(lands.max_abs_deviation, nearest);
  }
  lands.pass = failures == 0 && lands.max_abs_deviation <= tolerance;
  lands.note = std::to_string(modes.size()) + " in-piece means of " + std::to_string(pieces.size()) + " pieces";
  if (failures > 0) lands.note += "; " + std::to_string(failures) + " descent(s) did not converge";
  return {exact, lands};
}

}  // namespace genconv
