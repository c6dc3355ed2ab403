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

#ifndef GENCONV_RNG_HPP_
#define GENCONV_RNG_HPP_

#include <cstdint>
#include <optional>
#include <random>

namespace genconv {

/// Deterministic random stream. A given seed produces the same sequence of
/// draws on every run and platform: the engine is std::mt19937_64 (fully
/// specified by the standard) and the uniform/normal transforms are our own,
/// not the implementation-defined std:: distributions.
///
/// Sub-streams follow a fixed rule: `split(i)` seeds a new stream with
/// `seed ^ i`. Chain i of a run with master seed s therefore uses s ^ i.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed = 0);

  std::uint64_t seed() const { return seed_; }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform();

  /// Standard normal draw (Marsaglia polar method).
  double normal();

  SeededRng split(std::uint64_t stream) const { return SeededRng(seed_ ^ stream); }

  friend bool operator==(const SeededRng& a, const SeededRng& b);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace genconv

#endif  // GENCONV_RNG_HPP_
