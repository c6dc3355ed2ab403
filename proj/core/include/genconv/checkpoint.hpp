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

#ifndef GENCONV_CHECKPOINT_HPP_
#define GENCONV_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "genconv/image_io.hpp"
#include "genconv/net.hpp"

namespace genconv {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything needed to resume sampling from a trained model. Stored as JSON;
/// weights are flat arrays in (k, i, ky, kx) order and every double is written
/// with round-trip precision, so load(save(x)) == x bit for bit.
struct Checkpoint {
  static constexpr int kFormatVersion = 1;

  int format_version = kFormatVersion;
  Network net;
  Preprocessing prep;
  bool fully_connected_top = false;
  std::int64_t iteration = 0;
  std::uint64_t seed = 0;

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint parse_checkpoint(const std::string& text);

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace genconv

#endif  // GENCONV_CHECKPOINT_HPP_
