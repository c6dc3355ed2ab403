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

#ifndef GENCONV_IMAGE_IO_HPP_
#define GENCONV_IMAGE_IO_HPP_

#include <filesystem>
#include <stdexcept>
#include <vector>

#include "genconv/tensor.hpp"

namespace genconv {

/// Malformed, truncated or unsupported image file.
class ImageFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Reads a binary 8-bit PGM (P5, one channel) or PPM (P6, three channels).
/// Pixel values are returned unscaled, in [0, maxval].
Tensor3 load_image(const std::filesystem::path& path);

/// Writes P5 for one channel and P6 for three. Values are clamped to [0, 255]
/// and rounded half away from zero.
void save_image(const Tensor3& image, const std::filesystem::path& path);

/// Regular files ending in .pgm or .ppm, sorted by path.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

Tensor3 resize_nearest(const Tensor3& image, int height, int width);
/// ITU-R BT.601 luma for three-channel input; one-channel input is returned as is.
Tensor3 to_grayscale(const Tensor3& image);

enum class MeanMode {
  kNone,
  kPixel,    // subtract the per-pixel mean image over the training set
  kChannel,  // subtract one mean intensity per channel
};

struct PreprocessOptions {
  int height = 0;  // 0 keeps the source extent
  int width = 0;
  bool grayscale = false;
  MeanMode mean = MeanMode::kPixel;
  /// Model-space value = (raw - mean) * scale.
  double scale = 1.0;
};

/// What is needed to map model-space images back to display intensities.
struct Preprocessing {
  Tensor3 mean_image;
  double scale = 1.0;

  friend bool operator==(const Preprocessing&, const Preprocessing&) = default;
};

struct Dataset {
  std::vector<Tensor3> images;
  Preprocessing prep;
};

/// Resizes, converts and mean-subtracts raw [0, 255] images. All images must
/// share one shape after resizing.
Dataset prepare_dataset(std::vector<Tensor3> raw, const PreprocessOptions& options);

/// Raw intensities to model space using stored preprocessing.
Tensor3 to_model(const Tensor3& raw, const Preprocessing& prep);

/// Inverse of the preprocessing: value / scale + mean.
Tensor3 to_display(const Tensor3& image, const Preprocessing& prep);

}  // namespace genconv

#endif  // GENCONV_IMAGE_IO_HPP_
