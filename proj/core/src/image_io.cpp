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

#include "genconv/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>

namespace genconv {
namespace {

// Parses the next decimal header field, skipping whitespace and # comments.
int read_header_int(const std::string& bytes, std::size_t& pos, const char* field) {
  while (pos < bytes.size()) {
    const unsigned char ch = static_cast<unsigned char>(bytes[pos]);
    if (std::isspace(ch)) {
      ++pos;
    } else if (ch == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n' && bytes[pos] != '\r') ++pos;
    } else {
      break;
    }
  }
  if (pos >= bytes.size() || !std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
    throw ImageFormatError(std::string("malformed header: expected ") + field);
  }
  long value = 0;
  while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
    value = value * 10 + (bytes[pos] - '0');
    if (value > 1'000'000) throw ImageFormatError(std::string("header field too large: ") + field);
    ++pos;
  }
  return static_cast<int>(value);
}

}  // namespace

Tensor3 load_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ImageFormatError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw ImageFormatError(path.string() + ": not a binary PGM (P5) or PPM (P6) file");
  }
  const int channels = bytes[1] == '5' ? 1 : 3;
  std::size_t pos = 2;
  const int width = read_header_int(bytes, pos, "width");
  const int height = read_header_int(bytes, pos, "height");
  const int maxval = read_header_int(bytes, pos, "maxval");
  if (width <= 0 || height <= 0) throw ImageFormatError(path.string() + ": image extents must be positive");
  if (maxval <= 0 || maxval > 255) {
    throw ImageFormatError(path.string() + ": unsupported depth, maxval " + std::to_string(maxval) +
                           " (only 8-bit images are supported)");
  }
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw ImageFormatError(path.string() + ": malformed header, missing separator before pixel data");
  }
  ++pos;
  const std::size_t expected = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() - pos < expected) {
    throw ImageFormatError(path.string() + ": truncated pixel data, expected " + std::to_string(expected) +
                           " bytes, found " + std::to_string(bytes.size() - pos));
  }
  Tensor3 image({channels, height, width});
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < channels; ++c) {
        image(c, y, x) = static_cast<unsigned char>(bytes[pos++]);
      }
    }
  }
  return image;
}

void save_image(const Tensor3& image, const std::filesystem::path& path) {
  if (image.channels() != 1 && image.channels() != 3) {
    throw DimensionError("save_image: only 1- or 3-channel images can be written");
  }
  std::string out = std::string(image.channels() == 1 ? "P5" : "P6") + "\n" + std::to_string(image.width()) + " " +
                    std::to_string(image.height()) + "\n255\n";
  out.reserve(out.size() + image.size());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      for (int c = 0; c < image.channels(); ++c) {
        const double v = std::clamp(image(c, y, x), 0.0, 255.0);
        out.push_back(static_cast<char>(static_cast<unsigned char>(std::round(v))));
      }
    }
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw std::runtime_error("cannot write " + path.string());
  file.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!file) throw std::runtime_error("write failed for " + path.string());
}

std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext == ".pgm" || ext == ".ppm") out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

Tensor3 resize_nearest(const Tensor3& image, int height, int width) {
  Tensor3 out({image.channels(), height, width});
  for (int c = 0; c < image.channels(); ++c) {
    for (int y = 0; y < height; ++y) {
      const int sy = static_cast<int>(static_cast<long>(y) * image.height() / height);
      for (int x = 0; x < width; ++x) {
        const int sx = static_cast<int>(static_cast<long>(x) * image.width() / width);
        out(c, y, x) = image(c, sy, sx);
      }
    }
  }
  return out;
}

Tensor3 to_grayscale(const Tensor3& image) {
  if (image.channels() == 1) return image;
  if (image.channels() != 3) throw DimensionError("to_grayscale: expected 1 or 3 channels");
  Tensor3 out({1, image.height(), image.width()});
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      out(0, y, x) = 0.299 * image(0, y, x) + 0.587 * image(1, y, x) + 0.114 * image(2, y, x);
    }
  }
  return out;
}

Dataset prepare_dataset(std::vector<Tensor3> raw, const PreprocessOptions& options) {
  if (raw.empty()) throw DimensionError("prepare_dataset: no images");
  if (!(options.scale > 0.0)) throw ParameterError("prepare_dataset: scale must be positive");
  for (Tensor3& img : raw) {
    if (options.grayscale) img = to_grayscale(img);
    if (options.height > 0 && options.width > 0 &&
        (img.height() != options.height || img.width() != options.width)) {
      img = resize_nearest(img, options.height, options.width);
    }
  }
  const Shape3 shape = raw.front().shape();
  for (const Tensor3& img : raw) {
    if (img.shape() != shape) {
      throw DimensionError("prepare_dataset: images differ in shape (" + img.shape().str() + " vs " + shape.str() +
                           "); set a target size");
    }
  }

  Dataset data;
  data.prep.scale = options.scale;
  data.prep.mean_image = Tensor3(shape, 0.0);
  Tensor3& mean = data.prep.mean_image;
  if (options.mean != MeanMode::kNone) {
    for (const Tensor3& img : raw) mean += img;
    mean *= 1.0 / static_cast<double>(raw.size());
    if (options.mean == MeanMode::kChannel) {
      const double plane = static_cast<double>(shape.height) * shape.width;
      for (int c = 0; c < shape.channels; ++c) {
        double acc = 0.0;
        for (int y = 0; y < shape.height; ++y) {
          for (int x = 0; x < shape.width; ++x) acc += mean(c, y, x);
        }
        for (int y = 0; y < shape.height; ++y) {
          for (int x = 0; x < shape.width; ++x) mean(c, y, x) = acc / plane;
        }
      }
    }
  }
  for (Tensor3& img : raw) {
    img -= mean;
    img *= options.scale;
  }
  data.images = std::move(raw);
  return data;
}

Tensor3 to_model(const Tensor3& raw, const Preprocessing& prep) {
  Tensor3 out = raw;
  if (!prep.mean_image.empty()) {
    require_same_shape(raw, prep.mean_image, "to_model");
    out -= prep.mean_image;
  }
  out *= prep.scale;
  return out;
}

Tensor3 to_display(const Tensor3& image, const Preprocessing& prep) {
  Tensor3 out = image;
  out *= 1.0 / prep.scale;
  if (!prep.mean_image.empty()) out += prep.mean_image;
  return out;
}

}  // namespace genconv
