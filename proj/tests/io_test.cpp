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
#include <filesystem>
#include <fstream>
#include <iterator>
#include <regex>
#include <string>

#include "genconv/checkpoint.hpp"
#include "genconv/image_io.hpp"
#include "genconv/oracle.hpp"

namespace genconv {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("genconv_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write_bytes(const std::string& name, const std::string& bytes) {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << bytes;
    return p;
  }
  static std::string read_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  fs::path dir_;
};

using ImageIo = TempDir;
using CheckpointIo = TempDir;

TEST_F(ImageIo, SinglePixel) {
  const Tensor3 img = load_image(write_bytes("a.pgm", std::string("P5\n1 1\n255\n") + char(128)));
  EXPECT_EQ(img.shape(), (Shape3{1, 1, 1}));
  EXPECT_EQ(img[0], 128.0);
}

TEST_F(ImageIo, CommentsAndColor) {
  std::string payload;
  for (int i = 0; i < 6; ++i) payload += static_cast<char>(i * 40);
  const Tensor3 img = load_image(write_bytes("c.ppm", "P6\n# made by hand\n2 1\n255\n" + payload));
  EXPECT_EQ(img.shape(), (Shape3{3, 1, 2}));
  // Interleaved RGB becomes channel-major.
  EXPECT_EQ(img(0, 0, 0), 0.0);
  EXPECT_EQ(img(1, 0, 0), 40.0);
  EXPECT_EQ(img(0, 0, 1), 120.0);
  EXPECT_EQ(img(2, 0, 1), 200.0);
}

TEST_F(ImageIo, RoundTripIsByteExact) {
  std::string payload;
  for (int i = 0; i < 4 * 3 * 3; ++i) payload += static_cast<char>((i * 37) % 256);
  const std::string bytes = "P6\n4 3\n255\n" + payload;
  const fs::path in = write_bytes("in.ppm", bytes);
  save_image(load_image(in), dir_ / "out.ppm");
  EXPECT_EQ(read_bytes(dir_ / "out.ppm"), bytes);
}

TEST_F(ImageIo, ClampsAndRounds) {
  save_image(Tensor3({1, 1, 4}, std::vector<double>{300.0, -5.0, 2.5, 7.49}), dir_ / "c.pgm");
  const Tensor3 back = load_image(dir_ / "c.pgm");
  EXPECT_EQ(back[0], 255.0);
  EXPECT_EQ(back[1], 0.0);
  EXPECT_EQ(back[2], 3.0);
  EXPECT_EQ(back[3], 7.0);
}

TEST_F(ImageIo, RejectsBadFiles) {
  EXPECT_THROW(load_image(dir_ / "missing.pgm"), ImageFormatError);
  EXPECT_THROW(load_image(write_bytes("p2.pgm", "P2\n1 1\n255\n7\n")), ImageFormatError);
  EXPECT_THROW(load_image(write_bytes("short.pgm", "P5\n2 2\n255\nab")), ImageFormatError);
  EXPECT_THROW(load_image(write_bytes("deep.pgm", "P5\n1 1\n65535\nab")), ImageFormatError);
  EXPECT_THROW(load_image(write_bytes("zero.pgm", "P5\n0 1\n255\n")), ImageFormatError);
}

TEST_F(ImageIo, ListsOnlyImagesSorted) {
  write_bytes("b.pgm", std::string("P5\n1 1\n255\n") + char(1));
  write_bytes("a.ppm", std::string("P6\n1 1\n255\n") + "abc");
  write_bytes("notes.txt", "x");
  const auto files = list_images(dir_);
  ASSERT_EQ(files.size(), 2u);
  EXPECT_EQ(files[0].filename(), "a.ppm");
  EXPECT_EQ(files[1].filename(), "b.pgm");
}

TEST(Preprocess, PixelMeanIsSubtracted) {
  PreprocessOptions opt;
  opt.mean = MeanMode::kPixel;
  const Dataset ds = prepare_dataset({Tensor3({1, 2, 2}, 0.0), Tensor3({1, 2, 2}, 100.0)}, opt);
  for (double m : ds.prep.mean_image.data()) EXPECT_EQ(m, 50.0);
  for (double v : ds.images[0].data()) EXPECT_EQ(v, -50.0);
  for (double v : ds.images[1].data()) EXPECT_EQ(v, 50.0);
  EXPECT_EQ(to_display(ds.images[1], ds.prep), Tensor3({1, 2, 2}, 100.0));
}

TEST(Preprocess, ChannelMeanAndScale) {
  PreprocessOptions opt;
  opt.mean = MeanMode::kChannel;
  opt.scale = 0.5;
  const Dataset ds = prepare_dataset({Tensor3({1, 1, 2}, std::vector<double>{10.0, 30.0})}, opt);
  EXPECT_EQ(ds.images[0][0], -5.0);
  EXPECT_EQ(ds.images[0][1], 5.0);
  EXPECT_EQ(to_model(Tensor3({1, 1, 2}, std::vector<double>{10.0, 30.0}), ds.prep), ds.images[0]);
}

TEST(Preprocess, ResizeAndGray) {
  PreprocessOptions opt;
  opt.mean = MeanMode::kNone;
  opt.height = 2;
  opt.width = 2;
  opt.grayscale = true;
  Tensor3 rgb({3, 4, 4});
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) {
      rgb(0, y, x) = 100.0;
      rgb(1, y, x) = 100.0;
      rgb(2, y, x) = 100.0;
    }
  const Dataset ds = prepare_dataset({rgb}, opt);
  EXPECT_EQ(ds.images[0].shape(), (Shape3{1, 2, 2}));
  for (double v : ds.images[0].data()) EXPECT_NEAR(v, 100.0, 1e-12);
  EXPECT_THROW(prepare_dataset({Tensor3({1, 2, 2}), Tensor3({1, 3, 2})}, PreprocessOptions{}), DimensionError);
}

TEST_F(CheckpointIo, RoundTripIsBitExact) {
  SeededRng rng(3);
  Checkpoint ckpt;
  ckpt.net = random_network({}, rng);
  for (auto& l : ckpt.net.layers)
    for (double& w : l.weights) w = rng.normal() * std::pow(10.0, 20.0 * (rng.uniform() - 0.5));
  ckpt.prep.mean_image = random_image(ckpt.net.input, 100.0, rng);
  ckpt.prep.scale = 1.0 / 3.0;
  ckpt.iteration = 123;
  ckpt.seed = 0xdeadbeefcafeULL;
  save_checkpoint(ckpt, dir_ / "c.json");
  const Checkpoint back = load_checkpoint(dir_ / "c.json");
  EXPECT_EQ(back, ckpt);
  double delta = 0.0;
  for (std::size_t l = 0; l < ckpt.net.depth(); ++l)
    for (std::size_t i = 0; i < ckpt.net.layers[l].weights.size(); ++i)
      delta = std::max(delta, std::abs(back.net.layers[l].weights[i] - ckpt.net.layers[l].weights[i]));
  EXPECT_EQ(delta, 0.0);
  EXPECT_EQ(serialize_checkpoint(back), serialize_checkpoint(ckpt));
}

TEST_F(CheckpointIo, RejectsDamage) {
  EXPECT_THROW(parse_checkpoint("{"), CheckpointError);
  EXPECT_THROW(parse_checkpoint(R"({"format":"other"})"), CheckpointError);
  SeededRng rng(4);
  Checkpoint ckpt;
  ckpt.net = random_network({}, rng);
  std::string text = serialize_checkpoint(ckpt);
  text = std::regex_replace(text, std::regex(R"("format_version"\s*:\s*1)"), R"("format_version": 9)");
  EXPECT_THROW(parse_checkpoint(text), CheckpointError);
}

}  // namespace
}  // namespace genconv
