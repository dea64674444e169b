#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "tsc/errors.hpp"
#include "tsc/neural.hpp"
#include "tsc/weights_io.hpp"

namespace tsc {
namespace {

WeightFile sample_file() {
  WeightFile f;
  f.kind = WeightKind::kKPlanes;
  f.seed = 0x1234567890abcdefULL;
  f.tag = "a=1;b=two";
  f.tensors.push_back({"x", {2, 3}, {1, 2, 3, 4, 5, 6.5f}});
  f.tensors.push_back({"y", {1}, {-0.25f}});
  return f;
}

TEST(WeightsIo, StreamRoundTrip) {
  const WeightFile f = sample_file();
  std::stringstream ss;
  write_weights(ss, f);
  EXPECT_EQ(read_weights(ss), f);
}

TEST(WeightsIo, HeaderLayout) {
  std::stringstream ss;
  write_weights(ss, sample_file());
  const std::string bytes = ss.str();
  ASSERT_GE(bytes.size(), 20u);
  EXPECT_EQ(bytes.substr(0, 4), "TSCW");
  EXPECT_EQ(static_cast<unsigned char>(bytes[4]), kWeightFormatVersion);
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 2);  // kind
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 0xef);  // seed, little-endian
}

TEST(WeightsIo, BadMagicIsIoError) {
  std::stringstream ss;
  write_weights(ss, sample_file());
  std::string bytes = ss.str();
  bytes[0] = 'X';
  std::stringstream bad(bytes);
  EXPECT_THROW(read_weights(bad), IoError);
}

TEST(WeightsIo, TruncatedIsIoError) {
  std::stringstream ss;
  write_weights(ss, sample_file());
  const std::string bytes = ss.str();
  std::stringstream cut(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(read_weights(cut), IoError);
}

TEST(WeightsIo, MissingFileIsIoError) {
  EXPECT_THROW(load_weights("/nonexistent/dir/w.tscw"), IoError);
}

TEST(WeightsIo, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "tsc_weights_io_test.tscw";
  save_weights(path, sample_file());
  EXPECT_EQ(load_weights(path), sample_file());
  std::filesystem::remove(path);
}

TEST(WeightsIo, FindAndTag) {
  const WeightFile f = sample_file();
  EXPECT_TRUE(f.contains("y"));
  EXPECT_FALSE(f.contains("z"));
  EXPECT_EQ(f.find("y").data[0], -0.25f);
  EXPECT_THROW(f.find("z"), IoError);
  EXPECT_EQ(tag_value(f.tag, "b"), "two");
  EXPECT_EQ(tag_value(f.tag, "c"), "");
}

TEST(WeightsIo, MlpRoundTripAtFloatPrecision) {
  const Mlp net({5, 7, 3}, Activation::kRelu, 21, 1.0, 0.5);
  WeightFile f;
  append_mlp(f, "policy", net);
  std::stringstream ss;
  write_weights(ss, f);
  const Mlp back = extract_mlp(read_weights(ss), "policy");
  EXPECT_EQ(back.sizes(), net.sizes());
  EXPECT_EQ(back.hidden_activation(), Activation::kRelu);
  for (std::size_t i = 0; i < net.num_params(); ++i) {
    EXPECT_EQ(back.params()[i], static_cast<double>(static_cast<float>(net.params()[i])));
  }
  EXPECT_THROW(extract_mlp(f, "value"), IoError);
}

}  // namespace
}  // namespace tsc
