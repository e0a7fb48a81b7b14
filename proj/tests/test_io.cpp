#include <gtest/gtest.h>

#include <sstream>

#include "spdreg/io.hpp"
#include "support/test_util.hpp"

namespace spdreg {
namespace {

using testing::random_field;
using testing::Rng;

int error_line(const std::function<void()>& f) {
  try {
    f();
  } catch (const FormatError& e) {
    return e.line();
  }
  return -1;
}

TEST(Dtf, RoundTripIsExact) {
  Rng rng(1);
  const TensorField w = random_field(rng, 3, 2, 5.0);
  std::stringstream ss;
  write_dtf(ss, w);
  const TensorField back = read_dtf(ss);
  ASSERT_EQ(back.width(), 3);
  ASSERT_EQ(back.height(), 2);
  EXPECT_EQ(back.z(), w.z());
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_EQ(back[i].mat(), w[i].mat());
}

TEST(Dtf, Layout) {
  const TensorField w(1, 1, {SpdTensor::from_matrix(SymMat::from_coeffs({3, 2, 1, 0.5, 0.25, 0.125}))});
  std::stringstream ss;
  write_dtf(ss, w);
  EXPECT_EQ(ss.str(), "DTF1 1 1 3 36\n3 2 1 0.5 0.25 0.125\n");
}

TEST(Dtf, Errors) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return read_dtf(in);
  };
  EXPECT_EQ(error_line([&] { parse("DTX1 1 1 3 36\n1 1 1 0 0 0\n"); }), 1);
  EXPECT_EQ(error_line([&] { parse("DTF1 1 2 3 36\n1 1 1 0 0 0\n1 1 1 0 0\n"); }), 3);
  EXPECT_EQ(error_line([&] { parse("DTF1 1 1 3 36\n1 1 abc 0 0 0\n"); }), 2);
  EXPECT_EQ(error_line([&] { parse("DTF1 1 1 3 36\n-1 1 1 0 0 0\n"); }), 2);
  EXPECT_EQ(error_line([&] { parse("DTF1 1 1 3 1\n100 1 1 0 0 0\n"); }), 2);
  EXPECT_EQ(error_line([&] { parse("DTF1 1 1 3 36\n1 1 1 0 0 0\nextra\n"); }), 3);
  EXPECT_EQ(error_line([&] { parse("DTF1 2 1 3 36\n1 1 1 0 0 0\n"); }), 3);
}

TEST(Mask, RoundTripAndErrors) {
  Mask m(3, 2);
  m.set(1, false);
  m.set(5, false);
  std::stringstream ss;
  write_mask(ss, m);
  EXPECT_EQ(ss.str(), "MSK1 3 2\n101\n110\n");
  const Mask back = read_mask(ss);
  for (std::size_t i = 0; i < m.size(); ++i) EXPECT_EQ(back[i], m[i]);

  std::istringstream bad("MSK1 3 2\n101\n1x0\n");
  EXPECT_EQ(error_line([&] { read_mask(bad); }), 3);
}

TEST(Dwi, RoundTrip) {
  const TensorField w = make_staircase_phantom(3);
  DwiSet d = simulate_dwis(w, 800.0, 1000.0, default_directions());
  add_rician_noise(d, {40.0, 3});
  std::stringstream ss;
  write_dwi(ss, d);
  const DwiSet back = read_dwi(ss);
  EXPECT_EQ(back.width, d.width);
  EXPECT_EQ(back.directions, d.directions);
  EXPECT_EQ(back.images, d.images);
  EXPECT_EQ(back.b_value, 800.0);
}

TEST(Files, MissingInput) { EXPECT_THROW(read_dtf_file("/nonexistent/dir/x.dtf"), Error); }

}  // namespace
}  // namespace spdreg
