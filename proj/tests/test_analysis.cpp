#include <gtest/gtest.h>

#include <cmath>
#include <regex>

#include "spdreg/analysis.hpp"
#include "support/test_util.hpp"

namespace spdreg {
namespace {

using testing::random_field;
using testing::Rng;

struct Glyph {
  double rx, ry;
  int r, g, b;
};

std::vector<Glyph> parse_glyphs(const std::string& svg) {
  static const std::regex re(R"re(<ellipse [^>]*rx="([0-9.]+)" ry="([0-9.]+)"[^>]*fill="rgb\((\d+),(\d+),(\d+)\)"/>)re");
  std::vector<Glyph> out;
  for (auto it = std::sregex_iterator(svg.begin(), svg.end(), re); it != std::sregex_iterator(); ++it)
    out.push_back({std::stod((*it)[1]), std::stod((*it)[2]), std::stoi((*it)[3]), std::stoi((*it)[4]),
                   std::stoi((*it)[5])});
  return out;
}

TEST(ColorScale, EndpointsAndMonotone) {
  EXPECT_EQ(ColorScale::map(0.0), (Rgb{0, 0, 0}));
  EXPECT_EQ(ColorScale::map(1.0), (Rgb{120, 180, 255}));
  Rgb prev = ColorScale::map(0.0);
  for (int i = 1; i <= 100; ++i) {
    const Rgb c = ColorScale::map(i / 100.0);
    EXPECT_GE(c.r, prev.r);
    EXPECT_GE(c.g, prev.g);
    EXPECT_GE(c.b, prev.b);
    prev = c;
  }
}

TEST(Snr, Examples) {
  Rng rng(1);
  const TensorField a = random_field(rng, 4, 3);
  EXPECT_TRUE(std::isinf(snr(a, a)));

  // Identity field against the projected-zero field: both norms are direct.
  const int n = 12;
  const TensorField id(4, 3);
  const TensorField seed(4, 3, std::vector<SpdTensor>(n, project_full(SymMat(3))));
  const double s = std::exp(-36.0 / std::sqrt(3.0));
  const double want = std::sqrt(3.0 * n) / std::sqrt(3.0 * n * (1 - s) * (1 - s));
  EXPECT_NEAR(snr(id, seed), want, 1e-12);
}

TEST(Snr, ScaleAndUnitaryInvariance) {
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    const TensorField a = random_field(rng, 3, 3, 1.0), b = random_field(rng, 3, 3, 1.0);
    const double base = snr(a, b);
    const double c = 0.1 + t;
    const SquareMat u = testing::random_orthogonal(rng);
    std::vector<SpdTensor> ca, cb, ua, ub;
    for (std::size_t i = 0; i < a.size(); ++i) {
      ca.push_back(SpdTensor::from_matrix(a[i].mat() * c));
      cb.push_back(SpdTensor::from_matrix(b[i].mat() * c));
      ua.push_back(SpdTensor::from_matrix(testing::congruence(u, a[i].mat())));
      ub.push_back(SpdTensor::from_matrix(testing::congruence(u, b[i].mat())));
    }
    EXPECT_NEAR(snr(TensorField(3, 3, ca), TensorField(3, 3, cb)), base, 1e-10 * base);
    EXPECT_NEAR(snr(TensorField(3, 3, ua), TensorField(3, 3, ub)), base, 1e-10 * base);
  }
}

TEST(Profile, ConstantAndRowPermutation) {
  const SpdTensor t = SpdTensor::from_matrix(SymMat::diagonal({2e-3, 1e-3, 1e-3}));
  for (double v : column_eigen_profile(TensorField(5, 4, std::vector<SpdTensor>(20, t)))) EXPECT_DOUBLE_EQ(v, 2e-3);

  Rng rng(3);
  const TensorField w = random_field(rng, 5, 4);
  std::vector<SpdTensor> flipped;
  for (int y = 3; y >= 0; --y)
    for (int x = 0; x < 5; ++x) flipped.push_back(w.at(x, y));
  const auto a = column_eigen_profile(w);
  const auto b = column_eigen_profile(TensorField(5, 4, flipped));
  ASSERT_EQ(a.size(), 5u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-12 * a[i]);
}

TEST(Render, IsotropicFieldGivesEqualBlackCircles) {
  const TensorField w(4, 4);
  const auto glyphs = parse_glyphs(render_svg(w));
  ASSERT_EQ(glyphs.size(), 16u);
  for (const Glyph& g : glyphs) {
    EXPECT_EQ(g.r + g.g + g.b, 0);
    EXPECT_DOUBLE_EQ(g.rx, 0.45);
    EXPECT_DOUBLE_EQ(g.ry, 0.45);
  }
}

TEST(Render, StaircaseColoursAndDeterminism) {
  const TensorField s = make_staircase_phantom(8);
  const std::string svg = render_svg(s);
  EXPECT_EQ(svg, render_svg(s));
  const auto glyphs = parse_glyphs(svg);
  ASSERT_EQ(glyphs.size(), 64u);
  double largest = 0.0;
  for (int y = 0; y < 8; ++y) {
    const Glyph& left = glyphs[static_cast<std::size_t>(y * 8)];
    const Glyph& right = glyphs[static_cast<std::size_t>(y * 8 + 7)];
    EXPECT_EQ(left.r + left.g + left.b, 0);
    EXPECT_GT(right.b, 150);
    EXPECT_GT(right.rx, 3 * right.ry);
  }
  for (const Glyph& g : glyphs) {
    largest = std::max(largest, g.rx);
    EXPECT_LE(g.r, 120);
    EXPECT_LE(g.g, 180);
    EXPECT_LE(g.b, 255);
  }
  EXPECT_DOUBLE_EQ(largest, 0.45);
}

TEST(Median, Basics) {
  EXPECT_EQ(median({3, 1, 2}), 2);
  EXPECT_EQ(median({4, 1, 2, 3}), 2.5);
  EXPECT_THROW(median({}), InvalidInput);
}

TEST(ConvergenceStudy, RowsOrderingAndCleanLevel) {
  const TensorField phantom = make_staircase_phantom(6);
  ConvergenceStudyConfig cfg;
  cfg.params.n_rho = 2;
  cfg.solver.max_iters = 100;
  const auto rows = convergence_study(phantom, {0.0, 30.0, 3.0}, [&](double d) { return default_alpha_rule(d, cfg.params.p); },
                                      cfg);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].delta, 30.0);
  EXPECT_EQ(rows[2].delta, 0.0);
  EXPECT_EQ(rows[2].alpha, 0.0);
  EXPECT_LT(rows[2].distance, 1e-6);
  EXPECT_GE(rows[0].distance, rows[1].distance);
  EXPECT_GE(rows[1].distance, rows[2].distance);
  const std::string csv = convergence_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "delta,alpha,distance");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
}

TEST(AlphaRule, Limits) {
  const double p = 1.1;
  double prev_ratio = 1e300;
  for (double d : {1.0, 0.1, 0.01, 0.001}) {
    const double ratio = std::pow(d, p) / default_alpha_rule(d, p);
    EXPECT_LT(ratio, prev_ratio);
    prev_ratio = ratio;
  }
  EXPECT_EQ(default_alpha_rule(0.0, p), 0.0);
}

}  // namespace
}  // namespace spdreg
