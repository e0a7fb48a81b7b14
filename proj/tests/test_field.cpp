#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "spdreg/functional.hpp"
#include "support/test_util.hpp"

namespace spdreg {
namespace {

using testing::brute_force_fidelity;
using testing::brute_force_phi;
using testing::random_field;
using testing::Rng;

constexpr double kE = std::numbers::e;

TensorField map_field(const TensorField& w, const std::function<SpdTensor(const SpdTensor&)>& f) {
  std::vector<SpdTensor> t;
  for (const SpdTensor& a : w.tensors()) t.push_back(f(a));
  return TensorField(w.width(), w.height(), std::move(t), w.z());
}

FunctionalParams params_l0(double p) {
  FunctionalParams fp;
  fp.p = p;
  fp.s = 0.5;
  fp.l = 0;
  return fp;
}

TEST(Mollifier, RadiusOneSupport) {
  const Mollifier m = build_mollifier(1);
  int nonzero = 0;
  double sum = 0.0;
  for (int dy = -1; dy <= 1; ++dy)
    for (int dx = -1; dx <= 1; ++dx) {
      const double w = m(dx, dy);
      if (dx * dx + dy * dy <= 1) {
        EXPECT_GT(w, 0.0);
        ++nonzero;
      } else {
        EXPECT_EQ(w, 0.0);
      }
      sum += w;
    }
  EXPECT_EQ(nonzero, 5);
  EXPECT_NEAR(sum, 1.0, 1e-15);
}

TEST(Mollifier, BumpProfileValues) {
  // Independent evaluation of the profile on the disk, then normalization.
  for (int n : {1, 2, 3, 5}) {
    const Mollifier m = build_mollifier(n);
    double total = 0.0;
    for (int dy = -n; dy <= n; ++dy)
      for (int dx = -n; dx <= n; ++dx)
        if (dx * dx + dy * dy <= n * n) {
          const double r = std::hypot(dx, dy) / (n + 0.5);
          total += std::exp(-1.0 / (1.0 - r * r));
        }
    for (int dy = -n; dy <= n; ++dy)
      for (int dx = -n; dx <= n; ++dx) {
        const double r = std::hypot(dx, dy) / (n + 0.5);
        const double want = dx * dx + dy * dy <= n * n ? std::exp(-1.0 / (1.0 - r * r)) / total : 0.0;
        EXPECT_NEAR(m(dx, dy), want, 1e-15);
      }
  }
}

TEST(Mollifier, SymmetryAndNormalization) {
  for (int n = 1; n <= 9; ++n) {
    const Mollifier m = build_mollifier(n);
    double sum = 0.0;
    for (int dy = -n; dy <= n; ++dy)
      for (int dx = -n; dx <= n; ++dx) {
        sum += m(dx, dy);
        EXPECT_EQ(m(dx, dy), m(-dx, dy));
        EXPECT_EQ(m(dx, dy), m(dy, dx));
      }
    EXPECT_NEAR(sum, 1.0, 1e-12) << "n_rho " << n;
    EXPECT_EQ(m(n + 1, 0), 0.0);
  }
  EXPECT_THROW(build_mollifier(0), InvalidInput);
}

TEST(Fidelity, Examples) {
  Rng rng(1);
  const TensorField w = random_field(rng, 3, 2);
  const Mask full(3, 2);
  EXPECT_EQ(fidelity(w, w, full, 1.1, Metric::LogEuclidean), 0.0);

  const TensorField a(1, 1);
  const TensorField b(1, 1, {SpdTensor::from_matrix(SymMat::diagonal({kE, 1, 1}))});
  EXPECT_NEAR(fidelity(a, b, Mask(1, 1), 2.0, Metric::LogEuclidean), 1.0, 1e-14);

  const TensorField other = random_field(rng, 3, 2);
  EXPECT_EQ(fidelity(w, other, Mask(3, 2, std::vector<std::uint8_t>(6, 0)), 1.1, Metric::LogEuclidean), 0.0);
}

TEST(Fidelity, MatchesDirectSumAndIsMaskMonotone) {
  Rng rng(2);
  for (int t = 0; t < 50; ++t) {
    const TensorField w = random_field(rng, 4, 3), d = random_field(rng, 4, 3);
    Mask m(4, 3);
    double prev = fidelity(w, d, m, 1.3, Metric::LogEuclidean);
    EXPECT_NEAR(prev, brute_force_fidelity(w, d, m, 1.3, Metric::LogEuclidean), 1e-12 * prev);
    for (std::size_t i = 0; i < m.size(); ++i) {
      m.set((i * 5) % m.size(), false);
      const double now = fidelity(w, d, m, 1.3, Metric::LogEuclidean);
      EXPECT_LE(now, prev);
      prev = now;
    }
  }
}

TEST(Fidelity, ShapeMismatch) {
  EXPECT_THROW(fidelity(TensorField(2, 2), TensorField(2, 3), Mask(2, 2), 2.0, Metric::LogEuclidean), InvalidInput);
}

TEST(Phi, Examples) {
  const Mollifier rho = build_mollifier(3);
  EXPECT_EQ(phi_regularizer(TensorField(4, 4), FunctionalParams{}, Metric::LogEuclidean, rho), 0.0);

  const TensorField w(2, 1, {SpdTensor(), SpdTensor::from_matrix(SymMat::diagonal({kE * kE, 1, 1}))});
  EXPECT_NEAR(phi_regularizer(w, params_l0(2.0), Metric::LogEuclidean, rho), 8.0, 1e-13);
}

TEST(Phi, MatchesBruteForce) {
  Rng rng(3);
  for (int l : {0, 1})
    for (Metric metric : {Metric::LogEuclidean, Metric::Euclidean})
      for (int t = 0; t < 5; ++t) {
        FunctionalParams fp;
        fp.p = t % 2 ? 1.1 : 2.0;
        fp.s = 0.3 + 0.1 * t;
        fp.l = l;
        fp.n_rho = 1 + t % 3;
        const Mollifier rho = build_mollifier(fp.n_rho);
        const TensorField w = random_field(rng, 5, 4);
        const double got = phi_regularizer(w, fp, metric, rho);
        const double want = brute_force_phi(w, fp, metric, rho);
        EXPECT_NEAR(got, want, 1e-11 * want);
      }
}

TEST(Phi, LogEuclideanInvariances) {
  Rng rng(4);
  const Mollifier rho = build_mollifier(2);
  FunctionalParams fp;
  fp.n_rho = 2;
  for (int t = 0; t < 10; ++t) {
    const TensorField w = random_field(rng, 4, 4, 2.0);
    const double base = phi_regularizer(w, fp, Metric::LogEuclidean, rho);
    const double c = 0.25 + t;
    const SquareMat u = testing::random_orthogonal(rng);
    const auto scaled = map_field(w, [&](const SpdTensor& a) { return SpdTensor::from_matrix(a.mat() * c); });
    const auto inverted = map_field(w, [](const SpdTensor& a) { return mat_exp(-mat_log(a)); });
    const auto rotated =
        map_field(w, [&](const SpdTensor& a) { return SpdTensor::from_matrix(testing::congruence(u, a.mat())); });
    EXPECT_NEAR(phi_regularizer(scaled, fp, Metric::LogEuclidean, rho), base, 1e-9 * std::max(1.0, base));
    EXPECT_NEAR(phi_regularizer(inverted, fp, Metric::LogEuclidean, rho), base, 1e-9 * std::max(1.0, base));
    EXPECT_NEAR(phi_regularizer(rotated, fp, Metric::LogEuclidean, rho), base, 1e-9 * std::max(1.0, base));
  }
}

TEST(Phi, EuclideanUnitaryButNotScaleInvariant) {
  Rng rng(5);
  const Mollifier rho = build_mollifier(2);
  FunctionalParams fp;
  fp.n_rho = 2;
  const TensorField w = random_field(rng, 4, 4, 1.0);
  const double base = phi_regularizer(w, fp, Metric::Euclidean, rho);
  const SquareMat u = testing::random_orthogonal(rng);
  const auto rotated =
      map_field(w, [&](const SpdTensor& a) { return SpdTensor::from_matrix(testing::congruence(u, a.mat())); });
  EXPECT_NEAR(phi_regularizer(rotated, fp, Metric::Euclidean, rho), base, 1e-9 * base);
  const auto scaled = map_field(w, [](const SpdTensor& a) { return SpdTensor::from_matrix(a.mat() * 3.0); });
  EXPECT_GT(std::abs(phi_regularizer(scaled, fp, Metric::Euclidean, rho) - base), 0.1 * base);
}

TEST(Phi, FlatMollifierOfFullDiameterMatchesAllPairs) {
  Rng rng(6);
  const TensorField w = random_field(rng, 4, 3);
  const int n = 4;  // n^2 >= 3^2 + 2^2, so every pair lies in the disk
  int disk = 0;
  for (int dy = -n; dy <= n; ++dy)
    for (int dx = -n; dx <= n; ++dx) disk += dx * dx + dy * dy <= n * n;
  FunctionalParams fp0 = params_l0(1.4), fp1 = fp0;
  fp1.l = 1;
  fp1.n_rho = n;
  const double all_pairs = phi_regularizer(w, fp0, Metric::LogEuclidean, build_mollifier(1));
  const double gated = phi_regularizer(w, fp1, Metric::LogEuclidean, build_flat_mollifier(n));
  EXPECT_NEAR(gated, all_pairs / disk, 1e-12 * all_pairs);
}

TEST(FunctionalF, Examples) {
  Rng rng(7);
  const TensorField w = random_field(rng, 3, 3);
  const Mask full(3, 3);
  FunctionalParams fp;
  fp.alpha = 0.0;
  EXPECT_EQ(functional_F(w, w, full, fp, Metric::LogEuclidean), 0.0);
  const TensorField d = random_field(rng, 3, 3);
  EXPECT_EQ(functional_F(w, d, full, fp, Metric::LogEuclidean), fidelity(w, d, full, fp.p, Metric::LogEuclidean));

  const TensorField pair(2, 1, {SpdTensor(), SpdTensor::from_matrix(SymMat::diagonal({kE * kE, 1, 1}))});
  FunctionalParams half = params_l0(2.0);
  half.alpha = 0.5;
  EXPECT_NEAR(functional_F(pair, pair, Mask(2, 1), half, Metric::LogEuclidean), 4.0, 1e-13);
}

TEST(FunctionalF, ConvexInLogCoordinates) {
  Rng rng(8);
  for (int t = 0; t < 50; ++t) {
    FunctionalParams fp;
    fp.p = t % 2 ? 1.1 : 2.0;
    fp.n_rho = 2;
    const TensorField data = random_field(rng, 4, 4);
    const ObjectiveFunction f(data, Mask(4, 4), fp, Objective::FLogEuclidean);
    const SymField a = to_log_coords(random_field(rng, 4, 4)), b = to_log_coords(random_field(rng, 4, 4));
    SymField mid = a;
    for (std::size_t k = 0; k < mid.coeffs().size(); ++k) mid.coeffs()[k] = 0.5 * (a.coeffs()[k] + b.coeffs()[k]);
    EXPECT_LE(f.value(mid), 0.5 * f.value(a) + 0.5 * f.value(b) + 1e-9);
  }
}

TEST(Theta, Examples) {
  EXPECT_EQ(theta_regularizer(TensorField(3, 3), 1.5), 0.0);
  SymField x(2, 1);
  x.set(1, SymMat::identity(3));
  EXPECT_NEAR(theta_regularizer(x, 2.0), 3.0, 1e-15);
}

TEST(Theta, MatchesBruteForceAndInvariances) {
  Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    const TensorField w = random_field(rng, 5, 3, 1.0);
    const double p = 1.1 + 0.2 * t / 20.0;
    const double base = theta_regularizer(w, p);
    EXPECT_NEAR(base, testing::brute_force_theta(testing::dense_field(w), 5, 3, p), 1e-12 * base);

    // Translation by a constant symmetric matrix and reflection w -> -w on raw coefficients.
    SymField raw = to_raw_coords(w);
    const SymMat c = testing::random_sym(rng, 10.0);
    SymField shifted = raw, reflected = raw;
    for (std::size_t i = 0; i < raw.size(); ++i) {
      shifted.set(i, raw.at(i) + c);
      reflected.set(i, -raw.at(i));
    }
    EXPECT_NEAR(theta_regularizer(shifted, p), base, 1e-9 * std::max(1.0, base));
    EXPECT_NEAR(theta_regularizer(reflected, p), base, 1e-12 * base);
  }
}

TEST(FunctionalFC, ExamplesAndBruteForce) {
  Rng rng(10);
  const TensorField w = random_field(rng, 3, 4, 1.0);
  FunctionalParams fp;
  fp.beta = 0.0;
  EXPECT_EQ(functional_FC(w, w, Mask(3, 4), fp), 0.0);
  fp.beta = 7.0;
  EXPECT_EQ(functional_FC(TensorField(3, 4), TensorField(3, 4), Mask(3, 4), fp), 0.0);

  for (int t = 0; t < 10; ++t) {
    const TensorField a = random_field(rng, 4, 3, 1.0), d = random_field(rng, 4, 3, 1.0);
    Mask m(4, 3);
    m.set(static_cast<std::size_t>(t), false);
    fp.p = 1.1 + 0.1 * t;
    fp.beta = 0.5 * t;
    const double want = brute_force_fidelity(a, d, m, fp.p, Metric::Euclidean) +
                        fp.beta * testing::brute_force_theta(testing::dense_field(a), 4, 3, fp.p);
    EXPECT_NEAR(functional_FC(a, d, m, fp), want, 1e-12 * want);
  }
}

TEST(LogCoords, RoundTripAndClamp) {
  EXPECT_EQ(testing::l2_norm(to_log_coords(TensorField(3, 2)).coeffs()), 0.0);

  Rng rng(11);
  const TensorField w = random_field(rng, 4, 4, 5.0);
  const TensorField back = from_log_coords(to_log_coords(w));
  for (std::size_t i = 0; i < w.size(); ++i)
    EXPECT_LE(testing::max_abs_diff(back[i].mat().coeffs(), w[i].mat().coeffs()), 1e-9);

  SymField big(2, 1);
  big.set(0, SymMat::diagonal({50, -20, 3}));
  big.set(1, SymMat::diagonal({1, 2, 3}));
  const TensorField clamped = from_log_coords(big, 36.0);
  EXPECT_NEAR(log_norm(clamped[0].mat()), 36.0, 1e-9);
  EXPECT_NEAR(log_norm(clamped[1].mat()), std::sqrt(14.0), 1e-12);
}

TEST(FunctionalParams, Validation) {
  FunctionalParams fp;
  EXPECT_NO_THROW(fp.validate());
  fp.p = 1.0;
  EXPECT_THROW(fp.validate(), InvalidInput);
  fp = FunctionalParams{};
  fp.s = 1.0;
  EXPECT_THROW(fp.validate(), InvalidInput);
  fp = FunctionalParams{};
  fp.alpha = -1.0;
  EXPECT_THROW(fp.validate(), InvalidInput);
  fp = FunctionalParams{};
  fp.l = 2;
  EXPECT_THROW(fp.validate(), InvalidInput);
  fp = FunctionalParams{};
  fp.n_rho = 0;
  EXPECT_THROW(fp.validate(), InvalidInput);
}

TEST(Field, RejectsTensorOutsideBound) {
  std::vector<SpdTensor> t{mat_exp(SymMat::diagonal({5, 0, 0}))};
  EXPECT_THROW(TensorField(1, 1, t, 4.0), DomainError);
}

}  // namespace
}  // namespace spdreg
