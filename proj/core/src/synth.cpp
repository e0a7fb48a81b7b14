#include "spdreg/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "spdreg/errors.hpp"
#include "spdreg/parallel.hpp"

namespace spdreg {
namespace {

constexpr double kSignalFloor = 1e-12;
constexpr int kTensorCoeffs = 6;

// Row of the design matrix: g^T W g = sum_k row[k] * coeff[k] in SymMat layout.
std::array<double, kTensorCoeffs> design_row(const Vec3& g) {
  return {g[0] * g[0], g[1] * g[1], g[2] * g[2], 2 * g[0] * g[1], 2 * g[0] * g[2], 2 * g[1] * g[2]};
}

std::string describe(const std::vector<Vec3>& dirs) {
  std::ostringstream os;
  os << "{";
  for (std::size_t k = 0; k < dirs.size(); ++k)
    os << (k ? ", " : "") << "(" << dirs[k][0] << " " << dirs[k][1] << " " << dirs[k][2] << ")";
  os << "}";
  return os.str();
}

// Householder QR of the K x 6 design matrix; solves min ||A c - y||.
class DesignSolver {
public:
  explicit DesignSolver(const std::vector<Vec3>& dirs) : rows_(dirs.size()) {
    if (rows_ < kTensorCoeffs)
      throw InvalidInput("tensor fit needs at least 6 directions, got " + std::to_string(rows_));
    a_.resize(rows_ * kTensorCoeffs);
    for (std::size_t r = 0; r < rows_; ++r) {
      const auto row = design_row(dirs[r]);
      std::copy(row.begin(), row.end(), a_.begin() + static_cast<std::ptrdiff_t>(r * kTensorCoeffs));
    }
    double max_diag = 0.0;
    for (int c = 0; c < kTensorCoeffs; ++c) {
      double norm = 0.0;
      for (std::size_t r = static_cast<std::size_t>(c); r < rows_; ++r) norm += at(r, c) * at(r, c);
      norm = std::sqrt(norm);
      const double alpha = at(static_cast<std::size_t>(c), c) > 0 ? -norm : norm;
      std::vector<double> v(rows_, 0.0);
      for (std::size_t r = static_cast<std::size_t>(c); r < rows_; ++r) v[r] = at(r, c);
      v[static_cast<std::size_t>(c)] -= alpha;
      const double vnorm_sq = [&] {
        double s = 0.0;
        for (double x : v) s += x * x;
        return s;
      }();
      if (vnorm_sq > 0.0) {
        for (int cc = c; cc < kTensorCoeffs; ++cc) {
          double d = 0.0;
          for (std::size_t r = static_cast<std::size_t>(c); r < rows_; ++r) d += v[r] * at(r, cc);
          const double f = 2.0 * d / vnorm_sq;
          for (std::size_t r = static_cast<std::size_t>(c); r < rows_; ++r) at(r, cc) -= f * v[r];
        }
      }
      reflectors_.push_back({std::move(v), vnorm_sq});
      diag_[static_cast<std::size_t>(c)] = at(static_cast<std::size_t>(c), c);
      max_diag = std::max(max_diag, std::abs(diag_[static_cast<std::size_t>(c)]));
    }
    for (double d : diag_)
      if (std::abs(d) <= 1e-10 * max_diag)
        throw InvalidInput("direction set " + describe(dirs) + " gives a rank-deficient tensor design");
  }

  std::array<double, kTensorCoeffs> solve(std::vector<double> y) const {
    for (std::size_t c = 0; c < reflectors_.size(); ++c) {
      const auto& [v, vnorm_sq] = reflectors_[c];
      if (vnorm_sq == 0.0) continue;
      double d = 0.0;
      for (std::size_t r = c; r < rows_; ++r) d += v[r] * y[r];
      const double f = 2.0 * d / vnorm_sq;
      for (std::size_t r = c; r < rows_; ++r) y[r] -= f * v[r];
    }
    std::array<double, kTensorCoeffs> x{};
    for (int c = kTensorCoeffs - 1; c >= 0; --c) {
      double s = y[static_cast<std::size_t>(c)];
      for (int cc = c + 1; cc < kTensorCoeffs; ++cc) s -= at(static_cast<std::size_t>(c), cc) * x[static_cast<std::size_t>(cc)];
      x[static_cast<std::size_t>(c)] = s / diag_[static_cast<std::size_t>(c)];
    }
    return x;
  }

private:
  double at(std::size_t r, int c) const { return a_[r * kTensorCoeffs + static_cast<std::size_t>(c)]; }
  double& at(std::size_t r, int c) { return a_[r * kTensorCoeffs + static_cast<std::size_t>(c)]; }

  std::size_t rows_;
  std::vector<double> a_;
  std::array<double, kTensorCoeffs> diag_{};
  std::vector<std::pair<std::vector<double>, double>> reflectors_;
};

SpdTensor fit_pixel(const DwiSet& dwis, const DesignSolver& solver, std::size_t pixel, double eps, double z) {
  std::vector<double> y(dwis.directions.size());
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double a = std::max(dwis.images[k][pixel], kSignalFloor);
    y[k] = -std::log(a / dwis.a0) / dwis.b_value;
  }
  const auto c = solver.solve(std::move(y));
  return project_full(SymMat::from_coeffs(3, c), eps, z);
}

SpdTensor band_tensor(const Vec3& axis) {
  constexpr double kBase = 0.5e-3;
  constexpr double kExcess = 3.0e-3 - kBase;
  SymMat m = SymMat::identity(3) * kBase;
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) m.set(i, j, m(i, j) + kExcess * axis[static_cast<std::size_t>(i)] * axis[static_cast<std::size_t>(j)]);
  return SpdTensor::from_matrix(m);
}

}  // namespace

void DwiSet::validate() const {
  if (width < 1 || height < 1) throw InvalidInput("DWI set dimensions must be positive");
  if (directions.empty()) throw InvalidInput("DWI set has no directions");
  if (images.size() != directions.size()) throw InvalidInput("DWI image count does not match direction count");
  if (!(b_value > 0.0) || !std::isfinite(b_value)) throw InvalidInput("b-value must be positive");
  if (!(a0 > 0.0) || !std::isfinite(a0)) throw InvalidInput("a0 must be positive");
  for (const Vec3& g : directions) {
    const double n = std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
    if (std::abs(n - 1.0) > 1e-9) throw InvalidInput("gradient direction is not a unit vector");
  }
  for (const auto& img : images) {
    if (img.size() != pixel_count()) throw InvalidInput("DWI image size does not match dimensions");
    for (double v : img)
      if (!(v >= 0.0) || !std::isfinite(v)) throw InvalidInput("DWI values must be finite and nonnegative");
  }
}

double stejskal_tanner_forward(const SpdTensor& w, double b, const Vec3& g, double a0) {
  const auto row = design_row(g);
  const auto c = w.mat().coeffs();
  double q = 0.0;
  for (int k = 0; k < kTensorCoeffs; ++k) q += row[static_cast<std::size_t>(k)] * c[static_cast<std::size_t>(k)];
  return a0 * std::exp(-b * q);
}

std::vector<Vec3> default_directions() {
  const double phi = std::numbers::phi;
  const double norm = std::sqrt(1.0 + phi * phi);
  std::vector<Vec3> dirs;
  for (double s1 : {1.0, -1.0})
    for (double s2 : {1.0, -1.0}) {
      dirs.push_back({0.0, s1 / norm, s2 * phi / norm});
      dirs.push_back({s1 / norm, s2 * phi / norm, 0.0});
      dirs.push_back({s2 * phi / norm, 0.0, s1 / norm});
    }
  return dirs;
}

double add_rician(double value, double sigma2, CounterRng& rng) {
  if (!(value >= 0.0)) throw InvalidInput("Rician input must be nonnegative");
  if (!(sigma2 >= 0.0)) throw InvalidInput("sigma2 must be nonnegative");
  const auto [g1, g2] = rng.normal_pair();
  if (sigma2 == 0.0) return value;
  const double sigma = std::sqrt(sigma2);
  return std::hypot(value + sigma * g1, sigma * g2);
}

DwiSet simulate_dwis(const TensorField& w, double b, double a0, const std::vector<Vec3>& directions) {
  if (w.dim() != 3) throw InvalidInput("DWI simulation needs 3x3 tensors");
  DwiSet d;
  d.width = w.width();
  d.height = w.height();
  d.directions = directions;
  d.b_value = b;
  d.a0 = a0;
  d.images.assign(directions.size(), std::vector<double>(w.size(), 0.0));
  for (std::size_t k = 0; k < directions.size(); ++k)
    for (std::size_t i = 0; i < w.size(); ++i) d.images[k][i] = stejskal_tanner_forward(w[i], b, directions[k], a0);
  d.validate();
  return d;
}

void add_rician_noise(DwiSet& dwis, const NoiseSpec& spec) {
  if (!(spec.sigma2 >= 0.0)) throw InvalidInput("sigma2 must be nonnegative");
  parallel_for(dwis.pixel_count(), [&](std::size_t i) {
    CounterRng rng(spec.seed, i);
    for (auto& img : dwis.images) img[i] = add_rician(img[i], spec.sigma2, rng);
  });
}

SpdTensor fit_tensor_ls(const DwiSet& dwis, std::size_t pixel, double eps, double z) {
  dwis.validate();
  if (pixel >= dwis.pixel_count()) throw InvalidInput("pixel index out of range");
  const DesignSolver solver(dwis.directions);
  return fit_pixel(dwis, solver, pixel, eps, z);
}

TensorField fit_field(const DwiSet& dwis, double eps, double z) {
  dwis.validate();
  const DesignSolver solver(dwis.directions);
  std::vector<SpdTensor> out(dwis.pixel_count());
  parallel_for(out.size(), [&](std::size_t i) { out[i] = fit_pixel(dwis, solver, i, eps, z); });
  return TensorField(dwis.width, dwis.height, std::move(out), z);
}

TensorField corrupt_field(const TensorField& w, const NoiseSpec& spec, double b, double a0,
                          const std::vector<Vec3>& directions, double eps, double z) {
  DwiSet d = simulate_dwis(w, b, a0, directions);
  add_rician_noise(d, spec);
  return fit_field(d, eps, z);
}

TensorField make_staircase_phantom(int n) {
  if (n < 2) throw InvalidInput("phantom size must be at least 2");
  std::vector<SpdTensor> t;
  t.reserve(static_cast<std::size_t>(n * n));
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const double grow = 0.5e-3 + static_cast<double>(x) / (n - 1) * 3.0e-3;
      t.push_back(SpdTensor::from_matrix(SymMat::diagonal({grow, 0.5e-3, 0.5e-3})));
    }
  return TensorField(n, n, std::move(t));
}

TensorField make_main_direction_phantom(int n) {
  if (n < 4) throw InvalidInput("main-direction phantom needs size >= 4");
  const int band = std::max(1, n / 5);
  const int col0 = n / 4;
  const int row0 = n / 2;
  const double r = 1.0 / std::sqrt(2.0);
  const SpdTensor background = SpdTensor::from_matrix(SymMat::identity(3) * 0.5e-3);
  const SpdTensor vertical = band_tensor({0.0, 1.0, 0.0});
  const SpdTensor horizontal = band_tensor({1.0, 0.0, 0.0});
  const SpdTensor kink = band_tensor({r, r, 0.0});

  std::vector<SpdTensor> t;
  t.reserve(static_cast<std::size_t>(n * n));
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const bool in_cols = x >= col0 && x < col0 + band;
      const bool in_rows = y >= row0 && y < row0 + band;
      if (in_cols && y < row0)
        t.push_back(vertical);
      else if (in_cols && in_rows)
        t.push_back(kink);
      else if (in_rows && x >= col0 + band)
        t.push_back(horizontal);
      else
        t.push_back(background);
    }
  return TensorField(n, n, std::move(t));
}

Mask centered_square_mask(int width, int height, int side) {
  if (side < 1 || side > width || side > height) throw InvalidInput("square does not fit the grid");
  Mask m(width, height);
  const int x0 = (width - side) / 2, y0 = (height - side) / 2;
  for (int y = y0; y < y0 + side; ++y)
    for (int x = x0; x < x0 + side; ++x) m.set(static_cast<std::size_t>(y * width + x), false);
  return m;
}

}  // namespace spdreg
