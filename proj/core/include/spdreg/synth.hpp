#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "spdreg/field.hpp"
#include "spdreg/rng.hpp"

namespace spdreg {

using Vec3 = std::array<double, 3>;

inline constexpr double kDefaultBValue = 800.0;  // s/mm^2
inline constexpr double kDefaultA0 = 1000.0;

/// Diffusion-weighted images: one scalar image per gradient direction.
struct DwiSet {
  int width = 0;
  int height = 0;
  std::vector<Vec3> directions;
  double b_value = kDefaultBValue;
  double a0 = kDefaultA0;
  /// images[k][pixel], row-major pixels.
  std::vector<std::vector<double>> images;

  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  }
  /// Unit directions, consistent sizes, nonnegative finite values.
  void validate() const;
};

struct NoiseSpec {
  double sigma2 = 0.0;
  std::uint64_t seed = 0;
};

/// a0 * exp(-b g^T w g).
double stejskal_tanner_forward(const SpdTensor& w, double b, const Vec3& g, double a0);

/// The 12 vertices of a regular icosahedron, normalized.
std::vector<Vec3> default_directions();

/// Rician corruption sqrt((value + n1)^2 + n2^2), n1, n2 ~ N(0, sigma2),
/// drawn as one Box-Muller pair (n1 first).
double add_rician(double value, double sigma2, CounterRng& rng);

/// Forward-simulates every direction at every pixel.
DwiSet simulate_dwis(const TensorField& w, double b, double a0, const std::vector<Vec3>& directions);

/// In-place Rician noise. Pixel i uses CounterRng(seed, i) and visits the
/// directions in order.
void add_rician_noise(DwiSet& dwis, const NoiseSpec& spec);

/// Unweighted linear least squares on log signals at one pixel, followed
/// by project_full(eps, z). Values <= 0 are clamped to 1e-12.
SpdTensor fit_tensor_ls(const DwiSet& dwis, std::size_t pixel, double eps = kDefaultEpsilon,
                        double z = kDefaultLogBound);
TensorField fit_field(const DwiSet& dwis, double eps = kDefaultEpsilon, double z = kDefaultLogBound);

/// simulate, add noise, refit, project.
TensorField corrupt_field(const TensorField& w, const NoiseSpec& spec, double b = kDefaultBValue,
                          double a0 = kDefaultA0, const std::vector<Vec3>& directions = default_directions(),
                          double eps = kDefaultEpsilon, double z = kDefaultLogBound);

/// N x N field. Column x holds diag(0.5e-3 + x/(N-1) * 3e-3, 0.5e-3, 0.5e-3):
/// isotropic on the left, the first eigenvalue growing to 3.5e-3 on the right.
TensorField make_staircase_phantom(int n);

/// N x N field with isotropic 0.5e-3 background and an L-shaped band of
/// tensors with principal eigenvalue 3e-3 (others 0.5e-3) oriented along
/// the band: a vertical arm from the top edge, a diagonal kink block, and
/// a horizontal arm out to the right edge.
TensorField make_main_direction_phantom(int n);

/// True everywhere except a centered side x side square.
Mask centered_square_mask(int width, int height, int side);

}  // namespace spdreg
