#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "spdreg/spd.hpp"

namespace spdreg {

/// Row-major grid of SPD tensors sharing a common log-norm bound z.
/// Pixel spacing is one unit in both directions.
class TensorField {
public:
  /// Field filled with identity tensors.
  TensorField(int width, int height, double z = kDefaultLogBound, int dim = 3);
  /// Throws DomainError if a tensor's log bound exceeds z.
  TensorField(int width, int height, std::vector<SpdTensor> tensors, double z = kDefaultLogBound);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return tensors_.size(); }
  double z() const noexcept { return z_; }
  int dim() const noexcept { return tensors_.front().dim(); }

  std::size_t index(int x, int y) const noexcept {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(x);
  }
  const SpdTensor& operator[](std::size_t i) const { return tensors_[i]; }
  const SpdTensor& at(int x, int y) const { return tensors_[index(x, y)]; }
  /// Throws DomainError if t's log bound exceeds z().
  void set(std::size_t i, SpdTensor t);

  std::span<const SpdTensor> tensors() const noexcept { return tensors_; }

private:
  int width_;
  int height_;
  double z_;
  std::vector<SpdTensor> tensors_;
};

/// Grid of symmetric matrices stored as a flat coefficient vector (the
/// SymMat layout, one block per pixel). Holds log coordinates during
/// optimization and raw coefficients for the Euclidean objectives.
class SymField {
public:
  SymField(int width, int height, int dim = 3);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_); }
  std::size_t block() const noexcept { return SymMat::coeff_count(dim_); }

  std::span<const double> pixel(std::size_t i) const { return {c_.data() + i * block(), block()}; }
  std::span<double> pixel(std::size_t i) { return {c_.data() + i * block(), block()}; }
  SymMat at(std::size_t i) const { return SymMat::from_coeffs(dim_, pixel(i)); }
  void set(std::size_t i, const SymMat& m);

  std::span<const double> coeffs() const noexcept { return c_; }
  std::span<double> coeffs() noexcept { return c_; }

  bool same_shape(const SymField& o) const noexcept {
    return width_ == o.width_ && height_ == o.height_ && dim_ == o.dim_;
  }

private:
  int width_;
  int height_;
  int dim_;
  std::vector<double> c_;
};

/// Data indicator: true where the pixel carries data (outside the
/// inpainting domain).
class Mask {
public:
  /// All pixels present.
  Mask(int width, int height);
  Mask(int width, int height, std::vector<std::uint8_t> present);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return v_.size(); }
  bool operator[](std::size_t i) const { return v_[i] != 0; }
  bool at(int x, int y) const { return v_[static_cast<std::size_t>(y * width_ + x)] != 0; }
  void set(std::size_t i, bool present) { v_[i] = present ? 1 : 0; }
  std::size_t count() const noexcept;
  /// Throws InvalidInput if no pixel carries data.
  void require_nonempty() const;

private:
  int width_;
  int height_;
  std::vector<std::uint8_t> v_;
};

/// Log coordinates, pixel by pixel.
SymField to_log_coords(const TensorField& w);
/// Exp of each pixel after projecting onto the admissible set (eps, z).
TensorField from_log_coords(const SymField& l, double z = kDefaultLogBound, double eps = kDefaultEpsilon);
/// Raw matrix coefficients, pixel by pixel.
SymField to_raw_coords(const TensorField& w);
/// project_full on each pixel.
TensorField from_raw_coords(const SymField& c, double z = kDefaultLogBound, double eps = kDefaultEpsilon);

void require_same_shape(const TensorField& a, const TensorField& b);
void require_same_shape(const TensorField& a, const Mask& m);

}  // namespace spdreg
