#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace spdreg {

/// Dense square matrix, row-major. Used for eigenvector bases and for
/// arbitrary (possibly non-symmetric) inputs to the projections.
class SquareMat {
public:
  explicit SquareMat(int dim = 3);
  SquareMat(int dim, std::initializer_list<double> row_major);

  static SquareMat identity(int dim);

  int dim() const noexcept { return dim_; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i * dim_ + j)]; }
  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i * dim_ + j)]; }
  std::span<const double> data() const noexcept { return a_; }

  SquareMat transposed() const;
  SquareMat operator*(const SquareMat& rhs) const;
  SquareMat operator+(const SquareMat& rhs) const;
  SquareMat operator-(const SquareMat& rhs) const;
  SquareMat operator*(double c) const;

private:
  int dim_;
  std::vector<double> a_;
};

/// Real symmetric matrix stored by its dim*(dim+1)/2 free coefficients.
///
/// Layout: the diagonal first, then the strict upper triangle row by row.
/// For dim = 3 that is [a11, a22, a33, a12, a13, a23].
class SymMat {
public:
  explicit SymMat(int dim = 3);

  static SymMat identity(int dim = 3);
  static SymMat diagonal(std::span<const double> diag);
  static SymMat diagonal(std::initializer_list<double> diag);
  /// Throws InvalidInput if the length does not match or an entry is not finite.
  static SymMat from_coeffs(int dim, std::span<const double> coeffs);
  static SymMat from_coeffs(std::initializer_list<double> coeffs);
  /// Symmetric part (A + A^T) / 2.
  static SymMat symmetric_part(const SquareMat& a);

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return c_.size(); }

  double operator()(int i, int j) const { return c_[index(dim_, i, j)]; }
  void set(int i, int j, double v) { c_[index(dim_, i, j)] = v; }

  std::span<const double> coeffs() const noexcept { return c_; }
  std::span<double> coeffs() noexcept { return c_; }

  bool is_finite() const noexcept;
  SquareMat dense() const;

  SymMat operator+(const SymMat& rhs) const;
  SymMat operator-(const SymMat& rhs) const;
  SymMat operator*(double c) const;
  SymMat operator-() const { return *this * -1.0; }
  bool operator==(const SymMat& rhs) const = default;

  static constexpr std::size_t coeff_count(int dim) noexcept {
    return static_cast<std::size_t>(dim * (dim + 1) / 2);
  }
  /// Position of entry (i, j) in the coefficient vector.
  static std::size_t index(int dim, int i, int j) noexcept;
  /// 1 for diagonal coefficients, 2 for off-diagonal ones: the number of
  /// times the coefficient appears in the full matrix.
  static double multiplicity(int dim, std::size_t k) noexcept {
    return k < static_cast<std::size_t>(dim) ? 1.0 : 2.0;
  }

private:
  int dim_;
  std::vector<double> c_;
};

inline SymMat operator*(double c, const SymMat& m) { return m * c; }

}  // namespace spdreg
