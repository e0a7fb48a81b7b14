#include "spdreg/matrix.hpp"

#include <cmath>
#include <string>

#include "spdreg/errors.hpp"

namespace spdreg {

SquareMat::SquareMat(int dim) : dim_(dim), a_(static_cast<std::size_t>(dim * dim), 0.0) {
  if (dim < 1) throw InvalidInput("matrix dimension must be positive");
}

SquareMat::SquareMat(int dim, std::initializer_list<double> row_major) : SquareMat(dim) {
  if (row_major.size() != a_.size())
    throw InvalidInput("expected " + std::to_string(a_.size()) + " entries");
  std::size_t k = 0;
  for (double v : row_major) a_[k++] = v;
}

SquareMat SquareMat::identity(int dim) {
  SquareMat m(dim);
  for (int i = 0; i < dim; ++i) m(i, i) = 1.0;
  return m;
}

SquareMat SquareMat::transposed() const {
  SquareMat t(dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

SquareMat SquareMat::operator*(const SquareMat& rhs) const {
  if (rhs.dim_ != dim_) throw InvalidInput("dimension mismatch in matrix product");
  SquareMat r(dim_);
  for (int i = 0; i < dim_; ++i)
    for (int k = 0; k < dim_; ++k) {
      const double aik = (*this)(i, k);
      for (int j = 0; j < dim_; ++j) r(i, j) += aik * rhs(k, j);
    }
  return r;
}

SquareMat SquareMat::operator+(const SquareMat& rhs) const {
  if (rhs.dim_ != dim_) throw InvalidInput("dimension mismatch");
  SquareMat r(*this);
  for (std::size_t k = 0; k < a_.size(); ++k) r.a_[k] += rhs.a_[k];
  return r;
}

SquareMat SquareMat::operator-(const SquareMat& rhs) const { return *this + rhs * -1.0; }

SquareMat SquareMat::operator*(double c) const {
  SquareMat r(*this);
  for (double& v : r.a_) v *= c;
  return r;
}

SymMat::SymMat(int dim) : dim_(dim), c_(coeff_count(dim), 0.0) {
  if (dim < 1) throw InvalidInput("matrix dimension must be positive");
}

SymMat SymMat::identity(int dim) {
  SymMat m(dim);
  for (int i = 0; i < dim; ++i) m.c_[static_cast<std::size_t>(i)] = 1.0;
  return m;
}

SymMat SymMat::diagonal(std::span<const double> diag) {
  SymMat m(static_cast<int>(diag.size()));
  for (std::size_t i = 0; i < diag.size(); ++i) m.c_[i] = diag[i];
  return m;
}

SymMat SymMat::diagonal(std::initializer_list<double> diag) {
  return diagonal(std::span<const double>(diag.begin(), diag.size()));
}

SymMat SymMat::from_coeffs(int dim, std::span<const double> coeffs) {
  SymMat m(dim);
  if (coeffs.size() != m.c_.size())
    throw InvalidInput("expected " + std::to_string(m.c_.size()) + " coefficients, got " +
                       std::to_string(coeffs.size()));
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (!std::isfinite(coeffs[k])) throw InvalidInput("non-finite matrix coefficient");
    m.c_[k] = coeffs[k];
  }
  return m;
}

SymMat SymMat::from_coeffs(std::initializer_list<double> coeffs) {
  // Infer the dimension from n(n+1)/2.
  int dim = 1;
  while (coeff_count(dim) < coeffs.size()) ++dim;
  return from_coeffs(dim, std::span<const double>(coeffs.begin(), coeffs.size()));
}

SymMat SymMat::symmetric_part(const SquareMat& a) {
  SymMat m(a.dim());
  for (int i = 0; i < a.dim(); ++i)
    for (int j = i; j < a.dim(); ++j) m.set(i, j, 0.5 * (a(i, j) + a(j, i)));
  return m;
}

std::size_t SymMat::index(int dim, int i, int j) noexcept {
  if (i == j) return static_cast<std::size_t>(i);
  if (i > j) std::swap(i, j);
  // Off-diagonals of rows 0..i-1 precede row i.
  const int before = i * (dim - 1) - i * (i - 1) / 2;
  return static_cast<std::size_t>(dim + before + (j - i - 1));
}

bool SymMat::is_finite() const noexcept {
  for (double v : c_)
    if (!std::isfinite(v)) return false;
  return true;
}

SquareMat SymMat::dense() const {
  SquareMat a(dim_);
  for (int i = 0; i < dim_; ++i)
    for (int j = 0; j < dim_; ++j) a(i, j) = (*this)(i, j);
  return a;
}

SymMat SymMat::operator+(const SymMat& rhs) const {
  if (rhs.dim_ != dim_) throw InvalidInput("dimension mismatch");
  SymMat r(*this);
  for (std::size_t k = 0; k < c_.size(); ++k) r.c_[k] += rhs.c_[k];
  return r;
}

SymMat SymMat::operator-(const SymMat& rhs) const {
  if (rhs.dim_ != dim_) throw InvalidInput("dimension mismatch");
  SymMat r(*this);
  for (std::size_t k = 0; k < c_.size(); ++k) r.c_[k] -= rhs.c_[k];
  return r;
}

SymMat SymMat::operator*(double c) const {
  SymMat r(*this);
  for (double& v : r.c_) v *= c;
  return r;
}

}  // namespace spdreg
