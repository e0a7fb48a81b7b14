#pragma once

#include <limits>
#include <vector>

#include "spdreg/matrix.hpp"

namespace spdreg {

/// Lower eigenvalue bound used by the full projection: 64-bit machine epsilon.
inline constexpr double kDefaultEpsilon = std::numeric_limits<double>::epsilon();
/// Default log-norm bound. Eigenvalues of admissible tensors lie in [e^-36, e^36].
inline constexpr double kDefaultLogBound = 36.0;

/// Eigendecomposition of a symmetric matrix.
/// values are sorted descending; column i of vectors belongs to values[i].
struct EigenPair {
  std::vector<double> values;
  SquareMat vectors;
};

/// Symmetric positive-definite matrix whose logarithm has Frobenius norm at
/// most log_bound(). Eigenvalues therefore lie in [e^-z, e^z].
///
/// The spectral decomposition is kept next to the matrix. Tensors built by
/// mat_exp or a projection carry the exact eigenvalues they were assembled
/// from, so Log and the projections stay accurate even when the condition
/// number is far beyond what re-diagonalizing the matrix could resolve.
class SpdTensor {
public:
  SpdTensor();

  /// Accepts m if it is positive definite; the bound is ||Log m||_F.
  /// Throws DomainError otherwise.
  static SpdTensor from_matrix(const SymMat& m);
  /// Accepts m if it is positive definite and ||Log m||_F <= z (1e-9 slack).
  static SpdTensor certify(const SymMat& m, double z);

  const SymMat& mat() const noexcept { return mat_; }
  const EigenPair& spectrum() const noexcept { return eig_; }
  double log_bound() const noexcept { return bound_; }
  int dim() const noexcept { return mat_.dim(); }

  /// Same tensor with a different recorded bound. Throws DomainError if the
  /// bound is below the tensor's log norm (1e-9 slack).
  SpdTensor with_bound(double bound) const;

  bool operator==(const SpdTensor& rhs) const { return mat_ == rhs.mat_; }

private:
  friend SpdTensor make_spd_spectral(EigenPair eig, double bound);
  SpdTensor(SymMat m, EigenPair eig, double bound) : mat_(std::move(m)), eig_(std::move(eig)), bound_(bound) {}

  SymMat mat_;
  EigenPair eig_;
  double bound_;
};

/// Assembles V diag(values) V^T from positive eigenvalues the caller
/// guarantees, recording the given log bound. No checks.
SpdTensor make_spd_spectral(EigenPair eig, double bound);

/// Identity tensor of the given dimension.
SpdTensor spd_identity(int dim);

/// Cyclic Jacobi eigendecomposition. Each eigenvector is signed so its
/// largest-magnitude component is positive.
EigenPair sym_eig(const SymMat& m);

/// Rebuilds V diag(values) V^T.
SymMat reassemble(const SquareMat& vectors, const std::vector<double>& values);

/// Frobenius norm of the full matrix (off-diagonals counted twice).
double frobenius(const SymMat& m);
double frobenius(const SquareMat& m);
/// Squared Frobenius norm of a - b.
double frobenius_dist_sq(const SymMat& a, const SymMat& b);

SpdTensor mat_exp(const SymMat& s);
SymMat mat_log(const SpdTensor& a);
/// Log of an arbitrary symmetric matrix; DomainError if an eigenvalue is <= 0.
SymMat mat_log(const SymMat& a);
/// ||Log a||_F computed from eigenvalues.
double log_norm(const SymMat& a);

double dist_log_euclidean(const SpdTensor& a, const SpdTensor& b);
double dist_affine_invariant(const SpdTensor& a, const SpdTensor& b);
double dist_euclidean(const SpdTensor& a, const SpdTensor& b);

/// Closest matrix (Frobenius) to a with spectrum in [lo, hi]. Non-symmetric
/// input is symmetrized first. The returned bound is the exact log norm.
SpdTensor project_spec(const SquareMat& a, double lo, double hi = std::numeric_limits<double>::infinity());
SpdTensor project_spec(const SymMat& a, double lo, double hi = std::numeric_limits<double>::infinity());

/// Rescales log-eigenvalues so that ||Log||_F <= z.
SpdTensor project_log_ball(const SpdTensor& a, double z);

/// project_log_ball(project_spec(a, eps, inf), z).
SpdTensor project_full(const SquareMat& a, double eps = kDefaultEpsilon, double z = kDefaultLogBound);
SpdTensor project_full(const SymMat& a, double eps = kDefaultEpsilon, double z = kDefaultLogBound);
/// Same projection driven by the stored spectrum of a.
SpdTensor project_full(const SpdTensor& a, double eps = kDefaultEpsilon, double z = kDefaultLogBound);

/// project_full expressed on logarithms: returns Log(project_full(Exp l))
/// without forming Exp l, so it is safe for any finite l. Returns l
/// unchanged (bit for bit) when l already satisfies both constraints.
SymMat project_log_coords(const SymMat& l, double eps = kDefaultEpsilon, double z = kDefaultLogBound);

/// Log-Euclidean geodesic; t = 0 gives a, t = 1 gives b.
SpdTensor geodesic(const SpdTensor& a, const SpdTensor& b, double t);

/// Fractional anisotropy of a 3x3 tensor, in [0, 1].
double fractional_anisotropy(const SpdTensor& a);
double fractional_anisotropy(const std::vector<double>& eigenvalues);

}  // namespace spdreg
