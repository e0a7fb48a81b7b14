#pragma once

#include <vector>

#include "spdreg/field.hpp"

namespace spdreg {

enum class Metric { LogEuclidean, Euclidean };

/// Discrete radially symmetric bump kernel on the lattice disk of radius
/// n_rho, normalized to unit sum.
class Mollifier {
public:
  int radius() const noexcept { return radius_; }
  /// Zero outside the disk dx^2 + dy^2 <= radius^2.
  double operator()(int dx, int dy) const;
  const std::vector<double>& weights() const noexcept { return w_; }

private:
  friend Mollifier build_mollifier(int n_rho);
  friend Mollifier build_flat_mollifier(int n_rho);
  int radius_ = 0;
  std::vector<double> w_;  // (2r+1)^2, row-major in (dy, dx)
};

/// w(dx, dy) proportional to exp(-1 / (1 - r^2)), r = |(dx, dy)| / (n_rho + 1/2).
Mollifier build_mollifier(int n_rho);
/// Constant weight on the lattice disk, normalized to unit sum.
Mollifier build_flat_mollifier(int n_rho);

struct FunctionalParams {
  double p = 1.1;
  double s = 0.5;
  double alpha = 1.0;
  double beta = 1.0;
  int l = 1;
  int n_rho = 3;
  double z = kDefaultLogBound;
  double epsilon = kDefaultEpsilon;

  /// Throws InvalidInput naming the first out-of-range field.
  void validate() const;
};

/// Precomputed pair weights rho^l(d) / |d|^(2 + p s) for every lattice
/// offset d != 0 that the double sum visits.
struct PairKernel {
  struct Offset {
    int dx;
    int dy;
    double weight;
  };
  std::vector<Offset> offsets;

  /// l = 1: offsets in the mollifier's support. l = 0: every offset that
  /// fits in a width x height grid.
  static PairKernel build(const FunctionalParams& params, const Mollifier& mollifier, int width, int height);
};

/// ||a - b||_F^p between two coefficient blocks (full-matrix Frobenius).
double block_dist_pow(std::span<const double> a, std::span<const double> b, int dim, double p);

// Evaluations on coefficient fields. In log coordinates these are the
// log-Euclidean quantities; on raw coefficients the Euclidean ones.

double fidelity(const SymField& x, const SymField& data, const Mask& mask, double p);
double phi_regularizer(const SymField& x, const PairKernel& kernel, double p);
/// Sum over pixels of ||grad x||_F^p with forward differences and a zero
/// difference past the last row/column.
double theta_regularizer(const SymField& x, double p);

// Evaluations on tensor fields.

double fidelity(const TensorField& w, const TensorField& data, const Mask& mask, double p, Metric metric);
double phi_regularizer(const TensorField& w, const FunctionalParams& params, Metric metric, const Mollifier& mollifier);
double functional_F(const TensorField& w, const TensorField& data, const Mask& mask,
                    const FunctionalParams& params, Metric metric, const Mollifier& mollifier);
double functional_F(const TensorField& w, const TensorField& data, const Mask& mask,
                    const FunctionalParams& params, Metric metric);
double theta_regularizer(const TensorField& w, double p);
/// Euclidean fidelity plus beta * theta.
double functional_FC(const TensorField& w, const TensorField& data, const Mask& mask, const FunctionalParams& params);

/// Coordinates in which `metric` becomes the Frobenius distance.
SymField to_coords(const TensorField& w, Metric metric);

}  // namespace spdreg
