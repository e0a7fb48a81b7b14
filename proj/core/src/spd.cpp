#include "spdreg/spd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "spdreg/errors.hpp"

namespace spdreg {
namespace {

constexpr double kJacobiTolerance = 1e-14;
constexpr int kJacobiMaxSweeps = 100;
// Largest x with exp(x) finite in binary64.
constexpr double kMaxExpArgument = 709.78;
// Slack when certifying a log-norm bound that was produced by a projection.
constexpr double kBoundSlack = 1e-9;

double off_diagonal_norm(const SquareMat& a) {
  double s = 0.0;
  for (int p = 0; p < a.dim(); ++p)
    for (int q = p + 1; q < a.dim(); ++q) s += 2.0 * a(p, q) * a(p, q);
  return std::sqrt(s);
}

// Applies f to the eigenvalues of m and reassembles.
template <typename F>
SymMat apply_spectral(const EigenPair& eig, F&& f) {
  std::vector<double> mapped(eig.values.size());
  std::transform(eig.values.begin(), eig.values.end(), mapped.begin(), f);
  return reassemble(eig.vectors, mapped);
}

double log_norm_of_values(const std::vector<double>& values) {
  double s = 0.0;
  for (double v : values) {
    const double l = std::log(v);
    s += l * l;
  }
  return std::sqrt(s);
}

void require_positive(const EigenPair& eig, const char* what) {
  for (double v : eig.values)
    if (!(v > 0.0) || !std::isfinite(v))
      throw DomainError(std::string(what) + ": matrix is not positive definite (eigenvalue " +
                        std::to_string(v) + ")");
}

}  // namespace

SpdTensor make_spd_spectral(EigenPair eig, double bound) {
  SymMat m = reassemble(eig.vectors, eig.values);
  return SpdTensor(std::move(m), std::move(eig), bound);
}

SpdTensor spd_identity(int dim) {
  return make_spd_spectral(EigenPair{std::vector<double>(static_cast<std::size_t>(dim), 1.0), SquareMat::identity(dim)},
                           0.0);
}

SpdTensor::SpdTensor() : SpdTensor(spd_identity(3)) {}

SpdTensor SpdTensor::from_matrix(const SymMat& m) {
  if (!m.is_finite()) throw InvalidInput("non-finite tensor coefficient");
  EigenPair eig = sym_eig(m);
  require_positive(eig, "SpdTensor");
  const double bound = log_norm_of_values(eig.values);
  return SpdTensor(m, std::move(eig), bound);
}

SpdTensor SpdTensor::with_bound(double bound) const {
  const double actual = log_norm_of_values(eig_.values);
  if (actual > bound + kBoundSlack)
    throw DomainError("tensor log-norm " + std::to_string(actual) + " exceeds bound " + std::to_string(bound));
  SpdTensor t = *this;
  t.bound_ = bound;
  return t;
}

SpdTensor SpdTensor::certify(const SymMat& m, double z) {
  SpdTensor t = from_matrix(m);
  if (t.bound_ > z + kBoundSlack)
    throw DomainError("tensor log-norm " + std::to_string(t.bound_) + " exceeds bound " +
                      std::to_string(z));
  t.bound_ = z;
  return t;
}

EigenPair sym_eig(const SymMat& m) {
  if (!m.is_finite()) throw InvalidInput("sym_eig: non-finite matrix entry");
  const int n = m.dim();
  SquareMat a = m.dense();
  SquareMat v = SquareMat::identity(n);
  const double scale = frobenius(m);

  if (scale > 0.0) {
    for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
      if (off_diagonal_norm(a) <= kJacobiTolerance * scale) break;
      for (int p = 0; p < n; ++p) {
        for (int q = p + 1; q < n; ++q) {
          const double apq = a(p, q);
          if (apq == 0.0) continue;
          const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
          double t;
          if (std::abs(theta) > 1e150)
            t = 0.5 / theta;
          else
            t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
          const double c = 1.0 / std::sqrt(t * t + 1.0);
          const double s = t * c;
          for (int k = 0; k < n; ++k) {
            const double akp = a(k, p), akq = a(k, q);
            a(k, p) = c * akp - s * akq;
            a(k, q) = s * akp + c * akq;
          }
          for (int k = 0; k < n; ++k) {
            const double apk = a(p, k), aqk = a(q, k);
            a(p, k) = c * apk - s * aqk;
            a(q, k) = s * apk + c * aqk;
          }
          a(p, q) = a(q, p) = 0.0;
          for (int k = 0; k < n; ++k) {
            const double vkp = v(k, p), vkq = v(k, q);
            v(k, p) = c * vkp - s * vkq;
            v(k, q) = s * vkp + c * vkq;
          }
        }
      }
    }
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) > a(j, j); });

  EigenPair out{std::vector<double>(static_cast<std::size_t>(n)), SquareMat(n)};
  for (int col = 0; col < n; ++col) {
    const int src = order[static_cast<std::size_t>(col)];
    out.values[static_cast<std::size_t>(col)] = a(src, src);
    int lead = 0;
    for (int k = 1; k < n; ++k)
      if (std::abs(v(k, src)) > std::abs(v(lead, src))) lead = k;
    const double sign = v(lead, src) < 0.0 ? -1.0 : 1.0;
    for (int k = 0; k < n; ++k) out.vectors(k, col) = sign * v(k, src);
  }
  return out;
}

SymMat reassemble(const SquareMat& vectors, const std::vector<double>& values) {
  const int n = vectors.dim();
  SymMat r(n);
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += vectors(i, k) * values[static_cast<std::size_t>(k)] * vectors(j, k);
      r.set(i, j, s);
    }
  return r;
}

double frobenius(const SymMat& m) {
  double s = 0.0;
  const auto c = m.coeffs();
  for (std::size_t k = 0; k < c.size(); ++k) s += SymMat::multiplicity(m.dim(), k) * c[k] * c[k];
  return std::sqrt(s);
}

double frobenius(const SquareMat& m) {
  double s = 0.0;
  for (double v : m.data()) s += v * v;
  return std::sqrt(s);
}

double frobenius_dist_sq(const SymMat& a, const SymMat& b) {
  if (a.dim() != b.dim()) throw InvalidInput("dimension mismatch");
  double s = 0.0;
  const auto ca = a.coeffs(), cb = b.coeffs();
  for (std::size_t k = 0; k < ca.size(); ++k) {
    const double d = ca[k] - cb[k];
    s += SymMat::multiplicity(a.dim(), k) * d * d;
  }
  return s;
}

SpdTensor mat_exp(const SymMat& s) {
  EigenPair eig = sym_eig(s);
  if (eig.values.front() > kMaxExpArgument)
    throw RangeError("mat_exp: eigenvalue " + std::to_string(eig.values.front()) + " overflows");
  for (double& v : eig.values) v = std::exp(v);
  return make_spd_spectral(std::move(eig), frobenius(s));
}

SymMat mat_log(const SymMat& a) {
  const EigenPair eig = sym_eig(a);
  require_positive(eig, "mat_log");
  return apply_spectral(eig, [](double x) { return std::log(x); });
}

SymMat mat_log(const SpdTensor& a) {
  return apply_spectral(a.spectrum(), [](double x) { return std::log(x); });
}

double log_norm(const SymMat& a) {
  const EigenPair eig = sym_eig(a);
  require_positive(eig, "log_norm");
  return log_norm_of_values(eig.values);
}

double dist_log_euclidean(const SpdTensor& a, const SpdTensor& b) {
  return std::sqrt(frobenius_dist_sq(mat_log(a), mat_log(b)));
}

double dist_affine_invariant(const SpdTensor& a, const SpdTensor& b) {
  const EigenPair& ea = a.spectrum();
  const SquareMat inv_sqrt =
      apply_spectral(ea, [](double x) { return 1.0 / std::sqrt(x); }).dense();
  const SquareMat c = inv_sqrt * b.mat().dense() * inv_sqrt;
  const EigenPair ec = sym_eig(SymMat::symmetric_part(c));
  require_positive(ec, "dist_affine_invariant");
  return log_norm_of_values(ec.values);
}

double dist_euclidean(const SpdTensor& a, const SpdTensor& b) {
  return std::sqrt(frobenius_dist_sq(a.mat(), b.mat()));
}

SpdTensor project_spec(const SymMat& a, double lo, double hi) {
  if (!(lo > 0.0) || !(lo <= hi)) throw InvalidInput("project_spec: need 0 < lo <= hi");
  if (!a.is_finite()) throw InvalidInput("project_spec: non-finite input");
  EigenPair eig = sym_eig(a);
  for (double& v : eig.values) v = std::clamp(v, lo, hi);
  const double bound = log_norm_of_values(eig.values);
  return make_spd_spectral(std::move(eig), bound);
}

SpdTensor project_spec(const SquareMat& a, double lo, double hi) {
  return project_spec(SymMat::symmetric_part(a), lo, hi);
}

SpdTensor project_log_ball(const SpdTensor& a, double z) {
  if (!(z > 0.0)) throw InvalidInput("project_log_ball: z must be positive");
  const EigenPair& eig = a.spectrum();
  const double c_frob = [&] {
    double s = 0.0;
    for (double v : eig.values) s += std::log(v) * std::log(v);
    return s;
  }();
  if (c_frob <= z * z) return a.with_bound(std::sqrt(c_frob));
  const double power = z / std::sqrt(c_frob);
  EigenPair scaled = eig;
  // lambda^power evaluated as exp(power * log lambda).
  for (double& v : scaled.values) v = std::exp(power * std::log(v));
  return make_spd_spectral(std::move(scaled), z);
}

SpdTensor project_full(const SymMat& a, double eps, double z) {
  return project_log_ball(project_spec(a, eps), z);
}

SpdTensor project_full(const SpdTensor& a, double eps, double z) {
  if (!(eps > 0.0)) throw InvalidInput("project_full: eps must be positive");
  EigenPair eig = a.spectrum();
  for (double& v : eig.values) v = std::max(v, eps);
  const double bound = log_norm_of_values(eig.values);
  return project_log_ball(make_spd_spectral(std::move(eig), bound), z);
}

SpdTensor project_full(const SquareMat& a, double eps, double z) {
  return project_full(SymMat::symmetric_part(a), eps, z);
}

SymMat project_log_coords(const SymMat& l, double eps, double z) {
  if (!(eps > 0.0) || !(z > 0.0)) throw InvalidInput("project_log_coords: need eps > 0, z > 0");
  const EigenPair eig = sym_eig(l);
  const double floor = std::log(eps);
  std::vector<double> mu(eig.values.size());
  bool changed = false;
  double norm_sq = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    mu[i] = std::max(eig.values[i], floor);
    changed = changed || mu[i] != eig.values[i];
    norm_sq += mu[i] * mu[i];
  }
  if (norm_sq > z * z) {
    const double scale = z / std::sqrt(norm_sq);
    for (double& v : mu) v *= scale;
    changed = true;
  }
  return changed ? reassemble(eig.vectors, mu) : l;
}

SpdTensor geodesic(const SpdTensor& a, const SpdTensor& b, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw InvalidInput("geodesic: t must lie in [0, 1]");
  if (t == 0.0) return a;
  if (t == 1.0) return b;
  return mat_exp(mat_log(a) * (1.0 - t) + mat_log(b) * t);
}

double fractional_anisotropy(const std::vector<double>& l) {
  if (l.size() != 3) throw InvalidInput("fractional anisotropy needs three eigenvalues");
  const double num = (l[0] - l[1]) * (l[0] - l[1]) + (l[1] - l[2]) * (l[1] - l[2]) +
                     (l[0] - l[2]) * (l[0] - l[2]);
  const double den = 2.0 * (l[0] * l[0] + l[1] * l[1] + l[2] * l[2]);
  if (den == 0.0) return 0.0;
  return std::clamp(std::sqrt(num / den), 0.0, 1.0);
}

double fractional_anisotropy(const SpdTensor& a) {
  return fractional_anisotropy(a.spectrum().values);
}

}  // namespace spdreg
