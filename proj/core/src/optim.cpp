#include "spdreg/optim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

#include <nlohmann/json.hpp>

#include "spdreg/errors.hpp"
#include "spdreg/parallel.hpp"

namespace spdreg {
namespace {

bool log_coordinates(Objective kind) { return kind == Objective::FLogEuclidean; }

double weighted_sq(std::span<const double> a, std::span<const double> b, int dim) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += SymMat::multiplicity(dim, k) * d * d;
  }
  return s;
}

// Adds scale * d/du ||u||^p to out, u = a - b. Zero when u = 0 (p > 1).
void add_pow_gradient(std::span<const double> a, std::span<const double> b, int dim, double p, double scale,
                      std::span<double> out) {
  const double sq = weighted_sq(a, b, dim);
  if (sq == 0.0) return;
  const double factor = scale * p * (p == 2.0 ? 1.0 : std::pow(sq, 0.5 * p - 1.0));
  for (std::size_t k = 0; k < a.size(); ++k)
    out[k] += factor * SymMat::multiplicity(dim, k) * (a[k] - b[k]);
}

// Curvature of ||u||^p is evaluated with ||u||^2 floored here.
constexpr double kMinCurvatureSq = 1e-24;

double curvature_factor(double sq, double p, double scale) {
  return p == 2.0 ? 2.0 * scale : scale * p * std::pow(std::max(sq, kMinCurvatureSq), 0.5 * p - 1.0);
}

// out += scale * H(u) r with u = a - b, r = va - vb and
// H(u) = p s^(p/2-1) (W + (p-2) W u u^T W / s), s = u^T W u, W = multiplicities.
void add_pow_hessian(std::span<const double> a, std::span<const double> b, std::span<const double> va,
                     std::span<const double> vb, int dim, double p, double scale, std::span<double> out) {
  const double sq = weighted_sq(a, b, dim);
  const double c = curvature_factor(sq, p, scale);
  double uwr = 0.0;
  if (p != 2.0)
    for (std::size_t k = 0; k < a.size(); ++k) uwr += SymMat::multiplicity(dim, k) * (a[k] - b[k]) * (va[k] - vb[k]);
  const double rank_one = p == 2.0 ? 0.0 : (p - 2.0) * uwr / std::max(sq, kMinCurvatureSq);
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double m = SymMat::multiplicity(dim, k);
    out[k] += c * m * ((va[k] - vb[k]) + rank_one * (a[k] - b[k]));
  }
}

void add_pow_hessian_diag(std::span<const double> a, std::span<const double> b, int dim, double p, double scale,
                          std::span<double> out) {
  const double sq = weighted_sq(a, b, dim);
  const double c = curvature_factor(sq, p, scale);
  const double s = std::max(sq, kMinCurvatureSq);
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double m = SymMat::multiplicity(dim, k);
    const double u = a[k] - b[k];
    out[k] += c * (m + (p == 2.0 ? 0.0 : (p - 2.0) * m * m * u * u / s));
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

SymField axpy(const SymField& x, double t, const SymField& g) {
  SymField r = x;
  auto rc = r.coeffs();
  const auto gc = g.coeffs();
  for (std::size_t k = 0; k < rc.size(); ++k) rc[k] -= t * gc[k];
  return r;
}

// Squared norm of the forward-difference gradient at pixel i.
double theta_sq(const SymField& x, std::size_t i) {
  const int w = x.width();
  const int px = static_cast<int>(i % static_cast<std::size_t>(w));
  const int py = static_cast<int>(i / static_cast<std::size_t>(w));
  double sq = 0.0;
  if (px + 1 < w) sq += weighted_sq(x.pixel(i + 1), x.pixel(i), x.dim());
  if (py + 1 < x.height()) sq += weighted_sq(x.pixel(i + static_cast<std::size_t>(w)), x.pixel(i), x.dim());
  return sq;
}

// Approximate solution of H d = -g by Jacobi-preconditioned conjugate
// gradients, stopped at relative residual min(0.5, ||g||) or on
// non-positive curvature.
SymField newton_direction(const ObjectiveFunction& f, const SymField& x, const SymField& g, int max_iters) {
  const SymField diag = f.hessian_diagonal(x);
  SymField sol(x.width(), x.height(), x.dim());
  SymField r = g, z = g, d = g;
  const auto dc = diag.coeffs();
  for (double& c : r.coeffs()) c = -c;
  auto precondition = [&] {
    const auto rc = r.coeffs();
    auto zc = z.coeffs();
    for (std::size_t k = 0; k < rc.size(); ++k) zc[k] = dc[k] > 0.0 ? rc[k] / dc[k] : rc[k];
  };
  precondition();
  d = z;
  const double gnorm = std::sqrt(dot(g.coeffs(), g.coeffs()));
  const double tol = std::min(0.5, gnorm) * gnorm;
  double rz = dot(r.coeffs(), z.coeffs());
  for (int it = 0; it < max_iters; ++it) {
    const SymField hd = f.hessian_vector(x, d);
    const double curv = dot(d.coeffs(), hd.coeffs());
    if (!(curv > 0.0)) {
      if (it == 0) sol = d;
      break;
    }
    const double a = rz / curv;
    auto sc = sol.coeffs();
    auto rc = r.coeffs();
    const std::span<const double> dcs = d.coeffs(), hc = hd.coeffs();
    for (std::size_t k = 0; k < sc.size(); ++k) {
      sc[k] += a * dcs[k];
      rc[k] -= a * hc[k];
    }
    if (std::sqrt(dot(r.coeffs(), r.coeffs())) <= tol) break;
    precondition();
    const double rz_new = dot(r.coeffs(), z.coeffs());
    const double beta = rz_new / rz;
    rz = rz_new;
    auto dm = d.coeffs();
    const auto zc = z.coeffs();
    for (std::size_t k = 0; k < dm.size(); ++k) dm[k] = zc[k] + beta * dm[k];
  }
  return sol;
}

}  // namespace

void SolverConfig::validate() const {
  auto fail = [](const char* what) { throw InvalidInput(std::string("invalid solver setting: ") + what); };
  if (max_iters < 0) fail("max_iters must be >= 0");
  if (!(fd_step > 0.0)) fail("fd_step must be > 0");
  if (!(armijo_c > 0.0 && armijo_c < 1.0)) fail("armijo_c must lie in (0, 1)");
  if (!(backtrack_factor > 0.0 && backtrack_factor < 1.0)) fail("backtrack_factor must lie in (0, 1)");
  if (!(init_step > 0.0)) fail("init_step must be > 0");
  if (!(rel_tol > 0.0)) fail("rel_tol must be > 0");
  if (max_backtracks < 1) fail("max_backtracks must be >= 1");
  if (cg_max_iters < 1) fail("cg_max_iters must be >= 1");
}

std::string SolveReport::to_json(bool include_timing) const {
  nlohmann::ordered_json j;
  j["iterations"] = iterations;
  j["objective_trajectory"] = objective_trajectory;
  j["final_objective"] = final_objective;
  j["converged"] = converged;
  if (include_timing)
    j["seconds"] = seconds;
  else
    j["seconds"] = nullptr;
  if (!diagnostic.empty()) j["diagnostic"] = diagnostic;
  return j.dump(2) + "\n";
}

const char* to_string(Objective o) {
  switch (o) {
    case Objective::FLogEuclidean: return "F-log-euclidean";
    case Objective::FEuclidean: return "F-euclidean";
    case Objective::FC: return "FC";
  }
  return "?";
}

ObjectiveFunction::ObjectiveFunction(const TensorField& data, const Mask& mask, const FunctionalParams& params,
                                     Objective kind)
    : ObjectiveFunction(log_coordinates(kind) ? to_log_coords(data) : to_raw_coords(data), mask, params, kind) {
  require_same_shape(data, mask);
}

ObjectiveFunction::ObjectiveFunction(SymField data_coords, const Mask& mask, const FunctionalParams& params,
                                     Objective kind)
    : kind_(kind), params_(params), data_(std::move(data_coords)), mask_(mask) {
  params_.validate();
  if (data_.width() != mask.width() || data_.height() != mask.height())
    throw InvalidInput("mask dimensions do not match data");
  if (kind_ != Objective::FC)
    kernel_ = PairKernel::build(params_, build_mollifier(params_.n_rho), data_.width(), data_.height());
}

double ObjectiveFunction::value(const SymField& x) const {
  const double fid = fidelity(x, data_, mask_, params_.p);
  if (kind_ == Objective::FC)
    return params_.beta == 0.0 ? fid : fid + params_.beta * theta_regularizer(x, params_.p);
  return params_.alpha == 0.0 ? fid : fid + params_.alpha * phi_regularizer(x, kernel_, params_.p);
}

double ObjectiveFunction::local_value(const SymField& x, std::size_t i) const {
  const double p = params_.p;
  const int dim = x.dim();
  double v = mask_[i] ? block_dist_pow(x.pixel(i), data_.pixel(i), dim, p) : 0.0;
  const int w = x.width(), h = x.height();
  const int px = static_cast<int>(i % static_cast<std::size_t>(w));
  const int py = static_cast<int>(i / static_cast<std::size_t>(w));
  if (kind_ == Objective::FC) {
    if (params_.beta == 0.0) return v;
    auto term = [&](std::size_t j) {
      const double sq = theta_sq(x, j);
      return sq == 0.0 ? 0.0 : std::pow(sq, 0.5 * p);
    };
    double t = term(i);
    if (px > 0) t += term(i - 1);
    if (py > 0) t += term(i - static_cast<std::size_t>(w));
    return v + params_.beta * t;
  }
  if (params_.alpha == 0.0) return v;
  double pairs = 0.0;
  for (const auto& o : kernel_.offsets) {
    const int qx = px + o.dx, qy = py + o.dy;
    if (qx < 0 || qy < 0 || qx >= w || qy >= h) continue;
    pairs += o.weight * block_dist_pow(x.pixel(i), x.pixel(static_cast<std::size_t>(qy * w + qx)), dim, p);
  }
  // (i, j) and (j, i) both appear in the double sum.
  return v + params_.alpha * 2.0 * pairs;
}

SymField ObjectiveFunction::gradient(const SymField& x) const {
  if (!x.same_shape(data_)) throw InvalidInput("coefficient field does not match the data");
  const double p = params_.p;
  const int dim = x.dim();
  const int w = x.width(), h = x.height();
  SymField g(w, h, dim);

  std::vector<double> theta_factor;
  if (kind_ == Objective::FC && params_.beta != 0.0) {
    // d/dv S^(p/2) = (p/2) S^(p/2 - 1) dS/dv; the factor 2 of dS is folded in below.
    theta_factor.assign(x.size(), 0.0);
    parallel_for(x.size(), [&](std::size_t i) {
      const double sq = theta_sq(x, i);
      theta_factor[i] = sq == 0.0 ? 0.0 : p * std::pow(sq, 0.5 * p - 1.0);
    });
  }

  parallel_for(x.size(), [&](std::size_t i) {
    auto out = g.pixel(i);
    if (mask_[i]) add_pow_gradient(x.pixel(i), data_.pixel(i), dim, p, 1.0, out);
    const int px = static_cast<int>(i % static_cast<std::size_t>(w));
    const int py = static_cast<int>(i / static_cast<std::size_t>(w));
    if (kind_ == Objective::FC) {
      if (params_.beta == 0.0) return;
      const double b = params_.beta;
      auto add_diff = [&](std::size_t from, std::size_t to, double factor) {
        // factor * multiplicity * (x_from - x_to)
        const auto a = x.pixel(from), c = x.pixel(to);
        for (std::size_t k = 0; k < out.size(); ++k)
          out[k] += factor * SymMat::multiplicity(dim, k) * (a[k] - c[k]);
      };
      // Own term: differences x_{i+1} - x_i and x_{i+w} - x_i.
      if (theta_factor[i] != 0.0) {
        if (px + 1 < w) add_diff(i, i + 1, b * theta_factor[i]);
        if (py + 1 < h) add_diff(i, i + static_cast<std::size_t>(w), b * theta_factor[i]);
      }
      // Terms of the left and upper neighbours, where x_i is the "+1" end.
      if (px > 0 && theta_factor[i - 1] != 0.0) add_diff(i, i - 1, b * theta_factor[i - 1]);
      if (py > 0) {
        const std::size_t up = i - static_cast<std::size_t>(w);
        if (theta_factor[up] != 0.0) add_diff(i, up, b * theta_factor[up]);
      }
      return;
    }
    if (params_.alpha == 0.0) return;
    for (const auto& o : kernel_.offsets) {
      const int qx = px + o.dx, qy = py + o.dy;
      if (qx < 0 || qy < 0 || qx >= w || qy >= h) continue;
      add_pow_gradient(x.pixel(i), x.pixel(static_cast<std::size_t>(qy * w + qx)), dim, p,
                       2.0 * params_.alpha * o.weight, out);
    }
  });
  return g;
}

SymField ObjectiveFunction::hessian_vector(const SymField& x, const SymField& v) const {
  if (!x.same_shape(data_) || !v.same_shape(data_)) throw InvalidInput("coefficient field does not match the data");
  const double p = params_.p;
  const int dim = x.dim();
  const int w = x.width(), h = x.height();
  const std::size_t nb = x.block();
  SymField out(w, h, dim);

  // Theta terms: per-term products on the stacked forward differences first,
  // then a gather so every pixel sums its contributions in a fixed order.
  std::vector<double> term_hv;
  if (kind_ == Objective::FC && params_.beta != 0.0) {
    term_hv.assign(x.size() * 2 * nb, 0.0);
    parallel_for(x.size(), [&](std::size_t i) {
      const int px = static_cast<int>(i % static_cast<std::size_t>(w));
      const int py = static_cast<int>(i / static_cast<std::size_t>(w));
      const bool has_r = px + 1 < w, has_d = py + 1 < h;
      if (!has_r && !has_d) return;
      const std::size_t r = i + 1, d = i + static_cast<std::size_t>(w);
      const double sq = theta_sq(x, i);
      const double s = std::max(sq, kMinCurvatureSq);
      const double c = curvature_factor(sq, p, params_.beta);  // beta p S^(p/2-1)
      double dwr = 0.0;
      for (std::size_t k = 0; k < nb; ++k) {
        const double m = SymMat::multiplicity(dim, k);
        if (has_r) dwr += m * (x.pixel(r)[k] - x.pixel(i)[k]) * (v.pixel(r)[k] - v.pixel(i)[k]);
        if (has_d) dwr += m * (x.pixel(d)[k] - x.pixel(i)[k]) * (v.pixel(d)[k] - v.pixel(i)[k]);
      }
      const double rank_one = p == 2.0 ? 0.0 : (p - 2.0) * dwr / s;
      double* hv = term_hv.data() + i * 2 * nb;
      for (std::size_t k = 0; k < nb; ++k) {
        const double m = SymMat::multiplicity(dim, k);
        if (has_r)
          hv[k] = c * m * ((v.pixel(r)[k] - v.pixel(i)[k]) + rank_one * (x.pixel(r)[k] - x.pixel(i)[k]));
        if (has_d)
          hv[nb + k] = c * m * ((v.pixel(d)[k] - v.pixel(i)[k]) + rank_one * (x.pixel(d)[k] - x.pixel(i)[k]));
      }
    });
  }

  parallel_for(x.size(), [&](std::size_t i) {
    auto o = out.pixel(i);
    if (mask_[i]) {
      const std::vector<double> zero(nb, 0.0);
      add_pow_hessian(x.pixel(i), data_.pixel(i), v.pixel(i), zero, dim, p, 1.0, o);
    }
    const int px = static_cast<int>(i % static_cast<std::size_t>(w));
    const int py = static_cast<int>(i / static_cast<std::size_t>(w));
    if (kind_ == Objective::FC) {
      if (params_.beta == 0.0) return;
      const double* own = term_hv.data() + i * 2 * nb;
      for (std::size_t k = 0; k < nb; ++k) o[k] -= own[k] + own[nb + k];
      if (px > 0) {
        const double* left = term_hv.data() + (i - 1) * 2 * nb;
        for (std::size_t k = 0; k < nb; ++k) o[k] += left[k];
      }
      if (py > 0) {
        const double* up = term_hv.data() + (i - static_cast<std::size_t>(w)) * 2 * nb;
        for (std::size_t k = 0; k < nb; ++k) o[k] += up[nb + k];
      }
      return;
    }
    if (params_.alpha == 0.0) return;
    for (const auto& off : kernel_.offsets) {
      const int qx = px + off.dx, qy = py + off.dy;
      if (qx < 0 || qy < 0 || qx >= w || qy >= h) continue;
      const std::size_t q = static_cast<std::size_t>(qy * w + qx);
      add_pow_hessian(x.pixel(i), x.pixel(q), v.pixel(i), v.pixel(q), dim, p, 2.0 * params_.alpha * off.weight, o);
    }
  });
  return out;
}

SymField ObjectiveFunction::hessian_diagonal(const SymField& x) const {
  if (!x.same_shape(data_)) throw InvalidInput("coefficient field does not match the data");
  const double p = params_.p;
  const int dim = x.dim();
  const int w = x.width(), h = x.height();
  const std::size_t nb = x.block();
  SymField out(w, h, dim);

  // For the theta term at pixel j: the diagonal entry of x_j (both
  // differences), of x_{j+1} (first) and of x_{j+w} (second).
  std::vector<double> term_diag;
  if (kind_ == Objective::FC && params_.beta != 0.0) {
    term_diag.assign(x.size() * 3 * nb, 0.0);
    parallel_for(x.size(), [&](std::size_t i) {
      const int px = static_cast<int>(i % static_cast<std::size_t>(w));
      const int py = static_cast<int>(i / static_cast<std::size_t>(w));
      const bool has_r = px + 1 < w, has_d = py + 1 < h;
      if (!has_r && !has_d) return;
      const double sq = theta_sq(x, i);
      const double s = std::max(sq, kMinCurvatureSq);
      const double c = curvature_factor(sq, p, params_.beta);
      double* t = term_diag.data() + i * 3 * nb;
      for (std::size_t k = 0; k < nb; ++k) {
        const double m = SymMat::multiplicity(dim, k);
        const double d1 = has_r ? x.pixel(i + 1)[k] - x.pixel(i)[k] : 0.0;
        const double d2 = has_d ? x.pixel(i + static_cast<std::size_t>(w))[k] - x.pixel(i)[k] : 0.0;
        const double r1 = p == 2.0 ? 0.0 : (p - 2.0) * m * m / s;
        t[k] = c * (m * (has_r + has_d) + r1 * (d1 + d2) * (d1 + d2));
        if (has_r) t[nb + k] = c * (m + r1 * d1 * d1);
        if (has_d) t[2 * nb + k] = c * (m + r1 * d2 * d2);
      }
    });
  }

  parallel_for(x.size(), [&](std::size_t i) {
    auto o = out.pixel(i);
    if (mask_[i]) add_pow_hessian_diag(x.pixel(i), data_.pixel(i), dim, p, 1.0, o);
    const int px = static_cast<int>(i % static_cast<std::size_t>(w));
    const int py = static_cast<int>(i / static_cast<std::size_t>(w));
    if (kind_ == Objective::FC) {
      if (params_.beta == 0.0) return;
      for (std::size_t k = 0; k < nb; ++k) o[k] += term_diag[i * 3 * nb + k];
      if (px > 0)
        for (std::size_t k = 0; k < nb; ++k) o[k] += term_diag[(i - 1) * 3 * nb + nb + k];
      if (py > 0)
        for (std::size_t k = 0; k < nb; ++k)
          o[k] += term_diag[(i - static_cast<std::size_t>(w)) * 3 * nb + 2 * nb + k];
      return;
    }
    if (params_.alpha == 0.0) return;
    for (const auto& off : kernel_.offsets) {
      const int qx = px + off.dx, qy = py + off.dy;
      if (qx < 0 || qy < 0 || qx >= w || qy >= h) continue;
      add_pow_hessian_diag(x.pixel(i), x.pixel(static_cast<std::size_t>(qy * w + qx)), dim, p,
                           2.0 * params_.alpha * off.weight, o);
    }
  });
  return out;
}

bool ObjectiveFunction::admissible_pixel(std::span<const double> block) const {
  const int dim = data_.dim();
  const SymMat m = SymMat::from_coeffs(dim, block);
  const EigenPair eig = sym_eig(m);
  if (log_coordinates(kind_)) {
    double sq = 0.0;
    for (double v : eig.values) sq += v * v;
    return eig.values.back() >= std::log(params_.epsilon) && sq <= params_.z * params_.z;
  }
  if (eig.values.back() < params_.epsilon) return false;
  double sq = 0.0;
  for (double v : eig.values) sq += std::log(v) * std::log(v);
  return sq <= params_.z * params_.z;
}

SymField ObjectiveFunction::gradient_fd(const SymField& x, double h) const {
  if (!x.same_shape(data_)) throw InvalidInput("coefficient field does not match the data");
  SymField g(x.width(), x.height(), x.dim());
  parallel_for(x.size(), [&](std::size_t i) {
    SymField probe = x;
    auto block = probe.pixel(i);
    auto out = g.pixel(i);
    for (std::size_t k = 0; k < block.size(); ++k) {
      const double orig = block[k];
      block[k] = orig + h;
      const bool plus_ok = admissible_pixel(block);
      const double f_plus = local_value(probe, i);
      block[k] = orig - h;
      const bool minus_ok = admissible_pixel(block);
      const double f_minus = local_value(probe, i);
      block[k] = orig;
      if (plus_ok == minus_ok) {
        out[k] = (f_plus - f_minus) / (2.0 * h);
      } else {
        const double f0 = local_value(probe, i);
        out[k] = plus_ok ? (f_plus - f0) / h : (f0 - f_minus) / h;
      }
    }
  });
  return g;
}

SymField ObjectiveFunction::coords(const TensorField& w) const {
  return log_coordinates(kind_) ? to_log_coords(w) : to_raw_coords(w);
}

TensorField ObjectiveFunction::field(const SymField& x) const {
  return log_coordinates(kind_) ? from_log_coords(x, params_.z, params_.epsilon)
                                : from_raw_coords(x, params_.z, params_.epsilon);
}

SymField ObjectiveFunction::project(const SymField& x) const {
  SymField r(x.width(), x.height(), x.dim());
  parallel_for(x.size(), [&](std::size_t i) {
    if (admissible_pixel(x.pixel(i))) {
      std::copy(x.pixel(i).begin(), x.pixel(i).end(), r.pixel(i).begin());
      return;
    }
    const SymMat m = x.at(i);
    r.set(i, log_coordinates(kind_) ? project_log_coords(m, params_.epsilon, params_.z)
                                    : project_full(m, params_.epsilon, params_.z).mat());
  });
  return r;
}

TensorField default_init(const TensorField& data, const Mask& mask, const FunctionalParams& params) {
  require_same_shape(data, mask);
  TensorField init(data.width(), data.height(), std::vector<SpdTensor>(data.tensors().begin(), data.tensors().end()),
                   params.z);
  const SpdTensor seed = project_full(SymMat(data.dim()), params.epsilon, params.z);
  for (std::size_t i = 0; i < init.size(); ++i)
    if (!mask[i]) init.set(i, seed);
  return init;
}

SolveResult solve(const TensorField& data, const Mask& mask, const FunctionalParams& params, Objective objective,
                  const SolverConfig& config, const std::optional<TensorField>& init) {
  config.validate();
  params.validate();
  require_same_shape(data, mask);
  const auto start = std::chrono::steady_clock::now();

  const ObjectiveFunction f(data, mask, params, objective);
  const TensorField start_field = init ? *init : default_init(data, mask, params);
  require_same_shape(data, start_field);

  auto grad = [&](const SymField& x) {
    return config.grad_mode == GradMode::Analytic ? f.gradient(x) : f.gradient_fd(x, config.fd_step);
  };

  const SymField x0 = f.coords(start_field);
  SymField x = f.project(x0);
  const bool start_admissible = start_field.z() == params.z &&
                                std::equal(x0.coeffs().begin(), x0.coeffs().end(), x.coeffs().begin());
  double fx = f.value(x);
  SolveReport report;
  report.objective_trajectory.push_back(fx);

  SymField g = grad(x);
  SymField prev_x = x, prev_g = g;

  // Projected trial point x - t * dir, with the Armijo test on the actual
  // displacement. Returns false if no step length was accepted.
  auto line_search = [&](const SymField& dir, double step, SymField& x_new, double& f_new) {
    for (int bt = 0; bt <= config.max_backtracks; ++bt) {
      x_new = f.project(axpy(x, step, dir));
      f_new = f.value(x_new);
      double decrease = 0.0;
      const auto xc = x.coeffs(), nc = x_new.coeffs(), gc = g.coeffs();
      for (std::size_t k = 0; k < xc.size(); ++k) decrease += gc[k] * (xc[k] - nc[k]);
      if (f_new <= fx - config.armijo_c * std::max(decrease, 0.0)) return true;
      step *= config.backtrack_factor;
    }
    return false;
  };

  auto gradient_step = [&](int it) {
    if (it > 0 && config.step_rule == StepRule::BarzilaiBorwein) {
      double ss = 0.0, sy = 0.0;
      const auto xc = x.coeffs(), pxc = prev_x.coeffs(), gc = g.coeffs(), pgc = prev_g.coeffs();
      for (std::size_t k = 0; k < xc.size(); ++k) {
        const double s = xc[k] - pxc[k], y = gc[k] - pgc[k];
        ss += s * s;
        sy += s * y;
      }
      return (sy > 0.0 && ss > 0.0) ? std::clamp(ss / sy, 1e-12, 1e12) : config.init_step;
    }
    return config.init_step;
  };

  for (int it = 0; it < config.max_iters; ++it) {
    const double gnorm_sq = dot(g.coeffs(), g.coeffs());
    if (gnorm_sq == 0.0) {
      report.converged = true;
      break;
    }

    SymField x_new = x;
    double f_new = fx;
    bool accepted = false;
    if (config.direction == Direction::Newton) {
      SymField d = newton_direction(f, x, g, config.cg_max_iters);
      // Stored as the negated step so line_search can share axpy with the gradient path.
      for (double& c : d.coeffs()) c = -c;
      if (dot(g.coeffs(), d.coeffs()) > 0.0) accepted = line_search(d, 1.0, x_new, f_new);
    }
    if (!accepted) accepted = line_search(g, gradient_step(it), x_new, f_new);
    if (!accepted) {
      report.diagnostic = "line search failed after " + std::to_string(config.max_backtracks) +
                          " backtracks at iteration " + std::to_string(it + 1) +
                          "; the regularization weight may be badly scaled";
      break;
    }

    report.iterations = it + 1;
    const double rel = (fx - f_new) / std::max(std::abs(fx), std::numeric_limits<double>::min());
    prev_x = std::move(x);
    prev_g = std::move(g);
    x = std::move(x_new);
    fx = f_new;
    report.objective_trajectory.push_back(fx);
    if (rel < config.rel_tol) {
      report.converged = true;
      break;
    }
    g = grad(x);
  }

  report.final_objective = fx;
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  // An untouched admissible start is returned as given, skipping the
  // coordinate round trip.
  if (report.iterations == 0 && start_admissible) return {start_field, std::move(report)};
  return {f.field(x), std::move(report)};
}

SymField grad_F_log(const SymField& l, const TensorField& data, const Mask& mask, const FunctionalParams& params) {
  return ObjectiveFunction(data, mask, params, Objective::FLogEuclidean).gradient(l);
}

SymField grad_F_fd(const SymField& l, const TensorField& data, const Mask& mask, const FunctionalParams& params,
                   double fd_step) {
  return ObjectiveFunction(data, mask, params, Objective::FLogEuclidean).gradient_fd(l, fd_step);
}

}  // namespace spdreg
