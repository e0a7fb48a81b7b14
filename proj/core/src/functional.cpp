#include "spdreg/functional.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "spdreg/errors.hpp"
#include "spdreg/parallel.hpp"

namespace spdreg {
namespace {

constexpr int kSpaceDim = 2;

double ordered_sum(const std::vector<double>& partials) {
  return std::accumulate(partials.begin(), partials.end(), 0.0);
}

double pow_norm(double norm_sq, double p) {
  if (norm_sq == 0.0) return 0.0;
  return p == 2.0 ? norm_sq : std::pow(norm_sq, 0.5 * p);
}

void require_same_shape(const SymField& a, const SymField& b) {
  if (!a.same_shape(b)) throw InvalidInput("coefficient field dimensions differ");
}

void require_same_shape(const SymField& a, const Mask& m) {
  if (a.width() != m.width() || a.height() != m.height())
    throw InvalidInput("mask dimensions do not match field");
}

}  // namespace

Mollifier build_mollifier(int n_rho) {
  if (n_rho < 1) throw InvalidInput("mollifier radius must be at least 1");
  Mollifier m;
  m.radius_ = n_rho;
  const int side = 2 * n_rho + 1;
  m.w_.assign(static_cast<std::size_t>(side * side), 0.0);
  const double scale = n_rho + 0.5;
  double total = 0.0;
  for (int dy = -n_rho; dy <= n_rho; ++dy)
    for (int dx = -n_rho; dx <= n_rho; ++dx) {
      const int d2 = dx * dx + dy * dy;
      if (d2 > n_rho * n_rho) continue;
      const double r2 = d2 / (scale * scale);
      const double v = std::exp(-1.0 / (1.0 - r2));
      m.w_[static_cast<std::size_t>((dy + n_rho) * side + (dx + n_rho))] = v;
      total += v;
    }
  for (double& v : m.w_) v /= total;
  return m;
}

Mollifier build_flat_mollifier(int n_rho) {
  Mollifier m = build_mollifier(n_rho);
  std::size_t support = 0;
  for (double v : m.w_) support += v > 0.0 ? 1 : 0;
  for (double& v : m.w_) v = v > 0.0 ? 1.0 / static_cast<double>(support) : 0.0;
  return m;
}

double Mollifier::operator()(int dx, int dy) const {
  if (dx * dx + dy * dy > radius_ * radius_) return 0.0;
  const int side = 2 * radius_ + 1;
  return w_[static_cast<std::size_t>((dy + radius_) * side + (dx + radius_))];
}

void FunctionalParams::validate() const {
  auto fail = [](const std::string& what) { throw InvalidInput("invalid parameter: " + what); };
  if (!(p > 1.0) || !std::isfinite(p)) fail("p must be > 1");
  if (!(s > 0.0 && s < 1.0)) fail("s must lie in (0, 1)");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) fail("alpha must be >= 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) fail("beta must be >= 0");
  if (l != 0 && l != 1) fail("l must be 0 or 1");
  if (n_rho < 1) fail("n_rho must be >= 1");
  if (!(z > 0.0) || !std::isfinite(z)) fail("z must be > 0");
  if (!(epsilon > 0.0)) fail("epsilon must be > 0");
}

PairKernel PairKernel::build(const FunctionalParams& params, const Mollifier& mollifier, int width, int height) {
  PairKernel k;
  const double exponent = kSpaceDim + params.p * params.s;
  const int rx = params.l == 1 ? mollifier.radius() : width - 1;
  const int ry = params.l == 1 ? mollifier.radius() : height - 1;
  for (int dy = -ry; dy <= ry; ++dy)
    for (int dx = -rx; dx <= rx; ++dx) {
      if (dx == 0 && dy == 0) continue;
      const double rho = params.l == 1 ? mollifier(dx, dy) : 1.0;
      if (rho <= 0.0) continue;
      const double dist = std::sqrt(static_cast<double>(dx * dx + dy * dy));
      k.offsets.push_back({dx, dy, rho / std::pow(dist, exponent)});
    }
  return k;
}

double block_dist_pow(std::span<const double> a, std::span<const double> b, int dim, double p) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += SymMat::multiplicity(dim, k) * d * d;
  }
  return pow_norm(s, p);
}

double fidelity(const SymField& x, const SymField& data, const Mask& mask, double p) {
  require_same_shape(x, data);
  require_same_shape(x, mask);
  std::vector<double> partial(x.size(), 0.0);
  parallel_for(x.size(), [&](std::size_t i) {
    if (mask[i]) partial[i] = block_dist_pow(x.pixel(i), data.pixel(i), x.dim(), p);
  });
  return ordered_sum(partial);
}

double phi_regularizer(const SymField& x, const PairKernel& kernel, double p) {
  const int w = x.width(), h = x.height();
  std::vector<double> partial(x.size(), 0.0);
  parallel_for(x.size(), [&](std::size_t i) {
    const int px = static_cast<int>(i % static_cast<std::size_t>(w));
    const int py = static_cast<int>(i / static_cast<std::size_t>(w));
    double acc = 0.0;
    for (const auto& o : kernel.offsets) {
      const int qx = px + o.dx, qy = py + o.dy;
      if (qx < 0 || qy < 0 || qx >= w || qy >= h) continue;
      const std::size_t j = static_cast<std::size_t>(qy * w + qx);
      acc += o.weight * block_dist_pow(x.pixel(i), x.pixel(j), x.dim(), p);
    }
    partial[i] = acc;
  });
  return ordered_sum(partial);
}

double theta_regularizer(const SymField& x, double p) {
  const int w = x.width(), h = x.height();
  std::vector<double> partial(x.size(), 0.0);
  parallel_for(x.size(), [&](std::size_t i) {
    const int px = static_cast<int>(i % static_cast<std::size_t>(w));
    const int py = static_cast<int>(i / static_cast<std::size_t>(w));
    double sq = 0.0;
    if (px + 1 < w) sq += block_dist_pow(x.pixel(i + 1), x.pixel(i), x.dim(), 2.0);
    if (py + 1 < h)
      sq += block_dist_pow(x.pixel(i + static_cast<std::size_t>(w)), x.pixel(i), x.dim(), 2.0);
    partial[i] = pow_norm(sq, p);
  });
  return ordered_sum(partial);
}

SymField to_coords(const TensorField& w, Metric metric) {
  return metric == Metric::LogEuclidean ? to_log_coords(w) : to_raw_coords(w);
}

double fidelity(const TensorField& w, const TensorField& data, const Mask& mask, double p, Metric metric) {
  require_same_shape(w, data);
  require_same_shape(w, mask);
  return fidelity(to_coords(w, metric), to_coords(data, metric), mask, p);
}

double phi_regularizer(const TensorField& w, const FunctionalParams& params, Metric metric,
                       const Mollifier& mollifier) {
  const PairKernel kernel = PairKernel::build(params, mollifier, w.width(), w.height());
  return phi_regularizer(to_coords(w, metric), kernel, params.p);
}

double functional_F(const TensorField& w, const TensorField& data, const Mask& mask,
                    const FunctionalParams& params, Metric metric, const Mollifier& mollifier) {
  params.validate();
  const double fid = fidelity(w, data, mask, params.p, metric);
  if (params.alpha == 0.0) return fid;
  return fid + params.alpha * phi_regularizer(w, params, metric, mollifier);
}

double functional_F(const TensorField& w, const TensorField& data, const Mask& mask,
                    const FunctionalParams& params, Metric metric) {
  return functional_F(w, data, mask, params, metric, build_mollifier(params.n_rho));
}

double theta_regularizer(const TensorField& w, double p) { return theta_regularizer(to_raw_coords(w), p); }

double functional_FC(const TensorField& w, const TensorField& data, const Mask& mask, const FunctionalParams& params) {
  params.validate();
  const double fid = fidelity(w, data, mask, params.p, Metric::Euclidean);
  if (params.beta == 0.0) return fid;
  return fid + params.beta * theta_regularizer(w, params.p);
}

}  // namespace spdreg
