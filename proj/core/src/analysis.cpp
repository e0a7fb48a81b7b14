#include "spdreg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include "spdreg/errors.hpp"

namespace spdreg {
namespace {

constexpr double kMaxGlyphRadius = 0.45;
constexpr int kPixelsPerCell = 32;

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", v);
  // Avoid "-0.0000".
  if (std::string(buf) == "-0.0000") return "0.0000";
  return buf;
}

}  // namespace

Rgb ColorScale::map(double fa) {
  const double t = std::clamp(std::isfinite(fa) ? fa : 0.0, 0.0, 1.0);
  auto channel = [&](double high) { return static_cast<std::uint8_t>(std::lround(t * high)); };
  return {channel(kHigh[0]), channel(kHigh[1]), channel(kHigh[2])};
}

double snr(const TensorField& orig, const TensorField& rec) {
  require_same_shape(orig, rec);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < orig.size(); ++i) {
    num += frobenius_dist_sq(orig[i].mat(), SymMat(orig.dim()));
    den += frobenius_dist_sq(orig[i].mat(), rec[i].mat());
  }
  if (num == 0.0) throw InvalidInput("SNR is undefined for a zero reference field");
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

double summed_log_distance(const TensorField& a, const TensorField& b) {
  require_same_shape(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += dist_log_euclidean(a[i], b[i]);
  return s;
}

std::vector<double> column_eigen_profile(const TensorField& w) {
  std::vector<double> prof(static_cast<std::size_t>(w.width()), 0.0);
  for (int x = 0; x < w.width(); ++x) {
    double s = 0.0;
    for (int y = 0; y < w.height(); ++y) s += w.at(x, y).spectrum().values.front();
    prof[static_cast<std::size_t>(x)] = s / w.height();
  }
  return prof;
}

std::string render_svg(const TensorField& w) {
  if (w.dim() != 3) throw InvalidInput("rendering needs 3x3 tensors");
  std::vector<EigenPair> eig;
  eig.reserve(w.size());
  double largest = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    eig.push_back(w[i].spectrum());
    largest = std::max(largest, eig.back().values.front());
  }
  const double scale = largest > 0.0 ? kMaxGlyphRadius / largest : 0.0;

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << w.width() * kPixelsPerCell
     << "\" height=\"" << w.height() * kPixelsPerCell << "\" viewBox=\"0 0 " << w.width() << " " << w.height()
     << "\">\n"
     << "<rect x=\"0\" y=\"0\" width=\"" << w.width() << "\" height=\"" << w.height() << "\" fill=\"white\"/>\n";
  for (int y = 0; y < w.height(); ++y)
    for (int x = 0; x < w.width(); ++x) {
      const EigenPair& e = eig[w.index(x, y)];
      const double vx = e.vectors(0, 0), vy = e.vectors(1, 0);
      const double angle = std::hypot(vx, vy) > 1e-12 ? std::atan2(vy, vx) * 180.0 / std::numbers::pi : 0.0;
      const Rgb c = ColorScale::map(fractional_anisotropy(e.values));
      const double cx = x + 0.5, cy = y + 0.5;
      os << "<ellipse cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy) << "\" rx=\"" << fmt(e.values[0] * scale)
         << "\" ry=\"" << fmt(e.values[1] * scale) << "\" transform=\"rotate(" << fmt(angle) << " " << fmt(cx)
         << " " << fmt(cy) << ")\" fill=\"rgb(" << int(c.r) << "," << int(c.g) << "," << int(c.b) << ")\"/>\n";
    }
  os << "</svg>\n";
  return os.str();
}

void write_svg(const TensorField& w, const std::string& path) {
  const std::string doc = render_svg(w);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  out << doc;
  if (!out) throw Error("failed writing " + path);
}

double default_alpha_rule(double delta, double p) { return std::pow(delta, 0.5 * p); }

double median(std::vector<double> v) {
  if (v.empty()) throw InvalidInput("median of an empty list");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::vector<ConvergenceRow> convergence_study(const TensorField& phantom, std::vector<double> deltas,
                                              const std::function<double(double)>& alpha_rule,
                                              const ConvergenceStudyConfig& config) {
  if (deltas.empty()) throw InvalidInput("no noise levels given");
  if (config.seeds.empty()) throw InvalidInput("no seeds given");
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  const Mask full(phantom.width(), phantom.height());
  std::vector<ConvergenceRow> rows;
  for (double delta : deltas) {
    if (!(delta >= 0.0)) throw InvalidInput("noise levels must be nonnegative");
    FunctionalParams params = config.params;
    params.alpha = alpha_rule(delta);
    std::vector<double> dist;
    for (std::uint64_t seed : config.seeds) {
      const TensorField noisy = corrupt_field(phantom, {delta * delta, seed}, config.b_value, config.a0,
                                              default_directions(), params.epsilon, params.z);
      const SolveResult res = solve(noisy, full, params, Objective::FLogEuclidean, config.solver);
      if (res.report.line_search_failed()) throw ConvergenceError(res.report.diagnostic);
      dist.push_back(summed_log_distance(res.field, phantom));
    }
    rows.push_back({delta, params.alpha, median(dist)});
  }
  return rows;
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::ostringstream os;
  os << "delta,alpha,distance\n";
  char buf[128];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", r.delta, r.alpha, r.distance);
    os << buf;
  }
  return os.str();
}

}  // namespace spdreg
