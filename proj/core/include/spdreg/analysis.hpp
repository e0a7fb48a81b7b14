#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "spdreg/optim.hpp"
#include "spdreg/synth.hpp"

namespace spdreg {

struct Rgb {
  std::uint8_t r, g, b;
  bool operator==(const Rgb&) const = default;
};

/// FA in [0, 1] mapped linearly from black (0) to light blue (120, 180, 255).
struct ColorScale {
  static constexpr std::array<double, 3> kHigh{120.0, 180.0, 255.0};
  static Rgb map(double fa);
};

/// ||orig|| / ||orig - rec|| with field norms sqrt(sum_x ||.||_F^2).
/// +infinity when the fields are identical; InvalidInput if orig is zero.
double snr(const TensorField& orig, const TensorField& rec);

/// Sum over pixels of the log-Euclidean distance between the two fields.
double summed_log_distance(const TensorField& a, const TensorField& b);

/// Per column, the mean over rows of the largest eigenvalue.
std::vector<double> column_eigen_profile(const TensorField& w);

/// One filled ellipse per pixel: axes along the in-plane projection of the
/// leading eigenvector, radii proportional to the two largest eigenvalues
/// (largest radius over the field = 0.45 pixel), fill from ColorScale(FA).
std::string render_svg(const TensorField& w);
/// Writes render_svg(w) to path; throws Error on I/O failure.
void write_svg(const TensorField& w, const std::string& path);

struct ConvergenceRow {
  double delta;
  double alpha;
  double distance;  ///< median over seeds of summed_log_distance to the phantom
};

struct ConvergenceStudyConfig {
  FunctionalParams params;
  SolverConfig solver;
  std::vector<std::uint64_t> seeds{1, 2, 3};
  double b_value = kDefaultBValue;
  double a0 = kDefaultA0;
};

/// alpha(delta) = delta^(p/2); tends to 0 while delta^p / alpha does too.
double default_alpha_rule(double delta, double p);

/// For each noise level delta (Rician sigma = delta), corrupt the phantom
/// once per seed, denoise with alpha_rule(delta), and record the median
/// distance. Rows are sorted by decreasing delta.
std::vector<ConvergenceRow> convergence_study(const TensorField& phantom, std::vector<double> deltas,
                                              const std::function<double(double)>& alpha_rule,
                                              const ConvergenceStudyConfig& config);

/// CSV with header "delta,alpha,distance".
std::string convergence_csv(const std::vector<ConvergenceRow>& rows);

double median(std::vector<double> v);

}  // namespace spdreg
