#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spdreg/functional.hpp"

namespace spdreg {

enum class Objective {
  FLogEuclidean,  ///< fidelity + alpha * Phi with the log-Euclidean metric, solved in log coordinates
  FEuclidean,     ///< fidelity + alpha * Phi with the Frobenius metric, solved in raw coefficients
  FC,             ///< Frobenius fidelity + beta * Theta, solved in raw coefficients
};

enum class GradMode { Analytic, FiniteDifference };

/// How the first trial step of each line search is chosen.
enum class StepRule {
  Fixed,            ///< always init_step
  BarzilaiBorwein,  ///< <s,s>/<s,y> from the previous iterate, init_step on the first iteration
};

/// Search direction of each iteration.
enum class Direction {
  Gradient,  ///< negative gradient, first trial step from step_rule
  Newton,    ///< truncated Newton: Jacobi-preconditioned CG on the exact Hessian, unit first trial step
};

struct SolverConfig {
  int max_iters = 50;
  GradMode grad_mode = GradMode::Analytic;
  double fd_step = 1e-6;
  double armijo_c = 1e-4;
  double backtrack_factor = 0.5;
  double init_step = 1.0;
  double rel_tol = 1e-8;
  int max_backtracks = 60;
  StepRule step_rule = StepRule::BarzilaiBorwein;
  Direction direction = Direction::Gradient;
  /// Inner CG iteration cap for Direction::Newton.
  int cg_max_iters = 200;

  void validate() const;
};

struct SolveReport {
  int iterations = 0;
  std::vector<double> objective_trajectory;
  double final_objective = 0.0;
  bool converged = false;
  double seconds = 0.0;
  /// Empty on success; set when the line search gave up.
  std::string diagnostic;

  bool line_search_failed() const noexcept { return !diagnostic.empty(); }
  /// JSON document with keys iterations, objective_trajectory,
  /// final_objective, converged, seconds. With include_timing = false the
  /// seconds value is null so repeated runs serialize identically.
  std::string to_json(bool include_timing = true) const;
};

/// The discretized objective as a function of a coefficient field (log
/// coordinates for FLogEuclidean, raw coefficients otherwise).
class ObjectiveFunction {
public:
  ObjectiveFunction(const TensorField& data, const Mask& mask, const FunctionalParams& params, Objective kind);
  ObjectiveFunction(SymField data_coords, const Mask& mask, const FunctionalParams& params, Objective kind);

  Objective kind() const noexcept { return kind_; }
  const FunctionalParams& params() const noexcept { return params_; }
  const SymField& data_coords() const noexcept { return data_; }
  const Mask& mask() const noexcept { return mask_; }

  double value(const SymField& x) const;
  /// Exact gradient with respect to the stored coefficients. Off-diagonal
  /// coefficients appear twice in the matrix and get the factor 2.
  SymField gradient(const SymField& x) const;
  /// Central differences with step h, one-sided where the perturbed pixel
  /// would leave the admissible set.
  SymField gradient_fd(const SymField& x, double h) const;
  /// Hessian times v at x. Squared differences below 1e-24 are floored
  /// there, since the curvature of ||u||^p is unbounded at u = 0 for p < 2.
  SymField hessian_vector(const SymField& x, const SymField& v) const;
  /// Diagonal of the same Hessian.
  SymField hessian_diagonal(const SymField& x) const;

  /// Sum of the objective terms that involve pixel i.
  double local_value(const SymField& x, std::size_t i) const;

  SymField coords(const TensorField& w) const;
  TensorField field(const SymField& x) const;
  /// Projection onto the admissible set, expressed in this objective's coordinates.
  SymField project(const SymField& x) const;
  bool admissible_pixel(std::span<const double> block) const;

private:
  Objective kind_;
  FunctionalParams params_;
  SymField data_;
  Mask mask_;
  PairKernel kernel_;
};

struct SolveResult {
  TensorField field;
  SolveReport report;
};

/// Default starting point: the data with pixels outside the mask replaced
/// by project_full(0).
TensorField default_init(const TensorField& data, const Mask& mask, const FunctionalParams& params);

/// Projected descent with Armijo backtracking along the projection arc.
SolveResult solve(const TensorField& data, const Mask& mask, const FunctionalParams& params, Objective objective,
                  const SolverConfig& config, const std::optional<TensorField>& init = std::nullopt);

/// Gradient of F (log-Euclidean) in log coordinates l.
SymField grad_F_log(const SymField& l, const TensorField& data, const Mask& mask, const FunctionalParams& params);
/// Finite-difference counterpart of grad_F_log.
SymField grad_F_fd(const SymField& l, const TensorField& data, const Mask& mask, const FunctionalParams& params,
                   double fd_step = 1e-6);

const char* to_string(Objective o);

}  // namespace spdreg
