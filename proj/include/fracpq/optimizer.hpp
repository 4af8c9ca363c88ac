#pragma once

#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "fracpq/forms.hpp"

namespace fracpq {

/// Restricts iterates to a linear subspace of fields.
enum class Symmetry {
  none,
  odd,  // u_i = -u_{n-1-i}
};

Eigen::MatrixXd symmetry_basis(int n, Symmetry symmetry);

/// Twice-differentiable objective. `value` returns +inf outside its domain.
struct SmoothObjective {
  std::function<double(const Field&)> value;
  std::function<Field(const Field&)> gradient;
  std::function<Eigen::MatrixXd(const Field&)> hessian;
};

/// The level set { h sum |u_i|^q = rho }.
struct MassSphere {
  double q = 2.0;
  double h = 1.0;
  double rho = 1.0;

  Field retract(const Field& u) const;
};

struct DescentOptions {
  int max_iterations = 500;
  double tolerance = 1e-10;
  double initial_step = 1.0;
  double armijo_shrink = 0.5;
  double armijo_c = 1e-4;
  Symmetry symmetry = Symmetry::none;
  /// Stationarity measure checked against `tolerance` before every step.
  std::function<double(const Field&)> residual;
  /// Optional early exit, evaluated after every accepted step.
  std::function<bool(const Field&)> stop;
};

enum class StepKind { newton, preconditioned, steepest, polish };

struct DescentResult {
  Field u;
  double objective = 0.0;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
  bool stopped_early = false;
  std::vector<double> objective_log;  // objective at the start and after every accepted step
  std::vector<StepKind> steps;
};

/// Minimises a smooth objective on the mass sphere. Each iteration takes the
/// tangent Newton step from the KKT system when it is a descent direction,
/// otherwise a Hessian-preconditioned projected gradient, followed by Armijo
/// backtracking and retraction onto the sphere. Once the objective change
/// falls to rounding level, the Newton step is accepted when it lowers the
/// residual (a `polish` step).
DescentResult minimize_on_sphere(const SmoothObjective& objective, const MassSphere& sphere,
                                 const Field& start, const DescentOptions& options);

/// Unconstrained variant: damped Newton with a diagonal shift when the
/// Hessian is not positive definite.
DescentResult minimize_free(const SmoothObjective& objective, const Field& start,
                            const DescentOptions& options);

}  // namespace fracpq
