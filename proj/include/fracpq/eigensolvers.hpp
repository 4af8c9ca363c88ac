#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "fracpq/forms.hpp"
#include "fracpq/grid.hpp"
#include "fracpq/optimizer.hpp"

namespace fracpq {

struct SolveConfig {
  int max_iterations = 400;
  double step_size = 1.0;  // initial trial step of each line search
  double tolerance = 1e-10;
  std::uint64_t seed = 0;
  int restarts = 1;
  double armijo_shrink = 0.5;
  /// Mass below which a fixed-lambda descent is declared to have reached u = 0.
  double trivial_mass = 1e-14;
  Symmetry symmetry = Symmetry::none;
  /// Apply normalize_sign to the result. Off when the raw sign of the
  /// minimiser reached from a given start matters.
  bool orient = true;
  /// Warm start; replaces the random initialiser of the first restart.
  std::optional<Field> initial;

  void validate() const;
};

struct EigenPair {
  double lambda = 0.0;
  Field u;
  double rho = 0.0;       // lq_mass(u)
  double residual = 0.0;  // stationarity defect of the solved variational problem
  /// Defect of the weak form of the eigenvalue equation at u. Equal to
  /// `residual` except for the transformed problem, whose energy is not the
  /// potential of its own weak form.
  double weak_form_residual = 0.0;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  bool trivial = false;    // fixed-lambda descent ended at u = 0
  bool heuristic = false;  // odd-symmetry surrogate for the second level
  std::vector<double> objective_log;
};

/// Seeded random field with entries in (0, 1]; `stream` separates restarts.
Field random_positive_field(int n, std::uint64_t seed, std::uint64_t stream = 0);

/// lambda_1(s, q) = min [u]^q_{s,q} subject to h sum |u|^q = 1.
EigenPair solve_lambda1_q(const NonlocalKernel& kq, const Grid& grid, double q, const SolveConfig& cfg);

/// Same minimisation restricted to fields odd about the midpoint of the
/// interval. An upper bound for the second variational eigenvalue; flagged
/// heuristic.
EigenPair solve_lambda2_sym(const NonlocalKernel& kq, const Grid& grid, double q, const SolveConfig& cfg);

/// Global minimisation of F_lambda in the coercive regime. For
/// lambda <= lambda_1(s2, q) the descent reaches u = 0 and the pair is
/// flagged trivial.
EigenPair solve_fixed_lambda_coercive(const SpectralParams& params, const KernelPair& kernels,
                                      const SolveConfig& cfg);

/// Minimise I(u) on { int |u|^q = rho }; lambda = ([u]^p + [u]^q) / rho.
EigenPair solve_fixed_rho(const SpectralParams& params, double rho, const KernelPair& kernels,
                          const SolveConfig& cfg);

struct NehariProjection {
  double t = 0.0;
  Field tu;
};

/// t = (P / (lambda_mass - Q))^(1/(q-p)); throws not-above-cone when the
/// denominator is not positive beyond `degenerate` * lambda_mass.
double nehari_scaling(double P, double Q, double lambda_mass, double p, double q, double degenerate = 1e-12);

NehariProjection nehari_project(const Field& u, const SpectralParams& params, const KernelPair& kernels);

/// Relative Nehari defect |[u]^p + [u]^q - lambda int |u|^q| / (lambda int |u|^q).
double nehari_membership_residual(const Field& u, double lambda, const KernelPair& kernels);

/// Minimise F_lambda on the Nehari set (p < q). Throws infeasible-lambda when
/// no direction with lambda int |u|^q > [u]^q is found in any restart.
EigenPair solve_nehari(const SpectralParams& params, const KernelPair& kernels, const SolveConfig& cfg);

/// Sign convention for first-branch fields: sum(u) >= 0. Odd fields are
/// oriented so that the left half has nonnegative sum.
void normalize_sign(Field& u, Symmetry symmetry = Symmetry::none);

/// True when nodes are mirror images about (a + b)/2 to rounding.
bool is_symmetric(const Grid& grid);

}  // namespace fracpq
