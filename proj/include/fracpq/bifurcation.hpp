#pragma once

#include <vector>

#include "fracpq/eigensolvers.hpp"

namespace fracpq {

struct BranchPoint {
  double rho = 0.0;
  double lambda = 0.0;
  double seminorm_p = 0.0;  // [u]_{s1,p} of the physical solution
  double norm_s2q = 0.0;    // [u]_{s2,q}; for the branch at infinity, 1 / [w]_{s2,q}
  double residual = 0.0;
  bool converged = false;
};

using Branch = std::vector<BranchPoint>;

/// rho_max, ..., rho_min with `per_decade` points per decade, geometric.
std::vector<double> geometric_rho_grid(double rho_max, double rho_min, int per_decade = 4);

/// Fixed-mass continuation towards rho -> 0 in the coercive regime. Each
/// solve after the first is warm-started from the previous eigenfunction
/// rescaled to the new mass.
Branch trace_branch_zero(const SpectralParams& params, const std::vector<double>& rho_grid,
                         const KernelPair& kernels, const SolveConfig& cfg);

/// Minimises E(w) on { h sum |w|^q = rho } for p <= q. In the returned pair,
/// `residual` is the stationarity defect of E on the constraint and
/// `weak_form_residual` the defect of
///   [w]_q^(2(q-p)) (-Delta)_p w + (-Delta)_q w = lambda |w|^(q-2) w,
/// with lambda = ([w]_q^(2(q-p)) [w]^p + [w]^q) / rho.
EigenPair solve_transformed(const SpectralParams& params, double rho, const KernelPair& kernels,
                            const SolveConfig& cfg);

/// Continuation of the transformed problem; each point reports the recovered
/// physical solution u = w / [w]_q^2.
Branch trace_branch_infinity(const SpectralParams& params, const std::vector<double>& rho_grid,
                             const KernelPair& kernels, const SolveConfig& cfg);

/// u / [u]_{s2,q}^2. An involution, since [u / [u]^2] = 1 / [u].
Field change_of_variables(const Field& u, const NonlocalKernel& kq);

struct RateFit {
  double exponent = 0.0;
  double prefactor = 0.0;  // gap ~ prefactor * rho^exponent
  double r_squared = 0.0;
  int points_used = 0;
  int excluded = 0;  // converged points at or below lambda_ref
};

/// Least-squares slope of log(lambda - lambda_ref) against log(rho) over the
/// converged points with a positive gap.
RateFit fit_rate(const Branch& branch, double lambda_ref);

}  // namespace fracpq
