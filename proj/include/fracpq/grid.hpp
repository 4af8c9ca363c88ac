#pragma once

#include <Eigen/Dense>

namespace fracpq {

/// Uniform cell-centred grid on the interval (a, b).
struct Grid {
  double a = 0.0;
  double b = 1.0;
  int n = 0;
  double h = 0.0;
  Eigen::VectorXd nodes;  // x_i = a + (i + 1/2) h

  double length() const { return b - a; }
};

Grid build_grid(double a, double b, int n);

/// Quadrature weights for the discrete Gagliardo energy of one (s, r) pair,
/// with the Dirichlet exterior (u = 0 off the interval) integrated in closed form:
///
///   pair_weights(i, j)  = h^2 / |x_i - x_j|^(1 + s r),  i != j,  zero diagonal
///   exterior_weights(i) = h ((b - x_i)^(-s r) + (x_i - a)^(-s r)) / (s r)
///
/// The diagonal cell pair is dropped; its integrand is integrable since
/// r (1 - s) - 1 > -1, so the scheme stays first-order consistent.
struct NonlocalKernel {
  double s = 0.0;
  double r = 0.0;
  double h = 0.0;
  Eigen::MatrixXd pair_weights;
  Eigen::VectorXd exterior_weights;

  int size() const { return static_cast<int>(exterior_weights.size()); }
};

/// OpenMP assembly over rows. Every weight is written exactly once, so the
/// result does not depend on the thread count.
NonlocalKernel build_kernel(const Grid& grid, double s, double r);

namespace reference {

/// Straight double loop with std::pow; kept as the baseline for tests and benchmarks.
NonlocalKernel build_kernel(const Grid& grid, double s, double r);

}  // namespace reference

}  // namespace fracpq
