#include "fracpq/grid.hpp"

#include <cmath>
#include <sstream>

#include "fracpq/error.hpp"

namespace fracpq {

namespace {

void check_kernel_parameters(double s, double r) {
  if (!(s > 0.0 && s < 1.0)) {
    std::ostringstream os;
    os << "fractional order s = " << s << " must lie in (0, 1)";
    throw Error(ErrorCode::parameter_out_of_range, os.str());
  }
  if (!(r > 1.0) || !std::isfinite(r)) {
    std::ostringstream os;
    os << "exponent r = " << r << " must lie in (1, inf)";
    throw Error(ErrorCode::parameter_out_of_range, os.str());
  }
}

double exterior_weight(const Grid& grid, double x, double sr) {
  return grid.h * (std::pow(grid.b - x, -sr) + std::pow(x - grid.a, -sr)) / sr;
}

}  // namespace

Grid build_grid(double a, double b, int n) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
    std::ostringstream os;
    os << "need a < b, got a = " << a << ", b = " << b;
    throw Error(ErrorCode::invalid_extent, os.str());
  }
  if (n < 2) {
    throw Error(ErrorCode::too_few_cells, "need n >= 2 cells, got " + std::to_string(n));
  }
  Grid grid;
  grid.a = a;
  grid.b = b;
  grid.n = n;
  grid.h = (b - a) / n;
  grid.nodes.resize(n);
  for (int i = 0; i < n; ++i) grid.nodes[i] = a + (i + 0.5) * grid.h;
  return grid;
}

NonlocalKernel build_kernel(const Grid& grid, double s, double r) {
  check_kernel_parameters(s, r);
  const int n = grid.n;
  const double sr = s * r;
  const double expo = 1.0 + sr;
  const double h2 = grid.h * grid.h;

  NonlocalKernel k;
  k.s = s;
  k.r = r;
  k.h = grid.h;
  k.pair_weights.resize(n, n);
  k.exterior_weights.resize(n);

  // Column-major storage: thread j owns column j.
#pragma omp parallel for schedule(static)
  for (int j = 0; j < n; ++j) {
    double* col = k.pair_weights.col(j).data();
    for (int i = 0; i < n; ++i) {
      col[i] = (i == j) ? 0.0 : h2 / std::pow(std::abs(grid.nodes[i] - grid.nodes[j]), expo);
    }
    k.exterior_weights[j] = exterior_weight(grid, grid.nodes[j], sr);
  }
  return k;
}

namespace reference {

NonlocalKernel build_kernel(const Grid& grid, double s, double r) {
  check_kernel_parameters(s, r);
  const int n = grid.n;
  const double sr = s * r;

  NonlocalKernel k;
  k.s = s;
  k.r = r;
  k.h = grid.h;
  k.pair_weights = Eigen::MatrixXd::Zero(n, n);
  k.exterior_weights.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const double dist = std::abs(grid.nodes[i] - grid.nodes[j]);
      k.pair_weights(i, j) = grid.h * grid.h / std::pow(dist, 1.0 + sr);
    }
    k.exterior_weights[i] = exterior_weight(grid, grid.nodes[i], sr);
  }
  return k;
}

}  // namespace reference

}  // namespace fracpq
