#include "fracpq/oracle.hpp"

#include <cmath>

#include "fracpq/error.hpp"

namespace fracpq::oracle {

namespace {

/// h * integral over y <= a of |x - y|^(-1 - sigma); likewise for y >= b.
double tail(const Grid& grid, double x, double sigma) {
  const double left = std::pow(x - grid.a, -sigma) / sigma;
  const double right = std::pow(grid.b - x, -sigma) / sigma;
  return grid.h * (left + right);
}

double phi(double t, double r) { return t == 0.0 ? 0.0 : std::pow(std::abs(t), r - 1.0) * (t > 0 ? 1.0 : -1.0); }

void check(const Field& u, const Grid& grid) {
  if (u.size() != grid.n) throw Error(ErrorCode::dimension_mismatch, "oracle: field size differs from grid");
}

}  // namespace

double seminorm_pow(const Field& u, const Grid& grid, double s, double r) {
  check(u, grid);
  const double sigma = s * r;
  double total = 0.0;
  for (int i = 0; i < grid.n; ++i) {
    for (int j = 0; j < grid.n; ++j) {
      if (i == j) continue;
      const double dist = std::abs(grid.nodes[i] - grid.nodes[j]);
      total += grid.h * grid.h * std::pow(std::abs(u[i] - u[j]), r) / std::pow(dist, 1.0 + sigma);
    }
  }
  for (int i = 0; i < grid.n; ++i) total += 2.0 * tail(grid, grid.nodes[i], sigma) * std::pow(std::abs(u[i]), r);
  return total;
}

double bilinear_form(const Field& u, const Field& v, const Grid& grid, double s, double r) {
  check(u, grid);
  check(v, grid);
  const double sigma = s * r;
  double total = 0.0;
  for (int i = 0; i < grid.n; ++i) {
    for (int j = 0; j < grid.n; ++j) {
      if (i == j) continue;
      const double dist = std::abs(grid.nodes[i] - grid.nodes[j]);
      total += grid.h * grid.h * phi(u[i] - u[j], r) * (v[i] - v[j]) / std::pow(dist, 1.0 + sigma);
    }
  }
  for (int i = 0; i < grid.n; ++i) total += 2.0 * tail(grid, grid.nodes[i], sigma) * phi(u[i], r) * v[i];
  return total;
}

}  // namespace fracpq::oracle
