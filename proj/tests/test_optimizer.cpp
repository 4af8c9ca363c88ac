#include <algorithm>
#include <random>

#include "doctest.h"
#include "fracpq/optimizer.hpp"

using namespace fracpq;

namespace {

Eigen::MatrixXd random_spd(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> dist;
  Eigen::MatrixXd B(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) B(i, j) = dist(rng);
  return B * B.transpose() + Eigen::MatrixXd::Identity(n, n);
}

SmoothObjective quadratic(const Eigen::MatrixXd& A, const Field& b) {
  return SmoothObjective{[A, b](const Field& u) { return 0.5 * u.dot(A * u) - b.dot(u); },
                         [A, b](const Field& u) { return Field(A * u - b); },
                         [A](const Field&) { return A; }};
}

}  // namespace

TEST_CASE("retraction lands on the sphere") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (double q : {1.5, 2.0, 3.0}) {
    const MassSphere sphere{q, 0.1, 0.37};
    Field u(10);
    for (int i = 0; i < 10; ++i) u[i] = dist(rng);
    const Field r = sphere.retract(u);
    CHECK(lq_mass(r, sphere.h, q) == doctest::Approx(0.37).epsilon(1e-14));
    CHECK(r.normalized().dot(u.normalized()) == doctest::Approx(1.0));
  }
}

TEST_CASE("odd symmetry basis is orthonormal and odd") {
  for (int n : {6, 7, 12}) {
    const Eigen::MatrixXd Z = symmetry_basis(n, Symmetry::odd);
    CHECK(Z.cols() == n / 2);
    CHECK((Z.transpose() * Z - Eigen::MatrixXd::Identity(Z.cols(), Z.cols())).cwiseAbs().maxCoeff() <= 1e-14);
    for (int c = 0; c < Z.cols(); ++c)
      for (int i = 0; i < n; ++i) CHECK(Z(i, c) == -Z(n - 1 - i, c));
  }
  CHECK(symmetry_basis(5, Symmetry::none).size() == 0);  // empty basis means the full space
}

TEST_CASE("a quadratic on the unit sphere reaches the smallest eigenvalue") {
  std::mt19937_64 rng(2);
  const int n = 12;
  const Eigen::MatrixXd A = random_spd(n, rng);
  const SmoothObjective obj = quadratic(A, Field::Zero(n));
  const MassSphere sphere{2.0, 1.0, 1.0};
  DescentOptions opt;
  opt.tolerance = 1e-11;
  opt.residual = [&](const Field& u) {
    const Field g = A * u;
    return (g - u.dot(g) * u).cwiseAbs().maxCoeff();
  };
  Field start = Field::Ones(n);
  start[0] = 3.0;
  const DescentResult res = minimize_on_sphere(obj, sphere, start, opt);
  CHECK(res.converged);
  const double lmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A).eigenvalues()[0];
  CHECK(2.0 * res.objective == doctest::Approx(lmin).epsilon(1e-10));
  CHECK(res.u.squaredNorm() == doctest::Approx(1.0).epsilon(1e-14));

  // Accepted line-search steps decrease the objective; polish steps may move it by rounding only.
  REQUIRE(res.objective_log.size() == res.steps.size() + 1);
  for (std::size_t i = 0; i < res.steps.size(); ++i) {
    const double before = res.objective_log[i];
    const double after = res.objective_log[i + 1];
    if (res.steps[i] == StepKind::polish) {
      CHECK(std::abs(after - before) <= 1e-12 * std::abs(before));
    } else {
      CHECK(after < before);
    }
  }
}

TEST_CASE("odd restriction keeps iterates odd") {
  std::mt19937_64 rng(3);
  const int n = 10;
  const Eigen::MatrixXd A = random_spd(n, rng);
  DescentOptions opt;
  opt.symmetry = Symmetry::odd;
  opt.residual = [](const Field&) { return 1.0; };
  opt.max_iterations = 20;
  Field start(n);
  for (int i = 0; i < n / 2; ++i) {
    start[i] = i + 1.0;
    start[n - 1 - i] = -(i + 1.0);
  }
  const DescentResult res = minimize_on_sphere(quadratic(A, Field::Zero(n)), MassSphere{2.0, 1.0, 1.0}, start, opt);
  for (int i = 0; i < n; ++i) CHECK(res.u[i] == doctest::Approx(-res.u[n - 1 - i]).epsilon(1e-12));
}

TEST_CASE("minimize_free solves a convex quadratic") {
  std::mt19937_64 rng(4);
  const int n = 8;
  const Eigen::MatrixXd A = random_spd(n, rng);
  Field b(n);
  for (int i = 0; i < n; ++i) b[i] = i - 3.0;
  DescentOptions opt;
  opt.residual = [&](const Field& u) { return (A * u - b).cwiseAbs().maxCoeff(); };
  const DescentResult res = minimize_free(quadratic(A, b), Field::Zero(n), opt);
  CHECK(res.converged);
  const Field exact = A.llt().solve(b);
  CHECK((res.u - exact).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("stop predicate ends the descent early") {
  const int n = 4;
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(n, n);
  DescentOptions opt;
  opt.residual = [](const Field& u) { return u.norm(); };
  opt.tolerance = 0.0;
  opt.stop = [](const Field& u) { return u.norm() < 0.5; };
  const DescentResult res = minimize_free(quadratic(A, Field::Zero(n)), Field::Ones(n), opt);
  CHECK(res.stopped_early);
}
