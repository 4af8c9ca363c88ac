#include <cmath>
#include <random>

#include "brute_force.hpp"
#include "doctest.h"
#include "fracpq/eigensolvers.hpp"
#include "fracpq/error.hpp"

using namespace fracpq;
namespace bf = oracle_test;

namespace {

const SpectralParams kCoercive{0.7, 0.4, 3.0, 2.0, std::nullopt, std::nullopt};
const SpectralParams kNehari{0.4, 0.7, 2.0, 3.0, std::nullopt, std::nullopt};

SpectralParams with_lambda(SpectralParams p, double lambda) {
  p.lambda = lambda;
  return p;
}

double dense_lambda1(const Grid& g, double s) {
  const Eigen::MatrixXd A = bf::stiffness(bf::midpoints(g.a, g.b, g.n), s);
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(A).eigenvalues()[0] / g.h;
}

double lambda1(const Grid& g, const NonlocalKernel& kq) {
  return solve_lambda1_q(kq, g, kq.r, SolveConfig{}).lambda;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::io_failure;
}

}  // namespace

TEST_CASE("random_positive_field is seeded and lies in (0, 1]") {
  const Field a = random_positive_field(50, 7, 0);
  CHECK(a == random_positive_field(50, 7, 0));
  CHECK(a != random_positive_field(50, 7, 1));
  CHECK(a != random_positive_field(50, 8, 0));
  CHECK(a.minCoeff() > 0.0);
  CHECK(a.maxCoeff() <= 1.0);
}

TEST_CASE("linear first eigenvalue matches the dense eigensolver") {
  for (double s : {0.25, 0.5, 0.75}) {
    const Grid g = build_grid(-1.0, 1.0, 64);
    const NonlocalKernel k = build_kernel(g, s, 2.0);
    const EigenPair e = solve_lambda1_q(k, g, 2.0, SolveConfig{});
    CHECK(e.converged);
    CHECK(bf::rel(e.lambda, dense_lambda1(g, s)) <= 1e-8);
    CHECK(e.rho == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(e.u.minCoeff() > -1e-10);  // oriented, constant sign
  }
}

TEST_CASE("linear first eigenvalue converges under refinement") {
  // Dense oracle on nested grids: successive differences shrink.
  const double l64 = dense_lambda1(build_grid(-1.0, 1.0, 64), 0.5);
  const double l128 = dense_lambda1(build_grid(-1.0, 1.0, 128), 0.5);
  const double l256 = dense_lambda1(build_grid(-1.0, 1.0, 256), 0.5);
  CHECK(std::abs(l64 - l128) >= 1.5 * std::abs(l128 - l256));
}

TEST_CASE("first q-eigenpair: sign and restart invariance") {
  const Grid g = build_grid(-1.0, 1.0, 48);
  const NonlocalKernel k = build_kernel(g, 0.6, 3.0);
  SolveConfig cfg;
  const EigenPair base = solve_lambda1_q(k, g, 3.0, cfg);
  REQUIRE(base.converged);
  CHECK(base.residual <= cfg.tolerance);

  SolveConfig flipped = cfg;
  flipped.initial = Field(-random_positive_field(g.n, 0, 0));
  const EigenPair neg = solve_lambda1_q(k, g, 3.0, flipped);
  CHECK(bf::rel(neg.lambda, base.lambda) <= 1e-10);
  CHECK((neg.u - base.u).cwiseAbs().maxCoeff() <= 1e-6);

  SolveConfig more = cfg;
  more.restarts = 3;
  more.seed = 99;
  CHECK(bf::rel(solve_lambda1_q(k, g, 3.0, more).lambda, base.lambda) <= 1e-10);

  // Deterministic for a fixed seed
  const EigenPair again = solve_lambda1_q(k, g, 3.0, cfg);
  CHECK(again.lambda == base.lambda);
  CHECK(again.u == base.u);
}

TEST_CASE("odd second level") {
  const Grid g = build_grid(-1.0, 1.0, 48);
  const NonlocalKernel k = build_kernel(g, 0.7, 3.0);
  const EigenPair e1 = solve_lambda1_q(k, g, 3.0, SolveConfig{});
  const EigenPair e2 = solve_lambda2_sym(k, g, 3.0, SolveConfig{});
  CHECK(e2.heuristic);
  CHECK(e2.converged);
  CHECK(e2.rho == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(e2.lambda > e1.lambda);
  for (int i = 0; i < g.n; ++i) CHECK(e2.u[i] == doctest::Approx(-e2.u[g.n - 1 - i]).epsilon(1e-12));

  Grid skew = g;
  skew.nodes[0] += 0.1 * g.h;
  CHECK(code_of([&] { solve_lambda2_sym(k, skew, 3.0, SolveConfig{}); }) == ErrorCode::asymmetric_grid);
  CHECK(is_symmetric(g));
  CHECK(!is_symmetric(skew));
}

TEST_CASE("coercive fixed lambda: below lambda_1 the minimiser is zero") {
  const Grid g = build_grid(-1.0, 1.0, 48);
  const KernelPair k = build_kernels(g, kCoercive);
  const double l1 = lambda1(g, k.q);
  const EigenPair e = solve_fixed_lambda_coercive(with_lambda(kCoercive, 0.5 * l1), k, SolveConfig{});
  CHECK(e.trivial);
  CHECK(e.converged);
  CHECK(e.u.cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("coercive fixed lambda: above lambda_1 a nontrivial minimiser with negative energy") {
  const Grid g = build_grid(-1.0, 1.0, 48);
  const KernelPair k = build_kernels(g, kCoercive);
  const double l1 = lambda1(g, k.q);
  SolveConfig cfg;
  const SpectralParams params = with_lambda(kCoercive, 2.0 * l1);
  const EigenPair e = solve_fixed_lambda_coercive(params, k, cfg);
  CHECK(!e.trivial);
  CHECK(e.converged);
  CHECK(e.objective < 0.0);
  CHECK(e.residual <= cfg.tolerance);
  CHECK(weak_form_residual(e.u, params.lambda.value(), k.p, k.q) <= 10 * cfg.tolerance);
  CHECK(e.u.minCoeff() >= -1e-10 * e.u.maxCoeff());

  // A tiny multiple of e1 starts on the descending side of the origin.
  SolveConfig tiny = cfg;
  tiny.initial = Field(1e-3 * solve_lambda1_q(k.q, g, 2.0, SolveConfig{}).u);
  const EigenPair from_tiny = solve_fixed_lambda_coercive(params, k, tiny);
  CHECK(from_tiny.objective == doctest::Approx(e.objective).epsilon(1e-9));
  for (std::size_t i = 1; i < from_tiny.objective_log.size(); ++i) {
    CHECK(from_tiny.objective_log[i] <= from_tiny.objective_log[i - 1] + 1e-12 * std::abs(from_tiny.objective_log[i - 1]));
  }
}

TEST_CASE("fixed rho with equal operators is independent of rho") {
  const SpectralParams same{0.5, 0.5, 2.0, 2.0, std::nullopt, std::nullopt};
  const Grid g = build_grid(-1.0, 1.0, 40);
  const KernelPair k = build_kernels(g, same);
  const double l1 = lambda1(g, k.q);
  for (double rho : {1e-3, 1.0, 50.0}) {
    const EigenPair e = solve_fixed_rho(same, rho, k, SolveConfig{});
    CHECK(e.rho == doctest::Approx(rho).epsilon(1e-13));
    CHECK(bf::rel(e.lambda, 2.0 * l1) <= 1e-8);
  }
}

TEST_CASE("fixed rho: multiplier and monotone continuation") {
  const Grid g = build_grid(-1.0, 1.0, 40);
  const KernelPair k = build_kernels(g, kCoercive);
  double previous = std::numeric_limits<double>::infinity();
  for (double rho : {1.0, 0.1, 0.01}) {
    const EigenPair e = solve_fixed_rho(kCoercive, rho, k, SolveConfig{});
    REQUIRE(e.converged);
    CHECK(e.lambda < previous);
    previous = e.lambda;
    // Least-squares multiplier of the discrete equation agrees with the reported one.
    const Field lhs = apply_frac_laplacian(e.u, k.p) + apply_frac_laplacian(e.u, k.q);
    const Field m = lq_mass_gradient(e.u, g.h, 2.0) / 2.0;
    CHECK(bf::rel(lhs.dot(m) / m.dot(m), e.lambda) <= 1e-8);
  }
}

TEST_CASE("nehari scaling and projection") {
  // P = 2, Q = 1, lambda M = 3 at p = 2, q = 3: t = (2 / 2)^(1) = 1
  CHECK(nehari_scaling(2.0, 1.0, 3.0, 2.0, 3.0) == doctest::Approx(1.0));
  CHECK(nehari_scaling(8.0, 1.0, 3.0, 2.0, 3.0) == doctest::Approx(4.0));
  CHECK(code_of([] { nehari_scaling(1.0, 3.0, 3.0, 2.0, 3.0); }) == ErrorCode::not_above_cone);
  CHECK(code_of([] { nehari_scaling(1.0, 4.0, 3.0, 2.0, 3.0); }) == ErrorCode::not_above_cone);

  const Grid g = build_grid(-1.0, 1.0, 40);
  const KernelPair k = build_kernels(g, kNehari);
  const EigenPair e1 = solve_lambda1_q(k.q, g, 3.0, SolveConfig{});
  const SpectralParams params = with_lambda(kNehari, 2.0 * e1.lambda);
  const NehariProjection pr = nehari_project(e1.u, params, k);
  CHECK(nehari_membership_residual(pr.tu, *params.lambda, k) <= 1e-13);
  CHECK(nehari_project(pr.tu, params, k).t == doctest::Approx(1.0).epsilon(1e-12));
  for (double c : {1e-3, 7.0}) {
    const NehariProjection scaled = nehari_project(Field(c * e1.u), params, k);
    CHECK((scaled.tu - pr.tu).cwiseAbs().maxCoeff() <= 1e-12 * pr.tu.cwiseAbs().maxCoeff());
  }
  CHECK(code_of([&] { nehari_project(e1.u, kNehari, k); }) == ErrorCode::missing_lambda);
}

TEST_CASE("nehari minimisation") {
  const Grid g = build_grid(-1.0, 1.0, 40);
  const KernelPair k = build_kernels(g, kNehari);
  const double l1 = lambda1(g, k.q);

  CHECK(code_of([&] { solve_nehari(with_lambda(kNehari, 0.9 * l1), k, SolveConfig{}); }) ==
        ErrorCode::infeasible_lambda);

  SolveConfig cfg;
  const SpectralParams params = with_lambda(kNehari, 2.0 * l1);
  const EigenPair e = solve_nehari(params, k, cfg);
  REQUIRE(e.converged);
  CHECK(e.residual <= cfg.tolerance);
  CHECK(nehari_membership_residual(e.u, 2.0 * l1, k) <= 1e-12);
  const double P = seminorm_pow(e.u, k.p);
  CHECK(bf::rel(e.objective, (0.5 - 1.0 / 3.0) * P) <= 1e-12);
  CHECK(e.objective > 0.0);

  // The pair is +-: a negated start without orientation returns the negated minimiser.
  SolveConfig neg = cfg;
  neg.orient = false;
  neg.initial = Field(-random_positive_field(g.n, 0, 0));
  const EigenPair m = solve_nehari(params, k, neg);
  CHECK(bf::rel(m.objective, e.objective) <= 1e-9);
  CHECK((m.u + e.u).cwiseAbs().maxCoeff() <= 1e-6 * e.u.cwiseAbs().maxCoeff());
}

TEST_CASE("solver preconditions") {
  const Grid g = build_grid(-1.0, 1.0, 16);
  const KernelPair kc = build_kernels(g, kCoercive);
  const KernelPair kn = build_kernels(g, kNehari);
  CHECK(code_of([&] { solve_fixed_lambda_coercive(kCoercive, kc, SolveConfig{}); }) == ErrorCode::missing_lambda);
  CHECK(code_of([&] { solve_fixed_lambda_coercive(with_lambda(kNehari, 10.0), kn, SolveConfig{}); }) ==
        ErrorCode::regime_mismatch);
  CHECK(code_of([&] { solve_nehari(with_lambda(kCoercive, 10.0), kc, SolveConfig{}); }) == ErrorCode::regime_mismatch);
  CHECK(code_of([&] { solve_fixed_rho(kCoercive, 0.0, kc, SolveConfig{}); }) == ErrorCode::parameter_out_of_range);
  CHECK(code_of([&] { solve_fixed_rho(kNehari, 1.0, kc, SolveConfig{}); }) == ErrorCode::parameter_out_of_range);
  SolveConfig bad;
  bad.restarts = 0;
  CHECK(code_of([&] { solve_lambda1_q(kc.q, g, 2.0, bad); }) == ErrorCode::parameter_out_of_range);
  SolveConfig wrong;
  wrong.initial = Field::Ones(5);
  CHECK(code_of([&] { solve_lambda1_q(kc.q, g, 2.0, wrong); }) == ErrorCode::dimension_mismatch);
  CHECK(code_of([&] { solve_lambda1_q(kc.q, g, 3.0, SolveConfig{}); }) == ErrorCode::parameter_out_of_range);
}
