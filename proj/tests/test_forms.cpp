#include <algorithm>
#include <random>
#include <vector>

#include "brute_force.hpp"
#include "doctest.h"
#include "fracpq/eigensolvers.hpp"
#include "fracpq/error.hpp"
#include "fracpq/forms.hpp"

using namespace fracpq;
namespace bf = oracle_test;

namespace {

struct Case {
  double s, r;
};
const Case kCases[] = {{0.5, 2.0}, {0.3, 1.5}, {0.7, 3.0}, {0.45, 1.2}, {0.85, 4.0}};

}  // namespace

TEST_CASE("seminorm on the two-cell grid") {
  const Grid g = build_grid(0.0, 1.0, 2);
  const NonlocalKernel k = build_kernel(g, 0.5, 2.0);
  Field u(2);
  u << 1.0, 0.0;
  CHECK(seminorm_pow(u, k) == doctest::Approx(22.0 / 3.0).epsilon(1e-15));
  CHECK(seminorm_pow(Field::Zero(2), k) == 0.0);
}

TEST_CASE("seminorm and bilinear form match the brute-force double sum") {
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (const Case& c : kCases) {
    for (int n = 2; n <= 16; ++n) {
      const Grid g = build_grid(-1.0, 1.0, n);
      const bf::Nodes nodes = bf::midpoints(-1.0, 1.0, n);
      const NonlocalKernel k = build_kernel(g, c.s, c.r);
      for (int f = 0; f < 20; ++f) {
        const Field u = bf::random_field(n, rng);
        const Field v = bf::random_field(n, rng);
        const double semi = bf::seminorm(u, nodes, c.s, c.r);
        worst = std::max(worst, bf::rel(seminorm_pow(u, k), semi));
        const double bil = bf::bilinear(u, v, nodes, c.s, c.r);
        worst = std::max(worst, std::abs(bilinear_form(u, v, k) - bil) / std::max(std::abs(bil), 1e-3 * semi));
      }
    }
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("seminorm is even, homogeneous and strictly positive") {
  std::mt19937_64 rng(3);
  const Grid g = build_grid(-1.0, 1.0, 40);
  for (const Case& c : kCases) {
    const NonlocalKernel k = build_kernel(g, c.s, c.r);
    for (int t = 0; t < 10; ++t) {
      const Field u = bf::random_field(g.n, rng);
      const double base = seminorm_pow(u, k);
      CHECK(base > 0.0);
      CHECK(seminorm_pow(Field(-u), k) == doctest::Approx(base).epsilon(1e-14));
      const double scale = std::uniform_real_distribution<double>(-5.0, 5.0)(rng);
      CHECK(bf::rel(seminorm_pow(Field(scale * u), k), std::pow(std::abs(scale), c.r) * base) <= 1e-12);
    }
    // a single nonzero node only sees the exterior and pair terms
    Field spike = Field::Zero(g.n);
    spike[g.n / 2] = 1e-3;
    CHECK(seminorm_pow(spike, k) > 0.0);
  }
}

TEST_CASE("bilinear form identities") {
  std::mt19937_64 rng(4);
  const Grid g = build_grid(-1.0, 1.0, 30);
  for (const Case& c : kCases) {
    const NonlocalKernel k = build_kernel(g, c.s, c.r);
    const Field u = bf::random_field(g.n, rng);
    CHECK(bilinear_form(u, Field::Zero(g.n), k) == 0.0);
    CHECK(bf::rel(bilinear_form(u, u, k), seminorm_pow(u, k)) <= 1e-13);
  }
}

TEST_CASE("bilinear form at r < 2 with repeated values stays finite") {
  const Grid g = build_grid(0.0, 1.0, 6);
  const NonlocalKernel k = build_kernel(g, 0.4, 1.5);
  Field u(6), v(6);
  u << 0.0, 0.5, 0.5, 0.0, -0.2, 0.0;
  v << 1.0, -2.0, 0.3, 0.7, 0.1, -1.0;
  const double b = bilinear_form(u, v, k);
  CHECK(std::isfinite(b));
  CHECK(bf::rel(b, bf::bilinear(u, v, bf::midpoints(0.0, 1.0, 6), 0.4, 1.5)) <= 1e-13);
}

TEST_CASE("directional derivative of seminorm / r equals the bilinear form") {
  std::mt19937_64 rng(5);
  const Grid g = build_grid(-1.0, 1.0, 24);
  for (const Case& c : kCases) {
    const NonlocalKernel k = build_kernel(g, c.s, c.r);
    for (int t = 0; t < 10; ++t) {
      const Field u = bf::random_field(g.n, rng);
      const Field v = bf::random_field(g.n, rng);
      const double eps = 1e-6;
      const double fd = (seminorm_pow(Field(u + eps * v), k) - seminorm_pow(Field(u - eps * v), k)) / (2 * eps * c.r);
      CHECK(bf::rel(fd, bilinear_form(u, v, k)) <= 1e-5);
    }
  }
}

TEST_CASE("apply_frac_laplacian represents the bilinear form") {
  std::mt19937_64 rng(6);
  const Grid g = build_grid(-1.0, 1.0, 33);
  for (const Case& c : kCases) {
    const NonlocalKernel k = build_kernel(g, c.s, c.r);
    CHECK(apply_frac_laplacian(Field::Zero(g.n), k).cwiseAbs().maxCoeff() == 0.0);
    for (int t = 0; t < 10; ++t) {
      const Field u = bf::random_field(g.n, rng);
      const Field v = bf::random_field(g.n, rng);
      const double lhs = apply_frac_laplacian(u, k).dot(v);
      const double rhs = bilinear_form(u, v, k);
      const double scale = std::max(std::abs(rhs), 1e-3 * seminorm_pow(u, k));
      CHECK(std::abs(lhs - rhs) / scale <= 1e-12);
    }
  }
}

TEST_CASE("apply_frac_laplacian at r = 2 is the assembled stiffness product") {
  std::mt19937_64 rng(7);
  for (double s : {0.25, 0.5, 0.75}) {
    const bf::Nodes nodes = bf::midpoints(-1.0, 1.0, 48);
    const Eigen::MatrixXd A = bf::stiffness(nodes, s);
    const NonlocalKernel k = build_kernel(build_grid(-1.0, 1.0, 48), s, 2.0);
    const Field u = bf::random_field(48, rng);
    const Field exact = A * u;
    CHECK((apply_frac_laplacian(u, k) - exact).cwiseAbs().maxCoeff() <= 1e-12 * exact.cwiseAbs().maxCoeff() * 48);
  }
}

TEST_CASE("frac_laplacian_hessian matches differences of the gradient") {
  std::mt19937_64 rng(8);
  const Grid g = build_grid(-1.0, 1.0, 20);
  for (const Case& c : {Case{0.5, 2.0}, Case{0.7, 3.0}, Case{0.85, 4.0}, Case{0.3, 2.5}}) {
    const NonlocalKernel k = build_kernel(g, c.s, c.r);
    const Field u = bf::random_field(g.n, rng);
    const Field v = bf::random_field(g.n, rng);
    const double eps = 1e-6;
    const Field fd = (apply_frac_laplacian(Field(u + eps * v), k) - apply_frac_laplacian(Field(u - eps * v), k)) / (2 * eps);
    const Field hv = frac_laplacian_hessian(u, k) * v;
    CHECK((fd - hv).cwiseAbs().maxCoeff() <= 1e-6 * hv.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("lq_mass") {
  const Grid g = build_grid(0.0, 1.0, 2);
  CHECK(lq_mass(Field::Zero(2), g, 2.0) == 0.0);
  CHECK(lq_mass(Field::Ones(2), g, 2.0) == 1.0);
  std::mt19937_64 rng(9);
  const Grid h = build_grid(-1.0, 1.0, 31);
  const Field u = bf::random_field(31, rng);
  for (double q : {1.3, 2.0, 3.5}) {
    CHECK(bf::rel(lq_mass(Field(-2.5 * u), h, q), std::pow(2.5, q) * lq_mass(u, h, q)) <= 1e-13);
  }
  CHECK_THROWS_AS(lq_mass(Field::Ones(3), g, 2.0), Error);
}

TEST_CASE("dimension mismatch is reported") {
  const NonlocalKernel k = build_kernel(build_grid(0.0, 1.0, 4), 0.5, 2.0);
  try {
    seminorm_pow(Field::Ones(5), k);
    FAIL("accepted a wrong-size field");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::dimension_mismatch);
  }
  CHECK_THROWS_AS(bilinear_form(Field::Ones(4), Field::Ones(3), k), Error);
  CHECK_THROWS_AS(apply_frac_laplacian(Field::Ones(2), k), Error);
}

TEST_CASE("energies") {
  std::mt19937_64 rng(10);
  const Grid g = build_grid(-1.0, 1.0, 32);
  SpectralParams sp{0.7, 0.4, 3.0, 2.0, 4.5, std::nullopt};
  const KernelPair k = build_kernels(g, sp);
  const Field u = bf::random_field(g.n, rng);

  CHECK(energy_F(Field::Zero(g.n), sp, k.p, k.q) == 0.0);
  CHECK(energy_I(Field::Zero(g.n), k.p, k.q) == 0.0);

  const double P = seminorm_pow(u, k.p);
  const double Q = seminorm_pow(u, k.q);
  const double M = lq_mass(u, g, 2.0);
  CHECK(bf::rel(energy_F(u, sp, k.p, k.q), P / 3.0 + Q / 2.0 - 4.5 * M / 2.0) <= 1e-14);
  CHECK(bf::rel(energy_J(u, sp, k.p, k.q), 2.0 * energy_F(u, sp, k.p, k.q)) <= 1e-13);

  SpectralParams zero = sp;
  zero.lambda = 0.0;
  CHECK(energy_F(u, zero, k.p, k.q) == doctest::Approx(energy_I(u, k.p, k.q)).epsilon(1e-15));
  CHECK(energy_I(u, k.p, k.q) >= 0.0);

  SpectralParams none = sp;
  none.lambda.reset();
  try {
    energy_F(u, none, k.p, k.q);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::missing_lambda);
  }
  try {
    rayleigh_G(Field::Zero(g.n), k.p, k.q);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::zero_field);
  }
}

TEST_CASE("rayleigh_G is scale invariant when p = q") {
  std::mt19937_64 rng(12);
  const Grid g = build_grid(-1.0, 1.0, 32);
  const KernelPair k = build_kernels(g, SpectralParams{0.3, 0.6, 2.5, 2.5, std::nullopt, std::nullopt});
  const Field u = bf::random_field(g.n, rng);
  for (double c : {1e-3, 0.7, 42.0}) {
    CHECK(bf::rel(rayleigh_G(Field(c * u), k.p, k.q), rayleigh_G(u, k.p, k.q)) <= 1e-12);
  }
}

TEST_CASE("rayleigh_G along the scaled first eigenfunction approaches lambda_1 from above for p > q") {
  const Grid g = build_grid(-1.0, 1.0, 64);
  const KernelPair k = build_kernels(g, SpectralParams{0.7, 0.4, 3.0, 2.0, std::nullopt, std::nullopt});
  const EigenPair e1 = solve_lambda1_q(k.q, g, 2.0, SolveConfig{});
  REQUIRE(e1.converged);
  const double g3 = rayleigh_G(Field(e1.u / 1e3), k.p, k.q);
  const double g6 = rayleigh_G(Field(e1.u / 1e6), k.p, k.q);
  CHECK(g3 > g6);
  CHECK(g6 > e1.lambda);
  CHECK(g6 / e1.lambda - 1.0 < 1e-4);
}

TEST_CASE("energy_E reduces to (q/p) P + Q when p = q") {
  std::mt19937_64 rng(13);
  const Grid g = build_grid(-1.0, 1.0, 20);
  const KernelPair k = build_kernels(g, SpectralParams{0.4, 0.6, 2.0, 2.0, std::nullopt, std::nullopt});
  const Field w = bf::random_field(g.n, rng);
  CHECK(bf::rel(energy_E(w, k.p, k.q), seminorm_pow(w, k.p) + seminorm_pow(w, k.q)) <= 1e-14);
}

TEST_CASE("discrete embedding: the seminorm ratio stays bounded over random fields") {
  // [u]_{s2,q} <= C [u]_{s1,p} for s2 < s1, q < p on a fixed grid
  std::mt19937_64 rng(14);
  const Grid g = build_grid(-1.0, 1.0, 32);
  const NonlocalKernel kp = build_kernel(g, 0.7, 3.0);
  const NonlocalKernel kq = build_kernel(g, 0.4, 2.0);
  std::vector<double> ratios;
  for (int t = 0; t < 1000; ++t) {
    const double amplitude = std::pow(10.0, std::uniform_real_distribution<double>(-3.0, 3.0)(rng));
    const Field u = amplitude * bf::random_field(g.n, rng);
    // compare norms that scale the same way: ([u]^q)^(1/q) against ([u]^p)^(1/p)
    ratios.push_back(std::pow(seminorm_pow(u, kq), 0.5) / std::pow(seminorm_pow(u, kp), 1.0 / 3.0));
  }
  std::sort(ratios.begin(), ratios.end());
  CHECK(std::isfinite(ratios.back()));
  CHECK(ratios.back() <= 10.0 * ratios[ratios.size() / 2]);
}

TEST_CASE("weak form residual of the zero field is zero") {
  const Grid g = build_grid(-1.0, 1.0, 8);
  const KernelPair k = build_kernels(g, SpectralParams{0.7, 0.4, 3.0, 2.0, std::nullopt, std::nullopt});
  CHECK(weak_form_residual(Field::Zero(8), 3.0, k.p, k.q) == 0.0);
  CHECK(weak_form_residual_q(Field::Zero(8), 3.0, k.q) == 0.0);
}

TEST_CASE("regime classification") {
  CHECK(SpectralParams{0.7, 0.4, 3.0, 2.0, {}, {}}.regime() == Regime::coercive);
  CHECK(SpectralParams{0.4, 0.7, 2.0, 3.0, {}, {}}.regime() == Regime::nehari);
  CHECK(SpectralParams{0.4, 0.7, 3.0, 2.0, {}, {}}.regime() == Regime::unordered);
  CHECK(SpectralParams{0.5, 0.5, 2.0, 2.0, {}, {}}.regime() == Regime::unordered);
}
