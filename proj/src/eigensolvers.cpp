#include "fracpq/eigensolvers.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "fracpq/error.hpp"
#include "fracpq/power.hpp"

namespace fracpq {

namespace {

constexpr double kTieTolerance = 1e-12;
/// Feasibility search stops once lambda M - Q exceeds this fraction of lambda M.
constexpr double kFeasibleMargin = 1e-3;

double sup_norm(const Field& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

double curvature_floor(const Field& u) { return 1e-8 * sup_norm(u); }

Eigen::MatrixXd mass_hessian(const Field& u, double h, double q) {
  const PowerLaw pw(q);
  const double floor = curvature_floor(u);
  Eigen::VectorXd d(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) d[i] = q * h * pw.derivative(u[i], floor);
  return d.asDiagonal();
}

DescentOptions descent_options(const SolveConfig& cfg) {
  DescentOptions opt;
  opt.max_iterations = cfg.max_iterations;
  opt.tolerance = cfg.tolerance;
  opt.initial_step = cfg.step_size;
  opt.armijo_shrink = cfg.armijo_shrink;
  opt.symmetry = cfg.symmetry;
  return opt;
}

Field start_field(const SolveConfig& cfg, int n, int restart) {
  if (restart == 0 && cfg.initial) {
    if (cfg.initial->size() != n) {
      throw Error(ErrorCode::dimension_mismatch, "initial field has " + std::to_string(cfg.initial->size()) +
                                                     " values, grid has " + std::to_string(n));
    }
    return *cfg.initial;
  }
  return random_positive_field(n, cfg.seed, static_cast<std::uint64_t>(restart));
}

/// Keep the lowest objective; ties broken by the lower residual.
bool better(const EigenPair& candidate, const EigenPair& incumbent) {
  const double scale = std::max({std::abs(candidate.objective), std::abs(incumbent.objective), 1e-300});
  const double diff = candidate.objective - incumbent.objective;
  if (std::abs(diff) <= kTieTolerance * scale) return candidate.residual < incumbent.residual;
  return diff < 0.0;
}

void check_kernels(const SpectralParams& params, const KernelPair& k) {
  if (k.p.r != params.p || k.p.s != params.s1 || k.q.r != params.q || k.q.s != params.s2) {
    throw Error(ErrorCode::parameter_out_of_range, "kernels were not built for these (s1, s2, p, q)");
  }
  if (k.p.size() != k.q.size()) throw Error(ErrorCode::dimension_mismatch, "kernel sizes differ");
}

void require_regime(const SpectralParams& params, Regime want, const char* who) {
  if (params.regime() != want) {
    std::ostringstream os;
    os << who << " needs the " << to_string(want) << " regime ("
       << (want == Regime::coercive ? "s2 < s1 and q < p" : "s1 < s2 and p < q") << "), got (s1, s2, p, q) = ("
       << params.s1 << ", " << params.s2 << ", " << params.p << ", " << params.q << ")";
    throw Error(ErrorCode::regime_mismatch, os.str());
  }
}

double require_lambda(const SpectralParams& params, const char* who) {
  if (!params.lambda) throw Error(ErrorCode::missing_lambda, std::string(who) + " needs lambda");
  return *params.lambda;
}

SmoothObjective q_energy(const NonlocalKernel& kq) {
  const double q = kq.r;
  return SmoothObjective{
      [&kq](const Field& u) { return seminorm_pow(u, kq); },
      [&kq, q](const Field& u) { return Field(q * apply_frac_laplacian(u, kq)); },
      [&kq, q](const Field& u) { return Eigen::MatrixXd(q * frac_laplacian_hessian(u, kq, curvature_floor(u))); },
  };
}

EigenPair q_rayleigh_solve(const NonlocalKernel& kq, double q, const SolveConfig& cfg) {
  cfg.validate();
  const int n = kq.size();
  const SmoothObjective obj = q_energy(kq);
  const MassSphere sphere{q, kq.h, 1.0};
  DescentOptions opt = descent_options(cfg);
  opt.residual = [&](const Field& u) {
    return weak_form_residual_q(u, seminorm_pow(u, kq) / lq_mass(u, kq.h, q), kq);
  };

  EigenPair best;
  bool have = false;
  for (int k = 0; k < cfg.restarts; ++k) {
    const DescentResult run = minimize_on_sphere(obj, sphere, start_field(cfg, n, k), opt);
    EigenPair pair;
    pair.u = run.u;
    pair.rho = lq_mass(run.u, kq.h, q);
    pair.lambda = run.objective / pair.rho;
    pair.objective = run.objective;
    pair.residual = run.residual;
    pair.weak_form_residual = run.residual;
    pair.iterations = run.iterations;
    pair.converged = run.converged;
    pair.objective_log = run.objective_log;
    if (!have || better(pair, best)) {
      best = std::move(pair);
      have = true;
    }
  }
  if (cfg.orient) normalize_sign(best.u, cfg.symmetry);
  return best;
}

}  // namespace

void SolveConfig::validate() const {
  if (!(tolerance > 0.0)) throw Error(ErrorCode::parameter_out_of_range, "tolerance must be > 0");
  if (restarts < 1) throw Error(ErrorCode::parameter_out_of_range, "restarts must be >= 1");
  if (max_iterations < 0) throw Error(ErrorCode::parameter_out_of_range, "max_iterations must be >= 0");
  if (!(step_size > 0.0)) throw Error(ErrorCode::parameter_out_of_range, "step_size must be > 0");
  if (!(armijo_shrink > 0.0 && armijo_shrink < 1.0)) {
    throw Error(ErrorCode::parameter_out_of_range, "armijo_shrink must lie in (0, 1)");
  }
}

Field random_positive_field(int n, std::uint64_t seed, std::uint64_t stream) {
  std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
  Field u(n);
  for (int i = 0; i < n; ++i) {
    // 53 random mantissa bits mapped to (0, 1]; independent of the standard
    // library's distribution implementation.
    u[i] = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
  }
  return u;
}

void normalize_sign(Field& u, Symmetry symmetry) {
  const Eigen::Index n = u.size();
  const double s = symmetry == Symmetry::odd ? u.head(n / 2).sum() : u.sum();
  if (s < 0.0) u = -u;
}

bool is_symmetric(const Grid& grid) {
  const double mid2 = grid.a + grid.b;
  const double tol = 1e-12 * std::max({std::abs(grid.a), std::abs(grid.b), grid.length()});
  for (int i = 0; i < grid.n; ++i) {
    if (std::abs(grid.nodes[i] + grid.nodes[grid.n - 1 - i] - mid2) > tol) return false;
  }
  return true;
}

EigenPair solve_lambda1_q(const NonlocalKernel& kq, const Grid& grid, double q, const SolveConfig& cfg) {
  if (kq.size() != grid.n) throw Error(ErrorCode::dimension_mismatch, "kernel and grid sizes differ");
  if (kq.r != q) throw Error(ErrorCode::parameter_out_of_range, "kernel exponent differs from q");
  SolveConfig c = cfg;
  c.symmetry = Symmetry::none;
  return q_rayleigh_solve(kq, q, c);
}

EigenPair solve_lambda2_sym(const NonlocalKernel& kq, const Grid& grid, double q, const SolveConfig& cfg) {
  if (kq.size() != grid.n) throw Error(ErrorCode::dimension_mismatch, "kernel and grid sizes differ");
  if (kq.r != q) throw Error(ErrorCode::parameter_out_of_range, "kernel exponent differs from q");
  if (!is_symmetric(grid)) throw Error(ErrorCode::asymmetric_grid, "nodes are not symmetric about the midpoint");
  SolveConfig c = cfg;
  c.symmetry = Symmetry::odd;
  EigenPair pair = q_rayleigh_solve(kq, q, c);
  pair.heuristic = true;
  return pair;
}

EigenPair solve_fixed_lambda_coercive(const SpectralParams& params, const KernelPair& k, const SolveConfig& cfg) {
  cfg.validate();
  check_kernels(params, k);
  require_regime(params, Regime::coercive, "solve_fixed_lambda_coercive");
  const double lambda = require_lambda(params, "solve_fixed_lambda_coercive");
  const double q = params.q;
  const double h = k.q.h;
  const int n = k.q.size();

  const SmoothObjective obj{
      [&](const Field& u) { return energy_F(u, params, k.p, k.q); },
      [&](const Field& u) {
        return Field(apply_frac_laplacian(u, k.p) + apply_frac_laplacian(u, k.q) -
                     (lambda / q) * lq_mass_gradient(u, h, q));
      },
      [&](const Field& u) {
        const double floor = curvature_floor(u);
        return Eigen::MatrixXd(frac_laplacian_hessian(u, k.p, floor) + frac_laplacian_hessian(u, k.q, floor) -
                               (lambda / q) * mass_hessian(u, h, q));
      },
  };
  DescentOptions opt = descent_options(cfg);
  opt.residual = [&](const Field& u) { return weak_form_residual(u, lambda, k.p, k.q); };
  opt.stop = [&](const Field& u) { return lq_mass(u, h, q) <= cfg.trivial_mass; };

  EigenPair best;
  bool have = false;
  for (int r = 0; r < cfg.restarts; ++r) {
    Field start = start_field(cfg, n, r);
    if (!(r == 0 && cfg.initial)) start = MassSphere{q, h, 1.0}.retract(start);
    const DescentResult run = minimize_free(obj, start, opt);
    EigenPair pair;
    pair.u = run.u;
    pair.lambda = lambda;
    pair.rho = lq_mass(run.u, h, q);
    pair.objective = run.objective;
    pair.residual = run.residual;
    pair.weak_form_residual = run.residual;
    pair.iterations = run.iterations;
    pair.trivial = pair.rho <= cfg.trivial_mass;
    pair.converged = run.converged || pair.trivial;
    pair.objective_log = run.objective_log;
    if (!have || better(pair, best)) {
      best = std::move(pair);
      have = true;
    }
  }
  if (cfg.orient) normalize_sign(best.u, cfg.symmetry);
  return best;
}

EigenPair solve_fixed_rho(const SpectralParams& params, double rho, const KernelPair& k, const SolveConfig& cfg) {
  cfg.validate();
  check_kernels(params, k);
  if (!(rho > 0.0)) throw Error(ErrorCode::parameter_out_of_range, "rho must be > 0");
  const double q = params.q;
  const double h = k.q.h;
  const int n = k.q.size();

  const SmoothObjective obj{
      [&](const Field& u) { return energy_I(u, k.p, k.q); },
      [&](const Field& u) { return Field(apply_frac_laplacian(u, k.p) + apply_frac_laplacian(u, k.q)); },
      [&](const Field& u) {
        const double floor = curvature_floor(u);
        return Eigen::MatrixXd(frac_laplacian_hessian(u, k.p, floor) + frac_laplacian_hessian(u, k.q, floor));
      },
  };
  const MassSphere sphere{q, h, rho};
  DescentOptions opt = descent_options(cfg);
  opt.residual = [&](const Field& u) {
    const double lam = (seminorm_pow(u, k.p) + seminorm_pow(u, k.q)) / lq_mass(u, h, q);
    return weak_form_residual(u, lam, k.p, k.q);
  };

  EigenPair best;
  bool have = false;
  for (int r = 0; r < cfg.restarts; ++r) {
    const DescentResult run = minimize_on_sphere(obj, sphere, start_field(cfg, n, r), opt);
    EigenPair pair;
    pair.u = run.u;
    pair.rho = lq_mass(run.u, h, q);
    pair.lambda = (seminorm_pow(run.u, k.p) + seminorm_pow(run.u, k.q)) / pair.rho;
    pair.objective = run.objective;
    pair.residual = run.residual;
    pair.weak_form_residual = run.residual;
    pair.iterations = run.iterations;
    pair.converged = run.converged;
    pair.objective_log = run.objective_log;
    if (!have || better(pair, best)) {
      best = std::move(pair);
      have = true;
    }
  }
  if (cfg.orient) normalize_sign(best.u, cfg.symmetry);
  return best;
}

double nehari_scaling(double P, double Q, double lambda_mass, double p, double q, double degenerate) {
  const double denom = lambda_mass - Q;
  if (!(denom > degenerate * std::abs(lambda_mass))) {
    std::ostringstream os;
    os << "lambda int|u|^q - [u]^q = " << denom << " is not positive; the direction misses the Nehari set";
    throw Error(ErrorCode::not_above_cone, os.str());
  }
  return std::pow(P / denom, 1.0 / (q - p));
}

NehariProjection nehari_project(const Field& u, const SpectralParams& params, const KernelPair& k) {
  check_kernels(params, k);
  require_regime(params, Regime::nehari, "nehari_project");
  const double lambda = require_lambda(params, "nehari_project");
  const double P = seminorm_pow(u, k.p);
  const double Q = seminorm_pow(u, k.q);
  const double M = lq_mass(u, k.q.h, params.q);
  NehariProjection out;
  out.t = nehari_scaling(P, Q, lambda * M, params.p, params.q);
  out.tu = out.t * u;
  return out;
}

double nehari_membership_residual(const Field& u, double lambda, const KernelPair& k) {
  const double lhs = seminorm_pow(u, k.p) + seminorm_pow(u, k.q);
  const double rhs = lambda * lq_mass(u, k.q.h, k.q.r);
  return std::abs(lhs - rhs) / std::abs(rhs);
}

EigenPair solve_nehari(const SpectralParams& params, const KernelPair& k, const SolveConfig& cfg) {
  cfg.validate();
  check_kernels(params, k);
  require_regime(params, Regime::nehari, "solve_nehari");
  const double lambda = require_lambda(params, "solve_nehari");
  const double p = params.p;
  const double q = params.q;
  const double h = k.q.h;
  const int n = k.q.size();
  const double a = q / (q - p);
  const double b = p / (q - p);
  constexpr double degenerate = 1e-12;

  // Reduced objective on directions: F_lambda(t(u) u) = (1/p - 1/q) P^a D^-b,
  // D = lambda M - Q. Minimised in log form; the map is monotone.
  const SmoothObjective obj{
      [&](const Field& u) {
        const double M = lq_mass(u, h, q);
        const double D = lambda * M - seminorm_pow(u, k.q);
        if (!(D > degenerate * lambda * M)) return std::numeric_limits<double>::infinity();
        return a * std::log(seminorm_pow(u, k.p)) - b * std::log(D);
      },
      [&](const Field& u) {
        const double P = seminorm_pow(u, k.p);
        const double D = lambda * lq_mass(u, h, q) - seminorm_pow(u, k.q);
        const Field dP = p * apply_frac_laplacian(u, k.p);
        const Field dD = lambda * lq_mass_gradient(u, h, q) - q * apply_frac_laplacian(u, k.q);
        return Field((a / P) * dP - (b / D) * dD);
      },
      [&](const Field& u) {
        const double floor = curvature_floor(u);
        const double P = seminorm_pow(u, k.p);
        const double D = lambda * lq_mass(u, h, q) - seminorm_pow(u, k.q);
        const Field dP = p * apply_frac_laplacian(u, k.p);
        const Field dD = lambda * lq_mass_gradient(u, h, q) - q * apply_frac_laplacian(u, k.q);
        const Eigen::MatrixXd hP = p * frac_laplacian_hessian(u, k.p, floor);
        const Eigen::MatrixXd hD = lambda * mass_hessian(u, h, q) - q * frac_laplacian_hessian(u, k.q, floor);
        return Eigen::MatrixXd(a * (hP / P - dP * dP.transpose() / (P * P)) -
                               b * (hD / D - dD * dD.transpose() / (D * D)));
      },
  };
  auto project = [&](const Field& u) {
    const double P = seminorm_pow(u, k.p);
    const double Q = seminorm_pow(u, k.q);
    const double M = lq_mass(u, h, q);
    return Field(nehari_scaling(P, Q, lambda * M, p, q, degenerate) * u);
  };
  auto feasible = [&](const Field& u) {
    const double M = lq_mass(u, h, q);
    return lambda * M - seminorm_pow(u, k.q) > degenerate * lambda * M;
  };

  const MassSphere sphere{q, h, 1.0};
  DescentOptions opt = descent_options(cfg);
  opt.residual = [&](const Field& u) {
    if (!feasible(u)) return std::numeric_limits<double>::infinity();
    return weak_form_residual(project(u), lambda, k.p, k.q);
  };

  // Feasibility search: descend the q-Rayleigh quotient until the direction
  // clears the cone lambda M > Q with some margin.
  SmoothObjective rayleigh = q_energy(k.q);
  DescentOptions feas_opt = descent_options(cfg);
  feas_opt.residual = [&](const Field& u) {
    return weak_form_residual_q(u, seminorm_pow(u, k.q) / lq_mass(u, h, q), k.q);
  };
  feas_opt.stop = [&](const Field& u) {
    const double M = lq_mass(u, h, q);
    return lambda * M - seminorm_pow(u, k.q) >= kFeasibleMargin * lambda * M;
  };

  EigenPair best;
  bool have = false;
  for (int r = 0; r < cfg.restarts; ++r) {
    Field start = sphere.retract(Field(start_field(cfg, n, r)));
    if (cfg.symmetry == Symmetry::odd) {
      const Eigen::MatrixXd B = symmetry_basis(n, Symmetry::odd);
      start = sphere.retract(Field(B * (B.transpose() * start)));
    }
    if (!feas_opt.stop(start)) {
      const DescentResult pre = minimize_on_sphere(rayleigh, sphere, start, feas_opt);
      start = pre.u;
    }
    if (!feasible(start)) continue;

    const DescentResult run = minimize_on_sphere(obj, sphere, start, opt);
    EigenPair pair;
    pair.u = project(run.u);
    pair.lambda = lambda;
    pair.rho = lq_mass(pair.u, h, q);
    pair.objective = energy_F(pair.u, params, k.p, k.q);
    pair.residual = run.residual;
    pair.weak_form_residual = run.residual;
    pair.iterations = run.iterations;
    pair.converged = run.converged;
    const double scale = 1.0 / p - 1.0 / q;
    pair.objective_log.reserve(run.objective_log.size());
    for (double L : run.objective_log) pair.objective_log.push_back(scale * std::exp(L));
    if (!have || better(pair, best)) {
      best = std::move(pair);
      have = true;
    }
  }
  if (!have) {
    std::ostringstream os;
    os << "no direction with lambda int|u|^q > [u]^q found in " << cfg.restarts
       << " restart(s); lambda = " << lambda << " is at or below lambda_1(s2, q)";
    throw Error(ErrorCode::infeasible_lambda, os.str());
  }
  if (cfg.orient) normalize_sign(best.u, cfg.symmetry);
  return best;
}

}  // namespace fracpq
