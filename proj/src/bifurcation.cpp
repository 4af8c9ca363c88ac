#include "fracpq/bifurcation.hpp"

#include <cmath>
#include <sstream>

#include "fracpq/error.hpp"

namespace fracpq {

namespace {

void require_decreasing(const std::vector<double>& rho_grid) {
  for (std::size_t i = 0; i < rho_grid.size(); ++i) {
    if (!(rho_grid[i] > 0.0)) throw Error(ErrorCode::parameter_out_of_range, "rho values must be > 0");
    if (i > 0 && !(rho_grid[i] < rho_grid[i - 1])) {
      throw Error(ErrorCode::parameter_out_of_range, "rho grid must be strictly decreasing");
    }
  }
}

double sup_norm(const Field& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

std::vector<double> geometric_rho_grid(double rho_max, double rho_min, int per_decade) {
  if (!(rho_min > 0.0) || !(rho_max >= rho_min)) {
    throw Error(ErrorCode::parameter_out_of_range, "rho grid needs 0 < rho_min <= rho_max");
  }
  if (per_decade < 1) throw Error(ErrorCode::parameter_out_of_range, "per_decade must be >= 1");
  const double decades = std::log10(rho_max / rho_min);
  const int steps = static_cast<int>(std::lround(decades * per_decade));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(steps) + 1);
  for (int k = 0; k <= steps; ++k) {
    grid.push_back(k == steps ? rho_min : rho_max * std::pow(10.0, -static_cast<double>(k) / per_decade));
  }
  return grid;
}

Branch trace_branch_zero(const SpectralParams& params, const std::vector<double>& rho_grid,
                         const KernelPair& k, const SolveConfig& cfg) {
  if (params.regime() != Regime::coercive) {
    throw Error(ErrorCode::regime_mismatch, "branch from zero needs the coercive regime (s2 < s1 and q < p)");
  }
  require_decreasing(rho_grid);
  Branch branch;
  branch.reserve(rho_grid.size());
  SolveConfig step = cfg;
  for (double rho : rho_grid) {
    if (!branch.empty()) step.restarts = 1;
    const EigenPair pair = solve_fixed_rho(params, rho, k, step);
    BranchPoint pt;
    pt.rho = rho;
    pt.lambda = pair.lambda;
    pt.seminorm_p = std::pow(seminorm_pow(pair.u, k.p), 1.0 / params.p);
    pt.norm_s2q = std::pow(seminorm_pow(pair.u, k.q), 1.0 / params.q);
    pt.residual = pair.residual;
    pt.converged = pair.converged;
    branch.push_back(pt);
    step.initial = pair.u;
  }
  return branch;
}

EigenPair solve_transformed(const SpectralParams& params, double rho, const KernelPair& k, const SolveConfig& cfg) {
  cfg.validate();
  if (!(params.p <= params.q)) {
    throw Error(ErrorCode::regime_mismatch, "the transformed problem needs p <= q");
  }
  if (k.p.r != params.p || k.q.r != params.q || k.p.s != params.s1 || k.q.s != params.s2) {
    throw Error(ErrorCode::parameter_out_of_range, "kernels were not built for these (s1, s2, p, q)");
  }
  if (!(rho > 0.0)) throw Error(ErrorCode::parameter_out_of_range, "rho must be > 0");
  const double p = params.p;
  const double q = params.q;
  const double alpha = 2.0 * (q - p) / q;
  const double c = alpha * q * q / p;
  const double h = k.q.h;
  const int n = k.q.size();

  // E(w) = (q/p) Q^alpha P + Q with P = [w]^p, Q = [w]^q.
  const SmoothObjective obj{
      [&](const Field& w) {
        const double Q = seminorm_pow(w, k.q);
        return (q / p) * std::pow(Q, alpha) * seminorm_pow(w, k.p) + Q;
      },
      [&](const Field& w) {
        const double P = seminorm_pow(w, k.p);
        const double Q = seminorm_pow(w, k.q);
        const Field gp = apply_frac_laplacian(w, k.p);
        const Field gq = apply_frac_laplacian(w, k.q);
        return Field(q * std::pow(Q, alpha) * gp + (c * std::pow(Q, alpha - 1.0) * P + q) * gq);
      },
      [&](const Field& w) {
        const double floor = 1e-8 * sup_norm(w);
        const double P = seminorm_pow(w, k.p);
        const double Q = seminorm_pow(w, k.q);
        const Field gp = apply_frac_laplacian(w, k.p);
        const Field gq = apply_frac_laplacian(w, k.q);
        const double qa = std::pow(Q, alpha);
        const double qa1 = std::pow(Q, alpha - 1.0);
        Eigen::MatrixXd hess = q * qa * frac_laplacian_hessian(w, k.p, floor);
        hess += (c * qa1 * P + q) * frac_laplacian_hessian(w, k.q, floor);
        const double cross = alpha * q * q * qa1;
        hess += cross * (gp * gq.transpose() + gq * gp.transpose());
        hess += (c * (alpha - 1.0) * std::pow(Q, alpha - 2.0) * P * q) * (gq * gq.transpose());
        return hess;
      },
  };
  const MassSphere sphere{q, h, rho};
  DescentOptions opt;
  opt.max_iterations = cfg.max_iterations;
  opt.tolerance = cfg.tolerance;
  opt.initial_step = cfg.step_size;
  opt.armijo_shrink = cfg.armijo_shrink;
  opt.symmetry = cfg.symmetry;
  opt.residual = [&](const Field& w) {
    const Field grad = obj.gradient(w);
    const Field normal = lq_mass_gradient(w, h, q);
    const double mu = w.dot(grad) / w.dot(normal);
    const double scale = sup_norm(grad) + std::abs(mu) * sup_norm(normal);
    return scale == 0.0 ? 0.0 : sup_norm(grad - mu * normal) / scale;
  };

  EigenPair best;
  bool have = false;
  for (int r = 0; r < cfg.restarts; ++r) {
    Field start = (r == 0 && cfg.initial) ? *cfg.initial
                                          : random_positive_field(n, cfg.seed, static_cast<std::uint64_t>(r));
    if (start.size() != n) throw Error(ErrorCode::dimension_mismatch, "initial field size differs from grid");
    const DescentResult run = minimize_on_sphere(obj, sphere, start, opt);
    EigenPair pair;
    pair.u = run.u;
    pair.rho = lq_mass(run.u, h, q);
    const double P = seminorm_pow(run.u, k.p);
    const double Q = seminorm_pow(run.u, k.q);
    const double prefactor = std::pow(Q, alpha);
    pair.lambda = (prefactor * P + Q) / pair.rho;
    pair.objective = run.objective;
    pair.residual = run.residual;
    pair.weak_form_residual = weak_form_residual(run.u, pair.lambda, k.p, k.q, prefactor);
    pair.iterations = run.iterations;
    pair.converged = run.converged;
    pair.objective_log = run.objective_log;
    const double tie = 1e-12 * std::max(std::abs(pair.objective), std::abs(best.objective));
    if (!have || pair.objective < best.objective - tie ||
        (std::abs(pair.objective - best.objective) <= tie && pair.residual < best.residual)) {
      best = std::move(pair);
      have = true;
    }
  }
  if (cfg.orient) normalize_sign(best.u, cfg.symmetry);
  return best;
}

Branch trace_branch_infinity(const SpectralParams& params, const std::vector<double>& rho_grid,
                             const KernelPair& k, const SolveConfig& cfg) {
  if (params.regime() != Regime::nehari) {
    throw Error(ErrorCode::regime_mismatch, "branch from infinity needs the Nehari regime (s1 < s2 and p < q)");
  }
  require_decreasing(rho_grid);
  Branch branch;
  branch.reserve(rho_grid.size());
  SolveConfig step = cfg;
  for (double rho : rho_grid) {
    if (!branch.empty()) step.restarts = 1;
    const EigenPair pair = solve_transformed(params, rho, k, step);
    const Field u = change_of_variables(pair.u, k.q);
    BranchPoint pt;
    pt.rho = rho;
    pt.lambda = pair.lambda;
    pt.seminorm_p = std::pow(seminorm_pow(u, k.p), 1.0 / params.p);
    pt.norm_s2q = std::pow(seminorm_pow(u, k.q), 1.0 / params.q);
    pt.residual = pair.residual;
    pt.converged = pair.converged;
    branch.push_back(pt);
    step.initial = pair.u;
  }
  return branch;
}

Field change_of_variables(const Field& u, const NonlocalKernel& kq) {
  const double Q = seminorm_pow(u, kq);
  if (!(Q > 0.0)) throw Error(ErrorCode::zero_field, "change of variables is undefined at u = 0");
  return u * std::pow(Q, -2.0 / kq.r);
}

RateFit fit_rate(const Branch& branch, double lambda_ref) {
  if (!(lambda_ref > 0.0)) throw Error(ErrorCode::parameter_out_of_range, "lambda_ref must be > 0");
  RateFit fit;
  std::vector<double> xs;
  std::vector<double> ys;
  for (const BranchPoint& pt : branch) {
    if (!pt.converged) continue;
    const double gap = pt.lambda - lambda_ref;
    if (!(gap > 0.0)) {
      ++fit.excluded;
      continue;
    }
    xs.push_back(std::log(pt.rho));
    ys.push_back(std::log(gap));
  }
  fit.points_used = static_cast<int>(xs.size());
  if (xs.size() < 3) {
    std::ostringstream os;
    os << "rate fit needs 3 converged points with positive gap, have " << xs.size();
    if (fit.excluded > 0) os << " (" << fit.excluded << " at or below lambda_ref excluded)";
    throw Error(ErrorCode::insufficient_points, os.str());
  }
  const double m = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= m;
  my /= m;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::insufficient_points, "rate fit needs distinct rho values");
  fit.exponent = sxy / sxx;
  fit.prefactor = std::exp(my - fit.exponent * mx);
  fit.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return fit;
}

}  // namespace fracpq
