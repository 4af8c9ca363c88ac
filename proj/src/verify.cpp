#include "fracpq/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <variant>

#include <Eigen/Eigenvalues>

#include "fracpq/error.hpp"
#include "fracpq/inequalities.hpp"
#include "fracpq/oracle.hpp"

namespace fracpq {

namespace {

// Config binding -------------------------------------------------------------

using Slot = std::variant<int*, double*, std::uint64_t*, std::int64_t*, std::vector<double>*, std::vector<std::string>*,
                          Tuple*, std::vector<Tuple>*>;

Tuple parse_tuple(const std::string& text, const std::string& key) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, '/')) parts.push_back(item);
  if (parts.size() != 4) {
    throw Error(ErrorCode::malformed_config, "key '" + key + "': expected s1/s2/p/q, got '" + text + "'");
  }
  return Tuple{parse_double(parts[0], key), parse_double(parts[1], key), parse_double(parts[2], key),
               parse_double(parts[3], key)};
}

std::vector<std::pair<std::string, Slot>> bindings(SuiteConfig& c) {
  return {
      {"seed", &c.seed},
      {"checks", &c.checks},
      {"a", &c.a},
      {"b", &c.b},
      {"solver.max_iterations", &c.max_iterations},
      {"solver.tolerance", &c.tolerance},
      {"solver.restarts", &c.restarts},
      {"oracle.max_n", &c.oracle_max_n},
      {"oracle.fields", &c.oracle_fields},
      {"oracle.s", &c.oracle_s},
      {"oracle.r", &c.oracle_r},
      {"oracle.tolerance", &c.oracle_tolerance},
      {"linear.n", &c.linear_n},
      {"linear.s", &c.linear_s},
      {"linear.tolerance", &c.linear_tolerance},
      {"gradient.n", &c.gradient_n},
      {"gradient.pairs", &c.gradient_pairs},
      {"gradient.s", &c.gradient_s},
      {"gradient.r", &c.gradient_r},
      {"gradient.epsilon", &c.gradient_epsilon},
      {"gradient.tolerance", &c.gradient_tolerance},
      {"nonexistence.n", &c.nonexistence_n},
      {"nonexistence.factors", &c.nonexistence_factors},
      {"nonexistence.coercive", &c.nonexistence_coercive},
      {"nonexistence.nehari", &c.nonexistence_nehari},
      {"nonexistence.mass_tolerance", &c.nonexistence_mass_tolerance},
      {"constant_sign.n", &c.constant_sign_n},
      {"constant_sign.lambda_factor", &c.constant_sign_lambda_factor},
      {"constant_sign.coercive", &c.constant_sign_coercive},
      {"constant_sign.nehari", &c.constant_sign_nehari},
      {"constant_sign.tolerance", &c.constant_sign_tolerance},
      {"nehari.n", &c.nehari_n},
      {"nehari.params", &c.nehari_params},
      {"nehari.lambda_factor", &c.nehari_lambda_factor},
      {"nehari.samples", &c.nehari_samples},
      {"nehari.scales", &c.nehari_scales},
      {"nehari.membership_tolerance", &c.nehari_membership_tolerance},
      {"nehari.invariance_tolerance", &c.nehari_invariance_tolerance},
      {"identity.n", &c.identity_n},
      {"identity.coercive", &c.identity_coercive},
      {"identity.nehari", &c.identity_nehari},
      {"identity.t_coercive", &c.identity_t_coercive},
      {"identity.t_nehari", &c.identity_t_nehari},
      {"identity.tolerance", &c.identity_tolerance},
      {"identity.divergence_factor", &c.identity_divergence_factor},
      {"branch.n", &c.branch_n},
      {"branch.rho_max", &c.branch_rho_max},
      {"branch.rho_min", &c.branch_rho_min},
      {"branch.per_decade", &c.branch_per_decade},
      {"branch.margin", &c.branch_margin},
      {"branch_zero.params", &c.branch_zero_params},
      {"branch_zero.gap_fraction", &c.branch_zero_gap_fraction},
      {"branch_zero.decay_factor", &c.branch_zero_decay_factor},
      {"branch_infinity.params", &c.branch_infinity_params},
      {"branch_infinity.growth_factor", &c.branch_infinity_growth_factor},
      {"branch_infinity.noise_band", &c.branch_infinity_noise_band},
      {"inequality.lattice", &c.inequality_lattice},
      {"inequality.random", &c.inequality_random},
      {"inequality.r", &c.inequality_r},
      {"inequality.bound", &c.inequality_bound},
      {"inequality.slack", &c.inequality_slack},
      {"multiplicity.n", &c.multiplicity_n},
      {"multiplicity.params", &c.multiplicity_params},
      {"multiplicity.above_factor", &c.multiplicity_above_factor},
      {"multiplicity.separation", &c.multiplicity_separation},
  };
}

void assign(const Slot& slot, const KeyValueFile& file, const std::string& key) {
  const std::string text = file.get_string(key);
  std::visit(
      [&](auto* target) {
        using T = std::remove_pointer_t<decltype(target)>;
        if constexpr (std::is_same_v<T, int>) *target = parse_int(text, key);
        else if constexpr (std::is_same_v<T, double>) *target = parse_double(text, key);
        else if constexpr (std::is_same_v<T, std::uint64_t>) *target = parse_uint64(text, key);
        else if constexpr (std::is_same_v<T, std::int64_t>) *target = static_cast<std::int64_t>(parse_uint64(text, key));
        else if constexpr (std::is_same_v<T, std::vector<double>>) *target = file.get_doubles(key);
        else if constexpr (std::is_same_v<T, std::vector<std::string>>) *target = split_list(text);
        else if constexpr (std::is_same_v<T, Tuple>) *target = parse_tuple(text, key);
        else if constexpr (std::is_same_v<T, std::vector<Tuple>>) {
          target->clear();
          for (const std::string& item : split_list(text)) target->push_back(parse_tuple(item, key));
        }
      },
      slot);
}

std::string slot_text(const Slot& slot) {
  return std::visit(
      [](auto* target) -> std::string {
        using T = std::remove_pointer_t<decltype(target)>;
        auto tuple_text = [](const Tuple& t) {
          return format_double(t.s1) + "/" + format_double(t.s2) + "/" + format_double(t.p) + "/" +
                 format_double(t.q);
        };
        if constexpr (std::is_same_v<T, double>) return format_double(*target);
        else if constexpr (std::is_same_v<T, std::vector<double>>) {
          std::string out;
          for (std::size_t i = 0; i < target->size(); ++i) out += (i ? ", " : "") + format_double((*target)[i]);
          return out;
        } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
          std::string out;
          for (std::size_t i = 0; i < target->size(); ++i) out += (i ? ", " : "") + (*target)[i];
          return out;
        } else if constexpr (std::is_same_v<T, Tuple>) return tuple_text(*target);
        else if constexpr (std::is_same_v<T, std::vector<Tuple>>) {
          std::string out;
          for (std::size_t i = 0; i < target->size(); ++i) out += (i ? ", " : "") + tuple_text((*target)[i]);
          return out;
        } else return std::to_string(*target);
      },
      slot);
}

// Helpers --------------------------------------------------------------------

using Clock = std::chrono::steady_clock;

std::string fmt(double v) { return format_double(v); }

std::string fmt(const Tuple& t) {
  return fmt(t.s1) + "/" + fmt(t.s2) + "/" + fmt(t.p) + "/" + fmt(t.q);
}

std::string fmt(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + fmt(v[i]);
  return out;
}

double rel_err(double value, double exact) {
  const double scale = std::abs(exact);
  return scale == 0.0 ? std::abs(value) : std::abs(value - exact) / scale;
}

double sup_norm(const Field& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

/// min(u) max(u) / |u|^2_inf; >= 0 for a field of one sign.
double sign_mixing(const Field& u) {
  const double s = sup_norm(u);
  if (s == 0.0) return 0.0;
  return u.minCoeff() * u.maxCoeff() / (s * s);
}

Field uniform_field(int n, std::mt19937_64& rng) {
  Field u(n);
  for (int i = 0; i < n; ++i) u[i] = -1.0 + 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  return u;
}

struct Instance {
  Grid grid;
  KernelPair k;
  EigenPair first;  // lambda_1(s2, q)
};

Instance make_instance(const SuiteConfig& c, int n, const Tuple& t) {
  Instance in{build_grid(c.a, c.b, n), {}, {}};
  in.k = build_kernels(in.grid, t.params());
  in.first = solve_lambda1_q(in.k.q, in.grid, t.q, c.solver());
  return in;
}

CheckResult start(const std::string& name) {
  CheckResult r;
  r.name = name;
  return r;
}

// Checks ---------------------------------------------------------------------

CheckResult check_oracle(const SuiteConfig& c) {
  CheckResult r = start("oracle_equivalence");
  r.parameters = {{"n", "2.." + std::to_string(c.oracle_max_n)},
                  {"fields_per_grid", std::to_string(c.oracle_fields)},
                  {"s", fmt(c.oracle_s)},
                  {"r", fmt(c.oracle_r)}};
  if (c.oracle_s.size() != c.oracle_r.size()) {
    throw Error(ErrorCode::malformed_config, "oracle.s and oracle.r must have equal length");
  }
  std::mt19937_64 rng(c.seed);
  double worst_semi = 0.0, worst_bil = 0.0;
  long compared = 0;
  for (std::size_t m = 0; m < c.oracle_s.size(); ++m) {
    for (int n = 2; n <= c.oracle_max_n; ++n) {
      const Grid g = build_grid(c.a, c.b, n);
      const NonlocalKernel k = build_kernel(g, c.oracle_s[m], c.oracle_r[m]);
      for (int f = 0; f < c.oracle_fields; ++f) {
        const Field u = uniform_field(n, rng);
        const Field v = uniform_field(n, rng);
        worst_semi = std::max(worst_semi,
                              rel_err(seminorm_pow(u, k), oracle::seminorm_pow(u, g, c.oracle_s[m], c.oracle_r[m])));
        const double exact = oracle::bilinear_form(u, v, g, c.oracle_s[m], c.oracle_r[m]);
        // bilinear_form can cancel to near zero; scale by the absolute sum bound
        const double scale = std::max(std::abs(exact), 1e-3 * oracle::seminorm_pow(u, g, c.oracle_s[m], c.oracle_r[m]));
        worst_bil = std::max(worst_bil, std::abs(bilinear_form(u, v, k) - exact) / scale);
        ++compared;
      }
    }
  }
  r.measured = {{"max_rel_err_seminorm", worst_semi},
                {"max_rel_err_bilinear", worst_bil},
                {"fields_compared", static_cast<double>(compared)}};
  r.thresholds = {{"rel_tolerance", c.oracle_tolerance}};
  r.pass = worst_semi <= c.oracle_tolerance && worst_bil <= c.oracle_tolerance;
  return r;
}

CheckResult check_linear(const SuiteConfig& c) {
  CheckResult r = start("linear_cross_check");
  r.parameters = {{"n", std::to_string(c.linear_n)}, {"s", fmt(c.linear_s)}, {"r", "2"}};
  const Grid g = build_grid(c.a, c.b, c.linear_n);
  const NonlocalKernel k = build_kernel(g, c.linear_s, 2.0);
  // r = 2 stiffness: [u]^2 = u^T A u with A = 2 (diag(W 1) - W) + 2 diag(E)
  Eigen::MatrixXd A = -2.0 * k.pair_weights;
  A.diagonal() += 2.0 * k.pair_weights.rowwise().sum() + 2.0 * k.exterior_weights;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A / g.h, Eigen::EigenvaluesOnly);
  const double dense1 = es.eigenvalues()[0];
  const double dense2 = es.eigenvalues()[1];
  const SolveConfig cfg = c.solver();
  const EigenPair e1 = solve_lambda1_q(k, g, 2.0, cfg);
  const EigenPair e2 = solve_lambda2_sym(k, g, 2.0, cfg);
  const double err1 = rel_err(e1.lambda, dense1);
  const double err2 = rel_err(e2.lambda, dense2);
  r.measured = {{"lambda1_solver", e1.lambda}, {"lambda1_dense", dense1}, {"rel_err_1", err1},
                {"lambda2_solver", e2.lambda}, {"lambda2_dense", dense2}, {"rel_err_2", err2}};
  r.thresholds = {{"rel_tolerance", c.linear_tolerance}};
  r.pass = err1 <= c.linear_tolerance && err2 <= c.linear_tolerance && e1.converged && e2.converged;
  r.note = "second level from the odd-symmetry surrogate";
  return r;
}

CheckResult check_gradient(const SuiteConfig& c) {
  CheckResult r = start("gradient_check");
  r.parameters = {{"n", std::to_string(c.gradient_n)},
                  {"pairs", std::to_string(c.gradient_pairs)},
                  {"s", fmt(c.gradient_s)},
                  {"r", fmt(c.gradient_r)},
                  {"epsilon", fmt(c.gradient_epsilon)}};
  const Grid g = build_grid(c.a, c.b, c.gradient_n);
  std::mt19937_64 rng(c.seed + 1);
  double worst = 0.0;
  for (double rr : c.gradient_r) {
    const NonlocalKernel k = build_kernel(g, c.gradient_s, rr);
    for (int m = 0; m < c.gradient_pairs; ++m) {
      const Field u = uniform_field(g.n, rng);
      const Field v = uniform_field(g.n, rng);
      const double eps = c.gradient_epsilon;
      const double fd = (seminorm_pow(Field(u + eps * v), k) - seminorm_pow(Field(u - eps * v), k)) / (2.0 * eps * rr);
      const Field gu = apply_frac_laplacian(u, k);
      const double exact = gu.dot(v);
      const double scale = std::max(std::abs(exact), 1e-3 * gu.norm() * v.norm());
      worst = std::max(worst, std::abs(fd - exact) / scale);
    }
  }
  r.measured = {{"max_rel_err", worst}};
  r.thresholds = {{"rel_tolerance", c.gradient_tolerance}};
  r.pass = worst <= c.gradient_tolerance;
  return r;
}

CheckResult check_nonexistence(const SuiteConfig& c) {
  CheckResult r = start("nonexistence");
  r.parameters = {{"n", std::to_string(c.nonexistence_n)},
                  {"factors", fmt(c.nonexistence_factors)},
                  {"coercive", fmt(c.nonexistence_coercive)},
                  {"nehari", fmt(c.nonexistence_nehari)}};
  bool pass = true;
  const SolveConfig cfg = c.solver();

  const Instance co = make_instance(c, c.nonexistence_n, c.nonexistence_coercive);
  double worst_mass = 0.0;
  for (double f : c.nonexistence_factors) {
    SpectralParams sp = c.nonexistence_coercive.params();
    sp.lambda = f * co.first.lambda;
    const EigenPair pair = solve_fixed_lambda_coercive(sp, co.k, cfg);
    worst_mass = std::max(worst_mass, pair.rho);
    pass = pass && pair.rho <= c.nonexistence_mass_tolerance;
  }

  const Instance ne = make_instance(c, c.nonexistence_n, c.nonexistence_nehari);
  int infeasible = 0;
  for (double f : c.nonexistence_factors) {
    SpectralParams sp = c.nonexistence_nehari.params();
    sp.lambda = f * ne.first.lambda;
    try {
      (void)solve_nehari(sp, ne.k, cfg);
    } catch (const Error& e) {
      if (e.code() == ErrorCode::infeasible_lambda) ++infeasible;
    }
  }
  pass = pass && infeasible == static_cast<int>(c.nonexistence_factors.size());
  r.measured = {{"lambda1_coercive", co.first.lambda},
                {"max_final_mass_coercive", worst_mass},
                {"lambda1_nehari", ne.first.lambda},
                {"infeasible_reports_nehari", static_cast<double>(infeasible)}};
  r.thresholds = {{"mass_tolerance", c.nonexistence_mass_tolerance},
                  {"required_infeasible", static_cast<double>(c.nonexistence_factors.size())}};
  r.pass = pass;
  return r;
}

CheckResult check_constant_sign(const SuiteConfig& c) {
  CheckResult r = start("constant_sign");
  std::string tuples;
  for (const Tuple& t : c.constant_sign_coercive) tuples += (tuples.empty() ? "" : ",") + fmt(t);
  for (const Tuple& t : c.constant_sign_nehari) tuples += "," + fmt(t);
  r.parameters = {{"n", std::to_string(c.constant_sign_n)},
                  {"lambda_factor", fmt(c.constant_sign_lambda_factor)},
                  {"tuples", tuples}};
  const SolveConfig cfg = c.solver();
  double worst = std::numeric_limits<double>::infinity();
  int converged = 0, total = 0;
  auto record = [&](const EigenPair& pair) {
    ++total;
    if (pair.converged && !pair.trivial) ++converged;
    worst = std::min(worst, sign_mixing(pair.u));
  };
  for (const Tuple& t : c.constant_sign_coercive) {
    const Instance in = make_instance(c, c.constant_sign_n, t);
    SpectralParams sp = t.params();
    sp.lambda = c.constant_sign_lambda_factor * in.first.lambda;
    record(solve_fixed_lambda_coercive(sp, in.k, cfg));
  }
  for (const Tuple& t : c.constant_sign_nehari) {
    const Instance in = make_instance(c, c.constant_sign_n, t);
    SpectralParams sp = t.params();
    sp.lambda = c.constant_sign_lambda_factor * in.first.lambda;
    record(solve_nehari(sp, in.k, cfg));
  }
  r.measured = {{"min_sign_mixing", worst},
                {"converged_nontrivial", static_cast<double>(converged)},
                {"solves", static_cast<double>(total)}};
  r.thresholds = {{"sign_mixing_floor", -c.constant_sign_tolerance}};
  r.pass = converged == total && worst >= -c.constant_sign_tolerance;
  r.note = "sign_mixing = min(u) max(u) / |u|_inf^2 after sign normalisation";
  return r;
}

CheckResult check_nehari(const SuiteConfig& c) {
  CheckResult r = start("nehari_membership");
  r.parameters = {{"n", std::to_string(c.nehari_n)},
                  {"params", fmt(c.nehari_params)},
                  {"lambda_factor", fmt(c.nehari_lambda_factor)},
                  {"samples", std::to_string(c.nehari_samples)},
                  {"scales", fmt(c.nehari_scales)}};
  const Instance in = make_instance(c, c.nehari_n, c.nehari_params);
  SpectralParams sp = c.nehari_params.params();
  sp.lambda = c.nehari_lambda_factor * in.first.lambda;

  std::mt19937_64 rng(c.seed + 2);
  double worst_member = 0.0, worst_invariance = 0.0;
  int projected = 0;
  for (int m = 0; m < c.nehari_samples; ++m) {
    // smooth perturbations of the first eigenfunction stay above the cone
    const Field coef = uniform_field(3, rng);
    Field u = in.first.u;
    for (int mode = 0; mode < 3; ++mode) {
      const double freq = (mode + 2) * std::acos(-1.0) / in.grid.length();
      for (int i = 0; i < in.grid.n; ++i) {
        u[i] += 0.2 * sup_norm(in.first.u) * coef[mode] * std::sin(freq * (in.grid.nodes[i] - in.grid.a));
      }
    }
    NehariProjection base;
    try {
      base = nehari_project(u, sp, in.k);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::not_above_cone) throw;
      continue;
    }
    ++projected;
    worst_member = std::max(worst_member, nehari_membership_residual(base.tu, *sp.lambda, in.k));
    for (double scale : c.nehari_scales) {
      const NehariProjection scaled = nehari_project(Field(scale * u), sp, in.k);
      worst_invariance = std::max(worst_invariance, sup_norm(scaled.tu - base.tu) / sup_norm(base.tu));
    }
  }
  const EigenPair sol = solve_nehari(sp, in.k, c.solver());
  const double sol_member = nehari_membership_residual(sol.u, *sp.lambda, in.k);
  r.measured = {{"projected_samples", static_cast<double>(projected)},
                {"max_membership_residual", worst_member},
                {"max_scale_invariance_err", worst_invariance},
                {"minimiser_membership_residual", sol_member},
                {"minimiser_energy", sol.objective}};
  r.thresholds = {{"membership_tolerance", c.nehari_membership_tolerance},
                  {"invariance_tolerance", c.nehari_invariance_tolerance}};
  r.pass = projected > 0 && worst_member <= c.nehari_membership_tolerance &&
           worst_invariance <= c.nehari_invariance_tolerance && sol_member <= c.nehari_membership_tolerance &&
           sol.converged && sol.objective > 0.0;
  return r;
}

CheckResult check_identity(const SuiteConfig& c) {
  CheckResult r = start("first_eigenvalue_identity");
  r.parameters = {{"n", std::to_string(c.identity_n)},
                  {"coercive", fmt(c.identity_coercive)},
                  {"nehari", fmt(c.identity_nehari)},
                  {"t_coercive", fmt(c.identity_t_coercive)},
                  {"t_nehari", fmt(c.identity_t_nehari)},
                  {"sample", "u = e1 / t, e1 the L^q-normalised first eigenfunction"}};
  const Instance co = make_instance(c, c.identity_n, c.identity_coercive);
  const double g_co = rayleigh_G(Field(co.first.u / c.identity_t_coercive), co.k.p, co.k.q);
  const double gap_co = g_co / co.first.lambda - 1.0;

  const Instance ne = make_instance(c, c.identity_n, c.identity_nehari);
  const double g_ne = rayleigh_G(Field(ne.first.u / c.identity_t_nehari), ne.k.p, ne.k.q);
  const double gap_ne = g_ne / ne.first.lambda - 1.0;
  const double t_far = 1.0 / c.identity_t_nehari;
  const double g_far = rayleigh_G(Field(ne.first.u / t_far), ne.k.p, ne.k.q);

  // lambda_1(s1, s2, p, q; 1) from the fixed-mass solve bounds lambda_1(s2, q) from above
  const EigenPair unit = solve_fixed_rho(c.identity_coercive.params(), 1.0, co.k, c.solver());
  r.measured = {{"lambda1_coercive", co.first.lambda},    {"G_rel_gap_coercive", gap_co},
                {"lambda1_nehari", ne.first.lambda},      {"G_rel_gap_nehari", gap_ne},
                {"G_far_over_lambda1_nehari", g_far / ne.first.lambda},
                {"fixed_rho1_lambda_coercive", unit.lambda}};
  r.thresholds = {{"rel_gap_tolerance", c.identity_tolerance},
                  {"divergence_factor", c.identity_divergence_factor}};
  r.pass = gap_co >= 0.0 && gap_co <= c.identity_tolerance && gap_ne >= 0.0 && gap_ne <= c.identity_tolerance &&
           g_far >= c.identity_divergence_factor * ne.first.lambda && unit.lambda >= co.first.lambda;
  return r;
}

CheckResult check_branch_zero(const SuiteConfig& c) {
  CheckResult r = start("branch_zero_rate");
  const Tuple& t = c.branch_zero_params;
  r.parameters = {{"n", std::to_string(c.branch_n)},
                  {"params", fmt(t)},
                  {"rho", fmt(c.branch_rho_max) + ".." + fmt(c.branch_rho_min)},
                  {"per_decade", std::to_string(c.branch_per_decade)}};
  const Instance in = make_instance(c, c.branch_n, t);
  const std::vector<double> rhos = geometric_rho_grid(c.branch_rho_max, c.branch_rho_min, c.branch_per_decade);
  const Branch br = trace_branch_zero(t.params(), rhos, in.k, c.solver());
  bool monotone = true, converged = true;
  for (std::size_t i = 0; i < br.size(); ++i) {
    converged = converged && br[i].converged;
    if (i > 0 && br[i].lambda > br[i - 1].lambda) monotone = false;
  }
  const double lam1 = in.first.lambda;
  const double final_gap = (br.back().lambda - lam1) / lam1;
  const double decay = br.front().seminorm_p / br.back().seminorm_p;
  const RateFit fit = fit_rate(br, lam1);
  const double floor = t.p / t.q - 1.0 - c.branch_margin;
  r.measured = {{"lambda1", lam1},
                {"lambda_rho_max", br.front().lambda},
                {"lambda_rho_min", br.back().lambda},
                {"final_rel_gap", final_gap},
                {"seminorm_p_decay", decay},
                {"fitted_exponent", fit.exponent},
                {"fit_r_squared", fit.r_squared},
                {"all_converged", converged ? 1.0 : 0.0},
                {"lambda_nonincreasing", monotone ? 1.0 : 0.0}};
  r.thresholds = {{"final_rel_gap_max", c.branch_zero_gap_fraction},
                  {"decay_min", c.branch_zero_decay_factor},
                  {"exponent_floor", floor}};
  r.pass = converged && monotone && final_gap > 0.0 && final_gap <= c.branch_zero_gap_fraction &&
           decay >= c.branch_zero_decay_factor && fit.exponent >= floor;
  return r;
}

CheckResult check_branch_infinity(const SuiteConfig& c) {
  CheckResult r = start("branch_infinity_rate");
  const Tuple& t = c.branch_infinity_params;
  r.parameters = {{"n", std::to_string(c.branch_n)},
                  {"params", fmt(t)},
                  {"rho", fmt(c.branch_rho_max) + ".." + fmt(c.branch_rho_min)},
                  {"per_decade", std::to_string(c.branch_per_decade)}};
  const Instance in = make_instance(c, c.branch_n, t);
  const std::vector<double> rhos = geometric_rho_grid(c.branch_rho_max, c.branch_rho_min, c.branch_per_decade);
  const Branch br = trace_branch_infinity(t.params(), rhos, in.k, c.solver());
  const double lam1 = in.first.lambda;
  bool shrinking = true, converged = true;
  for (std::size_t i = 0; i < br.size(); ++i) {
    converged = converged && br[i].converged;
    if (i > 0 && br[i].lambda - lam1 > (1.0 + c.branch_infinity_noise_band) * (br[i - 1].lambda - lam1)) {
      shrinking = false;
    }
  }
  const double growth = br.back().norm_s2q / br.front().norm_s2q;
  const RateFit fit = fit_rate(br, lam1);
  const double floor = 2.0 * (t.q - t.p) / t.p - c.branch_margin;
  r.measured = {{"lambda1", lam1},
                {"lambda_rho_max", br.front().lambda},
                {"lambda_rho_min", br.back().lambda},
                {"norm_growth", growth},
                {"fitted_exponent", fit.exponent},
                {"fit_r_squared", fit.r_squared},
                {"all_converged", converged ? 1.0 : 0.0},
                {"gap_shrinking", shrinking ? 1.0 : 0.0}};
  r.thresholds = {{"growth_min", c.branch_infinity_growth_factor}, {"exponent_floor", floor}};
  r.pass = converged && shrinking && growth >= c.branch_infinity_growth_factor && fit.exponent >= floor;
  if (fit.exponent < floor) {
    r.note = "gap follows rho^((q-p)/q) under the homogeneity of the transformed problem, below the floor";
  }
  return r;
}

CheckResult check_inequalities(const SuiteConfig& c) {
  CheckResult r = start("vector_inequalities");
  r.parameters = {{"r", fmt(c.inequality_r)},
                  {"lattice", std::to_string(c.inequality_lattice) + "x" + std::to_string(c.inequality_lattice)},
                  {"random", std::to_string(c.inequality_random)},
                  {"bound", fmt(c.inequality_bound)},
                  {"slack", fmt(c.inequality_slack)}};
  bool pass = true;
  for (double rr : c.inequality_r) {
    const double constant = monotonicity_constant(rr);
    const InequalitySweep s = sweep_monotonicity(rr, constant, c.inequality_lattice, c.inequality_random, c.seed + 3,
                                                 c.inequality_bound, c.inequality_slack);
    const std::string tag = "r=" + fmt(rr);
    r.measured.push_back({tag + ".constant", constant});
    r.measured.push_back({tag + ".samples", static_cast<double>(s.samples)});
    r.measured.push_back({tag + ".violations", static_cast<double>(s.violations)});
    r.measured.push_back({tag + ".min_ratio", s.min_ratio});
    pass = pass && s.violations == 0;
  }
  r.thresholds = {{"max_violations", 0.0}};
  r.pass = pass;
  return r;
}

CheckResult check_multiplicity(const SuiteConfig& c) {
  CheckResult r = start("multiplicity_probe");
  const Tuple& t = c.multiplicity_params;
  r.parameters = {{"n", std::to_string(c.multiplicity_n)},
                  {"params", fmt(t)},
                  {"above_factor", fmt(c.multiplicity_above_factor)}};
  const Grid g = build_grid(c.a, c.b, c.multiplicity_n);
  const KernelPair k = build_kernels(g, t.params());
  const SolveConfig cfg = c.solver();
  const double l1 = solve_lambda1_q(k.q, g, t.q, cfg).lambda;
  const double l2 = solve_lambda2_sym(k.q, g, t.q, cfg).lambda;
  const double between = 0.5 * (l1 + l2);
  const double above = c.multiplicity_above_factor * l2;
  const ProbeResult low = multiplicity_probe(t.params(), between, g, k, cfg, c.multiplicity_separation);
  const ProbeResult high = multiplicity_probe(t.params(), above, g, k, cfg, c.multiplicity_separation);
  const double sep = high.pairs.size() >= 2 ? lq_separation(high.pairs[0].u, high.pairs[1].u, g.h, t.q) : 0.0;
  r.measured = {{"level_constant_sign", l1},
                {"level_odd", l2},
                {"pairs_between_levels", static_cast<double>(low.pairs.size())},
                {"pairs_above_levels", static_cast<double>(high.pairs.size())},
                {"separation_above", sep}};
  r.thresholds = {{"separation_min", c.multiplicity_separation}};
  r.pass = low.pairs.size() == 1 && high.pairs.size() == 2 && sep >= c.multiplicity_separation;
  r.note = "k <= 2 only; genus-theoretic counts for larger k are not checked";
  return r;
}

using CheckFn = CheckResult (*)(const SuiteConfig&);

const std::vector<std::pair<std::string, CheckFn>>& registry() {
  static const std::vector<std::pair<std::string, CheckFn>> table = {
      {"oracle_equivalence", check_oracle},
      {"linear_cross_check", check_linear},
      {"gradient_check", check_gradient},
      {"nonexistence", check_nonexistence},
      {"constant_sign", check_constant_sign},
      {"nehari_membership", check_nehari},
      {"first_eigenvalue_identity", check_identity},
      {"branch_zero_rate", check_branch_zero},
      {"branch_infinity_rate", check_branch_infinity},
      {"vector_inequalities", check_inequalities},
      {"multiplicity_probe", check_multiplicity},
  };
  return table;
}

}  // namespace

SuiteConfig SuiteConfig::defaults() {
  SuiteConfig c;
  c.checks = check_registry();
  return c;
}

std::vector<std::string> SuiteConfig::known_keys() {
  SuiteConfig c;
  std::vector<std::string> keys;
  for (const auto& [key, slot] : bindings(c)) keys.push_back(key);
  return keys;
}

SuiteConfig SuiteConfig::from_file(const KeyValueFile& file) {
  const std::vector<std::string> unknown = file.unknown_keys(known_keys());
  if (!unknown.empty()) {
    throw Error(ErrorCode::malformed_config, "unknown key '" + unknown.front() + "' in " + file.origin());
  }
  SuiteConfig c = defaults();
  for (const auto& [key, slot] : bindings(c)) {
    if (file.has(key)) assign(slot, file, key);
  }
  for (const std::string& name : c.checks) {
    const auto& names = check_registry();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
      throw Error(ErrorCode::malformed_config, "key 'checks': unknown check '" + name + "'");
    }
  }
  return c;
}

std::string SuiteConfig::to_text() const {
  SuiteConfig copy = *this;
  std::string out;
  for (const auto& [key, slot] : bindings(copy)) out += key + " = " + slot_text(slot) + "\n";
  return out;
}

SolveConfig SuiteConfig::solver() const {
  SolveConfig cfg;
  cfg.max_iterations = max_iterations;
  cfg.tolerance = tolerance;
  cfg.restarts = restarts;
  cfg.seed = seed;
  return cfg;
}

const std::vector<std::string>& check_registry() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, fn] : registry()) out.push_back(name);
    return out;
  }();
  return names;
}

CheckResult run_check(const std::string& name, const SuiteConfig& config) {
  for (const auto& [entry, fn] : registry()) {
    if (entry != name) continue;
    const auto t0 = Clock::now();
    CheckResult r;
    try {
      r = fn(config);
    } catch (const std::exception& e) {
      r = start(name);
      r.pass = false;
      r.note = std::string("crashed: ") + e.what();
    }
    r.runtime_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    return r;
  }
  throw Error(ErrorCode::malformed_config, "unknown check '" + name + "'");
}

VerificationReport run_all(const SuiteConfig& config) {
  VerificationReport report;
  report.seed = config.seed;
  std::ostringstream grid;
  grid << "interval (" << fmt(config.a) << ", " << fmt(config.b) << "), midpoint cells n in {2.."
       << config.oracle_max_n << ", " << config.gradient_n << ", " << config.multiplicity_n << ", "
       << config.nonexistence_n << ", " << config.branch_n << "}";
  report.grid_summary = grid.str();
  if (config.checks.empty()) report.warnings.push_back("empty check list; overall pass is vacuous");
  for (const std::string& name : check_registry()) {
    if (std::find(config.checks.begin(), config.checks.end(), name) == config.checks.end()) continue;
    report.checks.push_back(run_check(name, config));
    report.overall_pass = report.overall_pass && report.checks.back().pass;
  }
  return report;
}

double lq_separation(const Field& u, const Field& v, double h, double q) {
  const double nu = std::pow(lq_mass(u, h, q), 1.0 / q);
  const double nv = std::pow(lq_mass(v, h, q), 1.0 / q);
  const double scale = std::max(nu, nv);
  if (scale == 0.0) return 0.0;
  return std::pow(lq_mass(Field(u.cwiseAbs() - v.cwiseAbs()), h, q), 1.0 / q) / scale;
}

ProbeResult multiplicity_probe(const SpectralParams& params, double lambda, const Grid& grid, const KernelPair& k,
                               const SolveConfig& cfg, double separation) {
  if (!is_symmetric(grid)) throw Error(ErrorCode::asymmetric_grid, "multiplicity probe needs a symmetric grid");
  ProbeResult out;
  out.level_constant_sign = solve_lambda1_q(k.q, grid, params.q, cfg).lambda;
  out.level_odd = solve_lambda2_sym(k.q, grid, params.q, cfg).lambda;
  SpectralParams sp = params;
  sp.lambda = lambda;
  const Regime regime = params.regime();
  if (regime == Regime::unordered) {
    throw Error(ErrorCode::regime_mismatch, "multiplicity probe needs the coercive or the Nehari regime");
  }

  auto attempt = [&](Symmetry sym, const char* label) -> std::optional<EigenPair> {
    SolveConfig c = cfg;
    c.symmetry = sym;
    try {
      EigenPair pair = regime == Regime::coercive ? solve_fixed_lambda_coercive(sp, k, c) : solve_nehari(sp, k, c);
      if (pair.trivial) {
        out.notes.push_back(std::string(label) + ": descent reached u = 0");
        return std::nullopt;
      }
      if (!pair.converged) {
        out.notes.push_back(std::string(label) + ": not converged");
        return std::nullopt;
      }
      return pair;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::infeasible_lambda) throw;
      out.notes.push_back(std::string(label) + ": no feasible direction");
      return std::nullopt;
    }
  };

  if (auto first = attempt(Symmetry::none, "constant-sign pair")) out.pairs.push_back(std::move(*first));
  if (auto odd = attempt(Symmetry::odd, "odd pair")) {
    odd->heuristic = true;
    bool distinct = true;
    for (const EigenPair& found : out.pairs) {
      if (lq_separation(found.u, odd->u, grid.h, params.q) < separation) distinct = false;
    }
    if (distinct) out.pairs.push_back(std::move(*odd));
    else out.notes.push_back("odd pair: coincides with the constant-sign pair");
  }
  if (out.pairs.size() < 2) out.notes.push_back("second pair not found");
  return out;
}

}  // namespace fracpq
