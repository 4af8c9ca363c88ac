#include "fracpq/optimizer.hpp"

#include <cmath>
#include <limits>
#include <optional>

#include "fracpq/power.hpp"

namespace fracpq {

namespace {

constexpr int kMaxBacktracks = 60;
constexpr double kStepCap = 1.0;        // max |step|_inf relative to |u|_inf
constexpr double kRoundoffLevel = 1e-12;  // relative objective change treated as noise

double sup_norm(const Field& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

/// Coordinates of the admissible subspace; an empty basis means the full space.
class Subspace {
 public:
  Subspace(int n, Symmetry symmetry) : basis_(symmetry_basis(n, symmetry)) {}

  bool full() const { return basis_.size() == 0; }
  Field reduce(const Field& v) const { return full() ? v : Field(basis_.transpose() * v); }
  Field expand(const Field& v) const { return full() ? v : Field(basis_ * v); }
  Field project(const Field& v) const { return full() ? v : Field(basis_ * (basis_.transpose() * v)); }
  Eigen::MatrixXd reduce(const Eigen::MatrixXd& m) const {
    return full() ? m : Eigen::MatrixXd(basis_.transpose() * m * basis_);
  }

 private:
  Eigen::MatrixXd basis_;
};

std::optional<Eigen::LLT<Eigen::MatrixXd>> shifted_cholesky(const Eigen::MatrixXd& m) {
  const int k = static_cast<int>(m.rows());
  const double diag_scale = std::max(m.diagonal().cwiseAbs().maxCoeff(), 1e-300);
  double shift = 0.0;
  for (int attempt = 0; attempt < 12; ++attempt) {
    Eigen::LLT<Eigen::MatrixXd> llt(m + shift * Eigen::MatrixXd::Identity(k, k));
    if (llt.info() == Eigen::Success) return llt;
    shift = shift == 0.0 ? 1e-12 * diag_scale : shift * 100.0;
  }
  return std::nullopt;
}

bool finite(const Field& v) { return v.allFinite(); }

struct Direction {
  Field step;  // reduced coordinates
  StepKind kind;
};

struct Accepted {
  Field u;
  double value;
  StepKind kind;
};

/// Armijo backtracking along `dir`; `to_point` maps a full-space trial to the admissible set.
template <typename ToPoint>
std::optional<Accepted> line_search(const SmoothObjective& obj, const Field& u, double f, const Field& g_red,
                                    const Direction& dir, const Subspace& sub, const DescentOptions& opt,
                                    ToPoint to_point) {
  Field d = sub.expand(dir.step);
  const double slope = g_red.dot(dir.step);
  if (!(slope < 0.0) || !finite(d)) return std::nullopt;

  const double u_scale = sup_norm(u);
  const double d_scale = sup_norm(d);
  double t = opt.initial_step;
  if (u_scale > 0.0 && d_scale * t > kStepCap * u_scale) t = kStepCap * u_scale / d_scale;

  for (int k = 0; k < kMaxBacktracks; ++k) {
    Field trial = to_point(Field(u + t * d));
    const double ft = obj.value(trial);
    if (std::isfinite(ft) && ft <= f + opt.armijo_c * t * slope && ft < f) {
      return Accepted{std::move(trial), ft, dir.kind};
    }
    t *= opt.armijo_shrink;
  }
  return std::nullopt;
}

/// Near a minimiser the objective change drops below rounding and Armijo can
/// no longer rank trials. A full Newton step is then taken if it leaves the
/// objective unchanged to rounding and lowers the stationarity residual.
template <typename ToPoint>
std::optional<Accepted> polish(const SmoothObjective& obj, const Field& u, double f, const Field& d_red,
                               const Subspace& sub, const DescentOptions& opt, ToPoint to_point, double res_now) {
  if (!opt.residual) return std::nullopt;
  Field trial = to_point(Field(u + sub.expand(d_red)));
  const double ft = obj.value(trial);
  const double noise = kRoundoffLevel * std::max(std::abs(f), 1e-300);
  if (!std::isfinite(ft) || std::abs(ft - f) > noise) return std::nullopt;
  if (!(opt.residual(trial) < res_now)) return std::nullopt;
  return Accepted{std::move(trial), ft, StepKind::polish};
}

Field preconditioned_tangent(const Eigen::MatrixXd& h_red, const Field& g_red, const Field* normal) {
  auto llt = shifted_cholesky(h_red);
  if (!llt) return Field();
  Field y = llt->solve(g_red);
  if (normal) {
    Field z = llt->solve(*normal);
    const double nz = normal->dot(z);
    if (nz != 0.0) y -= (normal->dot(y) / nz) * z;
  }
  return -y;
}

}  // namespace

Eigen::MatrixXd symmetry_basis(int n, Symmetry symmetry) {
  if (symmetry == Symmetry::none) return Eigen::MatrixXd();
  const int k = n / 2;
  Eigen::MatrixXd basis = Eigen::MatrixXd::Zero(n, k);
  const double c = 1.0 / std::sqrt(2.0);
  for (int i = 0; i < k; ++i) {
    basis(i, i) = c;
    basis(n - 1 - i, i) = -c;
  }
  return basis;
}

Field MassSphere::retract(const Field& u) const {
  const double m = lq_mass(u, h, q);
  if (!(m > 0.0) || !std::isfinite(m)) return u;
  return u * std::pow(rho / m, 1.0 / q);
}

DescentResult minimize_on_sphere(const SmoothObjective& obj, const MassSphere& sphere, const Field& start,
                                 const DescentOptions& opt) {
  const int n = static_cast<int>(start.size());
  const Subspace sub(n, opt.symmetry);
  const PowerLaw pw(sphere.q);
  auto to_point = [&](const Field& v) { return sphere.retract(sub.project(v)); };

  DescentResult out;
  out.u = to_point(start);
  double f = obj.value(out.u);
  out.objective_log.push_back(f);

  for (out.iterations = 0; out.iterations < opt.max_iterations; ++out.iterations) {
    const double res = opt.residual ? opt.residual(out.u) : 0.0;
    if (res <= opt.tolerance) break;

    const Field& u = out.u;
    const Field g = sub.reduce(obj.gradient(u));
    const Field normal = sub.reduce(lq_mass_gradient(u, sphere.h, sphere.q));
    const Eigen::MatrixXd h_obj = sub.reduce(obj.hessian(u));
    const double nn = normal.squaredNorm();
    const double mu = nn > 0.0 ? normal.dot(g) / nn : 0.0;

    const double floor = 1e-8 * sup_norm(u);
    Eigen::VectorXd mass_curv(n);
    const double coef = sphere.q * sphere.h;
    for (int i = 0; i < n; ++i) mass_curv[i] = coef * pw.derivative(u[i], floor);
    const Eigen::MatrixXd h_mass = sub.reduce(Eigen::MatrixXd(mass_curv.asDiagonal()));
    const Eigen::MatrixXd h_lag = h_obj - mu * h_mass;

    std::vector<Direction> candidates;
    Field newton;
    {
      // Newton step in an orthonormal basis Z of the tangent space, taken
      // only where Z^T H Z is positive definite so that saddles repel.
      const int k = static_cast<int>(g.size());
      if (k > 1 && nn > 0.0) {
        const Eigen::MatrixXd z = Eigen::HouseholderQR<Eigen::MatrixXd>(normal).householderQ();
        const Eigen::MatrixXd basis = z.rightCols(k - 1);
        Eigen::LLT<Eigen::MatrixXd> llt(basis.transpose() * h_lag * basis);
        if (llt.info() == Eigen::Success) {
          const Field d = -(basis * llt.solve(basis.transpose() * g));
          if (finite(d)) {
            newton = d;
            if (g.dot(d) < 0.0) candidates.push_back({d, StepKind::newton});
          }
        }
      }
    }
    {
      Field d = preconditioned_tangent(h_obj, g, &normal);
      if (d.size() > 0) candidates.push_back({std::move(d), StepKind::preconditioned});
    }
    candidates.push_back({Field(-(g - mu * normal)), StepKind::steepest});

    std::optional<Accepted> step;
    for (const auto& dir : candidates) {
      step = line_search(obj, u, f, g, dir, sub, opt, to_point);
      if (step) break;
    }
    if (!step && newton.size() > 0) step = polish(obj, u, f, newton, sub, opt, to_point, res);
    if (!step) break;

    out.u = std::move(step->u);
    f = step->value;
    out.objective_log.push_back(f);
    out.steps.push_back(step->kind);
    if (opt.stop && opt.stop(out.u)) {
      out.stopped_early = true;
      ++out.iterations;
      break;
    }
  }

  out.objective = f;
  out.residual = opt.residual ? opt.residual(out.u) : 0.0;
  out.converged = out.residual <= opt.tolerance;
  return out;
}

DescentResult minimize_free(const SmoothObjective& obj, const Field& start, const DescentOptions& opt) {
  const int n = static_cast<int>(start.size());
  const Subspace sub(n, opt.symmetry);
  auto to_point = [&](const Field& v) { return sub.project(v); };

  DescentResult out;
  out.u = to_point(start);
  double f = obj.value(out.u);
  out.objective_log.push_back(f);

  for (out.iterations = 0; out.iterations < opt.max_iterations; ++out.iterations) {
    const double res = opt.residual ? opt.residual(out.u) : 0.0;
    if (res <= opt.tolerance) break;

    const Field& u = out.u;
    const Field g = sub.reduce(obj.gradient(u));
    const Eigen::MatrixXd h = sub.reduce(obj.hessian(u));

    std::vector<Direction> candidates;
    Field newton;
    {
      Field d = preconditioned_tangent(h, g, nullptr);
      if (d.size() > 0) {
        newton = d;
        candidates.push_back({std::move(d), StepKind::newton});
      }
    }
    candidates.push_back({Field(-g), StepKind::steepest});

    std::optional<Accepted> step;
    for (const auto& dir : candidates) {
      step = line_search(obj, u, f, g, dir, sub, opt, to_point);
      if (step) break;
    }
    if (!step && newton.size() > 0) step = polish(obj, u, f, newton, sub, opt, to_point, res);
    if (!step) break;

    out.u = std::move(step->u);
    f = step->value;
    out.objective_log.push_back(f);
    out.steps.push_back(step->kind);
    if (opt.stop && opt.stop(out.u)) {
      out.stopped_early = true;
      ++out.iterations;
      break;
    }
  }

  out.objective = f;
  out.residual = opt.residual ? opt.residual(out.u) : 0.0;
  out.converged = out.residual <= opt.tolerance;
  return out;
}

}  // namespace fracpq
