#include "fracpq/forms.hpp"

#include <cmath>
#include <vector>

#include "fracpq/error.hpp"
#include "fracpq/power.hpp"

namespace fracpq {

namespace {

void check_size(const Field& u, const NonlocalKernel& k, const char* what) {
  if (u.size() != k.size()) {
    throw Error(ErrorCode::dimension_mismatch,
                std::string(what) + ": field has " + std::to_string(u.size()) +
                    " values, kernel has " + std::to_string(k.size()));
  }
}

double ordered_sum(const std::vector<double>& partial) {
  double total = 0.0;
  for (double v : partial) total += v;
  return total;
}

double sup_norm(const Field& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

Regime SpectralParams::regime() const {
  if (s2 < s1 && q < p) return Regime::coercive;
  if (s1 < s2 && p < q) return Regime::nehari;
  return Regime::unordered;
}

const char* to_string(Regime regime) {
  switch (regime) {
    case Regime::coercive: return "coercive";
    case Regime::nehari: return "nehari";
    case Regime::unordered: return "unordered";
  }
  return "unknown";
}

KernelPair build_kernels(const Grid& grid, const SpectralParams& params) {
  return KernelPair{build_kernel(grid, params.s1, params.p), build_kernel(grid, params.s2, params.q)};
}

double seminorm_pow(const Field& u, const NonlocalKernel& k) {
  check_size(u, k, "seminorm_pow");
  const int n = k.size();
  const PowerLaw pw(k.r);
  std::vector<double> partial(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (int i = 0; i < n; ++i) {
    // column i below the diagonal holds W(j, i) = W(i, j) for j > i
    const double* w = k.pair_weights.col(i).data();
    const double ui = u[i];
    double acc = 0.0;
    for (int j = i + 1; j < n; ++j) acc += w[j] * pw.abs_pow(ui - u[j]);
    partial[i] = 2.0 * acc + 2.0 * k.exterior_weights[i] * pw.abs_pow(ui);
  }
  return ordered_sum(partial);
}

double bilinear_form(const Field& u, const Field& v, const NonlocalKernel& k) {
  check_size(u, k, "bilinear_form");
  check_size(v, k, "bilinear_form");
  const int n = k.size();
  const PowerLaw pw(k.r);
  std::vector<double> partial(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (int i = 0; i < n; ++i) {
    const double* w = k.pair_weights.col(i).data();
    const double ui = u[i];
    const double vi = v[i];
    double acc = 0.0;
    for (int j = i + 1; j < n; ++j) acc += w[j] * pw.signed_pow(ui - u[j]) * (vi - v[j]);
    partial[i] = 2.0 * acc + 2.0 * k.exterior_weights[i] * pw.signed_pow(ui) * vi;
  }
  return ordered_sum(partial);
}

Field apply_frac_laplacian(const Field& u, const NonlocalKernel& k) {
  check_size(u, k, "apply_frac_laplacian");
  const int n = k.size();
  const PowerLaw pw(k.r);
  Field g(n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const double* w = k.pair_weights.col(i).data();
    const double ui = u[i];
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += w[j] * pw.signed_pow(ui - u[j]);
    g[i] = 2.0 * acc + 2.0 * k.exterior_weights[i] * pw.signed_pow(ui);
  }
  return g;
}

Eigen::MatrixXd frac_laplacian_hessian(const Field& u, const NonlocalKernel& k, double floor) {
  check_size(u, k, "frac_laplacian_hessian");
  const int n = k.size();
  const PowerLaw pw(k.r);
  Eigen::MatrixXd H(n, n);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < n; ++i) {
    const double* w = k.pair_weights.col(i).data();
    double* col = H.col(i).data();
    const double ui = u[i];
    double diag = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double c = 2.0 * w[j] * pw.derivative(ui - u[j], floor);
      col[j] = -c;
      diag += c;
    }
    col[i] = diag + 2.0 * k.exterior_weights[i] * pw.derivative(ui, floor);
  }
  return H;
}

double lq_mass(const Field& u, double h, double q) {
  const PowerLaw pw(q);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i) acc += pw.abs_pow(u[i]);
  return h * acc;
}

double lq_mass(const Field& u, const Grid& grid, double q) {
  if (u.size() != grid.n) {
    throw Error(ErrorCode::dimension_mismatch, "lq_mass: field length " + std::to_string(u.size()) +
                                                   " vs grid n = " + std::to_string(grid.n));
  }
  return lq_mass(u, grid.h, q);
}

Field lq_mass_gradient(const Field& u, double h, double q) {
  const PowerLaw pw(q);
  Field g(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) g[i] = q * h * pw.signed_pow(u[i]);
  return g;
}

double energy_F(const Field& u, const SpectralParams& params, const NonlocalKernel& kp,
                const NonlocalKernel& kq) {
  if (!params.lambda) throw Error(ErrorCode::missing_lambda, "energy_F needs lambda");
  const double p = kp.r;
  const double q = kq.r;
  return seminorm_pow(u, kp) / p + seminorm_pow(u, kq) / q - *params.lambda * lq_mass(u, kq.h, q) / q;
}

double energy_I(const Field& u, const NonlocalKernel& kp, const NonlocalKernel& kq) {
  return seminorm_pow(u, kp) / kp.r + seminorm_pow(u, kq) / kq.r;
}

double energy_J(const Field& u, const SpectralParams& params, const NonlocalKernel& kp,
                const NonlocalKernel& kq) {
  if (!params.lambda) throw Error(ErrorCode::missing_lambda, "energy_J needs lambda");
  const double p = kp.r;
  const double q = kq.r;
  return (q / p) * seminorm_pow(u, kp) + seminorm_pow(u, kq) - *params.lambda * lq_mass(u, kq.h, q);
}

double rayleigh_G(const Field& u, const NonlocalKernel& kp, const NonlocalKernel& kq) {
  const double q = kq.r;
  const double mass = lq_mass(u, kq.h, q);
  if (!(mass > 0.0)) throw Error(ErrorCode::zero_field, "rayleigh_G is undefined at u = 0");
  return energy_I(u, kp, kq) / (mass / q);
}

double energy_E(const Field& w, const NonlocalKernel& kp, const NonlocalKernel& kq) {
  const double p = kp.r;
  const double q = kq.r;
  const double Q = seminorm_pow(w, kq);
  const double P = seminorm_pow(w, kp);
  return (q / p) * std::pow(Q, 2.0 * (q - p) / q) * P + Q;
}

double weak_form_residual(const Field& u, double lambda, const NonlocalKernel& kp,
                          const NonlocalKernel& kq, double p_prefactor) {
  const Field gp = p_prefactor * apply_frac_laplacian(u, kp);
  const Field gq = apply_frac_laplacian(u, kq);
  const Field rhs = (lambda / kq.r) * lq_mass_gradient(u, kq.h, kq.r);
  const double scale = sup_norm(gp) + sup_norm(gq) + sup_norm(rhs);
  if (scale == 0.0) return 0.0;
  return sup_norm(gp + gq - rhs) / scale;
}

double weak_form_residual_q(const Field& u, double lambda, const NonlocalKernel& kq) {
  const Field gq = apply_frac_laplacian(u, kq);
  const Field rhs = (lambda / kq.r) * lq_mass_gradient(u, kq.h, kq.r);
  const double scale = sup_norm(gq) + sup_norm(rhs);
  if (scale == 0.0) return 0.0;
  return sup_norm(gq - rhs) / scale;
}

namespace reference {

double seminorm_pow(const Field& u, const NonlocalKernel& k) {
  check_size(u, k, "reference::seminorm_pow");
  const int n = k.size();
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) total += k.pair_weights(i, j) * std::pow(std::abs(u[i] - u[j]), k.r);
    }
    total += 2.0 * k.exterior_weights[i] * std::pow(std::abs(u[i]), k.r);
  }
  return total;
}

namespace {
double phi(double t, double r) { return t == 0.0 ? 0.0 : std::pow(std::abs(t), r - 2.0) * t; }
}  // namespace

double bilinear_form(const Field& u, const Field& v, const NonlocalKernel& k) {
  check_size(u, k, "reference::bilinear_form");
  check_size(v, k, "reference::bilinear_form");
  const int n = k.size();
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) total += k.pair_weights(i, j) * phi(u[i] - u[j], k.r) * (v[i] - v[j]);
    }
    total += 2.0 * k.exterior_weights[i] * phi(u[i], k.r) * v[i];
  }
  return total;
}

Field apply_frac_laplacian(const Field& u, const NonlocalKernel& k) {
  check_size(u, k, "reference::apply_frac_laplacian");
  const int n = k.size();
  Field g = Field::Zero(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) g[i] += 2.0 * k.pair_weights(i, j) * phi(u[i] - u[j], k.r);
    }
    g[i] += 2.0 * k.exterior_weights[i] * phi(u[i], k.r);
  }
  return g;
}

}  // namespace reference

}  // namespace fracpq
