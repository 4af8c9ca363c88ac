#pragma once

#include <optional>

#include <Eigen/Dense>

#include "fracpq/grid.hpp"

namespace fracpq {

/// Nodal values of u on the grid; u is implicitly zero outside the interval.
using Field = Eigen::VectorXd;

enum class Regime {
  coercive,   // s2 < s1 and q < p: F_lambda is coercive
  nehari,     // s1 < s2 and p < q: minimise on the Nehari set
  unordered,  // anything else
};

struct SpectralParams {
  double s1 = 0.5;
  double s2 = 0.5;
  double p = 2.0;
  double q = 2.0;
  std::optional<double> lambda;
  std::optional<double> rho;

  Regime regime() const;
};

const char* to_string(Regime regime);

/// Kernels for the two operators: (s1, p) and (s2, q).
struct KernelPair {
  NonlocalKernel p;
  NonlocalKernel q;
};

KernelPair build_kernels(const Grid& grid, const SpectralParams& params);

// Discrete Gagliardo forms ------------------------------------------------
//
// [u]^r     = sum_{i != j} W_ij |u_i - u_j|^r + 2 sum_i E_i |u_i|^r
// E(u, v)   = sum_{i != j} W_ij phi(u_i - u_j)(v_i - v_j) + 2 sum_i E_i phi(u_i) v_i
//
// with phi(t) = |t|^(r-2) t. The OpenMP versions accumulate one partial sum
// per row and add the rows serially in index order, so results are bitwise
// identical for every thread count.

double seminorm_pow(const Field& u, const NonlocalKernel& k);
double bilinear_form(const Field& u, const Field& v, const NonlocalKernel& k);

/// Gradient of seminorm_pow(u) / r, i.e. <g, v> = bilinear_form(u, v) for all v.
Field apply_frac_laplacian(const Field& u, const NonlocalKernel& k);

/// Hessian of seminorm_pow(u) / r. For r < 2 the factor |u_i - u_j|^(r-2) is
/// evaluated with |u_i - u_j| clamped to at least `floor`.
Eigen::MatrixXd frac_laplacian_hessian(const Field& u, const NonlocalKernel& k, double floor = 0.0);

double lq_mass(const Field& u, const Grid& grid, double q);
double lq_mass(const Field& u, double h, double q);

/// Gradient of lq_mass: q h |u|^(q-2) u.
Field lq_mass_gradient(const Field& u, double h, double q);

// Energies ------------------------------------------------------------------

/// F_lambda(u) = [u]^p/p + [u]^q/q - (lambda/q) int |u|^q
double energy_F(const Field& u, const SpectralParams& params, const NonlocalKernel& kp,
                const NonlocalKernel& kq);

/// I(u) = [u]^p/p + [u]^q/q
double energy_I(const Field& u, const NonlocalKernel& kp, const NonlocalKernel& kq);

/// J_lambda(u) = (q/p)[u]^p + [u]^q - lambda int |u|^q
double energy_J(const Field& u, const SpectralParams& params, const NonlocalKernel& kp,
                const NonlocalKernel& kq);

/// G(u) = ([u]^p/p + [u]^q/q) / (||u||_q^q / q); throws zero-field for u == 0.
double rayleigh_G(const Field& u, const NonlocalKernel& kp, const NonlocalKernel& kq);

/// E(w) = (q/p) ||w||^(2(q-p)) [w]^p + [w]^q, with ||w|| = ([w]^q)^(1/q).
double energy_E(const Field& w, const NonlocalKernel& kp, const NonlocalKernel& kq);

/// Relative sup-norm defect of the discrete weak form
///   c E_p(u, .) + E_q(u, .) = lambda h |u|^(q-2) u
/// where c is the p-term prefactor (1 for the original problem). Returns 0
/// for the zero field.
double weak_form_residual(const Field& u, double lambda, const NonlocalKernel& kp,
                          const NonlocalKernel& kq, double p_prefactor = 1.0);

/// Same defect for the pure q-problem (-Delta)^s_q u = lambda |u|^(q-2) u.
double weak_form_residual_q(const Field& u, double lambda, const NonlocalKernel& kq);

namespace reference {

double seminorm_pow(const Field& u, const NonlocalKernel& k);
double bilinear_form(const Field& u, const Field& v, const NonlocalKernel& k);
Field apply_frac_laplacian(const Field& u, const NonlocalKernel& k);

}  // namespace reference

}  // namespace fracpq
