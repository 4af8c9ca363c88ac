#include "fracpq/inequalities.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "fracpq/error.hpp"
#include "fracpq/power.hpp"

namespace fracpq {

double monotonicity_constant(double r) {
  if (!(r > 1.0)) throw Error(ErrorCode::parameter_out_of_range, "r must be > 1");
  return r < 2.0 ? r - 1.0 : std::pow(2.0, 2.0 - r);
}

MonotonicitySample monotonicity_sides(double x1, double x2, double r, double c) {
  if (x1 == x2) return {};
  const PowerLaw pw(r);
  const double d = x2 - x1;
  MonotonicitySample out;
  out.lhs = (pw.signed_pow(x2) - pw.signed_pow(x1)) * d;
  if (r < 2.0) {
    out.rhs = c * std::pow(std::abs(x1) + std::abs(x2), r - 2.0) * d * d;
  } else {
    out.rhs = c * pw.abs_pow(d);
  }
  return out;
}

InequalitySweep sweep_monotonicity(double r, double c, int lattice, std::int64_t random_samples, std::uint64_t seed,
                                   double bound, double slack) {
  if (lattice < 0 || random_samples < 0) throw Error(ErrorCode::parameter_out_of_range, "negative sample count");
  InequalitySweep out;
  out.r = r;
  out.constant = c;
  out.min_ratio = std::numeric_limits<double>::infinity();
  auto visit = [&](double x1, double x2) {
    const MonotonicitySample s = monotonicity_sides(x1, x2, r, c);
    ++out.samples;
    if (s.lhs < s.rhs * (1.0 - slack)) ++out.violations;
    if (s.rhs > 0.0) out.min_ratio = std::min(out.min_ratio, s.lhs / s.rhs);
  };
  const double step = lattice > 1 ? 2.0 * bound / (lattice - 1) : 0.0;
  for (int i = 0; i < lattice; ++i) {
    const double x1 = lattice > 1 ? -bound + i * step : 0.0;
    for (int j = 0; j < lattice; ++j) visit(x1, lattice > 1 ? -bound + j * step : 0.0);
  }
  std::mt19937_64 rng(seed);
  auto uniform = [&] { return -bound + 2.0 * bound * (static_cast<double>(rng() >> 11) * 0x1.0p-53); };
  for (std::int64_t k = 0; k < random_samples; ++k) {
    const double x1 = uniform();
    visit(x1, uniform());
  }
  return out;
}

}  // namespace fracpq
