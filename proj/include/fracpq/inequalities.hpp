#pragma once

#include <cstdint>

namespace fracpq {

/// Strong monotonicity of phi(t) = |t|^(r-2) t on the real line:
///
///   1 < r < 2:  (phi(x2) - phi(x1))(x2 - x1) >= c1 (|x1| + |x2|)^(r-2) |x2 - x1|^2
///   r >= 2:     (phi(x2) - phi(x1))(x2 - x1) >= c2 |x2 - x1|^r
///
/// The shipped constants are c1 = r - 1 and c2 = 2^(2-r). The second bound is
/// attained with equality at x1 = -x2.
double monotonicity_constant(double r);

struct MonotonicitySample {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Both sides at (x1, x2). For x1 == x2 both sides are 0.
MonotonicitySample monotonicity_sides(double x1, double x2, double r, double c);

struct InequalitySweep {
  double r = 0.0;
  double constant = 0.0;
  std::int64_t samples = 0;
  std::int64_t violations = 0;
  double min_ratio = 0.0;  // smallest lhs / rhs over samples with rhs > 0
};

/// Checks the inequality on a `lattice` x `lattice` tensor grid of [-bound, bound]^2
/// plus `random_samples` uniform draws. A sample violates when
/// lhs < rhs (1 - slack); `slack` absorbs roundoff at the equality cases.
InequalitySweep sweep_monotonicity(double r, double c, int lattice, std::int64_t random_samples, std::uint64_t seed,
                                   double bound = 10.0, double slack = 1e-13);

}  // namespace fracpq
