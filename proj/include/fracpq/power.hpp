#pragma once

#include <algorithm>
#include <cmath>

namespace fracpq {

/// |t|^r and the monotone map t -> |t|^(r-2) t, with multiply-only fast paths
/// for the exponents used most often. At t = 0 the map is defined as 0, which
/// is its limit for every r > 1.
class PowerLaw {
 public:
  explicit PowerLaw(double r) : r_(r) {
    if (r == 2.0) kind_ = Kind::two;
    else if (r == 3.0) kind_ = Kind::three;
    else if (r == 4.0) kind_ = Kind::four;
    else if (r == 1.5) kind_ = Kind::three_halves;
    else kind_ = Kind::general;
  }

  double exponent() const { return r_; }

  double abs_pow(double t) const {
    const double a = std::abs(t);
    switch (kind_) {
      case Kind::two: return a * a;
      case Kind::three: return a * a * a;
      case Kind::four: { const double a2 = a * a; return a2 * a2; }
      case Kind::three_halves: return a * std::sqrt(a);
      case Kind::general: break;
    }
    return a == 0.0 ? 0.0 : std::pow(a, r_);
  }

  double signed_pow(double t) const {
    switch (kind_) {
      case Kind::two: return t;
      case Kind::three: return std::abs(t) * t;
      case Kind::four: return t * t * t;
      case Kind::three_halves: return t == 0.0 ? 0.0 : t / std::sqrt(std::abs(t));
      case Kind::general: break;
    }
    return t == 0.0 ? 0.0 : std::pow(std::abs(t), r_ - 2.0) * t;
  }

  /// (r - 1) max(|t|, floor)^(r - 2): the derivative of signed_pow, with |t|
  /// clamped from below so that r < 2 stays finite.
  double derivative(double t, double floor) const {
    const double a = std::max(std::abs(t), floor);
    switch (kind_) {
      case Kind::two: return 1.0;
      case Kind::three: return 2.0 * a;
      case Kind::four: return 3.0 * a * a;
      case Kind::three_halves: return 0.5 / std::sqrt(a);
      case Kind::general: break;
    }
    if (a == 0.0 && r_ > 2.0) return 0.0;
    return (r_ - 1.0) * std::pow(a, r_ - 2.0);
  }

 private:
  enum class Kind { two, three, four, three_halves, general };
  double r_;
  Kind kind_;
};

}  // namespace fracpq
