#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace certsynth {

/// Thrown when an enclosure cannot be formed, e.g. division by an interval
/// that straddles zero. Callers are expected to split the box and retry.
class EnclosureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Closed, finite interval [lo, hi]. All arithmetic rounds outward by one ulp
/// (two for transcendental functions) so enclosures remain valid under
/// floating-point evaluation.
class Interval {
 public:
  Interval() = default;
  explicit Interval(double point);
  Interval(double lo, double hi);

  /// Construction without validation. For internal hot paths only.
  static Interval unchecked(double lo, double hi) {
    Interval r;
    r.lo_ = lo;
    r.hi_ = hi;
    return r;
  }

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double width() const { return hi_ - lo_; }
  double mid() const { return 0.5 * (lo_ + hi_); }
  bool contains(double v) const { return lo_ <= v && v <= hi_; }
  bool contains_zero() const { return lo_ <= 0.0 && 0.0 <= hi_; }
  bool subset_of(const Interval& o) const { return o.lo_ <= lo_ && hi_ <= o.hi_; }

  std::string to_string() const;

 private:
  double lo_ = 0.0;
  double hi_ = 0.0;
};

Interval operator+(const Interval& a, const Interval& b);
Interval operator-(const Interval& a, const Interval& b);
Interval operator*(const Interval& a, const Interval& b);
Interval operator/(const Interval& a, const Interval& b);
Interval operator-(const Interval& a);

Interval pow_int(const Interval& a, int k);
Interval sin(const Interval& a);
Interval cos(const Interval& a);
Interval exp(const Interval& a);
Interval tanh(const Interval& a);
Interval sigmoid(const Interval& a);
Interval softplus(const Interval& a);
Interval sqrt(const Interval& a);

/// Intersection; returns `a` unchanged if the two are disjoint (which only
/// happens through rounding noise when both are valid enclosures).
Interval intersect(const Interval& a, const Interval& b);
Interval hull(const Interval& a, const Interval& b);

// Scalar helpers shared by every evaluation algebra.
inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double softplus(double x) {
  return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}
double pow_int(double x, int k);

}  // namespace certsynth
