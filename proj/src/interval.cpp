#include "certsynth/interval.hpp"

#include <algorithm>
#include <numbers>
#include <sstream>

namespace certsynth {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double down(double v) { return std::nextafter(v, -kInf); }
double up(double v) { return std::nextafter(v, kInf); }

Interval widen(double lo, double hi) { return Interval::unchecked(down(lo), up(hi)); }
Interval widen2(double lo, double hi) {
  return Interval::unchecked(down(down(lo)), up(up(hi)));
}

Interval clamp_to(Interval v, double lo, double hi) {
  return Interval::unchecked(std::max(v.lo(), lo), std::min(v.hi(), hi));
}

}  // namespace

Interval::Interval(double point) : Interval(point, point) {}

Interval::Interval(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("interval bounds must be finite");
  }
  if (lo > hi) {
    throw std::invalid_argument("interval lower bound exceeds upper bound");
  }
}

std::string Interval::to_string() const {
  std::ostringstream os;
  os.precision(17);
  os << "[" << lo_ << ", " << hi_ << "]";
  return os.str();
}

Interval operator+(const Interval& a, const Interval& b) {
  return widen(a.lo() + b.lo(), a.hi() + b.hi());
}

Interval operator-(const Interval& a, const Interval& b) {
  return widen(a.lo() - b.hi(), a.hi() - b.lo());
}

Interval operator-(const Interval& a) { return Interval::unchecked(-a.hi(), -a.lo()); }

Interval operator*(const Interval& a, const Interval& b) {
  const double p1 = a.lo() * b.lo();
  const double p2 = a.lo() * b.hi();
  const double p3 = a.hi() * b.lo();
  const double p4 = a.hi() * b.hi();
  return widen(std::min({p1, p2, p3, p4}), std::max({p1, p2, p3, p4}));
}

Interval operator/(const Interval& a, const Interval& b) {
  if (b.contains_zero()) {
    throw EnclosureError("division by an interval containing zero: " + b.to_string());
  }
  const double q1 = a.lo() / b.lo();
  const double q2 = a.lo() / b.hi();
  const double q3 = a.hi() / b.lo();
  const double q4 = a.hi() / b.hi();
  return widen(std::min({q1, q2, q3, q4}), std::max({q1, q2, q3, q4}));
}

double pow_int(double x, int k) {
  double r = 1.0;
  double base = x;
  int e = k;
  while (e > 0) {
    if (e & 1) r *= base;
    base *= base;
    e >>= 1;
  }
  return r;
}

Interval pow_int(const Interval& a, int k) {
  if (k == 0) return Interval(1.0);
  if (k == 1) return a;
  const double l = pow_int(a.lo(), k);
  const double h = pow_int(a.hi(), k);
  if (k % 2 == 1) {
    // Repeated squaring accumulates up to k-1 roundings; pad generously.
    Interval r = widen2(l, h);
    for (int i = 2; i < k; ++i) r = widen(r.lo(), r.hi());
    return r;
  }
  double lo, hi;
  if (a.contains_zero()) {
    lo = 0.0;
    hi = std::max(l, h);
  } else {
    lo = std::min(l, h);
    hi = std::max(l, h);
  }
  Interval r = widen2(lo, hi);
  for (int i = 2; i < k; ++i) r = widen(r.lo(), r.hi());
  if (r.lo() < 0.0) r = Interval::unchecked(0.0, r.hi());
  return r;
}

namespace {

// Whether some point c + 2*pi*k lies in [lo, hi] (slightly inflated).
bool contains_periodic(double lo, double hi, double c) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const double slack = 1e-12 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
  const double k = std::ceil((lo - slack - c) / two_pi);
  return c + k * two_pi <= hi + slack;
}

}  // namespace

Interval sin(const Interval& a) {
  if (a.width() >= 2.0 * std::numbers::pi) return Interval(-1.0, 1.0);
  const double sl = std::sin(a.lo());
  const double sh = std::sin(a.hi());
  double lo = std::min(sl, sh);
  double hi = std::max(sl, sh);
  if (contains_periodic(a.lo(), a.hi(), std::numbers::pi / 2)) hi = 1.0;
  if (contains_periodic(a.lo(), a.hi(), -std::numbers::pi / 2)) lo = -1.0;
  return clamp_to(widen2(lo, hi), -1.0, 1.0);
}

Interval cos(const Interval& a) {
  if (a.width() >= 2.0 * std::numbers::pi) return Interval(-1.0, 1.0);
  const double cl = std::cos(a.lo());
  const double ch = std::cos(a.hi());
  double lo = std::min(cl, ch);
  double hi = std::max(cl, ch);
  if (contains_periodic(a.lo(), a.hi(), 0.0)) hi = 1.0;
  if (contains_periodic(a.lo(), a.hi(), std::numbers::pi)) lo = -1.0;
  return clamp_to(widen2(lo, hi), -1.0, 1.0);
}

Interval exp(const Interval& a) {
  const double hi = std::exp(a.hi());
  if (!std::isfinite(hi)) throw EnclosureError("exp overflow in enclosure");
  Interval r = widen2(std::exp(a.lo()), hi);
  if (r.lo() < 0.0) r = Interval::unchecked(0.0, r.hi());
  return r;
}

Interval tanh(const Interval& a) {
  return clamp_to(widen2(std::tanh(a.lo()), std::tanh(a.hi())), -1.0, 1.0);
}

Interval sigmoid(const Interval& a) {
  return clamp_to(widen2(sigmoid(a.lo()), sigmoid(a.hi())), 0.0, 1.0);
}

Interval softplus(const Interval& a) {
  Interval r = widen2(softplus(a.lo()), softplus(a.hi()));
  if (r.lo() < 0.0) r = Interval::unchecked(0.0, r.hi());
  return r;
}

Interval sqrt(const Interval& a) {
  const double lo = std::max(a.lo(), 0.0);
  const double hi = std::max(a.hi(), 0.0);
  Interval r = widen(std::sqrt(lo), std::sqrt(hi));
  if (r.lo() < 0.0) r = Interval::unchecked(0.0, r.hi());
  return r;
}

Interval intersect(const Interval& a, const Interval& b) {
  const double lo = std::max(a.lo(), b.lo());
  const double hi = std::min(a.hi(), b.hi());
  if (lo > hi) return a;
  return Interval::unchecked(lo, hi);
}

Interval hull(const Interval& a, const Interval& b) {
  return Interval::unchecked(std::min(a.lo(), b.lo()), std::max(a.hi(), b.hi()));
}

}  // namespace certsynth
