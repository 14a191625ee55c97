// Validated scalar arithmetic: closed intervals with outward-rounded endpoints.
//
// Rounding model: interval endpoint arithmetic runs with the FPU in upward
// rounding; lower endpoints are produced through the negation identity
// down(x op y) = -up((-x) op (-y)). Transcendentals (exp, log, sin, cos,
// fractional pow) are evaluated with MPFR at 53-bit precision and directed
// rounding, so no accuracy assumption on libm is ever needed. The whole
// project is compiled with -frounding-math; see rnd::RoundingScope.

#ifndef CERTIMEASURE_INTERVAL_HPP
#define CERTIMEASURE_INTERVAL_HPP

#include <cassert>
#include <cfenv>
#include <cmath>
#include <stdexcept>
#include <string>

namespace certimeasure {

namespace rnd {

// Sets a rounding mode on construction and restores the caller's mode on
// destruction. Rounding state is per thread; never leaks across tasks.
class RoundingScope {
public:
  explicit RoundingScope(int mode) : saved_(fegetround()) { fesetround(mode); }
  ~RoundingScope() { fesetround(saved_); }
  RoundingScope(const RoundingScope&) = delete;
  RoundingScope& operator=(const RoundingScope&) = delete;

private:
  int saved_;
};

// Cheap guard used by every interval primitive: most of the time the thread
// is already rounding upward and this is a single mode read.
inline void require_upward() {
  if (fegetround() != FE_UPWARD) fesetround(FE_UPWARD);
}

inline void require_nearest() {
  if (fegetround() != FE_TONEAREST) fesetround(FE_TONEAREST);
}

// Scalar helpers with guaranteed rounding direction. Each enforces the mode
// itself, so they are safe to call from any rounding state.
inline double add_up(double a, double b) { require_upward(); return a + b; }
inline double add_down(double a, double b) { require_upward(); return -((-a) - b); }
inline double sub_up(double a, double b) { require_upward(); return a - b; }
inline double sub_down(double a, double b) { require_upward(); return -(b - a); }
inline double mul_up(double a, double b) { require_upward(); return a * b; }
inline double mul_down(double a, double b) { require_upward(); return -((-a) * b); }
inline double div_up(double a, double b) { require_upward(); return a / b; }
inline double div_down(double a, double b) { require_upward(); return -((-a) / b); }

double sqrt_up(double a);
double sqrt_down(double a);

// Correctly rounded directed transcendentals (MPFR, 53-bit).
double exp_up(double x);
double exp_down(double x);
double log_up(double x);   // requires x > 0
double log_down(double x); // requires x > 0
double sin_up(double x);
double sin_down(double x);
double cos_up(double x);
double cos_down(double x);
double pow_up(double x, double e);   // requires x > 0
double pow_down(double x, double e); // requires x > 0

} // namespace rnd

// A closed real interval [lo, hi]. Every arithmetic result encloses the exact
// real result. Endpoints are finite except where a bound is genuinely
// unbounded (e.g. the reciprocal derivative of a map at a singular endpoint),
// in which case an infinity marks the unbounded side.
struct Ival {
  double lo;
  double hi;

  Ival() : lo(0.0), hi(0.0) {}
  Ival(double l, double h) : lo(l), hi(h) {
    assert(!(l > h) && "interval endpoints out of order");
  }
  explicit Ival(double x) : lo(x), hi(x) {}

  double width() const { return rnd::sub_up(hi, lo); }
  double mid() const {
    // midpoint clamped into the interval; round-to-nearest is fine here,
    // the result is only ever used as an approximation point
    rnd::require_nearest();
    double m = 0.5 * (lo + hi);
    if (!(m >= lo)) m = lo;
    if (!(m <= hi)) m = hi;
    return m;
  }
  // max |x| over the interval
  double mag() const { return std::fmax(std::fabs(lo), std::fabs(hi)); }
  // min |x| over the interval (0 if it straddles 0)
  double mig() const {
    if (lo > 0.0) return lo;
    if (hi < 0.0) return -hi;
    return 0.0;
  }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool contains(const Ival& o) const { return lo <= o.lo && o.hi <= hi; }
  bool is_finite() const { return std::isfinite(lo) && std::isfinite(hi); }
};

// Exact-input constructors -------------------------------------------------

inline Ival ival(double x) { return Ival(x); }
inline Ival ival(double lo, double hi) { return Ival(lo, hi); }

// Tight enclosure of the rational p/q.
Ival from_rational(long long p, long long q);

// Enclosure of pi.
Ival pi_i();

// Set operations -----------------------------------------------------------

inline Ival hull(const Ival& a, const Ival& b) {
  return Ival(std::fmin(a.lo, b.lo), std::fmax(a.hi, b.hi));
}

inline bool intersects(const Ival& a, const Ival& b) {
  return a.lo <= b.hi && b.lo <= a.hi;
}

// Intersection; precondition: intersects(a, b).
inline Ival intersect(const Ival& a, const Ival& b) {
  double l = std::fmax(a.lo, b.lo), h = std::fmin(a.hi, b.hi);
  if (l > h) throw std::domain_error("intersect: empty intersection");
  return Ival(l, h);
}

// Arithmetic ---------------------------------------------------------------

Ival operator+(const Ival& a, const Ival& b);
Ival operator-(const Ival& a, const Ival& b);
Ival operator*(const Ival& a, const Ival& b);
Ival operator/(const Ival& a, const Ival& b); // requires 0 not in b
inline Ival operator-(const Ival& a) { return Ival(-a.hi, -a.lo); }

inline Ival operator+(const Ival& a, double b) { return a + Ival(b); }
inline Ival operator+(double a, const Ival& b) { return Ival(a) + b; }
inline Ival operator-(const Ival& a, double b) { return a - Ival(b); }
inline Ival operator-(double a, const Ival& b) { return Ival(a) - b; }
inline Ival operator*(const Ival& a, double b) { return a * Ival(b); }
inline Ival operator*(double a, const Ival& b) { return Ival(a) * b; }
inline Ival operator/(const Ival& a, double b) { return a / Ival(b); }
inline Ival operator/(double a, const Ival& b) { return Ival(a) / b; }

Ival abs_i(const Ival& a);
Ival sqrt_i(const Ival& a); // requires a.lo >= 0
Ival exp_i(const Ival& a);
Ival log_i(const Ival& a); // requires a.lo > 0
Ival sin_i(const Ival& a);
Ival cos_i(const Ival& a);

// x^e for a real exponent (exactly representable as a double, e.g. any
// dyadic rational like 51/64). Requires a.lo >= 0; the endpoint a.lo == 0 is
// special-cased: 0^e = 0 for e > 0, and the upper endpoint becomes +inf for
// e < 0 (unbounded reciprocal power).
Ival pow_i(const Ival& a, double e);

// x^(p/q) for integers p, q > 0. Handles negative bases when q is odd via
// sign symmetry; even q requires a.lo >= 0.
Ival pow_i(const Ival& a, long long p, long long q);

// Integer power by repeated interval multiplication (any sign of base).
Ival powint_i(const Ival& a, int k);

} // namespace certimeasure

#endif // CERTIMEASURE_INTERVAL_HPP
