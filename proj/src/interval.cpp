#include "certimeasure/interval.hpp"

#include <limits>

#include <mpfr.h>

namespace certimeasure {

namespace rnd {

namespace {

// Per-thread MPFR scratch at double precision. MPFR rounds correctly in the
// requested direction, and since the working precision equals the precision
// of double, converting back with the same direction costs nothing extra.
struct MpfrScratch {
  mpfr_t x, y, r;
  MpfrScratch() {
    mpfr_init2(x, 53);
    mpfr_init2(y, 53);
    mpfr_init2(r, 53);
  }
  ~MpfrScratch() {
    mpfr_clear(x);
    mpfr_clear(y);
    mpfr_clear(r);
  }
};

MpfrScratch& scratch() {
  thread_local MpfrScratch s;
  return s;
}

using Unary = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_rnd_t);

double unary(Unary f, double a, mpfr_rnd_t dir) {
  MpfrScratch& s = scratch();
  mpfr_set_d(s.x, a, MPFR_RNDN); // exact, a already has 53 bits
  f(s.r, s.x, dir);
  return mpfr_get_d(s.r, dir); // exact, same precision
}

} // namespace

double sqrt_up(double a) {
  if (a < 0.0) throw std::domain_error("sqrt_up: negative argument");
  require_upward();
  return std::sqrt(a);
}

double sqrt_down(double a) {
  if (a < 0.0) throw std::domain_error("sqrt_down: negative argument");
  // no negation trick for sqrt; switch the mode for this one operation
  fesetround(FE_DOWNWARD);
  double r = std::sqrt(a);
  fesetround(FE_UPWARD);
  return r;
}

double exp_up(double x) { return unary(mpfr_exp, x, MPFR_RNDU); }
double exp_down(double x) { return unary(mpfr_exp, x, MPFR_RNDD); }

double log_up(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_up: argument not positive");
  return unary(mpfr_log, x, MPFR_RNDU);
}

double log_down(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_down: argument not positive");
  return unary(mpfr_log, x, MPFR_RNDD);
}

double sin_up(double x) { return unary(mpfr_sin, x, MPFR_RNDU); }
double sin_down(double x) { return unary(mpfr_sin, x, MPFR_RNDD); }
double cos_up(double x) { return unary(mpfr_cos, x, MPFR_RNDU); }
double cos_down(double x) { return unary(mpfr_cos, x, MPFR_RNDD); }

double pow_up(double x, double e) {
  if (!(x > 0.0)) throw std::domain_error("pow_up: base not positive");
  MpfrScratch& s = scratch();
  mpfr_set_d(s.x, x, MPFR_RNDN);
  mpfr_set_d(s.y, e, MPFR_RNDN);
  mpfr_pow(s.r, s.x, s.y, MPFR_RNDU);
  return mpfr_get_d(s.r, MPFR_RNDU);
}

double pow_down(double x, double e) {
  if (!(x > 0.0)) throw std::domain_error("pow_down: base not positive");
  MpfrScratch& s = scratch();
  mpfr_set_d(s.x, x, MPFR_RNDN);
  mpfr_set_d(s.y, e, MPFR_RNDN);
  mpfr_pow(s.r, s.x, s.y, MPFR_RNDD);
  return mpfr_get_d(s.r, MPFR_RNDD);
}

} // namespace rnd

Ival from_rational(long long p, long long q) {
  if (q == 0) throw std::domain_error("from_rational: zero denominator");
  double pd = static_cast<double>(p); // exact for |p| < 2^53
  double qd = static_cast<double>(q);
  return Ival(rnd::div_down(pd, qd), rnd::div_up(pd, qd));
}

Ival pi_i() {
  mpfr_t t;
  mpfr_init2(t, 53);
  mpfr_const_pi(t, MPFR_RNDD);
  double lo = mpfr_get_d(t, MPFR_RNDD);
  mpfr_const_pi(t, MPFR_RNDU);
  double hi = mpfr_get_d(t, MPFR_RNDU);
  mpfr_clear(t);
  return Ival(lo, hi);
}

Ival operator+(const Ival& a, const Ival& b) {
  return Ival(rnd::add_down(a.lo, b.lo), rnd::add_up(a.hi, b.hi));
}

Ival operator-(const Ival& a, const Ival& b) {
  return Ival(rnd::sub_down(a.lo, b.hi), rnd::sub_up(a.hi, b.lo));
}

namespace {

// Directed products that treat 0 * inf as 0: in the interval context an
// exact zero endpoint annihilates even an unbounded factor, because every
// product realized over the boxes is 0 or approaches it.
double pmul_up(double x, double y) {
  if (x == 0.0 || y == 0.0) return 0.0;
  return rnd::mul_up(x, y);
}

double pmul_down(double x, double y) {
  if (x == 0.0 || y == 0.0) return 0.0;
  return rnd::mul_down(x, y);
}

} // namespace

Ival operator*(const Ival& a, const Ival& b) {
  rnd::require_upward();
  if (a.lo >= 0.0) {
    if (b.lo >= 0.0) return Ival(pmul_down(a.lo, b.lo), pmul_up(a.hi, b.hi));
    if (b.hi <= 0.0) return Ival(pmul_down(a.hi, b.lo), pmul_up(a.lo, b.hi));
    return Ival(pmul_down(a.hi, b.lo), pmul_up(a.hi, b.hi));
  }
  if (a.hi <= 0.0) {
    if (b.lo >= 0.0) return Ival(pmul_down(a.lo, b.hi), pmul_up(a.hi, b.lo));
    if (b.hi <= 0.0) return Ival(pmul_down(a.hi, b.hi), pmul_up(a.lo, b.lo));
    return Ival(pmul_down(a.lo, b.hi), pmul_up(a.lo, b.lo));
  }
  if (b.lo >= 0.0) return Ival(pmul_down(a.lo, b.hi), pmul_up(a.hi, b.hi));
  if (b.hi <= 0.0) return Ival(pmul_down(a.hi, b.lo), pmul_up(a.lo, b.lo));
  return Ival(std::fmin(pmul_down(a.lo, b.hi), pmul_down(a.hi, b.lo)),
              std::fmax(pmul_up(a.lo, b.lo), pmul_up(a.hi, b.hi)));
}

Ival operator/(const Ival& a, const Ival& b) {
  if (b.lo <= 0.0 && b.hi >= 0.0)
    throw std::domain_error("interval division by an interval containing 0");
  rnd::require_upward();
  if (b.lo > 0.0) {
    double lo = a.lo < 0.0 ? rnd::div_down(a.lo, b.lo) : rnd::div_down(a.lo, b.hi);
    double hi = a.hi > 0.0 ? rnd::div_up(a.hi, b.lo) : rnd::div_up(a.hi, b.hi);
    return Ival(lo, hi);
  }
  double lo = a.hi > 0.0 ? rnd::div_down(a.hi, b.hi) : rnd::div_down(a.hi, b.lo);
  double hi = a.lo < 0.0 ? rnd::div_up(a.lo, b.hi) : rnd::div_up(a.lo, b.lo);
  return Ival(lo, hi);
}

Ival abs_i(const Ival& a) {
  if (a.lo >= 0.0) return a;
  if (a.hi <= 0.0) return Ival(-a.hi, -a.lo);
  return Ival(0.0, std::fmax(-a.lo, a.hi));
}

Ival sqrt_i(const Ival& a) {
  if (a.lo < 0.0) throw std::domain_error("sqrt_i: interval reaches below 0");
  return Ival(rnd::sqrt_down(a.lo), rnd::sqrt_up(a.hi));
}

Ival exp_i(const Ival& a) {
  return Ival(rnd::exp_down(a.lo), rnd::exp_up(a.hi));
}

Ival log_i(const Ival& a) {
  if (!(a.lo > 0.0)) throw std::domain_error("log_i: interval reaches 0");
  return Ival(rnd::log_down(a.lo), rnd::log_up(a.hi));
}

namespace {

// Shared machinery for sin and cos: both are bounded by the values at the
// endpoints unless the interval straddles an interior extremum. The extrema
// of sin sit at phase + 2*pi*k with phase = pi/2 (max) and -pi/2 (min); for
// cos the phases are 0 (max) and pi (min). The candidate integers k are
// located with interval arithmetic so a point that merely MIGHT be inside
// still counts, which errs on the side of a wider (sound) enclosure.
bool hits_extremum(const Ival& x, const Ival& phase) {
  static const Ival two_pi = Ival(2.0) * pi_i();
  if (x.width() >= 6.2832) return true; // a full period certainly does
  rnd::require_nearest();
  double k0 = std::floor((x.lo - phase.hi) / two_pi.hi) - 1.0;
  double k1 = std::ceil((x.hi - phase.lo) / two_pi.lo) + 1.0;
  for (double k = k0; k <= k1; k += 1.0) {
    Ival pt = phase + Ival(k) * two_pi;
    if (intersects(pt, x)) return true;
  }
  return false;
}

Ival trig_range(const Ival& x, bool is_sin) {
  static const Ival pi = pi_i();
  double flo, fhi;
  if (is_sin) {
    flo = std::fmin(rnd::sin_down(x.lo), rnd::sin_down(x.hi));
    fhi = std::fmax(rnd::sin_up(x.lo), rnd::sin_up(x.hi));
  } else {
    flo = std::fmin(rnd::cos_down(x.lo), rnd::cos_down(x.hi));
    fhi = std::fmax(rnd::cos_up(x.lo), rnd::cos_up(x.hi));
  }
  Ival max_phase = is_sin ? pi / 2.0 : Ival(0.0);
  Ival min_phase = is_sin ? -(pi / 2.0) : pi;
  if (hits_extremum(x, max_phase)) fhi = 1.0;
  if (hits_extremum(x, min_phase)) flo = -1.0;
  return Ival(flo, fhi);
}

} // namespace

Ival sin_i(const Ival& a) { return trig_range(a, true); }
Ival cos_i(const Ival& a) { return trig_range(a, false); }

Ival pow_i(const Ival& a, double e) {
  if (a.lo < 0.0) throw std::domain_error("pow_i: negative base");
  if (e == 0.0) return Ival(1.0);
  bool incr = e > 0.0;
  double at_lo, at_hi;
  if (a.lo == 0.0) {
    at_lo = incr ? 0.0 : std::numeric_limits<double>::infinity();
  } else {
    at_lo = incr ? rnd::pow_down(a.lo, e) : rnd::pow_up(a.lo, e);
  }
  if (a.hi == 0.0) {
    at_hi = incr ? 0.0 : std::numeric_limits<double>::infinity();
  } else if (std::isinf(a.hi)) {
    at_hi = incr ? std::numeric_limits<double>::infinity() : 0.0;
  } else {
    at_hi = incr ? rnd::pow_up(a.hi, e) : rnd::pow_down(a.hi, e);
  }
  return incr ? Ival(at_lo, at_hi) : Ival(at_hi, at_lo);
}

Ival pow_i(const Ival& a, long long p, long long q) {
  if (q <= 0) throw std::domain_error("pow_i: exponent denominator must be positive");
  if (p == 0) return Ival(1.0);
  if (a.lo >= 0.0) {
    if (a.hi == 0.0) {
      if (p < 0) throw std::domain_error("pow_i: negative power of zero");
      return Ival(0.0);
    }
    // Dyadic denominators take repeated hardware square roots instead of
    // exp/log roundtrips; the map evaluations in the hot quadrature and
    // assembly loops all use /2^k exponents.
    if ((q & (q - 1)) == 0 && p > -512 && p < 512) {
      Ival r = a;
      for (long long m = q; m > 1; m >>= 1) r = sqrt_i(r);
      if (p > 0) return powint_i(r, int(p));
      Ival w = powint_i(r, int(-p)); // w >= 0; reciprocal with 0 and inf limits
      double hi = w.lo == 0.0 ? std::numeric_limits<double>::infinity()
                              : rnd::div_up(1.0, w.lo);
      double lo = std::isinf(w.hi) ? 0.0 : rnd::div_down(1.0, w.hi);
      return Ival(lo, hi);
    }
    Ival e = from_rational(p, q);
    if (a.lo > 0.0) return exp_i(e * log_i(a));
    // base reaches 0: take the limit there and the monotone far endpoint
    Ival at_hi = exp_i(e * log_i(Ival(a.hi)));
    if (p > 0) return Ival(0.0, at_hi.hi);
    return Ival(at_hi.lo, std::numeric_limits<double>::infinity());
  }
  if (q % 2 == 0)
    throw std::domain_error("pow_i: even root of a negative base");
  // odd q: x^(p/q) = sign(x)^p |x|^(p/q), apply sign symmetry per side
  Ival neg = Ival(a.lo, std::fmin(a.hi, 0.0));
  Ival res_neg = pow_i(Ival(-neg.hi, -neg.lo), p, q);
  if (p % 2 != 0) res_neg = -res_neg;
  if (a.hi <= 0.0) return res_neg;
  Ival res_pos = pow_i(Ival(0.0, a.hi), p, q);
  return hull(res_neg, res_pos);
}

Ival powint_i(const Ival& a, int k) {
  if (k == 0) return Ival(1.0);
  if (k < 0) return Ival(1.0) / powint_i(a, -k);
  if (k % 2 == 0) {
    // even powers are symmetric; square the magnitude range
    Ival m = abs_i(a);
    Ival r(1.0);
    for (int i = 0; i < k; ++i) r = r * m;
    return r;
  }
  Ival r(1.0);
  for (int i = 0; i < k; ++i) r = r * a;
  return r;
}

} // namespace certimeasure
