#include "doctest.h"

#include <cmath>

#include "certimeasure/range.hpp"

using namespace certimeasure;

TEST_SUITE_BEGIN("range");

TEST_CASE("range of a linear function") {
  IFunc f = [](const Ival& x) { return Ival(2.5) - x; };
  RangeBound rb = bound_range(f, Ival(0.0, 1.0), 1e-9);
  CHECK(rb.inf_bound <= 1.5);
  CHECK(rb.inf_bound >= 1.5 - 1e-8);
  CHECK(rb.sup_bound >= 2.5);
  CHECK(rb.sup_bound <= 2.5 + 1e-8);
}

TEST_CASE("range of a constant") {
  IFunc f = [](const Ival&) { return Ival(0.25); };
  RangeBound rb = bound_range(f, Ival(-3.0, 7.0), 0.0);
  CHECK(rb.inf_bound == 0.25);
  CHECK(rb.sup_bound == 0.25);
}

TEST_CASE("range of sin over [0, pi]") {
  IFunc f = [](const Ival& x) { return sin_i(x); };
  RangeBound rb = bound_range(f, Ival(0.0, pi_i().hi), 1e-9);
  CHECK(rb.sup_bound == 1.0);
  CHECK(rb.inf_bound <= 0.0);
  CHECK(rb.inf_bound >= -1e-9);
}

TEST_CASE("range with several interior extrema") {
  // derivative of the perturbed linear map: 4 + 0.08*pi*cos(8*pi*x)
  IFunc f = [](const Ival& x) {
    Ival pi = pi_i();
    return Ival(4.0) + Ival(0.08) * pi * cos_i(Ival(8.0) * pi * x);
  };
  RangeBound rb = bound_range(f, Ival(0.0, 1.0), 1e-9);
  CHECK(rb.inf_bound <= 3.748672587712817);
  CHECK(rb.inf_bound >= 3.748672587712817 - 1e-8);
  CHECK(rb.sup_bound >= 4.251327412287183);
  CHECK(rb.sup_bound <= 4.251327412287183 + 1e-8);
}

TEST_CASE("budget exhaustion still returns valid bounds") {
  // x - x evaluates to an interval of width 2w, so the gap never closes and
  // the search must stop on budget with sound (loose) bounds
  IFunc f = [](const Ival& x) { return x - x; };
  RangeBound rb = bound_range(f, Ival(0.0, 1.0), 1e-12, 256);
  CHECK(rb.inf_bound <= 0.0);
  CHECK(rb.sup_bound >= 0.0);
  CHECK(rb.inf_bound >= -1.0);
  CHECK(rb.sup_bound <= 1.0);
}

TEST_CASE("newton solves 3x = 1 to a few ulp") {
  IFunc f = [](const Ival& x) { return Ival(3.0) * x; };
  IFunc df = [](const Ival&) { return Ival(3.0); };
  Ival root = interval_newton(f, df, Ival(1.0), Ival(0.0, 1.0), 0.0);
  CHECK(root.contains(1.0 / 3.0));
  CHECK(root.width() <= 4.0 * std::ldexp(1.0, -54));
}

TEST_CASE("newton solves x^2 = 2") {
  IFunc f = [](const Ival& x) { return x * x; };
  IFunc df = [](const Ival& x) { return Ival(2.0) * x; };
  Ival root = interval_newton(f, df, Ival(2.0), Ival(1.0, 2.0), 0.0);
  CHECK(root.contains(std::sqrt(2.0)));
  CHECK(root.width() <= 4.0 * std::ldexp(1.0, -52));
}

TEST_CASE("newton handles decreasing functions") {
  IFunc f = [](const Ival& x) { return Ival(2.5) - x; };
  IFunc df = [](const Ival&) { return Ival(-1.0); };
  Ival root = interval_newton(f, df, Ival(2.0), Ival(0.0, 1.0), 0.0);
  CHECK(root.contains(0.5));
  CHECK(root.width() <= 1e-15);
}

TEST_CASE("newton rejects non-monotone derivatives") {
  IFunc f = [](const Ival& x) { return x * x; };
  IFunc df = [](const Ival& x) { return Ival(2.0) * x; };
  CHECK_THROWS_WITH_AS(
      interval_newton(f, df, Ival(0.25), Ival(-1.0, 1.0), 0.0),
      "interval_newton: derivative not sign-definite", std::domain_error);
}

TEST_CASE("newton certifies absence of a root") {
  IFunc f = [](const Ival& x) { return x; };
  IFunc df = [](const Ival&) { return Ival(1.0); };
  CHECK_THROWS_WITH_AS(interval_newton(f, df, Ival(1.0), Ival(2.0, 3.0), 0.0),
                       "interval_newton: no root certified", std::domain_error);
}

TEST_CASE("extremum enclosures bracket the true value within tol") {
  // sup of sin on [0, pi] is exactly 1; inf of x^2 - x on [0, 1] is -1/4.
  IFunc s = [](const Ival& x) { return sin_i(x); };
  Ival sup_s = sup_enclosure(s, Ival(0.0, 3.2), 1e-9);
  CHECK(sup_s.contains(1.0));
  CHECK(sup_s.width() <= 1e-9);

  // The naive interval extension of x^2 - x overestimates linearly in the
  // box width near the minimum, so the search needs O(1/sqrt(tol)) boxes;
  // 1e-6 stays comfortably within the default budget.
  IFunc q = [](const Ival& x) { return x * x - x; };
  Ival inf_q = inf_enclosure(q, Ival(0.0, 1.0), 1e-6);
  CHECK(inf_q.contains(-0.25));
  CHECK(inf_q.width() <= 1e-6);

  RangeBound rb = bound_range(q, Ival(0.0, 1.0), 1e-6);
  CHECK(rb.inf_bound <= -0.25);
  CHECK(inf_q.lo >= -0.25 - 1e-6);
}

TEST_SUITE_END();
