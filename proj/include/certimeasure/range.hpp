// Certified range bounds and certified root localization for scalar maps
// given by interval extensions.

#ifndef CERTIMEASURE_RANGE_HPP
#define CERTIMEASURE_RANGE_HPP

#include <functional>

#include "certimeasure/interval.hpp"

namespace certimeasure {

using IFunc = std::function<Ival(const Ival&)>;

// Certified bounds on the range of f over a domain: inf_bound <= inf f and
// sup f <= sup_bound.
struct RangeBound {
  double inf_bound;
  double sup_bound;
};

// Adaptive branch-and-bound range estimation. Bisects the box whose image
// endpoint currently determines the certified bound until the gap between
// the certified bound and an attained function value is at most tol, or the
// evaluation budget is spent. The returned bounds are always valid; tol only
// controls how hard the search works to make them tight.
RangeBound bound_range(const IFunc& f, const Ival& dom, double tol,
                       int budget = 1 << 16);

// Two-sided enclosures of inf f and sup f over dom: the returned interval
// contains the true extremum, with the certified bound on the outside and an
// attained function value on the inside. On normal termination (budget not
// exhausted, no atomic-box stall) the width is at most tol.
Ival inf_enclosure(const IFunc& f, const Ival& dom, double tol,
                   int budget = 1 << 16);
Ival sup_enclosure(const IFunc& f, const Ival& dom, double tol,
                   int budget = 1 << 16);

// Certified localization of the root of f(x) = target inside x0, for f
// strictly monotone on x0 (df of constant sign). Contracts x0 with the
// interval Newton step, falling back to bisection when the step stalls, and
// stops once the width is at most tol or no further progress is possible.
//
// Throws std::domain_error("interval_newton: derivative not sign-definite")
// if df(x0) straddles 0, and std::domain_error("interval_newton: no root
// certified") if the Newton step separates from the search interval, which
// certifies that no root exists in x0.
Ival interval_newton(const IFunc& f, const IFunc& df, const Ival& target,
                     const Ival& x0, double tol, int max_iter = 200);

} // namespace certimeasure

#endif // CERTIMEASURE_RANGE_HPP
