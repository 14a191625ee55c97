// Certified observables of the invariant density. The one observable
// implemented is the Lyapunov exponent: the integral of log|T'| against the
// certified density, evaluated by interval quadrature of the approximate
// density plus a worst-case term for the certified density error.

#ifndef CERTIMEASURE_OBSERVABLES_HPP
#define CERTIMEASURE_OBSERVABLES_HPP

#include <vector>

#include "certimeasure/bounds.hpp"
#include "certimeasure/maps.hpp"
#include "certimeasure/scheme.hpp"

namespace certimeasure {

// Certified enclosure of the Lyapunov exponent. integral_part encloses the
// quadrature of log|T'| against the approximate density; error_part bounds
// what the true-density defect can contribute; value is integral_part
// widened outward by error_part on both sides, so value is the certified
// enclosure of the exponent itself.
struct LyapunovEnclosure {
  Ival value;
  Ival integral_part;
  double error_part = 0.0;
};

// Quadrature controls. width_target is the total width budget for
// integral_part, distributed over cells proportionally to length; it is best
// effort in the sense that the returned enclosure is valid even when the
// budget cannot be met within split_limit bisections per cell, it just comes
// out wider. threads <= 0 uses all hardware threads; the result is bitwise
// identical for every thread count.
struct QuadratureOptions {
  double width_target = 1e-4;
  int split_limit = 24;
  int threads = 1;
};

// Certified enclosure of the Lyapunov exponent integral of log|T'(x)| u(x)
// over [0,1], from an approximate density in scheme coordinates (cell
// averages for Ulam, periodic nodal values for hat; the partition size is
// u_tilde.size()) and a certified weak-norm bound err.bound on the distance
// between u_tilde and the true invariant density. The density error enters
// through the dual pairing of the weak norm: sup|log|T'|| times err.bound
// when the error is in L1 (Ulam), the L1 norm of log|T'| times err.bound
// when the error is in sup norm (hat).
//
// The exponent computed is the one of the map passed in; for an iterated
// map this is the exponent of the iterate (the base map's exponent times
// the iteration count).
//
// Throws std::domain_error("unbounded observable") when log|T'| admits no
// finite certified bound on [0,1], i.e. the derivative range of some branch
// touches zero or infinity (the cusp of the Lorenz-type maps).
LyapunovEnclosure lyapunov_enclosure(const PiecewiseMap& map,
                                     const std::vector<double>& u_tilde,
                                     const CertifiedError& err,
                                     SchemeKind scheme,
                                     const QuadratureOptions& opt = {});

} // namespace certimeasure

#endif // CERTIMEASURE_OBSERVABLES_HPP
