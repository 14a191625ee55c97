// Certified Lasota-Yorke (A, B) coefficients for piecewise expanding maps:
// ||Lf||_s <= A ||f||_s + B |||f|||, plus the derived strong-norm bound on
// the invariant density. Four coefficient routes are supported, matched to
// the discretization scheme: three variation-norm variants for Ulam (general
// piecewise, full-branch, and the superlevel-integral route for maps with
// integrable distortion singularities) and a Lipschitz variant for the hat
// scheme.

#ifndef CERTIMEASURE_LASOTA_YORKE_HPP
#define CERTIMEASURE_LASOTA_YORKE_HPP

#include <string>

#include "certimeasure/maps.hpp"
#include "certimeasure/scheme.hpp"

namespace certimeasure {

enum class DflyVariant { var_general, var_fullbranch, lip, var_integral };

DflyVariant variant_from_name(const std::string& name);
std::string variant_name(DflyVariant variant);

struct DflyOptions {
  // Superlevel threshold for var_integral. 0 selects the automated search:
  // A(l) is evaluated on a fixed grid and the l with the smallest certified
  // A wins, subject to A < 1.
  double l = 0.0;
  // Extremum-search controls for derivative and distortion enclosures.
  double tol = 1e-7;
  int budget = 1 << 16;
  // Adaptive quadrature controls for the superlevel integral.
  double integral_tol = 5e-3;
  long integral_budget = 200000;
};

struct LYCoefficients {
  Ival A;
  Ival B;
  Ival norm_L; // bound on ||L|| in the scheme's weak norm
  Ival W;      // bound on sup_k of the weak norm of L^k
  std::string strong_space; // "Var" or "Lip"
  double l_used = 0.0;      // superlevel threshold used (var_integral only)
};

// Certified enclosure of D = sup over all branches of |T''/(T')^2|. Throws
// std::domain_error("unbounded distortion") when a branch is flagged as (or
// evaluates to) having a divergent distortion near an endpoint.
Ival distortion_bound(const PiecewiseMap& map, double tol = 1e-7,
                      int budget = 1 << 16);

// Computes (A, B, norm_L, W) for the requested variant. Preconditions are
// certified with interval arithmetic and reported by name on failure:
//   var_general    inf|T'| > 2, bounded distortion
//   var_fullbranch full branch, inf|T'| > 1, bounded distortion
//   lip            full branch, C2 on the circle, inf|T'| > 1 (hat scheme)
//   var_integral   inf|T'| > 2, integrable distortion over the superlevel set
// Every variant additionally requires the certified A to satisfy A < 1; the
// error message suggests passing an iterate of the map when it does not.
LYCoefficients dfly_coefficients(const PiecewiseMap& map, SchemeKind scheme,
                                 DflyVariant variant,
                                 const DflyOptions& opts = {});

// Enclosure of B/(1-A), the strong-norm bound on the normalized invariant
// density. Requires A.hi < 1.
Ival strong_norm_bound(const LYCoefficients& ly);

} // namespace certimeasure

#endif // CERTIMEASURE_LASOTA_YORKE_HPP
