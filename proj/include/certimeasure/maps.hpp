// Piecewise monotone interval maps: the branch representation, a small
// catalog of expanding maps, and iteration (composition) of a map with
// itself. All map evaluations are interval extensions, so every downstream
// quantity inherits certified enclosures.

#ifndef CERTIMEASURE_MAPS_HPP
#define CERTIMEASURE_MAPS_HPP

#include <string>
#include <vector>

#include "certimeasure/range.hpp"

namespace certimeasure {

// One maximal monotonicity branch of a piecewise map. dom endpoints are
// outward-rounded enclosures of the true branch endpoints, so adjacent
// branch domains may overlap by an ulp; all consumers tolerate that.
struct Branch {
  Ival dom;
  IFunc eval;
  IFunc deriv;
  IFunc deriv2;
  bool increasing = true;
  bool full_range = false; // branch image is certifiably all of [0, 1]
  // Certified enclosure of the integral of |d/dy (1/T')| over a subinterval
  // of dom. Branches whose second derivative blows up at a domain endpoint
  // (integrably) must supply a closed form here; for C2 branches it may be
  // left empty and is synthesized from deriv/deriv2 when needed.
  std::function<Ival(const Ival&)> d1_integral;
  bool distortion_bounded = true; // sup |T''/T'^2| finite on this branch
};

struct PiecewiseMap {
  std::vector<Branch> branches;
  bool is_full_branch = false; // every branch has full_range
  bool circle_smooth = false;  // T, T' continuous across the wrap at 0 ~ 1
  std::string descriptor;      // human-readable name for reports

  // When this map is the k-th iterate of a base map, base holds the original
  // branches and branch_seq[p] lists, in orbit order, which base branch
  // contains T^j(x) for x in the p-th composed branch (j = 0..k-1). Needed to
  // bound composed distortion integrals near integrable singularities.
  int iterate_of = 1;
  std::vector<Branch> base;
  std::vector<std::vector<int>> branch_seq;
};

// Catalog constructors ------------------------------------------------------

// Angle doubling x -> 2x mod 1.
PiecewiseMap map_doubling();

// x -> kx mod 1 for k >= 2.
PiecewiseMap map_linear(int k);

// x -> 2x + x(1-x)/2 mod 1; full-branch, expanding, not C2 on the circle.
PiecewiseMap map_lanford();

// Four-branch nonlinear map with a short last branch of partial image,
// uniformly expanding with |T'| >= 3.
PiecewiseMap map_nonlinear_nonmarkov();

// x -> 4x + sin(8 pi x)/100 mod 1; C2 as a circle map.
PiecewiseMap map_perturbed_4x();

// Lorenz-type map with a cusp at 1/2: theta |x - 1/2|^alpha on the left,
// 1 - theta |x - 1/2|^alpha on the right, both branches decreasing, with
// unbounded (but integrably singular) distortion at 1/2. Parameters are
// rationals theta = tp/tq, alpha = ap/aq with 0 < alpha < 1.
PiecewiseMap map_lorenz(long long tp, long long tq, long long ap, long long aq);

// Lookup by name as used on the command line: "doubling", "linear:k",
// "lanford", "nonmarkov", "perturbed4x", "lorenz" or
// "lorenz:tp/tq:ap/aq". Throws std::invalid_argument for unknown names.
PiecewiseMap map_from_name(const std::string& name);

// The k-th iterate of a map, as a piecewise monotone map in its own right.
// Branch domains are cut at certified preimages of the base branch
// endpoints. Requires map.iterate_of == 1; k == 1 returns a copy.
PiecewiseMap iterate(const PiecewiseMap& map, int k);

// Interval evaluation of the map on a subinterval of one branch domain,
// choosing the branch by index.
inline Ival eval_branch(const PiecewiseMap& m, int b, const Ival& x) {
  return m.branches[b].eval(x);
}

} // namespace certimeasure

#endif // CERTIMEASURE_MAPS_HPP
