#include "certimeasure/scheme.hpp"

namespace certimeasure {

SchemeConstants scheme_constants(SchemeKind scheme) {
  switch (scheme) {
    case SchemeKind::Ulam:
      // Projection onto piecewise constants: K = 1/2 from the mean-value
      // estimate, the projection does not increase variation (E = 0, M = 2
      // covers ||Pi f||_BV), and ||Q^k|| on the weak space is handled by the
      // S2 R2 term alone.
      return SchemeConstants{0.5, 0.0, 2.0, 1.0, 0.0, 1.0, WeakNorm::L1};
    case SchemeKind::Hat:
      // Piecewise-linear interpolation: K = 1/2, interpolation can increase
      // the Lipschitz seminorm through the sup part (E = 1/2, M = 2), and the
      // power bound needs both the strong and weak rows (S1 = S2 = 1).
      return SchemeConstants{0.5, 0.5, 2.0, 1.0, 1.0, 1.0, WeakNorm::Linf};
  }
  throw std::logic_error("scheme_constants: unknown scheme");
}

SchemeKind scheme_from_name(const std::string& name) {
  if (name == "ulam") return SchemeKind::Ulam;
  if (name == "hat") return SchemeKind::Hat;
  throw std::invalid_argument("unknown scheme '" + name + "' (want ulam or hat)");
}

std::string scheme_name(SchemeKind scheme) {
  return scheme == SchemeKind::Ulam ? "ulam" : "hat";
}

} // namespace certimeasure
