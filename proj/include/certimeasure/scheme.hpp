// Discretization schemes: the piecewise-constant (Ulam) and piecewise-linear
// (hat) finite-element families, their norm pairs, and the constants that
// drive the a-priori bound machinery.

#ifndef CERTIMEASURE_SCHEME_HPP
#define CERTIMEASURE_SCHEME_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace certimeasure {

enum class SchemeKind { Ulam, Hat };

enum class WeakNorm { L1, Linf };

// Constants of the discretization scheme, as used by the norm-propagation
// recursions: ||(I - Pi_h) f||_w <= K h ||f||_s, ||Pi_h f||_s <= M ||f||_s
// modulo the E h correction, and ||Q_h^k|| <= S1 R1 + S2 R2.
struct SchemeConstants {
  double K;
  double E;
  double M;
  double alpha;
  double S1;
  double S2;
  WeakNorm weak_norm;
};

SchemeConstants scheme_constants(SchemeKind scheme);

SchemeKind scheme_from_name(const std::string& name);
std::string scheme_name(SchemeKind scheme);

// Equispaced partition of [0,1] into n cells (Ulam) or with n nodes i/n
// (hat, periodic). h is the exact mesh width 1/n when n is a power of two;
// otherwise the nearest double, which is fine because h only enters certified
// bounds through interval arithmetic on node coordinates.
struct Partition {
  std::int64_t n;
  double h;

  explicit Partition(std::int64_t n_) : n(n_), h(1.0 / static_cast<double>(n_)) {
    if (n_ < 2) throw std::invalid_argument("Partition: n must be at least 2");
  }
};

} // namespace certimeasure

#endif // CERTIMEASURE_SCHEME_HPP
