// Approximate fixed point of the discretized transfer operator, plus the
// certified residual pair (eps1, eps2) consumed by the error estimate. The
// solver runs in plain floating point: its quality only affects how tight
// the final bound is, never soundness. The residuals are computed with
// interval arithmetic over the assembled enclosure matrix.

#ifndef CERTIMEASURE_FIXED_POINT_HPP
#define CERTIMEASURE_FIXED_POINT_HPP

#include <string>
#include <vector>

#include "certimeasure/assemble.hpp"

namespace certimeasure {

// Approximate invariant density in scheme coordinates together with the
// certified residuals eps1 >= ||Q_h u - u||_w and eps2 >= |i(u) - 1|.
struct ApproxFixedPoint {
  std::vector<double> u_tilde;
  double eps1 = 0.0;
  double eps2 = 0.0;
};

// Floating-point action v -> mid(L) v, with the integral-preserving rank-one
// correction Q v = M v + e i(v - M v) for the hat scheme (the correction is
// identically zero for Ulam). Round-to-nearest, sequential, deterministic.
void apply_q_mid(const IntervalSparseMatrix& mat, SchemeKind scheme,
                 const std::vector<double>& v, std::vector<double>& out);

// Restarted Arnoldi (Krylov dimension up to 30) targeting the eigenvalue
// nearest 1, falling back to power iteration with integral renormalization
// when the restarts stagnate. The start vector is the constant density, so
// the result is deterministic. The returned vector is scaled so that the
// compensated floating evaluation of i(u) lies within 2^-40 of 1. When no
// candidate reaches the target residual within the iteration budget, the
// best vector found is returned; the certified eps1 then comes out larger.
std::vector<double> approximate_fixed_point(const IntervalSparseMatrix& mat,
                                            SchemeKind scheme,
                                            double tol = 1e-13);

// Certified residual pair: one interval matrix-vector product with the full
// enclosure matrix, the i-correction applied in interval arithmetic, and
// upward-rounded norms (L1 for Ulam, sup for hat). Throws std::runtime_error
// mentioning "normalization failure" when eps2 >= 1, because the fixed-point
// error estimate is vacuous from that point on.
ApproxFixedPoint residuals(const IntervalSparseMatrix& mat,
                           const std::vector<double>& u_tilde,
                           SchemeKind scheme);

// Writes CSV rows "x, value" at cell midpoints (Ulam) or nodes i/n (hat).
void export_density(const std::vector<double>& u_tilde, SchemeKind scheme,
                    const std::string& path);

} // namespace certimeasure

#endif // CERTIMEASURE_FIXED_POINT_HPP
