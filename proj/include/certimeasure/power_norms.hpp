// Rigorous upper bounds C_k >= ||Q_h^k restricted to the zero-average
// subspace||, obtained by iterating the basis columns e_1 - e_{j+1} of that
// subspace in plain floating point while carrying a worst-case rounding
// error majorant alongside. Also the certified bound on ||Q_h|| itself.
//
// The error majorant makes the floating computation rigorous: C_k is the
// norm of the floating iterate plus everything the rounding analysis allows
// the exact iterate to differ by, so C_k dominates the true norm even
// though no interval arithmetic touches the hot loop.

#ifndef CERTIMEASURE_POWER_NORMS_HPP
#define CERTIMEASURE_POWER_NORMS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "certimeasure/assemble.hpp"

namespace certimeasure {

enum class BoundSource : std::uint8_t {
  apriori_power, // ||Q_h||^k
  apriori_LY,    // S1 R_{k,1} + S2 R_{k,2} from the coefficient recursion
  submult,       // C_i * C_{k-i}
  computed,      // direct iteration (this module)
  coarse_fine,   // transferred from a coarser grid
};

std::string bound_source_name(BoundSource s);

// Floating-point error majorant: eps[k] bounds the weak-norm distance
// between the floating k-th iterate and the exact k-th power applied to the
// same start vector, maximized over basis columns.
struct ErrorRecursion {
  double gamma_z = 0.0;
  std::vector<double> eps; // eps[0] = 0, nondecreasing in k
};

struct NormBounds {
  std::vector<double> C;           // index k = 0..k_max, C[0] = 1
  std::vector<BoundSource> source; // per-entry provenance
  int m_star = -1;                 // smallest k with C[k] < 1, -1 if none
  ErrorRecursion err;              // per-k error diagnostics
};

// Upward-rounded z*u / (1 - z*u), the relative error envelope of a length-z
// floating dot product. Throws std::domain_error when z*u >= 1.
double gamma(std::int64_t z, double u = 0x1p-53);

// Certified ||Q_h|| <= ||M|| + delta + ||e|| ||i* - i* L_h||, upward-rounded
// in the scheme norm; the residual term vanishes for Ulam (Q_h = L_h) so the
// value reduces to ||M||_1 + delta there.
double operator_norm_bound(const IntervalSparseMatrix& mat, SchemeKind scheme);

// Direct computation of the power-norm bounds for k = 1..k_max; entries
// whose error majorant swamps the signal are replaced by the a-priori
// ||Q_h||^k bound and tagged accordingly. Deterministic for any thread
// count: columns are processed in fixed batches and reductions are merged
// in batch order.
NormBounds norms_of_powers(const IntervalSparseMatrix& mat, SchemeKind scheme,
                           int k_max, int threads = 1);

// Writes CSV rows "k, C_k, source".
void export_norm_bounds(const NormBounds& nb, const std::string& path);

} // namespace certimeasure

#endif // CERTIMEASURE_POWER_NORMS_HPP
