// Pure bound arithmetic downstream of the norm computations: the strong-norm
// propagation table R_k, a-priori power bounds, submultiplicative
// refinement, transfer of contraction bounds from a coarse grid to a fine
// grid, geometric tail summation, and the final certified weak-norm error.
// Everything here rounds upward; all functions are pure and thread-safe.
//
// Mesh widths passed in must be upper bounds for the true widths (use an
// upward-rounded 1/n).

#ifndef CERTIMEASURE_BOUNDS_HPP
#define CERTIMEASURE_BOUNDS_HPP

#include <limits>
#include <utility>
#include <vector>

#include "certimeasure/lasota_yorke.hpp"
#include "certimeasure/power_norms.hpp"
#include "certimeasure/scheme.hpp"

namespace certimeasure {

// R1[k] bounds the strong norm of the k-th discretized power applied to a
// weak-norm unit vector; R2[k] bounds its weak norm. Index k from 0.
struct RkhTable {
  std::vector<double> R1;
  std::vector<double> R2;
};

// Componentwise upward iteration of the 2x2 recursion
//   [R1; R2] <- [1 0; E h 1] [A B; 0 1] [R1; R2]
// seeded with [M / h^alpha; 1]. Overflow saturates to +infinity (bounds stay
// valid, just useless).
RkhTable rkh(const LYCoefficients& ly, const SchemeConstants& sc, double h,
             int k_max);

// Per-k minimum of ||Q||^k and S1 R1[k] + S2 R2[k]; constant 1 for Ulam.
std::vector<double> apriori_norm_bounds(const LYCoefficients& ly,
                                        const SchemeConstants& sc,
                                        double mat_norm_bound, double h,
                                        int k_max);

// Fixed point of C[k] <- min(C[k], min_{0<i<k} C[i] C[k-i]) with upward
// products. When k_max exceeds the input length the list is extended first
// (new entries start unconstrained). Requires C[0] = 1.
std::vector<double> refine_submultiplicative(std::vector<double> C,
                                             int k_max = -1);

// Transfers contraction bounds from mesh h to the finer mesh h_F:
//   C^F_m = C_m + 2 K h sum_{k=0}^{m-1} C_{m-1-k} (||Q_hF|| R1[k] + R1[k+1])
// with the R table evaluated at h_F. Requires h_F <= h with h / h_F integral
// (equal grids are the degenerate case where the correction only inflates).
std::vector<double> coarse_to_fine(const std::vector<double>& C_coarse,
                                   const LYCoefficients& ly,
                                   const SchemeConstants& sc, double h,
                                   double h_F, double normQ_hF);

// Upward-rounded (C[0] + ... + C[m-1]) / (1 - C[m]). Throws
// std::runtime_error("... contraction not certified") when C[m] >= 1.
double tail_sum(const std::vector<double>& C, int m);

// Smallest tail over all cutoffs m with C[m] < 1, and the minimizing m.
// Throws when no such m exists.
std::pair<double, int> best_tail(const std::vector<double>& C);

struct CertifiedError {
  double bound = std::numeric_limits<double>::infinity();
  int m_used = -1;
  struct Components {
    double tail = 0.0;           // sum of the power-norm bounds
    double discretization = 0.0; // tail * 2 K h (1 + ||L||) ||u||_s
    double eps1 = 0.0;           // tail * eps1 / (1 - eps2)
    double eps2 = 0.0;           // eps2 / (1 - eps2) * ||u_tilde||
  } components;
};

// The certified weak-norm distance between the true invariant density and
// the approximate fixed point:
//   tail * (2 K h (1 + ||L||) ||u||_s + eps1 / (1 - eps2))
//     + eps2 / (1 - eps2) * ||u_tilde||.
// All terms rounded up. Requires eps2 < 1 and a finite nonnegative tail.
CertifiedError error_bound(double tail, const SchemeConstants& sc, double h,
                           double norm_L, double u_strong, double eps1,
                           double eps2, double norm_u_tilde, int m_used = -1);

// One candidate list of per-k bounds with a shared provenance tag.
struct BoundList {
  std::vector<double> C;
  BoundSource source;
};

// Pointwise minimum across the candidate lists followed by the
// submultiplicative refinement; provenance of each entry is recorded.
NormBounds aggregate_bounds(const std::vector<BoundList>& lists);

} // namespace certimeasure

#endif // CERTIMEASURE_BOUNDS_HPP
