// Discretization of the transfer operator: partition pull-backs and assembly
// of a sparse matrix of interval entries enclosing the true discretized
// operator, for both the cell-average (Ulam) and nodal hat-basis schemes.

#ifndef CERTIMEASURE_ASSEMBLE_HPP
#define CERTIMEASURE_ASSEMBLE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "certimeasure/maps.hpp"
#include "certimeasure/scheme.hpp"

namespace certimeasure {

// Sparse interval matrix enclosing the discretized operator, plus the
// floating data derived from it once and reused downstream:
//  - mid:        midpoint matrix in CSR layout over the summed triples
//  - delta:      bound on the operator norm of the radius matrix, taken in
//                the scheme norm (max column sum of radii for Ulam/l1, max
//                row sum for hat/linf)
//  - z:          max number of nonzeros in a row (at most 2 per branch)
//  - i_residual: bound on the norm of the residual functional i* - i*L,
//                i.e. how far the enclosed operator is from preserving the
//                integral
struct IntervalSparseMatrix {
  struct Triple {
    std::int32_t i, j;
    Ival v;
  };

  std::int64_t n = 0;
  SchemeKind scheme = SchemeKind::Ulam;
  std::vector<Triple> triples; // sorted by (i, j), duplicates summed

  std::vector<std::int64_t> row_ptr; // CSR midpoint matrix, size n + 1
  std::vector<std::int32_t> col;
  std::vector<double> mid;

  double delta = 0.0;
  std::int32_t z = 0;
  double i_residual = 0.0;
};

// Enclosures of the increasing sequence of branch endpoints together with
// the preimages of the partition nodes j/n under every branch, merged where
// they coincide (nodes with no preimage in a branch are simply absent).
// Adjacent enclosures may overlap by rounding slack at shared endpoints.
std::vector<Ival> pullback(const PiecewiseMap& map, const Partition& part);

// Assembles the interval matrix enclosing the discretized operator on an
// equispaced partition. Ulam rows and columns are cells [j/n, (j+1)/n); hat
// rows and columns are nodes j/n with the torus identification n ~ 0.
// threads <= 0 uses all hardware threads; the result is identical for every
// thread count.
IntervalSparseMatrix assemble(const PiecewiseMap& map, const Partition& part,
                              SchemeKind scheme, int threads = 1);

// Writes the triples as "i j lo hi" text lines to path, and the scalar
// summary {n, z, delta, i_residual} as JSON to path + ".json".
void export_matrix(const IntervalSparseMatrix& mat, const std::string& path);

} // namespace certimeasure

#endif // CERTIMEASURE_ASSEMBLE_HPP
