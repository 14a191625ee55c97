#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "certimeasure/assemble.hpp"
#include "certimeasure/maps.hpp"
#include "certimeasure/power_norms.hpp"

using namespace certimeasure;

namespace {

IntervalSparseMatrix build(const std::string& name, long long n,
                           SchemeKind scheme, int threads = 1) {
  PiecewiseMap map = map_from_name(name);
  Partition part(n);
  return assemble(map, part, scheme, threads);
}

// Hand-built matrices for the synthetic cases: entries are exact, so the
// interval triples are degenerate and delta is whatever we say it is.
IntervalSparseMatrix diagonal_matrix(std::int64_t n, double value,
                                     double delta) {
  IntervalSparseMatrix m;
  m.n = n;
  m.scheme = SchemeKind::Ulam;
  m.row_ptr.assign(static_cast<std::size_t>(n) + 1, 0);
  m.delta = delta;
  m.z = value != 0.0 ? 1 : 0;
  if (value != 0.0) {
    for (std::int64_t i = 0; i < n; ++i) {
      m.triples.push_back({static_cast<std::int32_t>(i),
                           static_cast<std::int32_t>(i), Ival(value)});
      m.col.push_back(static_cast<std::int32_t>(i));
      m.mid.push_back(value);
      m.row_ptr[static_cast<std::size_t>(i) + 1] = i + 1;
    }
  }
  return m;
}

// Dense extended-precision reference: iterates all basis columns of the
// zero-average subspace through the midpoint operator in long double and
// returns the classical norm of the resulting n x (n-1) matrix per power.
std::vector<double> dense_oracle(const IntervalSparseMatrix& mat,
                                 SchemeKind scheme, int k_max) {
  const std::size_t n = static_cast<std::size_t>(mat.n);
  std::vector<long double> M(n * n, 0.0L);
  for (std::size_t i = 0; i < n; ++i)
    for (std::int64_t p = mat.row_ptr[i]; p < mat.row_ptr[i + 1]; ++p)
      M[i * n + static_cast<std::size_t>(mat.col[static_cast<std::size_t>(p)])] =
          static_cast<long double>(mat.mid[static_cast<std::size_t>(p)]);
  const long double h = 1.0L / static_cast<long double>(mat.n);

  std::vector<std::vector<long double>> cols(n - 1);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    cols[j].assign(n, 0.0L);
    cols[j][0] = 1.0L;
    cols[j][j + 1] = -1.0L;
  }
  std::vector<double> out(static_cast<std::size_t>(k_max) + 1, 0.0);
  std::vector<long double> w(n);
  for (int k = 1; k <= k_max; ++k) {
    for (auto& v : cols) {
      for (std::size_t i = 0; i < n; ++i) {
        long double acc = 0.0L;
        for (std::size_t j = 0; j < n; ++j) acc += M[i * n + j] * v[j];
        w[i] = acc;
      }
      if (scheme == SchemeKind::Hat) {
        long double s = 0.0L;
        for (long double x : w) s += x;
        s *= h;
        for (long double& x : w) x -= s;
      }
      v = w;
    }
    long double norm = 0.0L;
    if (scheme == SchemeKind::Ulam) {
      for (const auto& v : cols) {
        long double s = 0.0L;
        for (long double x : v) s += std::fabs(static_cast<double>(x));
        norm = std::max(norm, s);
      }
    } else {
      for (std::size_t i = 0; i < n; ++i) {
        long double s = 0.0L;
        for (const auto& v : cols) s += std::fabs(static_cast<double>(v[i]));
        norm = std::max(norm, s);
      }
    }
    out[static_cast<std::size_t>(k)] = static_cast<double>(norm);
  }
  return out;
}

} // namespace

TEST_SUITE_BEGIN("power_norms");

TEST_CASE("gamma matches the z*u/(1-z*u) envelope") {
  CHECK(certimeasure::gamma(0) == 0.0);
  double g1 = certimeasure::gamma(1);
  CHECK(g1 >= 0x1p-53);
  CHECK(g1 <= 1.12e-16);
  double g4 = certimeasure::gamma(4);
  CHECK(g4 >= 4.0 * 0x1p-53);
  CHECK(g4 <= 4.5e-16);
  // monotone in z
  CHECK(certimeasure::gamma(8) > g4);
  CHECK_THROWS_AS(certimeasure::gamma(1LL << 53), std::domain_error);
  CHECK_THROWS_AS(certimeasure::gamma(-1), std::invalid_argument);
}

TEST_CASE("operator norm bound: stochastic, hat, and degenerate matrices") {
  auto ulam2 = build("doubling", 2, SchemeKind::Ulam);
  double nq = operator_norm_bound(ulam2, SchemeKind::Ulam);
  CHECK(nq >= 1.0);
  CHECK(nq <= 1.0 + 1e-12);

  auto hat4 = build("doubling", 4, SchemeKind::Hat);
  CHECK(operator_norm_bound(hat4, SchemeKind::Hat) >= 1.0);

  auto zero = diagonal_matrix(4, 0.0, 0.125);
  CHECK(operator_norm_bound(zero, SchemeKind::Ulam) == 0.125);
}

TEST_CASE("doubling Ulam n=2: the operator annihilates the zero-average space") {
  auto mat = build("doubling", 2, SchemeKind::Ulam);
  auto nb = norms_of_powers(mat, SchemeKind::Ulam, 1);
  REQUIRE(nb.C.size() == 2);
  CHECK(nb.C[0] == 1.0);
  CHECK(nb.C[1] <= 1e-14);
  CHECK(nb.m_star == 1);
  CHECK(nb.source[1] == BoundSource::computed);
}

TEST_CASE("identity midpoint matrix exposes the factor-2 basis slack") {
  auto mat = diagonal_matrix(8, 1.0, 0.0);
  auto nb = norms_of_powers(mat, SchemeKind::Ulam, 5);
  for (int k = 1; k <= 5; ++k) {
    CHECK(nb.C[static_cast<std::size_t>(k)] >= 2.0);
    CHECK(nb.C[static_cast<std::size_t>(k)] <= 2.0 + 1e-13);
  }
  CHECK(nb.m_star == -1);
}

TEST_CASE("zero matrix: bounds collapse to the accumulated error term") {
  auto mat = diagonal_matrix(8, 0.0, 0.0);
  auto nb = norms_of_powers(mat, SchemeKind::Ulam, 4);
  for (int k = 1; k <= 4; ++k) {
    CHECK(nb.C[static_cast<std::size_t>(k)] ==
          nb.err.eps[static_cast<std::size_t>(k)]);
    CHECK(nb.C[static_cast<std::size_t>(k)] == 0.0);
  }
}

TEST_CASE("dense extended-precision oracle never exceeds the certified bounds") {
  struct Case {
    const char* name;
    long long n;
    SchemeKind scheme;
  };
  for (const Case& c : {Case{"doubling", 32, SchemeKind::Ulam},
                        Case{"lanford", 32, SchemeKind::Ulam},
                        Case{"nonmarkov", 29, SchemeKind::Ulam},
                        Case{"doubling", 32, SchemeKind::Hat},
                        Case{"perturbed4x", 32, SchemeKind::Hat},
                        Case{"perturbed4x", 17, SchemeKind::Hat}}) {
    CAPTURE(c.name);
    CAPTURE(c.n);
    auto mat = build(c.name, c.n, c.scheme);
    const int k_max = 10;
    auto nb = norms_of_powers(mat, c.scheme, k_max);
    auto oracle = dense_oracle(mat, c.scheme, k_max);
    for (int k = 1; k <= k_max; ++k) {
      CAPTURE(k);
      CHECK(oracle[static_cast<std::size_t>(k)] <=
            nb.C[static_cast<std::size_t>(k)]);
    }
  }
}

TEST_CASE("error recursion is monotone and hat errors grow with the norm") {
  auto ulam = build("lanford", 64, SchemeKind::Ulam);
  auto nb = norms_of_powers(ulam, SchemeKind::Ulam, 8);
  CHECK(nb.err.eps[0] == 0.0);
  for (std::size_t k = 1; k < nb.err.eps.size(); ++k)
    CHECK(nb.err.eps[k] >= nb.err.eps[k - 1]);

  auto hat = build("perturbed4x", 64, SchemeKind::Hat);
  double nq = operator_norm_bound(hat, SchemeKind::Hat);
  auto nbh = norms_of_powers(hat, SchemeKind::Hat, 8);
  CHECK(nbh.err.eps[0] == 0.0);
  for (std::size_t k = 1; k + 1 < nbh.err.eps.size(); ++k)
    CHECK(nbh.err.eps[k + 1] >= nq * nbh.err.eps[k]);
}

TEST_CASE("contraction shows up for expanding maps on moderate grids") {
  // measured decay for this map and grid: C_10 = 1.097, C_11 = 0.678,
  // C_16 = 0.0338 (geometric tail with rate about 0.56 past the mixing ramp)
  auto mat = build("lanford", 256, SchemeKind::Ulam);
  auto nb = norms_of_powers(mat, SchemeKind::Ulam, 16);
  CHECK(nb.m_star == 11);
  CHECK(nb.C[11] < 1.0);
  CHECK(nb.C[16] < 0.05);
  // and every bound is nonnegative with C[0] pinned
  CHECK(nb.C[0] == 1.0);
  for (double c : nb.C) CHECK(c >= 0.0);
}

TEST_CASE("results are identical for any thread count") {
  auto ulam = build("lanford", 500, SchemeKind::Ulam);
  auto a = norms_of_powers(ulam, SchemeKind::Ulam, 8, 1);
  auto b = norms_of_powers(ulam, SchemeKind::Ulam, 8, 5);
  REQUIRE(a.C.size() == b.C.size());
  for (std::size_t k = 0; k < a.C.size(); ++k) {
    CHECK(a.C[k] == b.C[k]);
    CHECK(a.err.eps[k] == b.err.eps[k]);
  }

  auto hat = build("perturbed4x", 300, SchemeKind::Hat);
  auto ha = norms_of_powers(hat, SchemeKind::Hat, 6, 1);
  auto hb = norms_of_powers(hat, SchemeKind::Hat, 6, 8);
  for (std::size_t k = 0; k < ha.C.size(); ++k) {
    CHECK(ha.C[k] == hb.C[k]);
    CHECK(ha.err.eps[k] == hb.err.eps[k]);
  }
}

TEST_CASE("CSV export lists one row per power") {
  auto mat = build("doubling", 16, SchemeKind::Ulam);
  auto nb = norms_of_powers(mat, SchemeKind::Ulam, 3);
  std::string path = "/tmp/certimeasure_norms_test.csv";
  export_norm_bounds(nb, path);
  std::FILE* f = std::fopen(path.c_str(), "r");
  REQUIRE(f != nullptr);
  char line[256];
  int rows = 0;
  while (std::fgets(line, sizeof line, f)) ++rows;
  std::fclose(f);
  CHECK(rows == 5); // header + k = 0..3
  std::remove(path.c_str());
}

TEST_CASE("bad arguments are rejected") {
  auto mat = build("doubling", 16, SchemeKind::Ulam);
  CHECK_THROWS_AS(norms_of_powers(mat, SchemeKind::Ulam, 0),
                  std::invalid_argument);
}

TEST_SUITE_END();
