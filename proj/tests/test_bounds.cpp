#include "certimeasure/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "certimeasure/assemble.hpp"
#include "certimeasure/interval.hpp"
#include "certimeasure/lasota_yorke.hpp"
#include "certimeasure/maps.hpp"
#include "certimeasure/power_norms.hpp"

#include "doctest.h"

using namespace certimeasure;

namespace {

LYCoefficients synthetic_ly(double a_num, double a_den, double b_num,
                            double b_den) {
  LYCoefficients ly;
  ly.A = from_rational(static_cast<long long>(a_num),
                       static_cast<long long>(a_den));
  ly.B = from_rational(static_cast<long long>(b_num),
                       static_cast<long long>(b_den));
  ly.norm_L = Ival(1.0);
  ly.W = Ival(1.0);
  ly.strong_space = "Var";
  return ly;
}

} // namespace

TEST_SUITE("bounds") {

TEST_CASE("rkh seed and first step, ulam constants") {
  // A = 2/3, B = 2/9 at h = 1/1024: R1[0] = M/h = 2048,
  // R1[1] = A*2048 + B = 12290/9 = 1365.555..., R2 stays 1 (E = 0).
  const LYCoefficients ly = synthetic_ly(2, 3, 2, 9);
  const SchemeConstants sc = scheme_constants(SchemeKind::Ulam);
  const RkhTable t = rkh(ly, sc, 1.0 / 1024, 4);

  REQUIRE(t.R1.size() == 5);
  CHECK(t.R1[0] == 2048.0);
  CHECK(t.R2[0] == 1.0);
  const double exact = 12290.0 / 9.0;
  CHECK(t.R1[1] >= exact * (1.0 - 1e-15));
  CHECK(t.R1[1] <= exact * (1.0 + 1e-12));
  for (double r2 : t.R2) CHECK(r2 == 1.0);
  // A < 1 with B > 0: R1 decays toward B/(1-A) * const, monotone from above
  CHECK(t.R1[2] < t.R1[1]);
  CHECK(t.R1[4] < t.R1[3]);
}

TEST_CASE("rkh weak-norm feedback when E > 0") {
  // Hand-checked one step of the 2x2 recursion with E = 1/2, M = 2, h = 1/4,
  // A = 1/2, B = 1: R1[0] = 8, R1[1] = 0.5*8 + 1 = 5,
  // R2[1] = E*h*R1[1] + 1 = 5/8 + 1 = 1.625. All powers of two, so exact.
  const LYCoefficients ly = synthetic_ly(1, 2, 1, 1);
  SchemeConstants sc = scheme_constants(SchemeKind::Ulam);
  sc.E = 0.5;
  const RkhTable t = rkh(ly, sc, 0.25, 1);
  CHECK(t.R1[0] == 8.0);
  CHECK(t.R2[0] == 1.0);
  CHECK(t.R1[1] == 5.0);
  CHECK(t.R2[1] == 1.625);
}

TEST_CASE("rkh input validation and overflow saturation") {
  const LYCoefficients ly = synthetic_ly(1, 2, 1, 1);
  const SchemeConstants sc = scheme_constants(SchemeKind::Ulam);
  CHECK_THROWS_AS(rkh(ly, sc, 0.0, 3), std::invalid_argument);
  CHECK_THROWS_AS(rkh(ly, sc, -0.5, 3), std::invalid_argument);
  CHECK_THROWS_AS(rkh(ly, sc, 0.5, -1), std::invalid_argument);

  LYCoefficients huge = synthetic_ly(1, 2, 1, 1);
  huge.A = Ival(1e300);
  const RkhTable t = rkh(huge, sc, 0.5, 3);
  CHECK(std::isinf(t.R1[2]));
  CHECK(!std::isnan(t.R1[3]));
  CHECK(!std::isnan(t.R2[3]));
}

TEST_CASE("apriori bounds are exactly one for the cell-average scheme") {
  const LYCoefficients ly = synthetic_ly(2, 3, 4, 9);
  const SchemeConstants sc = scheme_constants(SchemeKind::Ulam);
  const std::vector<double> ap =
      apriori_norm_bounds(ly, sc, 1.0 + 1e-13, 1.0 / 1024, 20);
  REQUIRE(ap.size() == 21);
  for (double c : ap) CHECK(c == 1.0);
}

TEST_CASE("apriori bounds use the matrix norm power when it is smaller") {
  // Hat-scheme tables start at R1[0] = 1/h, huge against 1.5^k for small k.
  const LYCoefficients ly = synthetic_ly(1, 2, 1, 1);
  const SchemeConstants sc = scheme_constants(SchemeKind::Hat);
  const std::vector<double> ap =
      apriori_norm_bounds(ly, sc, 1.5, 1.0 / 1024, 2);
  CHECK(ap[0] == 1.0);
  CHECK(ap[1] == 1.5);
  CHECK(ap[2] == 2.25);
}

TEST_CASE("apriori bounds switch to the propagated table at large k") {
  // All-dyadic hat-scheme data, exact in double arithmetic:
  //   A = 1/2, B = 0, h = 1/64  =>  R1[k] = 128 * 2^-k,
  //   Eh = 1/128                =>  R2[k] = 1 + (1 - 2^-k),
  // so S1 R1 + S2 R2 at k = 12 is 1/32 + 2 - 1/4096 = 2.031005859375,
  // while the power bound 2^12 = 4096 loses. At k = 1 the power bound 2
  // beats R1[1] + R2[1] = 64 + 1.5.
  const LYCoefficients ly = synthetic_ly(1, 2, 0, 1);
  const SchemeConstants sc = scheme_constants(SchemeKind::Hat);
  const std::vector<double> ap = apriori_norm_bounds(ly, sc, 2.0, 1.0 / 64, 12);
  CHECK(ap[0] == 1.0);
  CHECK(ap[1] == 2.0);
  CHECK(ap[12] == 2.031005859375);
}

TEST_CASE("submultiplicative refinement reaches the expected fixed point") {
  std::vector<double> c = refine_submultiplicative({1, 1, 0.5, 1, 1, 1});
  CHECK(c[2] == 0.5);
  CHECK(c[3] == 0.5);  // C1 * C2
  CHECK(c[4] <= 0.25); // C2 * C2
  CHECK(c[4] == 0.25);
  CHECK(c[5] <= 0.5);
  CHECK(c[5] == 0.25); // C1 * C4 after the C4 update

  const std::vector<double> ones(6, 1.0);
  CHECK(refine_submultiplicative(ones) == ones);

  CHECK_THROWS_AS(refine_submultiplicative({0.5, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(refine_submultiplicative({}), std::invalid_argument);
}

TEST_CASE("submultiplicative refinement extends a short list") {
  const std::vector<double> c = refine_submultiplicative({1, 0.3}, 3);
  REQUIRE(c.size() == 4);
  CHECK(c[2] >= 0.0899999999999999);
  CHECK(c[2] <= 0.0900000000000002);
  CHECK(c[3] >= 0.0269999999999999);
  CHECK(c[3] <= 0.0270000000000002);
}

TEST_CASE("tail_sum on worked examples") {
  CHECK(tail_sum({1, 1, 0.5}, 2) == 4.0);

  const double t = tail_sum({1, 0.1}, 1);
  CHECK(t >= 10.0 / 9.0);
  CHECK(t <= (10.0 / 9.0) * (1.0 + 1e-14));

  CHECK_THROWS_WITH_AS(tail_sum({1, 1, 1}, 2), "tail_sum: contraction not certified",
                       std::runtime_error);
  CHECK_THROWS_AS(tail_sum({1, 0.5}, 2), std::invalid_argument);
  CHECK_THROWS_AS(tail_sum({1, 0.5}, -1), std::invalid_argument);
}

TEST_CASE("best_tail minimizes over the admissible cutoffs") {
  const auto [t, m] = best_tail({1, 0.9, 0.5});
  // m = 1 gives 1/0.1 = 10, m = 2 gives 1.9/0.5 = 3.8
  CHECK(m == 2);
  CHECK(t >= 3.8);
  CHECK(t <= 3.8 * (1.0 + 1e-14));

  const auto [t2, m2] = best_tail({1, 1, 0.5});
  CHECK(m2 == 2);
  CHECK(t2 == 4.0);

  CHECK_THROWS_AS(best_tail({1, 1, 1}), std::runtime_error);
  CHECK_THROWS_AS(best_tail({1}), std::runtime_error);
}

TEST_CASE("coarse_to_fine degenerate and validation cases") {
  const LYCoefficients ly = synthetic_ly(1, 2, 1, 1);
  const SchemeConstants sc = scheme_constants(SchemeKind::Ulam);

  const std::vector<double> c = {1, 0.8, 0.4};
  const std::vector<double> cf = coarse_to_fine(c, ly, sc, 1.0 / 64, 1.0 / 256, 1.0);
  REQUIRE(cf.size() == 3);
  CHECK(cf[0] == 1.0); // empty correction sum at m = 0
  CHECK(cf[1] > c[1]);
  CHECK(cf[2] > c[2]);

  // Equal grids: the correction only inflates, never shrinks.
  const std::vector<double> same = coarse_to_fine(c, ly, sc, 1.0 / 64, 1.0 / 64, 1.0);
  for (std::size_t k = 0; k < c.size(); ++k) CHECK(same[k] >= c[k]);

  CHECK_THROWS_AS(coarse_to_fine(c, ly, sc, 1.0 / 256, 1.0 / 64, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(coarse_to_fine(c, ly, sc, 0.5, 0.3, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(coarse_to_fine({}, ly, sc, 0.5, 0.25, 1.0),
                  std::invalid_argument);
}

TEST_CASE("coarse_to_fine dominates directly computed fine-grid norms") {
  // Doubling map, cell-average scheme: transfer 256 -> 1024 and compare
  // against the norms computed directly on the fine grid.
  const PiecewiseMap map = map_from_name("doubling");
  const LYCoefficients ly =
      dfly_coefficients(map, SchemeKind::Ulam, DflyVariant::var_fullbranch);
  const int kmax = 8;

  const IntervalSparseMatrix coarse =
      assemble(map, Partition(256), SchemeKind::Ulam);
  const NormBounds nb_coarse =
      norms_of_powers(coarse, SchemeKind::Ulam, kmax);

  const IntervalSparseMatrix fine =
      assemble(map, Partition(1024), SchemeKind::Ulam);
  const NormBounds nb_fine = norms_of_powers(fine, SchemeKind::Ulam, kmax);
  const double normQ_f = operator_norm_bound(fine, SchemeKind::Ulam);

  const std::vector<double> cf = coarse_to_fine(
      nb_coarse.C, ly, scheme_constants(SchemeKind::Ulam), 1.0 / 256,
      1.0 / 1024, normQ_f);
  for (int k = 0; k <= kmax; ++k) {
    CHECK(cf[static_cast<std::size_t>(k)] >=
          nb_fine.C[static_cast<std::size_t>(k)]);
  }
}

TEST_CASE("coarse_to_fine certifies fine-grid contraction for lanford") {
  // The transferred bounds are useless at small m (the correction term
  // carries R1[0] = M/h_F) but contract once the coarse norms have decayed.
  const PiecewiseMap map = map_from_name("lanford");
  const LYCoefficients ly =
      dfly_coefficients(map, SchemeKind::Ulam, DflyVariant::var_fullbranch);
  const int kmax = 30;

  const IntervalSparseMatrix coarse =
      assemble(map, Partition(1024), SchemeKind::Ulam);
  const NormBounds nb_coarse = norms_of_powers(coarse, SchemeKind::Ulam, kmax);
  REQUIRE(nb_coarse.m_star > 0);

  const IntervalSparseMatrix fine =
      assemble(map, Partition(4096), SchemeKind::Ulam);
  const double normQ_f = operator_norm_bound(fine, SchemeKind::Ulam);

  const std::vector<double> cf = coarse_to_fine(
      nb_coarse.C, ly, scheme_constants(SchemeKind::Ulam), 1.0 / 1024,
      1.0 / 4096, normQ_f);
  {
    const auto [tail, m] = best_tail(cf);
    CHECK(m > nb_coarse.m_star); // small m cannot survive the correction
    CHECK(cf[static_cast<std::size_t>(m)] < 1.0);
  }

  // Aggregating with the a-priori list caps the useless small-m entries at 1
  // and brings the tail down to roughly the contraction onset.
  const std::vector<double> ap =
      apriori_norm_bounds(ly, scheme_constants(SchemeKind::Ulam), normQ_f,
                          1.0 / 4096, kmax);
  const NormBounds agg = aggregate_bounds(
      {{ap, BoundSource::apriori_LY}, {cf, BoundSource::coarse_fine}});
  const auto [tail, m] = best_tail(agg.C);
  CHECK(agg.C[static_cast<std::size_t>(m)] <=
        cf[static_cast<std::size_t>(m)]);
  CHECK(agg.source[static_cast<std::size_t>(m)] == BoundSource::coarse_fine);
  CHECK(tail < 60.0);
  CHECK(tail >= static_cast<double>(m) - 1.0); // ones dominate the sum
}

TEST_CASE("error_bound matches the hand-computed plug-in value") {
  // tail = 4, K = 1/2, h = 1/1024, ||L|| = 1, ||u||_s = 2/3, eps = 0:
  // bound = 4 * (2 * (1/2) * (1/1024) * 2 * (2/3)) = 16/3072 = 1/192.
  const SchemeConstants sc = scheme_constants(SchemeKind::Ulam);
  const CertifiedError ce =
      error_bound(4.0, sc, 1.0 / 1024, 1.0, 2.0 / 3.0, 0.0, 0.0, 1.0, 7);
  const double exact = 1.0 / 192.0;
  CHECK(ce.bound >= exact * (1.0 - 1e-15));
  CHECK(ce.bound <= exact * (1.0 + 1e-12));
  CHECK(ce.m_used == 7);
  CHECK(ce.components.tail == 4.0);
  CHECK(ce.components.eps1 == 0.0);
  CHECK(ce.components.eps2 == 0.0);
  CHECK(ce.components.discretization == ce.bound);
}

TEST_CASE("error_bound residual terms and validation") {
  const SchemeConstants sc = scheme_constants(SchemeKind::Hat);
  // tail = 0 isolates the normalization term; dyadic inputs keep it exact:
  // 0.5 / (1 - 0.5) * 1.5 = 1.5.
  const CertifiedError ce = error_bound(0.0, sc, 0.25, 1.0, 1.0, 0.1, 0.5, 1.5);
  CHECK(ce.components.discretization == 0.0);
  CHECK(ce.components.eps1 == 0.0);
  CHECK(ce.bound == 1.5);

  CHECK_THROWS_AS(error_bound(1.0, sc, 0.25, 1.0, 1.0, 0.0, 1.0, 1.0),
                  std::domain_error);
  CHECK_THROWS_AS(error_bound(-1.0, sc, 0.25, 1.0, 1.0, 0.0, 0.0, 1.0),
                  std::invalid_argument);
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(error_bound(inf, sc, 0.25, 1.0, 1.0, 0.0, 0.0, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(error_bound(1.0, sc, 0.25, 1.0, 1.0, -0.1, 0.0, 1.0),
                  std::invalid_argument);
}

TEST_CASE("error_bound is monotone in every argument") {
  const SchemeConstants sc = scheme_constants(SchemeKind::Ulam);
  const double base[7] = {3.0, 1.0 / 512, 1.0, 0.75, 1e-8, 1e-9, 1.2};
  const double b0 = error_bound(base[0], sc, base[1], base[2], base[3],
                                base[4], base[5], base[6])
                        .bound;
  for (int arg = 0; arg < 7; ++arg) {
    double bumped[7];
    for (int i = 0; i < 7; ++i) bumped[i] = base[i];
    bumped[arg] *= 1.5;
    const double b1 = error_bound(bumped[0], sc, bumped[1], bumped[2],
                                  bumped[3], bumped[4], bumped[5], bumped[6])
                          .bound;
    CHECK(b1 >= b0);
  }
}

TEST_CASE("aggregate_bounds takes the pointwise minimum and tags sources") {
  std::vector<BoundList> lists;
  lists.push_back({{1.0, 1.0, 1.0}, BoundSource::apriori_LY});
  lists.push_back({{1.0, 0.9, 0.99}, BoundSource::computed});

  const NormBounds nb = aggregate_bounds(lists);
  REQUIRE(nb.C.size() == 3);
  CHECK(nb.C[0] == 1.0);
  CHECK(nb.C[1] == 0.9);
  CHECK(nb.source[1] == BoundSource::computed);
  // 0.9 * 0.9 = 0.81 beats the direct 0.99.
  CHECK(nb.C[2] <= 0.81000000000000006);
  CHECK(nb.C[2] >= 0.81);
  CHECK(nb.source[2] == BoundSource::submult);
  CHECK(nb.m_star == 1);

  for (const BoundList& bl : lists)
    for (std::size_t k = 0; k < nb.C.size(); ++k) CHECK(nb.C[k] <= bl.C[k]);
}

TEST_CASE("aggregate_bounds on real data: each source wins in its regime") {
  // Doubling on 64 cells: a coordinate difference e_1 - e_{j+1} spreads onto
  // disjoint supports for the first log2(64) = 6 steps (computed norm 2, so
  // the a-priori 1 wins), then cancels exactly (computed norm ~ rounding
  // noise wins).
  const PiecewiseMap map = map_from_name("doubling");
  const IntervalSparseMatrix mat =
      assemble(map, Partition(64), SchemeKind::Ulam);
  const NormBounds direct = norms_of_powers(mat, SchemeKind::Ulam, 8);
  const LYCoefficients ly =
      dfly_coefficients(map, SchemeKind::Ulam, DflyVariant::var_fullbranch);
  const std::vector<double> ap = apriori_norm_bounds(
      ly, scheme_constants(SchemeKind::Ulam),
      operator_norm_bound(mat, SchemeKind::Ulam), 1.0 / 64, 8);

  const NormBounds agg = aggregate_bounds(
      {{ap, BoundSource::apriori_LY}, {direct.C, BoundSource::computed}});
  CHECK(agg.C[0] == 1.0);
  for (std::size_t k = 1; k <= 5; ++k) {
    CHECK(direct.C[k] >= 2.0);
    CHECK(agg.C[k] == 1.0);
    CHECK(agg.source[k] == BoundSource::apriori_LY);
  }
  CHECK(agg.C[6] < 1e-10);
  CHECK(agg.source[6] == BoundSource::computed);
  CHECK(agg.C[7] < 1e-10);
  CHECK(agg.C[8] < 1e-10);
  CHECK(agg.m_star == 6);

  for (std::size_t k = 0; k < agg.C.size(); ++k) {
    CHECK(agg.C[k] <= ap[k]);
    CHECK(agg.C[k] <= direct.C[k]);
  }
}

TEST_CASE("aggregate_bounds validation") {
  CHECK_THROWS_AS(aggregate_bounds({}), std::invalid_argument);
  CHECK_THROWS_AS(
      aggregate_bounds({{{1.0, 0.5}, BoundSource::computed},
                        {{1.0, 0.5, 0.3}, BoundSource::apriori_LY}}),
      std::invalid_argument);
  CHECK_THROWS_AS(aggregate_bounds({{{0.9, 0.5}, BoundSource::computed}}),
                  std::invalid_argument);
}

} // TEST_SUITE("bounds")
