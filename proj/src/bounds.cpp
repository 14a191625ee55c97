#include "certimeasure/bounds.hpp"

#include <cfenv>
#include <cmath>
#include <stdexcept>

#include "certimeasure/interval.hpp"

namespace certimeasure {

namespace {

// S * R with the convention 0 * inf = 0: a scheme that does not use a table
// must not poison the bound when that table overflows.
double weight_up(double s, double r) {
  if (s == 0.0) return 0.0;
  return rnd::mul_up(s, r);
}

} // namespace

RkhTable rkh(const LYCoefficients& ly, const SchemeConstants& sc, double h,
             int k_max) {
  if (!(h > 0.0) || !(h <= 1.0))
    throw std::invalid_argument("rkh: mesh width must lie in (0, 1]");
  if (k_max < 0) throw std::invalid_argument("rkh: k_max must be nonnegative");

  rnd::RoundingScope scope(FE_UPWARD);
  const double A = ly.A.hi;
  const double B = ly.B.hi;
  if (!(A >= 0.0) || !(B >= 0.0))
    throw std::invalid_argument("rkh: coefficients must be nonnegative");

  RkhTable t;
  t.R1.resize(static_cast<std::size_t>(k_max) + 1);
  t.R2.resize(static_cast<std::size_t>(k_max) + 1);

  const double h_pow =
      sc.alpha == 1.0 ? h : rnd::pow_down(h, sc.alpha); // underestimate h^a
  double r1 = rnd::div_up(sc.M, h_pow);
  double r2 = 1.0;
  const double Eh = rnd::mul_up(sc.E, h);
  t.R1[0] = r1;
  t.R2[0] = r2;
  for (int k = 1; k <= k_max; ++k) {
    const double n1 = rnd::add_up(rnd::mul_up(A, r1), rnd::mul_up(B, r2));
    const double n2 = rnd::add_up(weight_up(Eh, n1), r2);
    r1 = n1;
    r2 = n2;
    t.R1[static_cast<std::size_t>(k)] = r1;
    t.R2[static_cast<std::size_t>(k)] = r2;
  }
  return t;
}

std::vector<double> apriori_norm_bounds(const LYCoefficients& ly,
                                        const SchemeConstants& sc,
                                        double mat_norm_bound, double h,
                                        int k_max) {
  if (!(mat_norm_bound >= 0.0))
    throw std::invalid_argument(
        "apriori_norm_bounds: matrix norm bound must be nonnegative");
  const RkhTable t = rkh(ly, sc, h, k_max);

  rnd::RoundingScope scope(FE_UPWARD);
  std::vector<double> out(static_cast<std::size_t>(k_max) + 1);
  double p = 1.0; // ||Q||^k, k = 0
  for (int k = 0; k <= k_max; ++k) {
    const std::size_t i = static_cast<std::size_t>(k);
    const double s = rnd::add_up(weight_up(sc.S1, t.R1[i]),
                                 weight_up(sc.S2, t.R2[i]));
    out[i] = std::fmin(p, s);
    p = rnd::mul_up(p, mat_norm_bound);
  }
  return out;
}

std::vector<double> refine_submultiplicative(std::vector<double> C,
                                             int k_max) {
  if (C.empty() || C[0] != 1.0)
    throw std::invalid_argument("refine_submultiplicative: C[0] must be 1");
  if (k_max >= 0)
    C.resize(static_cast<std::size_t>(k_max) + 1,
             std::numeric_limits<double>::infinity());

  rnd::RoundingScope scope(FE_UPWARD);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t k = 2; k < C.size(); ++k) {
      for (std::size_t i = 1; i < k; ++i) {
        const double p = rnd::mul_up(C[i], C[k - i]);
        if (p < C[k]) {
          C[k] = p;
          changed = true;
        }
      }
    }
  }
  return C;
}

std::vector<double> coarse_to_fine(const std::vector<double>& C_coarse,
                                   const LYCoefficients& ly,
                                   const SchemeConstants& sc, double h,
                                   double h_F, double normQ_hF) {
  if (C_coarse.empty())
    throw std::invalid_argument("coarse_to_fine: empty bound list");
  if (!(h_F > 0.0) || !(h_F <= h))
    throw std::invalid_argument(
        "coarse_to_fine: fine mesh must be positive and no coarser");
  const double ratio = h / h_F;
  if (std::fabs(ratio - static_cast<double>(std::llround(ratio))) >
      1e-9 * ratio)
    throw std::invalid_argument(
        "coarse_to_fine: the fine grid must refine the coarse grid");
  if (!(normQ_hF >= 0.0))
    throw std::invalid_argument(
        "coarse_to_fine: matrix norm bound must be nonnegative");

  const int k_max = static_cast<int>(C_coarse.size()) - 1;
  const RkhTable t = rkh(ly, sc, h_F, k_max);

  rnd::RoundingScope scope(FE_UPWARD);
  // The perturbation term carries the coarse mesh width: it comes from the
  // projection difference between the two grids, which the coarse projection
  // dominates.
  const double twoKh = rnd::mul_up(rnd::mul_up(2.0, sc.K), h);
  std::vector<double> out(C_coarse.size());
  out[0] = C_coarse[0];
  for (std::size_t m = 1; m < C_coarse.size(); ++m) {
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double inner =
          rnd::add_up(rnd::mul_up(normQ_hF, t.R1[k]), t.R1[k + 1]);
      s = rnd::add_up(s, rnd::mul_up(C_coarse[m - 1 - k], inner));
    }
    out[m] = rnd::add_up(C_coarse[m], rnd::mul_up(twoKh, s));
  }
  return out;
}

double tail_sum(const std::vector<double>& C, int m) {
  if (m < 0 || static_cast<std::size_t>(m) >= C.size())
    throw std::invalid_argument("tail_sum: cutoff out of range");
  const std::size_t mm = static_cast<std::size_t>(m);
  rnd::RoundingScope scope(FE_UPWARD);
  if (!(C[mm] < 1.0))
    throw std::runtime_error("tail_sum: contraction not certified");
  double s = 0.0;
  for (std::size_t k = 0; k < mm; ++k) s = rnd::add_up(s, C[k]);
  return rnd::div_up(s, rnd::sub_down(1.0, C[mm]));
}

std::pair<double, int> best_tail(const std::vector<double>& C) {
  double best = std::numeric_limits<double>::infinity();
  int best_m = -1;
  for (std::size_t m = 1; m < C.size(); ++m) {
    if (!(C[m] < 1.0)) continue;
    const double t = tail_sum(C, static_cast<int>(m));
    if (t < best) {
      best = t;
      best_m = static_cast<int>(m);
    }
  }
  if (best_m < 0)
    throw std::runtime_error("best_tail: contraction not certified");
  return {best, best_m};
}

CertifiedError error_bound(double tail, const SchemeConstants& sc, double h,
                           double norm_L, double u_strong, double eps1,
                           double eps2, double norm_u_tilde, int m_used) {
  if (!(tail >= 0.0) || !std::isfinite(tail))
    throw std::invalid_argument("error_bound: tail must be finite and >= 0");
  if (!(eps1 >= 0.0) || !(eps2 >= 0.0))
    throw std::invalid_argument("error_bound: residuals must be nonnegative");
  if (!(eps2 < 1.0))
    throw std::domain_error(
        "error_bound: normalization residual eps2 >= 1, nothing certifiable");
  if (!(h > 0.0) || !(norm_L >= 0.0) || !(u_strong >= 0.0) ||
      !(norm_u_tilde >= 0.0))
    throw std::invalid_argument("error_bound: negative input");

  rnd::RoundingScope scope(FE_UPWARD);
  CertifiedError ce;
  ce.m_used = m_used;
  ce.components.tail = tail;
  const double twoKh = rnd::mul_up(rnd::mul_up(2.0, sc.K), h);
  ce.components.discretization = rnd::mul_up(
      tail, rnd::mul_up(twoKh, rnd::mul_up(rnd::add_up(1.0, norm_L), u_strong)));
  const double den = rnd::sub_down(1.0, eps2);
  ce.components.eps1 = rnd::mul_up(tail, rnd::div_up(eps1, den));
  ce.components.eps2 = rnd::mul_up(rnd::div_up(eps2, den), norm_u_tilde);
  ce.bound = rnd::add_up(
      rnd::add_up(ce.components.discretization, ce.components.eps1),
      ce.components.eps2);
  return ce;
}

NormBounds aggregate_bounds(const std::vector<BoundList>& lists) {
  if (lists.empty())
    throw std::invalid_argument("aggregate_bounds: no candidate lists");
  const std::size_t len = lists[0].C.size();
  if (len == 0)
    throw std::invalid_argument("aggregate_bounds: empty candidate list");
  for (const BoundList& bl : lists)
    if (bl.C.size() != len)
      throw std::invalid_argument(
          "aggregate_bounds: candidate lists differ in length");

  NormBounds nb;
  nb.C.assign(len, std::numeric_limits<double>::infinity());
  nb.source.assign(len, BoundSource::apriori_power);
  for (std::size_t k = 0; k < len; ++k) {
    for (const BoundList& bl : lists) {
      if (bl.C[k] < nb.C[k]) {
        nb.C[k] = bl.C[k];
        nb.source[k] = bl.source;
      }
    }
  }
  if (nb.C[0] != 1.0)
    throw std::invalid_argument("aggregate_bounds: C[0] must be 1");

  rnd::RoundingScope scope(FE_UPWARD);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t k = 2; k < len; ++k) {
      for (std::size_t i = 1; i < k; ++i) {
        const double p = rnd::mul_up(nb.C[i], nb.C[k - i]);
        if (p < nb.C[k]) {
          nb.C[k] = p;
          nb.source[k] = BoundSource::submult;
          changed = true;
        }
      }
    }
  }

  nb.m_star = -1;
  for (std::size_t k = 0; k < len; ++k) {
    if (nb.C[k] < 1.0) {
      nb.m_star = static_cast<int>(k);
      break;
    }
  }
  return nb;
}

} // namespace certimeasure
