#include "certimeasure/observables.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "certimeasure/parallel.hpp"
#include "certimeasure/range.hpp"

namespace certimeasure {

namespace {

// Certified per-branch derivative magnitude ranges, refined enough to decide
// boundedness of log|T'|. The tolerance only affects tightness of the
// error_part factor, never soundness.
std::vector<Ival> branch_deriv_ranges(const PiecewiseMap& map) {
  std::vector<Ival> out;
  out.reserve(map.branches.size());
  for (const Branch& b : map.branches) {
    IFunc mag = [&b](const Ival& x) { return abs_i(b.deriv(x)); };
    RangeBound rb;
    try {
      rb = bound_range(mag, b.dom, 1e-2, 1 << 12);
    } catch (const std::domain_error&) {
      // the interval extension itself blows up inside the domain (e.g. a
      // reciprocal power at a singular endpoint): certainly not boundable
      throw std::domain_error("unbounded observable");
    }
    if (!(rb.inf_bound > 0.0) || !std::isfinite(rb.sup_bound))
      throw std::domain_error("unbounded observable");
    out.push_back(Ival(rb.inf_bound, rb.sup_bound));
  }
  return out;
}

// sup over [0,1] of |log|T'||, upward-rounded: the dual factor for an L1
// density error.
double sup_abs_log(const std::vector<Ival>& dranges) {
  double s = 0.0;
  for (const Ival& d : dranges) s = std::fmax(s, log_i(d).mag());
  return s;
}

// Upper bound for the integral of |log|T'|| over [0,1]: the dual factor for
// a sup-norm density error. A fixed uniform subdivision per branch is
// enough; the bound stays valid (only looser) if the subdivision is coarse.
double l1_abs_log(const PiecewiseMap& map, const std::vector<Ival>& dranges) {
  const int pieces = 256;
  double acc = 0.0;
  for (size_t b = 0; b < map.branches.size(); ++b) {
    const Branch& br = map.branches[b];
    double lo = br.dom.lo, hi = br.dom.hi;
    double prev = lo;
    for (int k = 1; k <= pieces; ++k) {
      double x = (k == pieces) ? hi : lo + (hi - lo) * (double(k) / pieces);
      if (!(x > prev)) continue;
      Ival d = intersect(abs_i(br.deriv(Ival(prev, x))), dranges[b]);
      acc = rnd::add_up(acc, rnd::mul_up(log_i(d).mag(), rnd::sub_up(x, prev)));
      prev = x;
    }
  }
  return acc;
}

// Quadrature state shared by every cell: the map, the certified per-branch
// derivative ranges used to clamp piecewise evaluations, and the partition.
struct QuadContext {
  const PiecewiseMap& map;
  const std::vector<Ival>& dranges;
  long long n;
  Ival h; // enclosure of the exact cell width 1/n
  int split_limit;
};

// Range of log|T'| over an x-interval: the hull over every branch whose
// domain meets it. A piece straddling a branch endpoint gets the hull of
// both sides, which covers the true range wherever the endpoint actually
// lies inside its enclosure. Each branch evaluation is clamped into the
// branch's certified global range so a loose interval extension can never
// push the enclosure toward zero or infinity spuriously.
Ival log_deriv_range(const QuadContext& ctx, const Ival& x) {
  const auto& branches = ctx.map.branches;
  bool have = false;
  Ival r(0.0);
  for (size_t b = 0; b < branches.size(); ++b) {
    if (!intersects(branches[b].dom, x)) continue;
    Ival xb = intersect(x, branches[b].dom);
    Ival d = intersect(abs_i(branches[b].deriv(xb)), ctx.dranges[b]);
    Ival lg = log_i(d);
    r = have ? hull(r, lg) : lg;
    have = true;
  }
  if (!have) throw std::logic_error("lyapunov_enclosure: uncovered subinterval");
  return r;
}

// Enclosure of the integral of log|T'| times the interpolant over one piece
// of cell j, parametrized by t in [t0, t1] within the unit cell. g0, g1 are
// the interpolant values at the piece endpoints (constant for Ulam, linear
// for hat). The enclosure splits f = log|T'| as midpoint plus remainder:
//   integral f g = m integral g + integral (f - m) g,
// |integral (f - m) g| <= rad * integral |g|, valid for any sign of g. The
// piece is bisected in t until its width share of the budget is met.
Ival quad_piece(const QuadContext& ctx, long long j, double t0, double t1,
                const Ival& g0, const Ival& g1, double tol, int depth) {
  Ival x = (Ival(double(j)) + Ival(t0, t1)) * ctx.h;
  Ival f = log_deriv_range(ctx, x);
  double m = f.mid();
  double rad = std::fmax(rnd::sub_up(f.hi, m), rnd::sub_up(m, f.lo));

  Ival dt = Ival(t1) - Ival(t0);
  Ival mass = (g0 + g1) * Ival(0.5) * dt * ctx.h; // integral of g over the piece
  double absmass; // upper bound for the integral of |g|
  if (g0.lo >= 0.0 && g1.lo >= 0.0) {
    absmass = mass.hi;
  } else if (g0.hi <= 0.0 && g1.hi <= 0.0) {
    absmass = -mass.lo;
  } else {
    // sign not certain: a linear interpolant is dominated by its endpoint
    // magnitudes
    absmass = rnd::mul_up(rnd::mul_up(std::fmax(g0.mag(), g1.mag()), dt.hi),
                          ctx.h.hi);
  }
  double spread = rnd::mul_up(rad, absmass);
  Ival centered = Ival(m) * mass;
  Ival contrib = centered + Ival(-spread, spread);

  // Stop on budget met, depth cap, or stall: only the rad*absmass term
  // shrinks under bisection, so once it is dominated by the rounding width
  // of the mass term further splitting buys nothing.
  if (contrib.width() <= tol || depth >= ctx.split_limit ||
      spread <= centered.width())
    return contrib;
  double tm = 0.5 * (t0 + t1);
  if (!(tm > t0 && tm < t1)) return contrib;
  Ival gm = g0 + (g1 - g0) * Ival(0.5);
  return quad_piece(ctx, j, t0, tm, g0, gm, 0.5 * tol, depth + 1) +
         quad_piece(ctx, j, tm, t1, gm, g1, 0.5 * tol, depth + 1);
}

} // namespace

LyapunovEnclosure lyapunov_enclosure(const PiecewiseMap& map,
                                     const std::vector<double>& u_tilde,
                                     const CertifiedError& err,
                                     SchemeKind scheme,
                                     const QuadratureOptions& opt) {
  const long long n = static_cast<long long>(u_tilde.size());
  if (n < 2)
    throw std::invalid_argument("lyapunov_enclosure: density needs at least two coefficients");
  for (double v : u_tilde)
    if (!std::isfinite(v))
      throw std::invalid_argument("lyapunov_enclosure: density has a nonfinite coefficient");
  if (!(err.bound >= 0.0) || !std::isfinite(err.bound))
    throw std::invalid_argument("lyapunov_enclosure: error bound must be finite and nonnegative");
  if (map.branches.empty())
    throw std::invalid_argument("lyapunov_enclosure: map has no branches");
  if (!(opt.width_target > 0.0))
    throw std::invalid_argument("lyapunov_enclosure: width target must be positive");

  rnd::RoundingScope scope(FE_UPWARD);

  std::vector<Ival> dranges = branch_deriv_ranges(map);

  QuadContext ctx{map, dranges, n, Ival(1.0) / Ival(double(n)), opt.split_limit};
  const double cell_tol = opt.width_target / double(n);

  // Parallel over cells in fixed chunks; chunk sums are combined in index
  // order so the result does not depend on the thread count.
  const long long chunk_cells = 2048;
  const int nchunks = static_cast<int>((n + chunk_cells - 1) / chunk_cells);
  std::vector<Ival> partial(static_cast<size_t>(nchunks), Ival(0.0));
  parallel_for_chunks(nchunks, opt.threads, [&](int c) {
    rnd::RoundingScope worker_scope(FE_UPWARD);
    long long lo = c * chunk_cells, hi = std::min(n, lo + chunk_cells);
    Ival acc(0.0);
    for (long long j = lo; j < hi; ++j) {
      Ival g0(u_tilde[static_cast<size_t>(j)]);
      Ival g1 = scheme == SchemeKind::Hat
                    ? Ival(u_tilde[static_cast<size_t>((j + 1) % n)])
                    : g0;
      acc = acc + quad_piece(ctx, j, 0.0, 1.0, g0, g1, cell_tol, 0);
    }
    partial[static_cast<size_t>(c)] = acc;
  });
  Ival integral(0.0);
  for (const Ival& p : partial) integral = integral + p;

  double factor = scheme == SchemeKind::Ulam ? sup_abs_log(dranges)
                                             : l1_abs_log(map, dranges);
  double error_part = rnd::mul_up(factor, err.bound);

  LyapunovEnclosure out;
  out.integral_part = integral;
  out.error_part = error_part;
  out.value = integral + Ival(-error_part, error_part);
  return out;
}

} // namespace certimeasure
