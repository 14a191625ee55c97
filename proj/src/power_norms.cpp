#include "certimeasure/power_norms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "certimeasure/interval.hpp"
#include "certimeasure/parallel.hpp"

namespace certimeasure {

std::string bound_source_name(BoundSource s) {
  switch (s) {
    case BoundSource::apriori_power: return "apriori_power";
    case BoundSource::apriori_LY: return "apriori_LY";
    case BoundSource::submult: return "submult";
    case BoundSource::computed: return "computed";
    case BoundSource::coarse_fine: return "coarse_fine";
  }
  return "unknown";
}

double gamma(std::int64_t z, double u) {
  if (z < 0) throw std::invalid_argument("gamma: z must be nonnegative");
  if (!(u > 0.0)) throw std::invalid_argument("gamma: u must be positive");
  if (z == 0) return 0.0;
  double zu = rnd::mul_up(static_cast<double>(z), u);
  double den = rnd::sub_down(1.0, zu);
  if (!(den > 0.0))
    throw std::domain_error(
        "gamma: z*u >= 1, matrix too dense for this precision");
  return rnd::div_up(zu, den);
}

namespace {

// Classical operator norm of the midpoint matrix, rounded up: max column
// sum for l1 (Ulam), max row sum for sup (hat).
double classical_norm(const IntervalSparseMatrix& mat, SchemeKind scheme) {
  const std::size_t n = static_cast<std::size_t>(mat.n);
  double out = 0.0;
  if (scheme == SchemeKind::Ulam) {
    std::vector<double> colsum(n, 0.0);
    for (std::size_t p = 0; p < mat.mid.size(); ++p) {
      std::size_t j = static_cast<std::size_t>(mat.col[p]);
      colsum[j] = rnd::add_up(colsum[j], std::fabs(mat.mid[p]));
    }
    for (double s : colsum) out = std::fmax(out, s);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::int64_t p = mat.row_ptr[i]; p < mat.row_ptr[i + 1]; ++p)
        s = rnd::add_up(s, std::fabs(mat.mid[static_cast<std::size_t>(p)]));
      out = std::fmax(out, s);
    }
  }
  return out;
}

struct IterConstants {
  bool l1 = true;
  double h = 0.0;       // quadrature weight used by the hat correction
  double coef = 0.0;    // gamma_z ||M|| + delta, rounded up
  double coef2 = 0.0;   // 2 (gamma_z ||M|| + delta)
  double two_gn = 0.0;  // 2 gamma_{n+3} (hat correction evaluation error)
  double qmul = 1.0;    // max(1, ||Q_h|| bound): recursion multiplier
};

struct BatchOut {
  std::vector<double> C;       // l1: per-k max of ||v|| + eps
  std::vector<double> sig;     // l1: per-k max of ||v||
  std::vector<double> epsmax;  // per-k max of the per-column eps
  std::vector<double> eps_sum; // linf: per-k upward sum of eps over columns
  std::vector<double> S;       // linf: per-k, per-row sums of |v_i|, k-major
};

void run_batch(const IntervalSparseMatrix& mat, const IterConstants& ct,
               int k_max, std::int64_t j_begin, std::int64_t j_end,
               BatchOut& out) {
  const std::size_t n = static_cast<std::size_t>(mat.n);
  const std::size_t kk = static_cast<std::size_t>(k_max) + 1;
  out.C.assign(kk, 0.0);
  out.sig.assign(kk, 0.0);
  out.epsmax.assign(kk, 0.0);
  if (!ct.l1) {
    out.eps_sum.assign(kk, 0.0);
    out.S.assign(kk * n, 0.0);
  }

  std::vector<double> v(n), w(n);
  for (std::int64_t j = j_begin; j < j_end; ++j) {
    std::fill(v.begin(), v.end(), 0.0);
    v[0] = 1.0;
    v[static_cast<std::size_t>(j) + 1] = -1.0;
    double eps = 0.0;
    double prev_nv = ct.l1 ? 2.0 : 1.0; // exact norm of e_1 - e_{j+1}
    double prev_nw = 0.0;               // ||w_{k-1}||, zero before step one
    for (int k = 1; k <= k_max; ++k) {
      rnd::require_nearest();
      for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::int64_t p = mat.row_ptr[i]; p < mat.row_ptr[i + 1]; ++p)
          acc += mat.mid[static_cast<std::size_t>(p)] *
                 v[static_cast<std::size_t>(mat.col[static_cast<std::size_t>(p)])];
        w[i] = acc;
      }
      double nw = 0.0;
      if (ct.l1) {
        v.swap(w);
      } else {
        for (double x : w) nw = std::fmax(nw, std::fabs(x));
        double s = 0.0;
        for (double x : w) s += ct.h * x;
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] - s;
      }

      rnd::require_upward();
      double nv;
      if (ct.l1) {
        nv = 0.0;
        for (double x : v) nv = rnd::add_up(nv, std::fabs(x));
        eps = rnd::add_up(rnd::mul_up(ct.coef, prev_nv), eps);
      } else {
        nv = 0.0;
        for (double x : v) nv = std::fmax(nv, std::fabs(x));
        double corr_err = rnd::mul_up(ct.two_gn, rnd::add_up(nw, prev_nw));
        double prod_err = rnd::mul_up(ct.coef2, prev_nv);
        eps = rnd::add_up(rnd::add_up(corr_err, prod_err),
                          rnd::mul_up(ct.qmul, eps));
      }

      std::size_t ku = static_cast<std::size_t>(k);
      out.epsmax[ku] = std::fmax(out.epsmax[ku], eps);
      if (ct.l1) {
        out.C[ku] = std::fmax(out.C[ku], rnd::add_up(nv, eps));
        out.sig[ku] = std::fmax(out.sig[ku], nv);
      } else {
        double* srow = out.S.data() + ku * n;
        for (std::size_t i = 0; i < n; ++i)
          srow[i] = rnd::add_up(srow[i], std::fabs(v[i]));
        out.eps_sum[ku] = rnd::add_up(out.eps_sum[ku], eps);
      }
      prev_nv = nv;
      prev_nw = nw;
    }
  }
}

} // namespace

double operator_norm_bound(const IntervalSparseMatrix& mat, SchemeKind scheme) {
  double out = rnd::add_up(classical_norm(mat, scheme), mat.delta);
  if (scheme == SchemeKind::Hat) out = rnd::add_up(out, mat.i_residual);
  return out;
}

NormBounds norms_of_powers(const IntervalSparseMatrix& mat, SchemeKind scheme,
                           int k_max, int threads) {
  if (k_max < 1)
    throw std::invalid_argument("norms_of_powers: k_max must be at least 1");
  if (mat.n < 2 || mat.row_ptr.size() != static_cast<std::size_t>(mat.n) + 1)
    throw std::invalid_argument("norms_of_powers: matrix not assembled");
  rnd::RoundingScope rs(FE_UPWARD);
  const std::size_t n = static_cast<std::size_t>(mat.n);
  const std::size_t kk = static_cast<std::size_t>(k_max) + 1;

  IterConstants ct;
  ct.l1 = scheme == SchemeKind::Ulam;
  ct.h = 1.0 / static_cast<double>(mat.n);
  double normM = classical_norm(mat, scheme);
  double normQ = operator_norm_bound(mat, scheme);
  double gz = gamma(mat.z);
  ct.coef = rnd::add_up(rnd::mul_up(gz, normM), mat.delta);
  ct.coef2 = rnd::mul_up(2.0, ct.coef);
  // n+3 instead of n+2: the extra unit absorbs the rounding of the stored
  // quadrature weight fl(1/n) relative to the exact 1/n.
  ct.two_gn = rnd::mul_up(2.0, gamma(mat.n + 3));
  // The recursion multiplies the previous error by a bound on ||Q_h||;
  // flooring it at 1 keeps eps monotone and is still an upper bound.
  ct.qmul = std::fmax(1.0, normQ);

  // Fixed-size column batches merged in index order: results are identical
  // for any thread count. Waves cap the number of live batch buffers.
  const std::int64_t cols = mat.n - 1;
  const std::int64_t batch_cols = 256;
  const int wave_slots = 8;
  const std::int64_t nbatches = (cols + batch_cols - 1) / batch_cols;

  std::vector<double> C(kk, 0.0), sig(kk, 0.0), epsmax(kk, 0.0);
  std::vector<double> eps_sum, S;
  if (!ct.l1) {
    eps_sum.assign(kk, 0.0);
    S.assign(kk * n, 0.0);
  }

  for (std::int64_t wave = 0; wave * wave_slots < nbatches; ++wave) {
    std::int64_t lo = wave * wave_slots;
    std::int64_t hi = std::min<std::int64_t>(nbatches, lo + wave_slots);
    std::vector<BatchOut> outs(static_cast<std::size_t>(hi - lo));
    parallel_for_chunks(static_cast<int>(hi - lo), threads, [&](int slot) {
      std::int64_t b = lo + slot;
      std::int64_t j0 = b * batch_cols;
      std::int64_t j1 = std::min<std::int64_t>(cols, j0 + batch_cols);
      run_batch(mat, ct, k_max, j0, j1, outs[static_cast<std::size_t>(slot)]);
    });
    rnd::require_upward();
    for (const BatchOut& bo : outs) {
      for (std::size_t k = 1; k < kk; ++k) {
        C[k] = std::fmax(C[k], bo.C[k]);
        sig[k] = std::fmax(sig[k], bo.sig[k]);
        epsmax[k] = std::fmax(epsmax[k], bo.epsmax[k]);
        if (!ct.l1) {
          eps_sum[k] = rnd::add_up(eps_sum[k], bo.eps_sum[k]);
          const double* srow = bo.S.data() + k * n;
          double* dst = S.data() + k * n;
          for (std::size_t i = 0; i < n; ++i)
            dst[i] = rnd::add_up(dst[i], srow[i]);
        }
      }
    }
  }

  NormBounds nb;
  nb.C.assign(kk, 0.0);
  nb.source.assign(kk, BoundSource::computed);
  nb.C[0] = 1.0;
  nb.source[0] = BoundSource::apriori_power;
  nb.err.gamma_z = gz;
  nb.err.eps.assign(kk, 0.0);
  double ap = 1.0;
  for (std::size_t k = 1; k < kk; ++k) {
    ap = rnd::mul_up(ap, normQ);
    double cand, err_part, sig_part;
    if (ct.l1) {
      cand = C[k];
      err_part = epsmax[k];
      sig_part = sig[k];
    } else {
      double smax = 0.0;
      const double* srow = S.data() + k * n;
      for (std::size_t i = 0; i < n; ++i) smax = std::fmax(smax, srow[i]);
      cand = rnd::add_up(smax, eps_sum[k]);
      err_part = eps_sum[k];
      sig_part = smax;
    }
    nb.err.eps[k] = epsmax[k];
    bool dominated = err_part > 0.0 && err_part >= sig_part;
    if (dominated && ap < cand) {
      nb.C[k] = ap;
      nb.source[k] = BoundSource::apriori_power;
    } else {
      nb.C[k] = cand;
      nb.source[k] = BoundSource::computed;
    }
  }
  for (std::size_t k = 0; k < kk; ++k) {
    if (nb.C[k] < 1.0) {
      nb.m_star = static_cast<int>(k);
      break;
    }
  }
  return nb;
}

void export_norm_bounds(const NormBounds& nb, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("export_norm_bounds: cannot open " + path);
  std::fprintf(f, "k, C_k, source\n");
  for (std::size_t k = 0; k < nb.C.size(); ++k)
    std::fprintf(f, "%zu, %.17g, %s\n", k, nb.C[k],
                 bound_source_name(nb.source[k]).c_str());
  std::fclose(f);
}

} // namespace certimeasure
