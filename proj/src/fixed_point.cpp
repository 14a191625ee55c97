#include "certimeasure/fixed_point.hpp"

#include <cmath>
#include <complex>
#include <cstdio>
#include <stdexcept>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "certimeasure/interval.hpp"

namespace certimeasure {

namespace {

// Compensated sequential sum. The error is O(u) relative regardless of the
// vector length, which is what makes the unit-integral scaling loop below
// terminate: a second pass always lands within a few ulps of 1.
double kahan_sum(const std::vector<double>& v) {
  double s = 0.0, c = 0.0;
  for (double x : v) {
    double y = x - c;
    double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// Weak-norm distance between two coordinate vectors: L1 (mean absolute
// difference) for Ulam, sup for hat.
double weak_norm_diff(const std::vector<double>& a, const std::vector<double>& b,
                      SchemeKind scheme) {
  if (scheme == SchemeKind::Ulam) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += std::fabs(a[k] - b[k]);
    return s / static_cast<double>(a.size());
  }
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k)
    m = std::fmax(m, std::fabs(a[k] - b[k]));
  return m;
}

double floating_residual(const IntervalSparseMatrix& mat, SchemeKind scheme,
                         const std::vector<double>& u, std::vector<double>& qu) {
  apply_q_mid(mat, scheme, u, qu);
  return weak_norm_diff(qu, u, scheme);
}

// Rescales u so the compensated floating evaluation of i(u) = h * sum(u)
// sits within 2^-40 of 1. Fails (returns false) only for vectors with a
// nearly zero integral, which the callers treat as a discarded candidate.
bool scale_unit_integral(std::vector<double>& u, double h) {
  for (int pass = 0; pass < 8; ++pass) {
    double iu = h * kahan_sum(u);
    if (std::fabs(iu - 1.0) <= 0x1p-40) return true;
    if (!std::isfinite(iu) || std::fabs(iu) < 1e-12) return false;
    for (double& x : u) x /= iu;
  }
  return std::fabs(h * kahan_sum(u) - 1.0) <= 0x1p-40;
}

// One Arnoldi cycle of dimension at most m from the 2-normalized start
// vector q0. Returns the Ritz vector belonging to the eigenvalue nearest 1
// (real part, unnormalized), or an empty vector when the factorization
// degenerates.
std::vector<double> arnoldi_ritz(const IntervalSparseMatrix& mat,
                                 SchemeKind scheme,
                                 const std::vector<double>& q0, int m) {
  const std::size_t n = q0.size();
  std::vector<std::vector<double>> V;
  V.reserve(static_cast<std::size_t>(m) + 1);
  V.push_back(q0);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
  std::vector<double> w;
  int steps = 0;
  for (int j = 0; j < m; ++j) {
    apply_q_mid(mat, scheme, V[static_cast<std::size_t>(j)], w);
    // Modified Gram-Schmidt with one reorthogonalization pass; corrections
    // are folded into H so the Arnoldi relation stays consistent.
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i <= j; ++i) {
        const std::vector<double>& vi = V[static_cast<std::size_t>(i)];
        double hij = dot(vi, w);
        for (std::size_t k = 0; k < n; ++k) w[k] -= hij * vi[k];
        H(i, j) += hij;
      }
    }
    steps = j + 1;
    double beta = norm2(w);
    if (beta <= 1e-13) break; // invariant subspace: Ritz values are exact
    H(j + 1, j) = beta;
    std::vector<double> next(w);
    for (double& x : next) x /= beta;
    V.push_back(std::move(next));
  }
  if (steps == 0) return {};
  Eigen::EigenSolver<Eigen::MatrixXd> es(H.topLeftCorner(steps, steps));
  if (es.info() != Eigen::Success) return {};
  int best = 0;
  double best_dist = std::abs(es.eigenvalues()[0] - std::complex<double>(1.0));
  for (int i = 1; i < steps; ++i) {
    double d = std::abs(es.eigenvalues()[i] - std::complex<double>(1.0));
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  std::vector<double> x(n, 0.0);
  for (int i = 0; i < steps; ++i) {
    double yi = es.eigenvectors().col(best)[i].real();
    const std::vector<double>& vi = V[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < n; ++k) x[k] += yi * vi[k];
  }
  return x;
}

// Pairwise interval sum: log-depth accumulation keeps the enclosure width of
// a length-n sum at O(log n) rounding errors instead of O(n), which matters
// for the integral functional at fine grids.
Ival pairwise_sum(const Ival* x, std::size_t len) {
  if (len == 0) return Ival(0.0);
  if (len <= 8) {
    Ival s = x[0];
    for (std::size_t k = 1; k < len; ++k) s = s + x[k];
    return s;
  }
  std::size_t half = len / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, len - half);
}

} // namespace

void apply_q_mid(const IntervalSparseMatrix& mat, SchemeKind scheme,
                 const std::vector<double>& v, std::vector<double>& out) {
  rnd::RoundingScope rs(FE_TONEAREST);
  const std::size_t n = static_cast<std::size_t>(mat.n);
  out.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double acc = 0.0;
    for (std::int64_t p = mat.row_ptr[i]; p < mat.row_ptr[i + 1]; ++p)
      acc += mat.mid[static_cast<std::size_t>(p)] *
             v[static_cast<std::size_t>(mat.col[static_cast<std::size_t>(p)])];
    out[i] = acc;
  }
  if (scheme == SchemeKind::Hat) {
    const double h = 1.0 / static_cast<double>(mat.n);
    double c = h * (kahan_sum(v) - kahan_sum(out));
    for (double& x : out) x += c;
  }
}

std::vector<double> approximate_fixed_point(const IntervalSparseMatrix& mat,
                                            SchemeKind scheme, double tol) {
  if (tol <= 0.0)
    throw std::invalid_argument("approximate_fixed_point: tol must be positive");
  if (mat.n < 2 || mat.row_ptr.size() != static_cast<std::size_t>(mat.n) + 1)
    throw std::invalid_argument("approximate_fixed_point: matrix not assembled");
  rnd::RoundingScope rs(FE_TONEAREST);
  const std::size_t n = static_cast<std::size_t>(mat.n);
  const double h = 1.0 / static_cast<double>(mat.n);

  std::vector<double> best(n, 1.0);
  scale_unit_integral(best, h);
  std::vector<double> qu;
  double best_res = floating_residual(mat, scheme, best, qu);

  if (best_res > tol) {
    const int m = static_cast<int>(std::min<std::int64_t>(30, mat.n));
    std::vector<double> q = best;
    {
      double nb = norm2(q);
      for (double& x : q) x /= nb;
    }
    for (int cycle = 0; cycle < 16 && best_res > tol; ++cycle) {
      std::vector<double> x = arnoldi_ritz(mat, scheme, q, m);
      if (x.empty()) break;
      std::vector<double> cand = x;
      if (!scale_unit_integral(cand, h)) break; // spurious zero-average mode
      double res = floating_residual(mat, scheme, cand, qu);
      double prev = best_res;
      if (res < best_res) {
        best_res = res;
        best = cand;
      }
      if (res > 0.9 * prev) break; // stagnation: hand over to power iteration
      double nx = norm2(x);
      if (!(nx > 0.0) || !std::isfinite(nx)) break;
      q = x;
      for (double& y : q) y /= nx;
    }

    // Power iteration with integral renormalization. Iterates keep i(u) = 1,
    // so the error lives in the zero-average subspace where the operator is
    // eventually contracting; this is the deflated fallback.
    if (best_res > tol) {
      std::vector<double> u = best;
      for (int it = 0; it < 4000; ++it) {
        apply_q_mid(mat, scheme, u, qu);
        double res = weak_norm_diff(qu, u, scheme);
        if (res < best_res) {
          best_res = res;
          best = u;
        }
        if (best_res <= tol) break;
        double iu = h * kahan_sum(qu);
        if (!std::isfinite(iu) || std::fabs(iu) < 1e-8) break;
        for (std::size_t k = 0; k < n; ++k) u[k] = qu[k] / iu;
      }
    }
  }

  scale_unit_integral(best, h);
  return best;
}

ApproxFixedPoint residuals(const IntervalSparseMatrix& mat,
                           const std::vector<double>& u, SchemeKind scheme) {
  const std::size_t n = static_cast<std::size_t>(mat.n);
  if (u.size() != n)
    throw std::invalid_argument("residuals: vector length does not match the matrix");
  for (double x : u)
    if (!std::isfinite(x))
      throw std::invalid_argument("residuals: non-finite entry in u_tilde");

  const Ival h_iv = Ival(1.0) / Ival(static_cast<double>(mat.n));

  // Enclosure of L_h u: the triples carry the full interval entries,
  // including the ones pruned from the floating CSR view.
  std::vector<Ival> w(n, Ival(0.0));
  for (const auto& t : mat.triples) {
    std::size_t i = static_cast<std::size_t>(t.i);
    w[i] = w[i] + t.v * Ival(u[static_cast<std::size_t>(t.j)]);
  }

  std::vector<Ival> ui(n);
  for (std::size_t k = 0; k < n; ++k) ui[k] = Ival(u[k]);
  Ival iu = h_iv * pairwise_sum(ui.data(), n);
  double eps2 = (iu - Ival(1.0)).mag();
  if (eps2 >= 1.0)
    throw std::runtime_error(
        "residuals: normalization failure (|i(u) - 1| >= 1)");

  Ival corr(0.0);
  if (scheme == SchemeKind::Hat) {
    Ival iw = h_iv * pairwise_sum(w.data(), n);
    corr = iu - iw;
  }

  double eps1 = 0.0;
  if (scheme == SchemeKind::Ulam) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      s = rnd::add_up(s, (w[k] - ui[k]).mag());
    eps1 = rnd::mul_up(s, h_iv.hi);
  } else {
    for (std::size_t k = 0; k < n; ++k)
      eps1 = std::fmax(eps1, (w[k] + corr - ui[k]).mag());
  }

  ApproxFixedPoint out;
  out.u_tilde = u;
  out.eps1 = eps1;
  out.eps2 = eps2;
  return out;
}

void export_density(const std::vector<double>& u, SchemeKind scheme,
                    const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("export_density: cannot open " + path);
  std::fprintf(f, "x, value\n");
  const double n = static_cast<double>(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    double x = scheme == SchemeKind::Ulam
                   ? (static_cast<double>(k) + 0.5) / n
                   : static_cast<double>(k) / n;
    std::fprintf(f, "%.17g, %.17g\n", x, u[k]);
  }
  std::fclose(f);
}

} // namespace certimeasure
