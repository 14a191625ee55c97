#include "certimeasure/assemble.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "json.hpp"

#include "certimeasure/parallel.hpp"
#include "certimeasure/range.hpp"

namespace certimeasure {

namespace {

// Endpoint enclosures of the true branch boundaries. Branch domains are
// outward rounded, so the true boundary between branches k and k+1 lies in
// the overlap of the two recorded domains; the outermost endpoints (0 and 1)
// are exact.
struct BranchEnds {
  Ival left, right;
};

std::vector<BranchEnds> branch_ends(const PiecewiseMap& map) {
  std::vector<BranchEnds> ends(map.branches.size());
  for (size_t k = 0; k < map.branches.size(); ++k) {
    const Ival& d = map.branches[k].dom;
    ends[k].left =
        k == 0 ? Ival(d.lo) : Ival(d.lo, map.branches[k - 1].dom.hi);
    ends[k].right = k + 1 < map.branches.size()
                        ? Ival(map.branches[k + 1].dom.lo, d.hi)
                        : Ival(d.hi);
  }
  return ends;
}

// Enclosures of the smallest and largest value the branch takes.
struct BranchImage {
  Ival bottom, top;
};

BranchImage branch_image(const Branch& p, const BranchEnds& e) {
  // a certified full-range branch has exact image [0, 1]; evaluating the
  // endpoints instead would leave rounding slack that makes the outermost
  // nodes look like they might have no preimage
  if (p.full_range) return {Ival(0.0), Ival(1.0)};
  Ival va = p.eval(e.left);
  Ival vb = p.eval(e.right);
  return p.increasing ? BranchImage{va, vb} : BranchImage{vb, va};
}

// Certified root localization by bisection: shrinks X while the sign of
// eval - y at the midpoint is certain. Used for nodes within rounding slack
// of a branch image endpoint, where Newton cannot certify whether the root
// exists at all; the result encloses the root whenever there is one, and
// pins to the relevant branch endpoint otherwise.
Ival bisect_root(const Branch& p, const Ival& y, Ival X) {
  for (int it = 0; it < 120; ++it) {
    double m = X.mid();
    if (!(m > X.lo && m < X.hi)) break;
    Ival v = p.eval(Ival(m));
    bool root_left = p.increasing ? v.lo > y.hi : v.hi < y.lo;
    bool root_right = p.increasing ? v.hi < y.lo : v.lo > y.hi;
    if (root_left)
      X = Ival(X.lo, m);
    else if (root_right)
      X = Ival(m, X.hi);
    else
      break;
  }
  return X;
}

// Smallest node index k with y_k possibly >= the image bottom, and largest k
// with y_k possibly <= the image top. Seeded with floating arithmetic and
// fixed up with exact interval comparisons.
long long first_candidate(long long n, const Ival& bottom) {
  long long k = std::llround(std::floor(bottom.lo * double(n)));
  if (k < 0) k = 0;
  if (k > n) k = n;
  while (k > 0 && from_rational(k - 1, n).hi >= bottom.lo) --k;
  while (k <= n && from_rational(k, n).hi < bottom.lo) ++k;
  return k;
}

long long last_candidate(long long n, const Ival& top) {
  long long k = std::llround(std::ceil(top.hi * double(n)));
  if (k < 0) k = 0;
  if (k > n) k = n;
  while (k < n && from_rational(k + 1, n).lo <= top.hi) ++k;
  while (k >= 0 && from_rational(k, n).lo > top.hi) --k;
  return k;
}

struct NodeRoot {
  long long node;
  Ival x;
  bool certain; // node value certainly interior to the branch image
};

// Preimages of the nodes k0..k1 in one branch, sweeping so that each Newton
// bracket starts at the previous root. Nodes that are certainly interior to
// the image are solved with the interval Newton method (errors propagate:
// a certified "no root" there means the branch description is inconsistent);
// nodes inside the rounding slack of an image endpoint fall back to
// bisection.
void solve_nodes(const Branch& p, const BranchImage& img, long long n,
                 long long k0, long long k1, std::vector<NodeRoot>& out) {
  double cur_lo = p.dom.lo, cur_hi = p.dom.hi;
  for (long long k = k0; k <= k1; ++k) {
    Ival y = from_rational(k, n);
    // the image is a closed interval, so a node certainly has a preimage
    // whenever it clears the outward-rounded image endpoints
    bool certain = y.lo >= img.bottom.hi && y.hi <= img.top.lo;
    Ival bracket =
        p.increasing ? Ival(cur_lo, p.dom.hi) : Ival(p.dom.lo, cur_hi);
    Ival r = certain ? interval_newton(p.eval, p.deriv, y, bracket, 0.0)
                     : bisect_root(p, y, bracket);
    if (p.increasing)
      cur_lo = std::fmax(cur_lo, r.lo);
    else
      cur_hi = std::fmin(cur_hi, r.hi);
    out.push_back({k, r, certain});
  }
}

using Triple = IntervalSparseMatrix::Triple;

long long clamp_ll(long long v, long long lo, long long hi) {
  return v < lo ? lo : (v > hi ? hi : v);
}

// Ulam contributions of one preimage segment [A, B] mapping into cell `row`:
// the measure of the overlap with each partition cell, as a fraction of the
// cell, clamped to [0, 1].
void ulam_segment(const Ival& A, const Ival& B, long long row, long long n,
                  std::vector<Triple>& out) {
  row = clamp_ll(row, 0, n - 1);
  long long jlo = clamp_ll((long long)std::floor(A.lo * double(n)) - 1, 0, n - 1);
  long long jhi = clamp_ll((long long)std::floor(B.hi * double(n)) + 1, 0, n - 1);
  for (long long j = jlo; j <= jhi; ++j) {
    Ival yl = from_rational(j, n);
    Ival yr = from_rational(j + 1, n);
    double len_hi = rnd::sub_up(std::fmin(B.hi, yr.hi), std::fmax(A.lo, yl.lo));
    double len_lo =
        rnd::sub_down(std::fmin(B.lo, yr.lo), std::fmax(A.hi, yl.hi));
    double c_hi = std::fmin(1.0, std::fmax(0.0, rnd::mul_up(len_hi, double(n))));
    double c_lo =
        std::fmin(1.0, std::fmax(0.0, rnd::mul_down(len_lo, double(n))));
    if (c_hi <= 0.0) continue;
    out.push_back({(std::int32_t)row, (std::int32_t)j, Ival(c_lo, c_hi)});
  }
}

// Hat contributions of one node preimage: phi_j(x) / |T'(x)| for the basis
// functions that can be nonzero on the enclosure. Preimages that may lie
// outside the true image (boundary slack) get their contribution hulled
// with 0, covering both existence cases.
void hat_point(const Branch& p, const NodeRoot& nr, long long n,
               std::vector<Triple>& out) {
  Ival dv = abs_i(p.deriv(nr.x));
  if (!(dv.lo > 0.0))
    throw std::domain_error(
        "assemble: |T'| not certified positive at a node preimage");
  Ival w = 1.0 / dv;
  long long jlo = clamp_ll((long long)std::floor(nr.x.lo * double(n)) - 1, 0, n);
  long long jhi = clamp_ll((long long)std::floor(nr.x.hi * double(n)) + 1, 0, n);
  for (long long j = jlo; j <= jhi; ++j) {
    Ival t = 1.0 - abs_i(nr.x - from_rational(j, n)) * double(n);
    double phi_hi = std::fmin(1.0, std::fmax(0.0, t.hi));
    double phi_lo = std::fmin(1.0, std::fmax(0.0, t.lo));
    if (phi_hi <= 0.0) continue;
    Ival c = Ival(phi_lo, phi_hi) * w;
    if (!nr.certain) c = Ival(0.0, c.hi);
    out.push_back({(std::int32_t)(nr.node % n), (std::int32_t)(j % n), c});
  }
}

// Work is chunked by contiguous node ranges inside one branch; chunk
// boundaries are fixed so the emitted triples do not depend on the thread
// count. Each chunk re-solves one overlapping root so segments never span
// chunks.
struct Chunk {
  int branch;
  long long k0, k1; // node range; k0 > k1 encodes "branch has no candidates"
};

constexpr long long kChunkNodes = 4096;

std::vector<Chunk> plan_chunks(const PiecewiseMap& map,
                               const std::vector<BranchImage>& imgs,
                               long long n, std::vector<long long>& kA,
                               std::vector<long long>& kB) {
  std::vector<Chunk> chunks;
  for (size_t b = 0; b < map.branches.size(); ++b) {
    kA[b] = first_candidate(n, imgs[b].bottom);
    kB[b] = last_candidate(n, imgs[b].top);
    if (kA[b] > kB[b]) {
      chunks.push_back({int(b), 1, 0});
      continue;
    }
    for (long long k = kA[b]; k <= kB[b]; k += kChunkNodes)
      chunks.push_back({int(b), k, std::min(kB[b], k + kChunkNodes - 1)});
  }
  return chunks;
}

void run_chunk_ulam(const PiecewiseMap& map, const std::vector<BranchEnds>& ends,
                    const std::vector<BranchImage>& imgs,
                    const std::vector<long long>& kA,
                    const std::vector<long long>& kB, long long n,
                    const Chunk& ch, std::vector<Triple>& out) {
  const Branch& p = map.branches[ch.branch];
  const BranchEnds& e = ends[ch.branch];
  const BranchImage& img = imgs[ch.branch];
  rnd::require_nearest();
  if (ch.k0 > ch.k1) {
    // no node preimage in this branch: the whole image fits in one cell
    long long row = (long long)std::floor(0.5 * (img.bottom.lo + img.top.hi) *
                                          double(n));
    ulam_segment(e.left, e.right, row, n, out);
    return;
  }
  long long lastk = std::min(kB[ch.branch], ch.k1 + 1);
  std::vector<NodeRoot> roots;
  solve_nodes(p, img, n, ch.k0, lastk, roots);
  auto root_of = [&](long long k) -> const Ival& {
    return roots[size_t(k - ch.k0)].x;
  };
  for (long long k = ch.k0; k <= ch.k1; ++k) {
    if (p.increasing) {
      const Ival& A = root_of(k);
      const Ival& B = k < kB[ch.branch] ? root_of(k + 1) : e.right;
      ulam_segment(A, B, k, n, out);
    } else {
      const Ival& A = k < kB[ch.branch] ? root_of(k + 1) : e.left;
      const Ival& B = root_of(k);
      ulam_segment(A, B, k, n, out);
    }
  }
  if (ch.k0 == kA[ch.branch]) {
    // the boundary segment below the lowest node preimage
    if (p.increasing)
      ulam_segment(e.left, root_of(ch.k0), ch.k0 - 1, n, out);
    else
      ulam_segment(root_of(ch.k0), e.right, ch.k0 - 1, n, out);
  }
}

void run_chunk_hat(const PiecewiseMap& map,
                   const std::vector<BranchImage>& imgs, long long n,
                   const Chunk& ch, std::vector<Triple>& out) {
  if (ch.k0 > ch.k1) return;
  const Branch& p = map.branches[ch.branch];
  rnd::require_nearest();
  std::vector<NodeRoot> roots;
  solve_nodes(p, imgs[ch.branch], n, ch.k0, ch.k1, roots);
  for (const NodeRoot& nr : roots) {
    // Torus accounting at the wrap 0 ~ 1: the node reached at the branch's
    // upper domain endpoint is owned by the neighboring branch, so each
    // preimage of the wrap point is counted exactly once.
    if (p.increasing ? nr.node == n : nr.node == 0) continue;
    hat_point(p, nr, n, out);
  }
}

} // namespace

std::vector<Ival> pullback(const PiecewiseMap& map, const Partition& part) {
  if (map.branches.empty())
    throw std::invalid_argument("pullback: map has no branches");
  const long long n = part.n;
  std::vector<BranchEnds> ends = branch_ends(map);
  std::vector<Ival> pts;
  pts.push_back(ends[0].left);
  for (size_t b = 0; b < map.branches.size(); ++b) {
    const Branch& p = map.branches[b];
    BranchImage img = branch_image(p, ends[b]);
    long long kA = first_candidate(n, img.bottom);
    long long kB = last_candidate(n, img.top);
    std::vector<NodeRoot> roots;
    if (kA <= kB) solve_nodes(p, img, n, kA, kB, roots);
    if (!p.increasing) std::reverse(roots.begin(), roots.end());
    for (const NodeRoot& nr : roots) pts.push_back(nr.x);
    pts.push_back(ends[b].right);
  }
  // merge enclosures that overlap (node preimages pinned at shared branch
  // endpoints); the remaining list is strictly increasing
  std::vector<Ival> merged;
  for (const Ival& x : pts) {
    if (!merged.empty() && x.lo <= merged.back().hi)
      merged.back() = hull(merged.back(), x);
    else
      merged.push_back(x);
  }
  return merged;
}

IntervalSparseMatrix assemble(const PiecewiseMap& map, const Partition& part,
                              SchemeKind scheme, int threads) {
  if (map.branches.empty())
    throw std::invalid_argument("assemble: map has no branches");
  const long long n = part.n;
  std::vector<BranchEnds> ends = branch_ends(map);
  std::vector<BranchImage> imgs(map.branches.size());
  for (size_t b = 0; b < map.branches.size(); ++b)
    imgs[b] = branch_image(map.branches[b], ends[b]);

  std::vector<long long> kA(map.branches.size()), kB(map.branches.size());
  std::vector<Chunk> chunks = plan_chunks(map, imgs, n, kA, kB);
  std::vector<std::vector<Triple>> parts(chunks.size());
  parallel_for_chunks(int(chunks.size()), threads, [&](int c) {
    if (scheme == SchemeKind::Ulam)
      run_chunk_ulam(map, ends, imgs, kA, kB, n, chunks[size_t(c)],
                     parts[size_t(c)]);
    else
      run_chunk_hat(map, imgs, n, chunks[size_t(c)], parts[size_t(c)]);
  });

  IntervalSparseMatrix mat;
  mat.n = n;
  mat.scheme = scheme;
  size_t total = 0;
  for (const auto& v : parts) total += v.size();
  mat.triples.reserve(total);
  for (const auto& v : parts)
    mat.triples.insert(mat.triples.end(), v.begin(), v.end());
  std::stable_sort(mat.triples.begin(), mat.triples.end(),
                   [](const Triple& a, const Triple& b) {
                     return a.i != b.i ? a.i < b.i : a.j < b.j;
                   });

  // sum duplicate (i, j) runs in interval arithmetic
  std::vector<Triple> summed;
  summed.reserve(mat.triples.size());
  for (size_t t = 0; t < mat.triples.size();) {
    Triple acc = mat.triples[t];
    size_t s = t + 1;
    while (s < mat.triples.size() && mat.triples[s].i == acc.i &&
           mat.triples[s].j == acc.j) {
      acc.v = acc.v + mat.triples[s].v;
      ++s;
    }
    summed.push_back(acc);
    t = s;
  }
  mat.triples = std::move(summed);

  // Midpoint matrix in CSR layout. Entries that merely enclose a possible
  // zero (lo == 0, from preimages pinned at cell or node boundaries) take
  // midpoint exactly 0 and are left out of the floating matrix; the radius
  // bound below still accounts for their full upper width. This keeps the
  // floating sparsity at the structural two-per-branch row limit.
  rnd::require_nearest();
  std::vector<double> mids(mat.triples.size());
  for (size_t t = 0; t < mat.triples.size(); ++t)
    mids[t] = mat.triples[t].v.lo == 0.0 ? 0.0 : mat.triples[t].v.mid();
  mat.row_ptr.assign(size_t(n) + 1, 0);
  for (size_t t = 0; t < mat.triples.size(); ++t)
    if (mids[t] != 0.0) mat.row_ptr[size_t(mat.triples[t].i) + 1]++;
  for (size_t r = 0; r < size_t(n); ++r) mat.row_ptr[r + 1] += mat.row_ptr[r];
  mat.col.reserve(size_t(mat.row_ptr[size_t(n)]));
  mat.mid.reserve(size_t(mat.row_ptr[size_t(n)]));
  for (size_t t = 0; t < mat.triples.size(); ++t) {
    if (mids[t] == 0.0) continue;
    mat.col.push_back(mat.triples[t].j);
    mat.mid.push_back(mids[t]);
  }
  for (size_t r = 0; r < size_t(n); ++r) {
    long long count = mat.row_ptr[r + 1] - mat.row_ptr[r];
    if (count > mat.z) mat.z = (std::int32_t)count;
  }

  // delta: operator norm of the radius matrix in the scheme norm (max
  // column sum for l1, max row sum for linf)
  std::vector<double> radsum(size_t(n), 0.0);
  for (size_t t = 0; t < mat.triples.size(); ++t) {
    const Triple& tr = mat.triples[t];
    double rad = std::fmax(rnd::sub_up(tr.v.hi, mids[t]),
                           rnd::sub_up(mids[t], tr.v.lo));
    size_t slot = scheme == SchemeKind::Ulam ? size_t(tr.j) : size_t(tr.i);
    radsum[slot] = rnd::add_up(radsum[slot], rad);
  }
  for (double s : radsum) mat.delta = std::fmax(mat.delta, s);

  // i_residual: norm of the residual row functional i* - i*L. Column sums
  // of the enclosure give |1 - colsum| bounds; the l1 pairing takes their
  // max, the linf pairing the h-weighted total.
  std::vector<Ival> colsum(size_t(n), Ival(0.0));
  for (const Triple& tr : mat.triples)
    colsum[size_t(tr.j)] = colsum[size_t(tr.j)] + tr.v;
  if (scheme == SchemeKind::Ulam) {
    for (const Ival& cs : colsum)
      mat.i_residual = std::fmax(mat.i_residual, (Ival(1.0) - cs).mag());
  } else {
    double tot = 0.0;
    for (const Ival& cs : colsum)
      tot = rnd::add_up(tot, (Ival(1.0) - cs).mag());
    mat.i_residual = rnd::div_up(tot, double(n));
  }
  return mat;
}

void export_matrix(const IntervalSparseMatrix& mat, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("export_matrix: cannot open " + path);
  for (const Triple& tr : mat.triples)
    std::fprintf(f, "%d %d %.17g %.17g\n", tr.i, tr.j, tr.v.lo, tr.v.hi);
  std::fclose(f);

  nlohmann::json side;
  side["n"] = mat.n;
  side["z"] = mat.z;
  side["delta"] = mat.delta;
  side["i_residual"] = mat.i_residual;
  std::FILE* g = std::fopen((path + ".json").c_str(), "w");
  if (!g) throw std::runtime_error("export_matrix: cannot open " + path + ".json");
  std::string text = side.dump(2);
  std::fwrite(text.data(), 1, text.size(), g);
  std::fputc('\n', g);
  std::fclose(g);
}

} // namespace certimeasure
