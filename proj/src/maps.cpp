#include "certimeasure/maps.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

namespace certimeasure {

namespace {

// Clamp an interval enclosure into a branch domain. Sound whenever the true
// value is known to lie in the domain; used when feeding a composed inner
// value into the next branch, whose formula may be undefined outside it.
Ival clamp_to(const Ival& v, const Ival& dom) {
  if (v.hi < dom.lo) return Ival(dom.lo);
  if (v.lo > dom.hi) return Ival(dom.hi);
  return Ival(std::fmax(v.lo, dom.lo), std::fmin(v.hi, dom.hi));
}

} // namespace

PiecewiseMap map_doubling() {
  PiecewiseMap m;
  m.descriptor = "doubling";
  m.is_full_branch = true;
  m.circle_smooth = true;
  for (int i = 0; i < 2; ++i) {
    Branch b;
    b.dom = Ival(0.5 * i, 0.5 * (i + 1));
    b.eval = [i](const Ival& x) { return Ival(2.0) * x - Ival(double(i)); };
    b.deriv = [](const Ival&) { return Ival(2.0); };
    b.deriv2 = [](const Ival&) { return Ival(0.0); };
    b.increasing = true;
    b.full_range = true;
    m.branches.push_back(std::move(b));
  }
  return m;
}

PiecewiseMap map_linear(int k) {
  if (k < 2) throw std::invalid_argument("map_linear: slope must be at least 2");
  PiecewiseMap m;
  m.descriptor = "linear:" + std::to_string(k);
  m.is_full_branch = true;
  m.circle_smooth = true;
  for (int i = 0; i < k; ++i) {
    Branch b;
    b.dom = Ival(from_rational(i, k).lo, from_rational(i + 1, k).hi);
    b.eval = [k, i](const Ival& x) {
      return Ival(double(k)) * x - Ival(double(i));
    };
    b.deriv = [k](const Ival&) { return Ival(double(k)); };
    b.deriv2 = [](const Ival&) { return Ival(0.0); };
    b.increasing = true;
    b.full_range = true;
    m.branches.push_back(std::move(b));
  }
  return m;
}

PiecewiseMap map_lanford() {
  // T(x) = 2x + x(1-x)/2 mod 1 = 2.5x - 0.5x^2 mod 1; the wrap point solves
  // 2.5s - 0.5s^2 = 1, s = (5 - sqrt(17))/2
  PiecewiseMap m;
  m.descriptor = "lanford";
  m.is_full_branch = true;
  m.circle_smooth = false;
  Ival split = (Ival(5.0) - sqrt_i(Ival(17.0))) / 2.0;
  auto body = [](const Ival& x) { return Ival(2.5) * x - Ival(0.5) * x * x; };
  Branch b1;
  b1.dom = Ival(0.0, split.hi);
  b1.eval = body;
  b1.deriv = [](const Ival& x) { return Ival(2.5) - x; };
  b1.deriv2 = [](const Ival&) { return Ival(-1.0); };
  b1.increasing = true;
  b1.full_range = true;
  Branch b2 = b1;
  b2.dom = Ival(split.lo, 1.0);
  b2.eval = [body](const Ival& x) { return body(x) - Ival(1.0); };
  m.branches = {std::move(b1), std::move(b2)};
  return m;
}

PiecewiseMap map_nonlinear_nonmarkov() {
  // Three full quadratic-or-linear branches and a short linear last branch
  // with image [0, 2/5]; |T'| >= 3 throughout.
  PiecewiseMap m;
  m.descriptor = "nonmarkov";
  m.is_full_branch = false;
  m.circle_smooth = false;
  Ival a1 = from_rational(5, 17), a2 = from_rational(10, 17),
       a3 = from_rational(15, 17);
  Ival slope = from_rational(17, 5), quad = from_rational(34, 25);

  Branch b1;
  b1.dom = Ival(0.0, a1.hi);
  b1.eval = [slope](const Ival& x) { return slope * x; };
  b1.deriv = [slope](const Ival&) { return slope; };
  b1.deriv2 = [](const Ival&) { return Ival(0.0); };
  b1.increasing = true;
  b1.full_range = true;
  m.branches.push_back(std::move(b1));

  for (int i = 0; i < 2; ++i) {
    Ival a = (i == 0) ? a1 : a2;
    Ival end = (i == 0) ? a2 : a3;
    Branch b;
    b.dom = Ival(a.lo, end.hi);
    b.eval = [quad, a](const Ival& x) {
      Ival t = x - a;
      return quad * t * t + Ival(3.0) * t;
    };
    b.deriv = [quad, a](const Ival& x) {
      return Ival(2.0) * quad * (x - a) + Ival(3.0);
    };
    b.deriv2 = [quad](const Ival&) { return Ival(2.0) * quad; };
    b.increasing = true;
    b.full_range = true;
    m.branches.push_back(std::move(b));
  }

  Branch b4;
  b4.dom = Ival(a3.lo, 1.0);
  b4.eval = [slope, a3](const Ival& x) { return slope * (x - a3); };
  b4.deriv = [slope](const Ival&) { return slope; };
  b4.deriv2 = [](const Ival&) { return Ival(0.0); };
  b4.increasing = true;
  b4.full_range = false;
  m.branches.push_back(std::move(b4));
  return m;
}

PiecewiseMap map_perturbed_4x() {
  // T(x) = 4x + sin(8 pi x)/100 mod 1. The wrap points are exactly i/4
  // because sin(2 pi i) = 0, and T' = 4 + (8 pi / 100) cos(8 pi x) matches
  // across 0 ~ 1, so the map is C2 on the circle.
  PiecewiseMap m;
  m.descriptor = "perturbed4x";
  m.is_full_branch = true;
  m.circle_smooth = true;
  Ival omega = Ival(8.0) * pi_i();
  Ival amp = from_rational(1, 100);
  for (int i = 0; i < 4; ++i) {
    Branch b;
    b.dom = Ival(0.25 * i, 0.25 * (i + 1));
    b.eval = [omega, amp, i](const Ival& x) {
      return Ival(4.0) * x + amp * sin_i(omega * x) - Ival(double(i));
    };
    b.deriv = [omega, amp](const Ival& x) {
      return Ival(4.0) + amp * omega * cos_i(omega * x);
    };
    b.deriv2 = [omega, amp](const Ival& x) {
      return -(amp * omega * omega * sin_i(omega * x));
    };
    b.increasing = true;
    b.full_range = true;
    m.branches.push_back(std::move(b));
  }
  return m;
}

namespace {

// Power of a nonnegative interval with rational exponent p/q, using the
// exact-double fast path whenever p/q is dyadic.
struct RatPow {
  long long p, q;
  double as_double;
  bool exact;

  RatPow(long long pp, long long qq) : p(pp), q(qq) {
    Ival r = from_rational(p, q);
    exact = (r.lo == r.hi);
    as_double = r.lo;
  }
  Ival operator()(const Ival& base) const {
    Ival b = base.lo < 0.0 ? Ival(0.0, std::fmax(base.hi, 0.0)) : base;
    // power-of-two denominators hit the fast square-root path in pow_i
    if ((q & (q - 1)) == 0) return pow_i(b, p, q);
    return exact ? pow_i(b, as_double) : pow_i(b, p, q);
  }
};

} // namespace

PiecewiseMap map_lorenz(long long tp, long long tq, long long ap, long long aq) {
  if (tp <= 0 || tq <= 0 || ap <= 0 || aq <= 0 || ap >= aq)
    throw std::invalid_argument("map_lorenz: need theta > 0 and 0 < alpha < 1");
  Ival theta = from_rational(tp, tq);
  Ival alpha = from_rational(ap, aq);
  RatPow pw_a(ap, aq);           // alpha
  RatPow pw_am1(ap - aq, aq);    // alpha - 1
  RatPow pw_am2(ap - 2 * aq, aq); // alpha - 2
  RatPow pw_1ma(aq - ap, aq);    // 1 - alpha

  Ival peak = theta * pw_a(Ival(0.5));
  if (peak.hi > 1.0)
    throw std::invalid_argument("map_lorenz: image leaves [0,1]");

  PiecewiseMap m;
  m.descriptor = "lorenz:" + std::to_string(tp) + "/" + std::to_string(tq) +
                 ":" + std::to_string(ap) + "/" + std::to_string(aq);
  m.is_full_branch = false;
  m.circle_smooth = false;

  Ival ta = theta * alpha;
  Ival ta1 = theta * alpha * (Ival(1.0) - alpha);

  Branch left;
  left.dom = Ival(0.0, 0.5);
  left.eval = [theta, pw_a](const Ival& x) {
    return theta * pw_a(Ival(0.5) - x);
  };
  left.deriv = [ta, pw_am1](const Ival& x) {
    return -(ta * pw_am1(Ival(0.5) - x));
  };
  left.deriv2 = [ta1, pw_am2](const Ival& x) {
    return -(ta1 * pw_am2(Ival(0.5) - x));
  };
  left.increasing = false;
  left.full_range = false;
  left.distortion_bounded = false;
  // |(1/T')'| = (1-alpha)/(theta alpha) (1/2 - x)^(-alpha); the integral over
  // [c, d] has the closed form [(1/2-c)^(1-alpha) - (1/2-d)^(1-alpha)]/(theta alpha)
  left.d1_integral = [ta, pw_1ma](const Ival& yr) {
    Ival val = (pw_1ma(Ival(0.5) - Ival(yr.lo)) - pw_1ma(Ival(0.5) - Ival(yr.hi))) / ta;
    return Ival(std::fmax(val.lo, 0.0), std::fmax(val.hi, 0.0));
  };

  Branch right;
  right.dom = Ival(0.5, 1.0);
  right.eval = [theta, pw_a](const Ival& x) {
    return Ival(1.0) - theta * pw_a(x - Ival(0.5));
  };
  right.deriv = [ta, pw_am1](const Ival& x) {
    return -(ta * pw_am1(x - Ival(0.5)));
  };
  right.deriv2 = [ta1, pw_am2](const Ival& x) {
    return ta1 * pw_am2(x - Ival(0.5));
  };
  right.increasing = false;
  right.full_range = false;
  right.distortion_bounded = false;
  right.d1_integral = [ta, pw_1ma](const Ival& yr) {
    Ival val = (pw_1ma(Ival(yr.hi) - Ival(0.5)) - pw_1ma(Ival(yr.lo) - Ival(0.5))) / ta;
    return Ival(std::fmax(val.lo, 0.0), std::fmax(val.hi, 0.0));
  };

  m.branches = {std::move(left), std::move(right)};
  return m;
}

namespace {

long long parse_ll(const std::string& s) {
  char* end = nullptr;
  long long v = std::strtoll(s.c_str(), &end, 10);
  if (end == s.c_str() || *end != '\0')
    throw std::invalid_argument("map_from_name: bad integer '" + s + "'");
  return v;
}

// "p/q" or plain "p"
std::pair<long long, long long> parse_rational(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) return {parse_ll(s), 1};
  return {parse_ll(s.substr(0, slash)), parse_ll(s.substr(slash + 1))};
}

} // namespace

PiecewiseMap map_from_name(const std::string& name) {
  std::vector<std::string> parts;
  size_t pos = 0;
  while (pos <= name.size()) {
    size_t colon = name.find(':', pos);
    if (colon == std::string::npos) {
      parts.push_back(name.substr(pos));
      break;
    }
    parts.push_back(name.substr(pos, colon - pos));
    pos = colon + 1;
  }
  const std::string& head = parts[0];
  if (head == "doubling") return map_doubling();
  if (head == "linear") {
    if (parts.size() != 2)
      throw std::invalid_argument("map_from_name: linear needs a slope, e.g. linear:3");
    return map_linear(int(parse_ll(parts[1])));
  }
  if (head == "lanford") return map_lanford();
  if (head == "nonmarkov") return map_nonlinear_nonmarkov();
  if (head == "perturbed4x") return map_perturbed_4x();
  if (head == "lorenz") {
    long long tp = 109, tq = 64, ap = 51, aq = 64;
    if (parts.size() >= 2) std::tie(tp, tq) = parse_rational(parts[1]);
    if (parts.size() >= 3) std::tie(ap, aq) = parse_rational(parts[2]);
    return map_lorenz(tp, tq, ap, aq);
  }
  throw std::invalid_argument("map_from_name: unknown map '" + name + "'");
}

namespace {

enum class CutStatus { below, above, mid };

struct Cut {
  CutStatus status;
  Ival at;
  bool exact_root = false;
};

// Locate the preimage of the value t inside the branch p, or report that the
// whole image lies on one side of t.
Cut cut_at(const Branch& p, double t) {
  Ival va = p.eval(Ival(p.dom.lo));
  Ival vb = p.eval(Ival(p.dom.hi));
  Ival lo_val = p.increasing ? va : vb;
  Ival hi_val = p.increasing ? vb : va;
  if (hi_val.hi < t) return {CutStatus::below, Ival(), false};
  if (lo_val.lo > t) return {CutStatus::above, Ival(), false};
  try {
    Ival r = interval_newton(p.eval, p.deriv, Ival(t), p.dom, 0.0);
    return {CutStatus::mid, r, true};
  } catch (const std::domain_error&) {
    // t sits in the rounding slack just outside the true image; snap the cut
    // to the endpoint whose value is nearest
    bool near_low = std::fabs(lo_val.mid() - t) <= std::fabs(hi_val.mid() - t);
    double x = (near_low == p.increasing) ? p.dom.lo : p.dom.hi;
    return {CutStatus::mid, Ival(x), false};
  }
}

struct Piece {
  Branch br;
  std::vector<int> seq;
};

} // namespace

PiecewiseMap iterate(const PiecewiseMap& map, int k) {
  if (map.iterate_of != 1)
    throw std::invalid_argument("iterate: map is already an iterate");
  if (k < 1) throw std::invalid_argument("iterate: k must be positive");
  if (k == 1) return map;

  std::vector<Piece> pieces;
  for (size_t i = 0; i < map.branches.size(); ++i)
    pieces.push_back({map.branches[i], {int(i)}});

  for (int level = 1; level < k; ++level) {
    std::vector<Piece> next;
    for (const Piece& p : pieces) {
      for (size_t bi = 0; bi < map.branches.size(); ++bi) {
        const Branch& b = map.branches[bi];
        Cut cc = cut_at(p.br, b.dom.lo);
        Cut cd = cut_at(p.br, b.dom.hi);
        if (cc.status == CutStatus::below || cd.status == CutStatus::above)
          continue; // the piece image misses [b.dom.lo, b.dom.hi]
        double left, right;
        if (p.br.increasing) {
          left = (cc.status == CutStatus::above) ? p.br.dom.lo : cc.at.lo;
          right = (cd.status == CutStatus::below) ? p.br.dom.hi : cd.at.hi;
        } else {
          left = (cd.status == CutStatus::below) ? p.br.dom.lo : cd.at.lo;
          right = (cc.status == CutStatus::above) ? p.br.dom.hi : cc.at.hi;
        }
        if (!(left < right)) continue;
        bool covers = cc.status == CutStatus::mid && cc.exact_root &&
                      cd.status == CutStatus::mid && cd.exact_root;

        Branch nb;
        nb.dom = Ival(left, right);
        IFunc pe = p.br.eval, pd = p.br.deriv, pd2 = p.br.deriv2;
        IFunc be = b.eval, bd = b.deriv, bd2 = b.deriv2;
        Ival bdom = b.dom;
        nb.eval = [pe, be, bdom](const Ival& x) {
          return be(clamp_to(pe(x), bdom));
        };
        nb.deriv = [pe, pd, bd, bdom](const Ival& x) {
          return bd(clamp_to(pe(x), bdom)) * pd(x);
        };
        nb.deriv2 = [pe, pd, pd2, bd, bd2, bdom](const Ival& x) {
          Ival v = clamp_to(pe(x), bdom);
          Ival dp = pd(x);
          return bd2(v) * dp * dp + bd(v) * pd2(x);
        };
        nb.increasing = (p.br.increasing == b.increasing);
        nb.full_range = covers && b.full_range;
        nb.distortion_bounded = p.br.distortion_bounded && b.distortion_bounded;
        Piece np{std::move(nb), p.seq};
        np.seq.push_back(int(bi));
        next.push_back(std::move(np));
      }
    }
    pieces = std::move(next);
  }

  std::stable_sort(pieces.begin(), pieces.end(),
                   [](const Piece& a, const Piece& b) {
                     return a.br.dom.lo < b.br.dom.lo;
                   });

  PiecewiseMap out;
  out.descriptor = map.descriptor + "^" + std::to_string(k);
  out.circle_smooth = map.circle_smooth;
  out.iterate_of = k;
  out.base = map.branches;
  out.is_full_branch = true;
  for (Piece& p : pieces) {
    out.is_full_branch = out.is_full_branch && p.br.full_range;
    out.branches.push_back(std::move(p.br));
    out.branch_seq.push_back(std::move(p.seq));
  }
  return out;
}

} // namespace certimeasure
