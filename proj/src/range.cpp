#include "certimeasure/range.hpp"

#include <limits>
#include <queue>
#include <vector>

namespace certimeasure {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// A box is final when splitting it further cannot move a double endpoint.
bool box_is_atomic(const Ival& b) {
  double m = b.mid();
  return !(b.lo < m && m < b.hi);
}

struct InfEntry {
  double image_lo;
  Ival box;
  bool operator>(const InfEntry& o) const { return image_lo > o.image_lo; }
};

struct InfResult {
  double bound;    // certified: bound <= inf f
  double attained; // upper bound of f at some point of dom, so inf f <= attained
};

// Lower-bounds inf f over dom. Pops the box responsible for the current
// certified minimum; if an attained value is within tol of it we are done,
// otherwise split and recurse. Boxes where f is undefined (domain errors on
// wide boxes, e.g. an overestimated denominator straddling 0) are forced to
// split; if one is atomic the error is genuine and propagates.
InfResult bound_inf(const IFunc& f, const Ival& dom, double tol, int budget) {
  auto eval = [&](const Ival& b) -> Ival {
    try {
      return f(b);
    } catch (const std::domain_error&) {
      if (box_is_atomic(b)) throw;
      return Ival(-kInf, kInf);
    }
  };

  std::priority_queue<InfEntry, std::vector<InfEntry>, std::greater<InfEntry>> heap;
  double attained = eval(Ival(dom.mid())).hi;
  heap.push({eval(dom).lo, dom});
  double settled = kInf; // min image.lo over boxes no longer refined
  int used = 2;

  while (!heap.empty()) {
    InfEntry cur = heap.top();
    if (cur.image_lo >= settled) break; // nothing in the heap can improve
    heap.pop();
    if (attained - cur.image_lo <= tol || box_is_atomic(cur.box) ||
        used >= budget) {
      settled = std::fmin(settled, cur.image_lo);
      if (used >= budget) break;
      continue;
    }
    double m = cur.box.mid();
    Ival halves[2] = {Ival(cur.box.lo, m), Ival(m, cur.box.hi)};
    for (const Ival& h : halves) {
      Ival img = eval(h);
      attained = std::fmin(attained, eval(Ival(h.mid())).hi);
      heap.push({img.lo, h});
      used += 2;
    }
  }
  while (!heap.empty()) {
    settled = std::fmin(settled, heap.top().image_lo);
    heap.pop();
  }
  return InfResult{settled, attained};
}

} // namespace

RangeBound bound_range(const IFunc& f, const Ival& dom, double tol, int budget) {
  double inf_b = bound_inf(f, dom, tol, budget / 2).bound;
  IFunc neg = [&f](const Ival& x) { return -f(x); };
  double sup_b = -bound_inf(neg, dom, tol, budget / 2).bound;
  return RangeBound{inf_b, sup_b};
}

Ival inf_enclosure(const IFunc& f, const Ival& dom, double tol, int budget) {
  InfResult r = bound_inf(f, dom, tol, budget);
  return Ival(r.bound, std::fmax(r.bound, r.attained));
}

Ival sup_enclosure(const IFunc& f, const Ival& dom, double tol, int budget) {
  IFunc neg = [&f](const Ival& x) { return -f(x); };
  Ival n = inf_enclosure(neg, dom, tol, budget);
  return Ival(-n.hi, -n.lo);
}

Ival interval_newton(const IFunc& f, const IFunc& df, const Ival& target,
                     const Ival& x0, double tol, int max_iter) {
  Ival x = x0;
  for (int it = 0; it < max_iter; ++it) {
    if (x.width() <= tol) break;
    Ival d = df(x);
    if (d.lo <= 0.0 && d.hi >= 0.0)
      throw std::domain_error("interval_newton: derivative not sign-definite");
    double m = x.mid();
    Ival fm = f(Ival(m)) - target;
    Ival n = Ival(m) - fm / d;
    if (!intersects(n, x))
      throw std::domain_error("interval_newton: no root certified");
    Ival next = intersect(n, x);
    if (next.width() < x.width()) {
      x = next;
      continue;
    }
    // Newton stalled; bisect on the certified image of each half. Keeping
    // every half whose image may contain the target stays sound.
    if (box_is_atomic(x)) break;
    Ival left(x.lo, m), right(m, x.hi);
    bool in_left = intersects(f(left), target);
    bool in_right = intersects(f(right), target);
    if (in_left && !in_right) {
      x = left;
    } else if (in_right && !in_left) {
      x = right;
    } else if (!in_left && !in_right) {
      throw std::domain_error("interval_newton: no root certified");
    } else {
      break; // target straddles the split point; x is as tight as it gets
    }
  }
  return x;
}

} // namespace certimeasure
