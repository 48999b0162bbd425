#include "whitney/partition_of_unity.hpp"

#include <algorithm>
#include <cmath>

namespace whitney {

Transition smoothstep(double t) {
  if (t <= 0.0) return {0.0, 0.0, 0.0};
  if (t >= 1.0) return {1.0, 0.0, 0.0};
  const double t2 = t * t;
  const double u = 1.0 - t;
  return {t2 * t * (10.0 - 15.0 * t + 6.0 * t2), 30.0 * t2 * u * u, 60.0 * t * u * (1.0 - 2.0 * t)};
}

namespace {

// One-dimensional factor s((x - lo)/m) * s((hi - x)/m) with lo = a - m,
// hi = b + m.
Transition axis_factor(double x, double a, double b, double m) {
  const Transition l = smoothstep((x - (a - m)) / m);
  const Transition r = smoothstep(((b + m) - x) / m);
  const double im = 1.0 / m;
  const double l1 = l.d1 * im, l2 = l.d2 * im * im;
  const double r1 = -r.d1 * im, r2 = r.d2 * im * im;
  return {l.value * r.value, l1 * r.value + l.value * r1, l2 * r.value + 2.0 * l1 * r1 + l.value * r2};
}

}  // namespace

Jet pre_bump(const DyadicSquare& q, const Vec2& x, const BumpSpec& spec) {
  const double d = q.side();
  const double m = spec.margin * d;
  const Vec2 a = q.corner();
  Jet j;
  if (x.x() <= a.x() - m || x.x() >= a.x() + d + m || x.y() <= a.y() - m || x.y() >= a.y() + d + m)
    return j;
  const Transition u = axis_factor(x.x(), a.x(), a.x() + d, m);
  const Transition v = axis_factor(x.y(), a.y(), a.y() + d, m);
  j.value = u.value * v.value;
  j.gradient = {u.d1 * v.value, u.value * v.d1};
  j.hessian << u.d2 * v.value, u.d1 * v.d1, u.d1 * v.d1, u.value * v.d2;
  return j;
}

namespace {

void normalize(std::vector<PouContribution>& c) {
  double s = 0.0;
  Vec2 gs = Vec2::Zero();
  Mat2 hs = Mat2::Zero();
  for (const auto& k : c) {
    s += k.theta.value;
    gs += k.theta.gradient;
    hs += k.theta.hessian;
  }
  const double is = 1.0 / s;
  for (auto& k : c) {
    Jet& t = k.theta;
    const double th = t.value * is;
    const Vec2 g = (t.gradient - th * gs) * is;
    const Mat2 h = (t.hessian - g * gs.transpose() - gs * g.transpose() - th * hs) * is;
    t.value = th;
    t.gradient = g;
    t.hessian = h;
  }
}

}  // namespace

void pou_eval_in(const CzDecomposition& decomp, std::size_t q, const Vec2& x,
                 const BumpSpec& spec, PouEvaluation& out) {
  out.contributions.clear();
  out.containing = q;
  auto add = [&](std::size_t k) {
    Jet j = pre_bump(decomp.square(k), x, spec);
    if (j.value > 0.0) out.contributions.push_back({k, j});
  };
  add(q);
  for (std::uint32_t k : decomp.neighbors(q)) add(k);
  normalize(out.contributions);
}

PouEvaluation pou_eval(const CzDecomposition& decomp, const Vec2& x, const BumpSpec& spec) {
  PouEvaluation out;
  out.containing = decomp.locate(x);
  decomp.for_each_covering(x, spec.margin, [&](std::size_t k) {
    Jet j = pre_bump(decomp.square(k), x, spec);
    if (j.value > 0.0) out.contributions.push_back({k, j});
  });
  std::sort(out.contributions.begin(), out.contributions.end(),
            [](const PouContribution& a, const PouContribution& b) { return a.square < b.square; });
  normalize(out.contributions);
  return out;
}

namespace {

// Offsets relative to the side; they land in the transition bands of
// neighbours of every admissible size, on the plateau, and at the centre.
constexpr double kStencil[] = {0.0125, 0.025, 0.05, 0.075, 0.5, 0.925, 0.95, 0.975, 0.9875};
constexpr double kRing = 0.0501;

}  // namespace

PouReport verify_pou(const CzDecomposition& decomp, const PouSampling& sampling, const BumpSpec& spec) {
  const int per_axis = sampling.per_axis;
  PouReport r;
  r.min_theta = 1.0;
  r.max_theta = 0.0;
  std::vector<double> offsets;
  offsets.assign(std::begin(kStencil), std::end(kStencil));
  if (per_axis > 0) {
    offsets.clear();
    for (int k = 0; k < per_axis; ++k) offsets.push_back((k + 0.5) / per_axis);
    offsets.insert(offsets.end(), std::begin(kStencil), std::end(kStencil));
    std::sort(offsets.begin(), offsets.end());
  }
  const double half = 4.0;
  std::size_t stride = 1;
  if (sampling.max_squares > 0 && decomp.size() > sampling.max_squares)
    stride = (decomp.size() + sampling.max_squares - 1) / sampling.max_squares;
  for (std::size_t q = 0; q < decomp.size(); q += stride) {
    const DyadicSquare& sq = decomp.square(q);
    const double d = sq.side();
    const Vec2 a = sq.corner();
    for (double ox : offsets) {
      for (double oy : offsets) {
        const Vec2 x = a + d * Vec2(ox, oy);
        const PouEvaluation ev = pou_eval(decomp, x, spec);
        double s = 0.0;
        Vec2 gs = Vec2::Zero();
        Mat2 hs = Mat2::Zero();
        double dmin = d;
        for (const auto& c : ev.contributions) {
          const double dq = decomp.square(c.square).side();
          dmin = std::min(dmin, dq);
          s += c.theta.value;
          gs += c.theta.gradient;
          hs += c.theta.hessian;
          r.min_theta = std::min(r.min_theta, c.theta.value);
          r.max_theta = std::max(r.max_theta, c.theta.value);
          r.bound0 = std::max(r.bound0, std::abs(c.theta.value));
          r.bound1 = std::max(r.bound1, c.theta.gradient.norm() * dq);
          r.bound2 = std::max(r.bound2, c.theta.hessian.norm() * dq * dq);
        }
        r.partition_defect = std::max(r.partition_defect, std::abs(1.0 - s));
        r.gradient_sum = std::max(r.gradient_sum, gs.norm() * dmin);
        r.hessian_sum = std::max(r.hessian_sum, hs.norm() * dmin * dmin);
        r.max_contributions = std::max(r.max_contributions, ev.contributions.size());
        ++r.sample_count;
      }
    }
    // Ring just outside the fixed 1.1Q; phi_Q must vanish there.
    const int ring = 8;
    const double lo = -kRing, hi = 1.0 + kRing;
    for (int k = 0; k <= ring; ++k) {
      const double t = lo + (hi - lo) * k / ring;
      const Vec2 pts[4] = {{t, lo}, {t, hi}, {lo, t}, {hi, t}};
      for (const Vec2& o : pts) {
        const Vec2 x = a + d * o;
        if (std::abs(x.x()) > half || std::abs(x.y()) > half) continue;
        if (pre_bump(sq, x, spec).value != 0.0) ++r.support_violations;
      }
    }
  }
  if (r.partition_defect >= 1e-10) r.failures.emplace_back("partition defect above 1e-10");
  if (r.support_violations > 0) r.failures.emplace_back("bump support leaves 1.1Q");
  if (r.min_theta < 0.0 || r.max_theta > 1.0 + 1e-15) r.failures.emplace_back("theta outside [0, 1]");
  r.passed = r.failures.empty();
  return r;
}

}  // namespace whitney
