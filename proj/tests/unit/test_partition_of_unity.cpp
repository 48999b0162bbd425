#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "whitney/partition_of_unity.hpp"

using namespace whitney;

namespace {

const CzDecomposition& decomp_4_2() {
  static const CzDecomposition d(FractalSet(FractalParams{4, 2, 4}));
  return d;
}

double theta_of(const PouEvaluation& e, std::size_t q, Jet* jet = nullptr) {
  for (const auto& c : e.contributions)
    if (c.square == q) {
      if (jet) *jet = c.theta;
      return c.theta.value;
    }
  if (jet) *jet = Jet{};
  return 0.0;
}

// Fourth-order central difference of g along unit vector e.
template <class G>
auto d5(G g, const Vec2& x, const Vec2& e, double h) -> decltype(g(x)) {
  decltype(g(x)) r = (g(x - 2 * h * e) - 8.0 * g(x - h * e) + 8.0 * g(x + h * e) - g(x + 2 * h * e)) / (12.0 * h);
  return r;
}

// Distance from x to the nearest band edge a-m, a, b, b+m of any candidate.
double distance_to_breakpoints(const CzDecomposition& d, std::size_t q, const Vec2& x, double margin) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> cands{q};
  for (auto n : d.neighbors(q)) cands.push_back(n);
  for (std::size_t c : cands) {
    const double s = d.square(c).side(), m = margin * s;
    const Vec2 a = d.square(c).corner();
    for (int ax = 0; ax < 2; ++ax)
      for (double t : {a[ax] - m, a[ax], a[ax] + s, a[ax] + s + m}) best = std::min(best, std::abs(x[ax] - t));
  }
  return best;
}

}  // namespace

TEST_SUITE("partition_of_unity") {

TEST_CASE("transition function") {
  CHECK(smoothstep(0.0).value == 0.0);
  CHECK(smoothstep(1.0).value == 1.0);
  CHECK(smoothstep(0.5).value == doctest::Approx(0.5));
  double max_d1 = 0.0, max_d2 = 0.0, prev = 0.0;
  for (int k = 0; k <= 1000; ++k) {
    const double t = k / 1000.0;
    const Transition s = smoothstep(t);
    CHECK(s.value + smoothstep(1.0 - t).value == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.value >= prev);
    prev = s.value;
    max_d1 = std::max(max_d1, std::abs(s.d1));
    max_d2 = std::max(max_d2, std::abs(s.d2));
  }
  CHECK(max_d1 <= 2.0);
  CHECK(max_d2 <= 12.0);
  CHECK(smoothstep(0.5).d1 == doctest::Approx(1.875));
  CHECK(smoothstep(-0.3).value == 0.0);
  CHECK(smoothstep(1.3).value == 1.0);
}

TEST_CASE("pre-bump examples") {
  const DyadicSquare q{3, 4, 4};  // [0,1)^2
  const Jet c = pre_bump(q, Vec2(0.5, 0.5));
  CHECK(c.value == 1.0);
  CHECK(c.gradient.norm() == 0.0);
  CHECK(c.hessian.norm() == 0.0);
  CHECK(pre_bump(q, Vec2(1.06, 0.5)).value == 0.0);
  CHECK(pre_bump(q, Vec2(-0.2, -0.2)).value == 0.0);
  const Jet mid = pre_bump(q, Vec2(1.025, 0.5));
  CHECK(mid.value == doctest::Approx(0.5));
  CHECK(std::abs(mid.gradient.x()) == doctest::Approx(1.875 / 0.05));
  CHECK(mid.gradient.y() == 0.0);
  CHECK(pre_bump(q, Vec2(1.0, 1.0)).value == 1.0);
}

TEST_CASE("partition of unity at random points") {
  const CzDecomposition& d = decomp_4_2();
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-4.0, 4.0), near(-1.2, 1.2), ny(-0.1, 0.2);
  for (int k = 0; k < 3000; ++k) {
    const Vec2 x = k % 3 ? Vec2(near(rng), ny(rng)) : Vec2(u(rng), u(rng));
    const PouEvaluation e = pou_eval(d, x);
    double s = 0.0;
    Vec2 g = Vec2::Zero();
    Mat2 h = Mat2::Zero();
    for (const auto& c : e.contributions) {
      s += c.theta.value;
      g += c.theta.gradient;
      h += c.theta.hessian;
      const DyadicSquare& q = d.square(c.square);
      const Vec2 a = q.corner();
      const double m = 0.05 * q.side();
      CHECK(x.x() >= a.x() - m);
      CHECK(x.x() <= a.x() + q.side() + m);
      CHECK(x.y() >= a.y() - m);
      CHECK(x.y() <= a.y() + q.side() + m);
    }
    const double side = d.square(e.containing).side();
    CHECK(std::abs(s - 1.0) < 1e-12);
    CHECK(g.norm() * side < 1e-10);
    CHECK(h.norm() * side * side < 1e-8);
    PouEvaluation in;
    pou_eval_in(d, e.containing, x, BumpSpec{}, in);
    std::sort(in.contributions.begin(), in.contributions.end(),
              [](const PouContribution& a, const PouContribution& b) { return a.square < b.square; });
    REQUIRE(in.contributions.size() == e.contributions.size());
    for (std::size_t i = 0; i < in.contributions.size(); ++i) {
      CHECK(in.contributions[i].square == e.contributions[i].square);
      CHECK(in.contributions[i].theta.value == doctest::Approx(e.contributions[i].theta.value).epsilon(1e-14));
    }
  }
}

TEST_CASE("lone bump deep inside a large square") {
  const CzDecomposition& d = decomp_4_2();
  std::size_t big = 0;
  for (std::size_t q = 0; q < d.size(); ++q)
    if (d.square(q).side() > d.square(big).side()) big = q;
  const PouEvaluation e = pou_eval(d, d.square(big).center());
  REQUIRE(e.contributions.size() == 1);
  CHECK(e.contributions[0].theta.value == 1.0);
  CHECK(e.contributions[0].theta.gradient.norm() == 0.0);
}

TEST_CASE("equal twins share the edge symmetrically") {
  const CzDecomposition& d = decomp_4_2();
  std::size_t checked = 0;
  for (std::size_t q = 0; q < d.size() && checked < 200; ++q)
    for (std::uint32_t o : d.neighbors(q)) {
      const DyadicSquare &a = d.square(q), &b = d.square(o);
      if (a.generation != b.generation || a.j != b.j || b.i != a.i + 1) continue;
      // midpoint of the shared vertical edge
      const Vec2 x(b.corner().x(), a.center().y());
      const PouEvaluation e = pou_eval(d, x);
      Jet ja, jb;
      const double ta = theta_of(e, q, &ja), tb = theta_of(e, o, &jb);
      CHECK(ta == doctest::Approx(tb).epsilon(1e-14));
      CHECK(ta > 0.0);
      ++checked;
    }
  CHECK(checked > 20);
}

TEST_CASE("derivatives against finite differences") {
  const CzDecomposition& d = decomp_4_2();
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.3, 1.3), uy(-0.15, 0.3);
  std::size_t tested = 0;
  double worst1 = 0.0, worst2 = 0.0;
  while (tested < 300) {
    const Vec2 x(u(rng), uy(rng));
    const std::size_t q = d.locate(x);
    const double side = d.square(q).side();
    const double h = 1e-4 * side * 0.5;
    if (distance_to_breakpoints(d, q, x, 0.05) < 2.5 * h) continue;
    const PouEvaluation e = pou_eval(d, x);
    for (const auto& c : e.contributions) {
      auto val = [&](const Vec2& y) { return theta_of(pou_eval(d, y), c.square); };
      auto grad = [&](const Vec2& y) {
        Jet j;
        theta_of(pou_eval(d, y), c.square, &j);
        return Vec2(j.gradient);
      };
      const double cs = d.square(c.square).side();
      for (int ax = 0; ax < 2; ++ax) {
        const Vec2 ev = ax == 0 ? Vec2(1, 0) : Vec2(0, 1);
        const double g_fd = d5(val, x, ev, h);
        worst1 = std::max(worst1, std::abs(g_fd - c.theta.gradient[ax]) * cs / (1.0 + c.theta.gradient.norm() * cs));
        const Vec2 h_fd = d5(grad, x, ev, h);
        worst2 = std::max(worst2, (h_fd - c.theta.hessian.col(ax)).cwiseAbs().maxCoeff() * cs * cs /
                                      (1.0 + c.theta.hessian.norm() * cs * cs));
      }
    }
    ++tested;
  }
  // relative errors in units of delta^-|a|
  CHECK(worst1 < 1e-6);
  CHECK(worst2 < 1e-6);
}

TEST_CASE("verify_pou over a depth sweep") {
  double b1_min = 1e300, b1_max = 0.0, b2_min = 1e300, b2_max = 0.0;
  for (int l = 1; l <= 3; ++l) {
    const CzDecomposition d(FractalSet(FractalParams{4, l, 4}));
    const PouReport r = verify_pou(d);
    CHECK(r.passed);
    CHECK(r.partition_defect < 1e-10);
    CHECK(r.support_violations == 0);
    CHECK(r.max_theta <= 1.0);
    CHECK(r.min_theta >= 0.0);
    b1_min = std::min(b1_min, r.bound1), b1_max = std::max(b1_max, r.bound1);
    b2_min = std::min(b2_min, r.bound2), b2_max = std::max(b2_max, r.bound2);
  }
  CHECK(b1_max <= 2.0 * b1_min);
  CHECK(b2_max <= 2.0 * b2_min);
}

TEST_CASE("tampered margin is caught") {
  const PouReport r = verify_pou(decomp_4_2(), {}, BumpSpec{0.5});
  CHECK_FALSE(r.passed);
  CHECK(r.support_violations > 0);
}

}  // TEST_SUITE
