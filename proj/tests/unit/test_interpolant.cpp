#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "whitney/interpolant.hpp"

using namespace whitney;

namespace {

std::shared_ptr<const CzDecomposition> decomp(std::int64_t n, int l) {
  return std::make_shared<const CzDecomposition>(FractalSet(FractalParams{n, l, 4}));
}

std::vector<double> random_f(const FractalSet& set, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> f(set.size());
  for (double& v : f) v = u(rng);
  return f;
}

std::vector<double> restrict_affine(const AffinePolynomial& g, const FractalSet& set) {
  std::vector<double> f(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) f[i] = g(set.point(i));
  return f;
}

template <class G>
auto d5(G g, const Vec2& x, const Vec2& e, double h) -> decltype(g(x)) {
  decltype(g(x)) r = (g(x - 2 * h * e) - 8.0 * g(x - h * e) + 8.0 * g(x + h * e) - g(x + 2 * h * e)) / (12.0 * h);
  return r;
}

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

std::vector<Vec2> random_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-4.0, 4.0), nx(-1.2, 1.2), ny(-0.1, 0.3);
  std::vector<Vec2> pts;
  for (std::size_t k = 0; k < n; ++k) pts.push_back(k % 2 ? Vec2(u(rng), u(rng)) : Vec2(nx(rng), ny(rng)));
  return pts;
}

}  // namespace

TEST_SUITE("interpolant") {

TEST_CASE("fit_L examples") {
  const AffinePolynomial a = fit_L(0.0, 0, 1.0 / 16, 1, 16);
  CHECK(a.a0 == 0.0);
  CHECK(a.a1 == doctest::Approx(1.0));
  CHECK(a.a2 == 0.0);
  const AffinePolynomial c = fit_L(2.5, -3, 2.5, 7, 16);
  CHECK(c.a0 == 2.5);
  CHECK(c.a1 == 0.0);
  const AffinePolynomial g = fit_L(3.0 + 2.0 * 5 / 16, 5, 3.0 + 2.0 * -11 / 16, -11, 16);
  CHECK(g.a0 == doctest::Approx(3.0));
  CHECK(g.a1 == doctest::Approx(2.0));
  CHECK_THROWS_AS(fit_L(1.0, 4, 2.0, 4, 16), ConfigError);
}

TEST_CASE("affine reproduction") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> k(-3072, 3072);
  for (auto [n, l] : {std::pair{4, 1}, {4, 2}, {8, 2}}) {
    const auto d = decomp(n, l);
    for (double p : {1.2, 1.5, 1.9}) {
      // dyadic coefficients keep G|_E exact in floating point
      const AffinePolynomial g{k(rng) / 1024.0, k(rng) / 1024.0, k(rng) / 1024.0};
      const auto r = extend(restrict_affine(g, d->set()), d, PipelineConfig{p});
      const Extension& ext = *r.extension;
      for (const Piece& pc : ext.pieces()) {
        CHECK(pc.L.a2 == 0.0);
        CHECK(std::abs(pc.L.a0 - g.a0) < 1e-12);
        CHECK(std::abs(pc.L.a1 - g.a1) < 1e-12);
        CHECK(std::abs(pc.eta - g.a2) < 1e-12);
      }
      double worst = 0.0, worst_h = 0.0;
      for (const Vec2& x : random_points(1000, 3)) {
        const Jet j = ext.evaluate(x);
        worst = std::max({worst, std::abs(j.value - g(x)), (j.gradient - g.gradient()).cwiseAbs().maxCoeff()});
        worst_h = std::max(worst_h, j.hessian.cwiseAbs().maxCoeff());
      }
      CHECK(worst < 1e-10);
      CHECK(worst_h < 1e-10);
      CHECK(seminorm(ext, p).value <= 1e-10);
      const PatchingSums ps = patching_rhs(ext, p);
      CHECK(ps.lq_sum < 1e-20);
      CHECK(ps.eta_sum < 1e-20);
    }
  }
}

TEST_CASE("affine reproduction with inexact coefficients") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (auto [n, l] : {std::pair{4, 2}, {8, 2}}) {
    const auto d = decomp(n, l);
    const AffinePolynomial g{u(rng), u(rng), u(rng)};
    const auto r = extend(restrict_affine(g, d->set()), d, PipelineConfig{1.5});
    double worst = 0.0;
    for (const Vec2& x : random_points(1000, 4)) worst = std::max(worst, std::abs(r.extension->evaluate(x).value - g(x)));
    CHECK(worst < 1e-10);
    // rounding in G|_E is amplified by D through the anchors and by delta^-2 through the bumps
    CHECK(seminorm(*r.extension, 1.5).value <= 1e-8);
  }
}

TEST_CASE("f = x2 gives F = x2") {
  const auto d = decomp(8, 2);
  const auto r = extend(restrict_affine({0, 0, 1}, d->set()), d, PipelineConfig{1.5});
  for (const Piece& pc : r.extension->pieces()) {
    CHECK(pc.L.a0 == 0.0);
    CHECK(pc.L.a1 == 0.0);
    CHECK(pc.eta == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(seminorm(*r.extension, 1.5).value <= 1e-12);
  const PatchingSums ps = patching_rhs(*r.extension, 1.5);
  CHECK(ps.lq_sum == 0.0);
  CHECK(ps.eta_sum < 1e-25);
  const EdgeTreeReport et = eta_edge_vs_tree(*r.extension, r.solution, r.weights, 1.5);
  CHECK(et.consistent);
  CHECK(et.ratio == 0.0);
}

TEST_CASE("interpolation on E") {
  for (auto [n, l] : {std::pair{4, 1}, {4, 2}, {4, 3}, {8, 1}, {8, 2}})
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto d = decomp(n, l);
      const auto f = random_f(d->set(), seed);
      const auto r = extend(f, d, PipelineConfig{1.5});
      const double fmax = std::abs(*std::max_element(f.begin(), f.end(), [](double a, double b) {
        return std::abs(a) < std::abs(b);
      }));
      CHECK(interpolation_error(*r.extension, f) <= 1e-9 * (1.0 + fmax));
    }
}

TEST_CASE("indicator data") {
  const auto d = decomp(4, 2);
  const FractalSet& set = d->set();
  std::vector<double> f(set.size(), 0.0);
  f[set.global_index_e2(1)] = 1.0;
  const auto r = extend(f, d, PipelineConfig{1.5});
  for (std::size_t i = 0; i < set.size(); ++i) CHECK(std::abs(r.extension->evaluate(set.point(i)).value - f[i]) < 1e-12);
  const EdgeTreeReport et = eta_edge_vs_tree(*r.extension, r.solution, r.weights, 1.5);
  CHECK(et.edge_sum > 0.0);
  CHECK(et.tree_sum > 0.0);
  CHECK(std::isfinite(et.ratio));
  CHECK(seminorm(*r.extension, 1.5).value > 0.0);
}

TEST_CASE("derivatives against finite differences") {
  const auto d = decomp(4, 2);
  const auto r = extend(random_f(d->set(), 9), d, PipelineConfig{1.5});
  const Extension& ext = *r.extension;
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(-1.3, 1.3), uy(-0.15, 0.3);
  double worst1 = 0.0, worst2 = 0.0;
  for (std::size_t tested = 0; tested < 100;) {
    const Vec2 x(u(rng), uy(rng));
    const std::size_t q = d->locate(x);
    const double h = 5e-5 * d->square(q).side();
    if (distance_to_breakpoints(*d, q, x, 0.05) < 2.5 * h) continue;
    const Jet j = ext.evaluate(x);
    auto val = [&](const Vec2& y) { return ext.evaluate(y, 0).value; };
    auto grad = [&](const Vec2& y) { return Vec2(ext.evaluate(y, 1).gradient); };
    for (int ax = 0; ax < 2; ++ax) {
      const Vec2 e = ax == 0 ? Vec2(1, 0) : Vec2(0, 1);
      worst1 = std::max(worst1, std::abs(d5(val, x, e, h) - j.gradient[ax]) / (1.0 + j.gradient.norm()));
      const Vec2 hc = j.hessian.col(ax);
      worst2 = std::max(worst2, (d5(grad, x, e, h) - hc).norm() / (1.0 + j.hessian.norm()));
    }
    ++tested;
  }
  CHECK(worst1 < 1e-6);
  CHECK(worst2 < 1e-6);
}

TEST_CASE("global tail") {
  const auto d = decomp(4, 2);
  const auto r = extend(random_f(d->set(), 4), d, PipelineConfig{1.5});
  const Extension& ext = *r.extension;
  const TailReport t = check_global_tail(ext);
  CHECK(t.points == 1000);
  CHECK(t.max_value_error <= 1e-8);
  CHECK(t.max_gradient_error <= 1e-8);
  const AffinePolynomial tail = ext.tail();
  CHECK(tail.a2 == r.solution.values[0]);
  for (const Vec2& x : {Vec2(5, 0), Vec2(-7, 3), Vec2(0, 4.5)}) {
    const Jet j = ext.evaluate(x);
    CHECK(j.value == tail(x));
    CHECK(j.hessian.norm() == 0.0);
  }
  for (std::size_t q = 0; q < d->size(); ++q)
    if (d->is_boundary(q)) CHECK(ext.piece(q).P() == tail);
}

TEST_CASE("homogeneity and translation at p != 2") {
  const auto d = decomp(4, 2);
  const auto f = random_f(d->set(), 17);
  const AffinePolynomial a{0.3, -1.2, 2.2};
  std::vector<double> scaled = f, shifted = f;
  for (double& v : scaled) v *= -3.0;
  const auto af = restrict_affine(a, d->set());
  for (std::size_t i = 0; i < f.size(); ++i) shifted[i] += af[i];
  const auto base = extend(f, d, PipelineConfig{1.5});
  const auto s = extend(scaled, d, PipelineConfig{1.5});
  const auto t = extend(shifted, d, PipelineConfig{1.5});
  for (const Vec2& x : random_points(500, 8)) {
    const double F = base.extension->evaluate(x, 0).value;
    CHECK(s.extension->evaluate(x, 0).value == doctest::Approx(-3.0 * F).epsilon(1e-9).scale(1.0));
    CHECK(t.extension->evaluate(x, 0).value == doctest::Approx(F + a(x)).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("linearity at p = 2") {
  const auto d = decomp(4, 2);
  const auto f = random_f(d->set(), 1), g = random_f(d->set(), 2);
  std::vector<double> mix(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) mix[i] = 2.0 * f[i] - 0.5 * g[i];
  const auto F = extend(f, d, PipelineConfig{2.0});
  const auto G = extend(g, d, PipelineConfig{2.0});
  const auto M = extend(mix, d, PipelineConfig{2.0});
  for (const Vec2& x : random_points(500, 5))
    CHECK(M.extension->evaluate(x, 0).value ==
          doctest::Approx(2.0 * F.extension->evaluate(x, 0).value - 0.5 * G.extension->evaluate(x, 0).value)
              .epsilon(1e-9)
              .scale(1.0));
}

TEST_CASE("quadrature refinement") {
  for (auto [n, l] : {std::pair{4, 1}, {4, 2}, {8, 1}}) {
    const auto d = decomp(n, l);
    const auto r = extend(random_f(d->set(), 6), d, PipelineConfig{1.5});
    const SeminormEstimate e = seminorm(*r.extension, 1.5);
    CHECK(e.value > 0.0);
    CHECK(e.within_tolerance);
    CHECK(e.refinement_error <= 0.01);
    CHECK(e.integral == doctest::Approx(std::pow(e.value, 1.5)));
  }
}

TEST_CASE("assemble rejects mismatched inputs") {
  const auto d = decomp(4, 2);
  const auto r = extend(random_f(d->set(), 1), d, PipelineConfig{1.5});
  const ClusterTree other(FractalSet(FractalParams{4, 1, 4}), ClusterConfig{});
  CHECK_THROWS_AS(assemble(random_f(d->set(), 1), d, other, r.solution), ConsistencyError);
  CHECK_THROWS_AS(extend(std::vector<double>(3), d, PipelineConfig{1.5}), ConfigError);
}

}  // TEST_SUITE
