#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "whitney/oracle.hpp"
#include "dense_grid_reference.hpp"

using namespace whitney;
using namespace whitney::testing;

namespace {

FractalSet make(std::int64_t n, int l) { return FractalSet(FractalParams{n, l, 4}); }

std::vector<double> random_f(const FractalSet& set, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> f(set.size());
  for (double& v : f) v = u(rng);
  return f;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("discrete seminorm of a quadratic") {
  const FractalSet set = make(4, 1);
  GridFunction g = make_grid(set, std::vector<double>(set.size(), 0.0), 1);
  for (std::int64_t j = 0; j < g.n; ++j)
    for (std::int64_t i = 0; i < g.n; ++i) g.values[i + g.n * j] = g.node(i, j).x() * g.node(i, j).x();
  // every node carries |D^2| = 2; the node sum covers (8 + h)^2
  const double h = g.h();
  CHECK(discrete_seminorm(g, 2.0) == doctest::Approx(4.0 * (8 + h) * (8 + h)).epsilon(1e-12));
  CHECK(discrete_seminorm(g, 1.5) == doctest::Approx(std::pow(2.0, 1.5) * (8 + h) * (8 + h)).epsilon(1e-12));
  GridFunction fine = make_grid(make(8, 2), std::vector<double>(make(8, 2).size(), 0.0), 1);
  for (std::int64_t j = 0; j < fine.n; ++j)
    for (std::int64_t i = 0; i < fine.n; ++i) fine.values[i + fine.n * j] = fine.node(i, j).x() * fine.node(i, j).x();
  CHECK(discrete_seminorm(fine, 2.0) == doctest::Approx(256.0).epsilon(0.01));
}

TEST_CASE("written-out stencil agrees with discrete_seminorm") {
  const FractalSet set = make(4, 1);
  GridFunction g = make_grid(set, random_f(set, 1), 1);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Eigen::Index k = 0; k < g.values.size(); ++k) g.values(k) = u(rng);
  const Eigen::MatrixXd B = hessian_rows(g.n, g.h());
  const double J = (B * g.values).squaredNorm() * g.h() * g.h();
  CHECK(discrete_seminorm(g, 2.0) == doctest::Approx(J).epsilon(1e-12));
}

TEST_CASE("grid constraints") {
  const FractalSet set = make(4, 1);
  const auto f = random_f(set, 3);
  const GridFunction g = make_grid(set, f, 2);
  CHECK(g.inv_h == 8);
  CHECK(g.n == 65);
  std::size_t constrained = 0;
  for (std::int64_t j = 0; j < g.n; ++j)
    for (std::int64_t i = 0; i < g.n; ++i)
      if (g.constrained[static_cast<std::size_t>(i + g.n * j)]) {
        ++constrained;
        const Vec2 x = g.node(i, j);
        bool hit = false;
        for (std::size_t p = 0; p < set.size(); ++p)
          if ((set.point(p) - x).norm() < 1e-12) hit = g.values[i + g.n * j] == f[p];
        CHECK(hit);
      }
  CHECK(constrained == set.size());
  CHECK_THROWS_AS(make_grid(set, f, 0), ConfigError);
  CHECK_THROWS_AS(make_grid(set, f, 64), ConfigError);
}

TEST_CASE("p = 2 against a dense linear solve") {
  const FractalSet set = make(4, 1);
  const auto f = random_f(set, 4);
  const OracleResult r = grid_minimal_extension(set, f, 2.0, OracleOptions{1});
  const Eigen::VectorXd ref = dense_minimizer(r.grid);
  CHECK((r.grid.values - ref).cwiseAbs().maxCoeff() < 1e-8);
  GridFunction rg = r.grid;
  rg.values = ref;
  CHECK(r.objective == doctest::Approx(discrete_seminorm(rg, 2.0)).epsilon(1e-10));
}

TEST_CASE("affine data has zero minimal energy") {
  const FractalSet set = make(4, 1);
  std::vector<double> f(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) f[i] = 1.0 - 0.5 * set.point(i).x() + 2.0 * set.point(i).y();
  for (double p : {1.5, 2.0}) {
    const OracleResult r = grid_minimal_extension(set, f, p, OracleOptions{1});
    CHECK(r.objective < 1e-10);
  }
}

TEST_CASE("homogeneity") {
  const FractalSet set = make(4, 1);
  const auto f = random_f(set, 5);
  std::vector<double> g = f;
  for (double& v : g) v *= 3.0;
  for (double p : {1.5, 2.0}) {
    const double a = grid_minimal_extension(set, f, p, OracleOptions{1}).objective;
    const double b = grid_minimal_extension(set, g, p, OracleOptions{1}).objective;
    CHECK(b == doctest::Approx(std::pow(3.0, p) * a).epsilon(1e-4));
  }
}

TEST_CASE("dominance") {
  const FractalSet set = make(4, 1);
  const auto d = std::make_shared<const CzDecomposition>(set);
  for (double p : {1.5, 1.9}) {
    const auto f = random_f(set, 6);
    const OracleResult r = grid_minimal_extension(set, f, p, OracleOptions{1});
    const auto ext = extend(f, d, PipelineConfig{p});
    CHECK(r.objective <= discrete_seminorm(sample_on_grid(*ext.extension, r.grid), p));
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss;
    std::size_t beaten = 0;
    for (int k = 0; k < 20; ++k) {
      GridFunction c = r.grid;
      const double scale = std::pow(10.0, -1.0 - k % 4);
      for (Eigen::Index i = 0; i < c.values.size(); ++i)
        if (!c.constrained[static_cast<std::size_t>(i)]) c.values(i) += scale * gauss(rng);
      beaten += discrete_seminorm(c, p) < r.objective;
    }
    CHECK(beaten == 0);
  }
}

TEST_CASE("p = 2 energy settles under grid refinement") {
  const FractalSet set = make(4, 1);
  const auto f = random_f(set, 8);
  std::vector<double> J;
  for (int refine : {1, 2, 4}) J.push_back(grid_minimal_extension(set, f, 2.0, OracleOptions{refine}).objective);
  CHECK(std::abs(J[2] - J[1]) < std::abs(J[1] - J[0]));
}

TEST_CASE("analytic test functions") {
  const AnalyticTestFunction none = sample_test_function(1, TestFunctionConfig{0});
  CHECK(none.bumps.empty());
  CHECK(none.seminorm(1.5) == 0.0);

  const AnalyticTestFunction g = sample_test_function(3);
  REQUIRE(g.bumps.size() == 2);
  CHECK(sample_test_function(3).bumps[0].center == g.bumps[0].center);
  for (std::size_t a = 0; a < g.bumps.size(); ++a)
    for (std::size_t b = a + 1; b < g.bumps.size(); ++b)
      CHECK((g.bumps[a].center - g.bumps[b].center).norm() > g.bumps[a].radius + g.bumps[b].radius);

  for (double p : {1.2, 1.5, 1.9}) {
    AnalyticTestFunction one = g, two = g, scaled = g;
    one.bumps.resize(1);
    two.bumps.erase(two.bumps.begin());
    for (auto& b : scaled.bumps) b.amplitude *= -2.0;
    CHECK(g.seminorm_pow(p) == doctest::Approx(one.seminorm_pow(p) + two.seminorm_pow(p)).epsilon(1e-10));
    CHECK(scaled.seminorm_pow(p) == doctest::Approx(std::pow(2.0, p) * g.seminorm_pow(p)).epsilon(1e-10));
    // radius scaling: |D^2| ~ lambda r^-2 on area r^2
    AnalyticTestFunction narrow = one;
    narrow.bumps[0].radius *= 0.5;
    CHECK(narrow.seminorm_pow(p) == doctest::Approx(std::pow(2.0, 2 * p - 2) * one.seminorm_pow(p)).epsilon(1e-8));
  }

  // quadrature against a fine grid sum
  const FractalSet set = make(8, 2);
  GridFunction grid = make_grid(set, restrict_to(g, set), 1);
  CHECK(discrete_seminorm(sample_on_grid(g, grid), 1.5) == doctest::Approx(g.seminorm_pow(1.5)).epsilon(0.02));
}

TEST_CASE("bump derivatives against finite differences") {
  const AnalyticTestFunction g = sample_test_function(9);
  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const double h = 1e-5;
  for (int k = 0; k < 100; ++k) {
    const Vec2 x(u(rng), u(rng));
    const Jet j = g.evaluate(x);
    for (int ax = 0; ax < 2; ++ax) {
      const Vec2 e = ax == 0 ? Vec2(h, 0) : Vec2(0, h);
      const double fd = (g.evaluate(x + e).value - g.evaluate(x - e).value) / (2 * h);
      CHECK(fd == doctest::Approx(j.gradient[ax]).epsilon(1e-6).scale(1.0));
      const Vec2 hd = (g.evaluate(x + e).gradient - g.evaluate(x - e).gradient) / (2 * h);
      CHECK((hd - j.hessian.col(ax)).norm() < 1e-5 * (1.0 + j.hessian.norm()));
    }
  }
}

TEST_CASE("restriction re-evaluates G on E") {
  const FractalSet set = make(4, 2);
  const AnalyticTestFunction g = sample_test_function(2);
  const auto f = restrict_to(g, set);
  REQUIRE(f.size() == set.size());
  for (std::size_t i = 0; i < set.size(); ++i) CHECK(f[i] == g.evaluate(set.point(i)).value);
}

}  // TEST_SUITE
