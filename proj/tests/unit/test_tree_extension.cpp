#include <doctest.h>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "whitney/tree_extension.hpp"

using namespace whitney;

namespace {

int depth_of(std::size_t v) {
  int d = 0;
  while (v > 0) v = (v - 1) / 2, ++d;
  return d;
}

TreeProblem random_problem(int depth, double p, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0), w(0.05, 2.0);
  TreeProblem pr{depth, p, {}, {}};
  for (int l = 0; l < depth; ++l) pr.weights.push_back(w(rng));
  for (std::size_t k = 0; k < (std::size_t{1} << depth); ++k) pr.leaves.push_back(u(rng));
  return pr;
}

// p = 2: weighted graph Laplacian restricted to internal nodes, leaves moved to the rhs.
std::vector<double> linear_solve(const TreeProblem& pr) {
  const std::size_t internal = (std::size_t{1} << pr.depth) - 1;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(internal, internal);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(internal);
  const std::size_t total = 2 * internal + 1;
  for (std::size_t v = 1; v < total; ++v) {
    const std::size_t u = (v - 1) / 2;
    const double w = pr.weights[depth_of(v) - 1];
    A(u, u) += w;
    if (v < internal) {
      A(v, v) += w;
      A(u, v) -= w;
      A(v, u) -= w;
    } else {
      b(u) += w * pr.leaves[v - internal];
    }
  }
  const Eigen::VectorXd x = A.ldlt().solve(b);
  std::vector<double> out(total);
  for (std::size_t v = 0; v < internal; ++v) out[v] = x(v);
  for (std::size_t k = 0; k <= internal; ++k) out[internal + k] = pr.leaves[k];
  return out;
}

}  // namespace

TEST_SUITE("tree_extension") {

TEST_CASE("depth-2 hand case") {
  const TreeProblem pr{2, 2.0, {1.0, 1.0}, {0.0, 0.0, 1.0, 1.0}};
  const TreeSolution s = minimize_tree(pr);
  REQUIRE(s.values.size() == 7);
  CHECK(std::abs(s.values[0] - 0.5) < 1e-10);
  CHECK(std::abs(s.values[1] - 1.0 / 6.0) < 1e-10);
  CHECK(std::abs(s.values[2] - 5.0 / 6.0) < 1e-10);
}

TEST_CASE("depth-1 root is the midpoint for every p") {
  for (double p : {1.05, 1.2, 1.5, 1.9, 2.0}) {
    const TreeSolution s = minimize_tree(TreeProblem{1, p, {0.7}, {-0.3, 2.1}});
    CHECK(s.values[0] == doctest::Approx(0.9).epsilon(1e-12));
    CHECK(s.values[1] == -0.3);
    CHECK(s.values[2] == 2.1);
  }
}

TEST_CASE("all leaves equal") {
  const TreeSolution s = minimize_tree(TreeProblem{4, 1.3, {1, 1, 1, 1}, std::vector<double>(16, 2.5)});
  for (double v : s.values) CHECK(v == 2.5);
  CHECK(s.objective == 0.0);
}

TEST_CASE("p = 2 against a direct linear solve") {
  for (int depth : {1, 3, 6, 8})
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const TreeProblem pr = random_problem(depth, 2.0, seed);
      const TreeSolution s = minimize_tree(pr);
      const auto ref = linear_solve(pr);
      double err = 0.0;
      for (std::size_t v = 0; v < ref.size(); ++v) err = std::max(err, std::abs(s.values[v] - ref[v]));
      CHECK(err < 1e-8);
    }
}

TEST_CASE("KKT residual for p < 2") {
  for (double p : {1.2, 1.5, 1.9})
    for (int depth : {2, 5, 10})
      for (std::uint64_t seed : {4u, 5u}) {
        const TreeSolution s = minimize_tree(random_problem(depth, p, seed));
        CHECK(s.kkt_residual <= 1e-10);
      }
}

TEST_CASE("minimizer dominates random feasible candidates") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> gauss;
  for (double p : {1.2, 1.5, 1.9})
    for (int depth : {3, 7}) {
      const TreeProblem pr = random_problem(depth, p, 7 + depth);
      const TreeSolution s = minimize_tree(pr);
      const std::size_t internal = (std::size_t{1} << depth) - 1;
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      const double own = tree_objective(s.values, pr.weights, p);
      const double slack = 4.0 * static_cast<double>(s.values.size()) * DBL_EPSILON * own;
      std::size_t beaten = 0;
      for (int k = 0; k < 100; ++k) {
        std::vector<double> c = s.values;
        const double scale = std::pow(10.0, -1.0 - (k % 8));
        for (std::size_t v = 0; v < internal; ++v) c[v] = k % 4 == 0 ? u(rng) : c[v] + scale * gauss(rng);
        beaten += tree_objective(c, pr.weights, p) < own - slack;
      }
      CHECK(beaten == 0);
      CHECK(tree_objective(s.values, pr.weights, p) == doctest::Approx(s.objective).epsilon(1e-12));
    }
}

TEST_CASE("node values lie within the leaf range") {
  for (double p : {1.1, 1.4, 2.0}) {
    const TreeProblem pr = random_problem(8, p, 13);
    const TreeSolution s = minimize_tree(pr);
    const auto [lo, hi] = std::minmax_element(pr.leaves.begin(), pr.leaves.end());
    for (double v : s.values) {
      CHECK(v >= *lo);
      CHECK(v <= *hi);
    }
  }
  // not the range below each node: the hand case puts 1/6 above leaves (0, 0)
  const TreeSolution h = minimize_tree(TreeProblem{2, 1.5, {1.0, 1.0}, {0.0, 0.0, 1.0, 1.0}});
  CHECK(h.values[1] > 0.0);
}

TEST_CASE("translation and scale equivariance") {
  TreeProblem pr = random_problem(6, 1.5, 21);
  const TreeSolution s = minimize_tree(pr);
  TreeProblem shifted = pr, scaled = pr;
  for (double& v : shifted.leaves) v += 3.0;
  for (double& v : scaled.leaves) v *= -2.5;
  const TreeSolution a = minimize_tree(shifted), b = minimize_tree(scaled);
  for (std::size_t v = 0; v < s.values.size(); ++v) {
    CHECK(a.values[v] == doctest::Approx(s.values[v] + 3.0).epsilon(1e-9));
    CHECK(b.values[v] == doctest::Approx(-2.5 * s.values[v]).epsilon(1e-9));
  }
  CHECK(b.objective == doctest::Approx(std::pow(2.5, 1.5) * s.objective).epsilon(1e-9));
}

TEST_CASE("leaf slopes") {
  const FractalSet set(FractalParams{8, 3, 4});
  std::vector<double> f(set.size());
  for (std::size_t g = 0; g < set.size(); ++g) f[g] = set.exact_y(g).to_double();
  for (double eta : leaf_slopes(f, set)) CHECK(eta == doctest::Approx(1.0).epsilon(1e-14));
  for (std::size_t g = 0; g < set.size(); ++g) f[g] = set.exact_x(g).to_double();
  for (double eta : leaf_slopes(f, set)) CHECK(std::abs(eta) < 1e-12);

  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (double& v : f) v = u(rng);
  const auto eta = leaf_slopes(f, set);
  const double delta = set.delta_value();
  for (std::size_t j = 0; j < set.e2_size(); ++j) {
    const std::size_t top = set.global_index_e2(j);
    std::size_t bottom = set.size();
    for (std::size_t g = 0; g < set.size(); ++g)
      if (set.is_e1(g) && set.exact_x(g) == set.exact_x(top)) bottom = g;
    REQUIRE(bottom < set.size());
    CHECK(eta[j] == doctest::Approx((f[top] - f[bottom]) / delta).epsilon(1e-13));
  }

  f[set.global_index_e2(0)] = std::nan("");
  CHECK_THROWS_AS(leaf_slopes(f, set), ConfigError);
  CHECK_THROWS_AS(leaf_slopes(std::vector<double>(3), set), ConfigError);
}

TEST_CASE("level weights") {
  const auto w = level_weights(FractalParams{4, 2, 4}, 1.5);
  REQUIRE(w.size() == 2);
  CHECK(w[0] == doctest::Approx(0.25));
  CHECK(w[1] == doctest::Approx(0.25));
  const auto h = level_weights(FractalParams{2, 3, 2}, 1.5);
  CHECK(h[0] == doctest::Approx(0.5));
  CHECK(h[1] == doctest::Approx(std::pow(0.5, 1.5)));
  CHECK(h[2] == doctest::Approx(std::pow(0.5, 1.5)));
  for (std::int64_t n : {4, 8, 16})
    for (int l = 2; l <= 5; ++l)
      for (double p : {1.2, 1.7}) {
        const auto v = level_weights(FractalParams{n, l, 4}, p);
        CHECK(v[l - 2] == v[l - 1]);
        for (double x : v) CHECK(x > 0.0);
      }
  CHECK_THROWS_AS(level_weights(FractalParams{4, 2, 4}, 2.0), ConfigError);
  CHECK_THROWS_AS(level_weights(FractalParams{4, 2, 4}, 1.0), ConfigError);
}

TEST_CASE("tree seminorm") {
  CHECK(tree_seminorm({2.0, 2.0, 2.0}, {1.0}, 1.5) == 0.0);
  CHECK(tree_seminorm({0.5, 0.0, 1.0}, {1.0}, 1.5) ==
        doctest::Approx(std::pow(2.0 * std::pow(0.5, 1.5), 1.0 / 1.5)));
}

TEST_CASE("bad problems") {
  CHECK_THROWS_AS(minimize_tree(TreeProblem{2, 1.0, {1, 1}, {0, 0, 0, 0}}), ConfigError);
  CHECK_THROWS_AS(minimize_tree(TreeProblem{2, 1.5, {1}, {0, 0, 0, 0}}), ConfigError);
  CHECK_THROWS_AS(minimize_tree(TreeProblem{2, 1.5, {1, 0}, {0, 0, 0, 0}}), ConfigError);
  CHECK_THROWS_AS(minimize_tree(TreeProblem{2, 1.5, {1, 1}, {0, 0, 0}}), ConfigError);
}

}  // TEST_SUITE
