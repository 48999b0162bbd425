#include "whitney/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#ifdef WHITNEY_HAVE_CHOLMOD
#include <Eigen/CholmodSupport>
#endif
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace whitney {

Jet AnalyticTestFunction::evaluate(const Vec2& x) const {
  Jet j;
  j.value = affine(x);
  j.gradient = affine.gradient();
  for (const RadialBump& b : bumps) {
    const Vec2 y = x - b.center;
    const double r2 = b.radius * b.radius;
    const double u = 1.0 - y.squaredNorm() / r2;
    if (u <= 0.0) continue;
    j.value += b.amplitude * u * u * u;
    j.gradient += (-6.0 * b.amplitude * u * u / r2) * y;
    j.hessian += (-6.0 * b.amplitude / r2) * (u * u * Mat2::Identity() - (4.0 * u / r2) * (y * y.transpose()));
  }
  return j;
}

double AnalyticTestFunction::seminorm_pow(double p) const {
  for (std::size_t a = 0; a < bumps.size(); ++a)
    for (std::size_t b = a + 1; b < bumps.size(); ++b)
      if ((bumps[a].center - bumps[b].center).norm() < bumps[a].radius + bumps[b].radius)
        throw ConfigError("bump supports overlap; closed-form seminorm needs disjoint bumps");
  double total = 0.0;
  for (const RadialBump& b : bumps) {
    const double r2 = b.radius * b.radius;
    // Radial and tangential second derivatives of lambda (1 - rho^2/r^2)^3.
    auto integrand = [&](double rho) {
      const double u = 1.0 - rho * rho / r2;
      const double lt = -6.0 * b.amplitude * u * u / r2;
      const double lr = -6.0 * b.amplitude / r2 * (u * u - 4.0 * u * rho * rho / r2);
      return std::pow(lr * lr + lt * lt, 0.5 * p) * rho;
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
    const double split = b.radius / std::sqrt(5.0);
    const double i1 = GK::integrate(integrand, 0.0, split, 15, 1e-13);
    const double i2 = GK::integrate(integrand, split, b.radius, 15, 1e-13);
    total += 2.0 * std::numbers::pi * (i1 + i2);
  }
  return total;
}

double AnalyticTestFunction::seminorm(double p) const { return std::pow(seminorm_pow(p), 1.0 / p); }

AnalyticTestFunction sample_test_function(std::uint64_t seed, const TestFunctionConfig& c) {
  if (c.bumps < 0) throw ConfigError("bump count must be non-negative");
  if (!(c.min_radius > 0.0 && c.min_radius <= c.max_radius)) throw ConfigError("bad radius range");
  if (c.bumps > 0 && c.box_x < c.min_radius) throw ConfigError("bump box too small for the radius range");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  AnalyticTestFunction g;
  g.affine = {uniform(-c.affine_range, c.affine_range), uniform(-c.affine_range, c.affine_range),
              uniform(-c.affine_range, c.affine_range)};
  for (int k = 0; k < c.bumps; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      RadialBump b;
      b.radius = uniform(c.min_radius, c.max_radius);
      b.amplitude = uniform(c.min_amplitude, c.max_amplitude) * (unit(rng) < 0.5 ? -1.0 : 1.0);
      // Centres in [-box_x + r, box_x - r] x [-box_y, box_y].
      const double sx = c.box_x - b.radius;
      if (sx < 0.0) continue;
      b.center = {uniform(-sx, sx), uniform(-c.box_y, c.box_y)};
      placed = true;
      for (const RadialBump& o : g.bumps)
        if ((o.center - b.center).norm() < o.radius + b.radius) placed = false;
      if (placed) g.bumps.push_back(b);
    }
    if (!placed) throw ConfigError("could not place disjoint bumps; reduce count or radii");
  }
  return g;
}

std::vector<double> restrict_to(const AnalyticTestFunction& g, const FractalSet& set) {
  std::vector<double> f(set.size());
  for (std::size_t i = 0; i < set.size(); ++i) f[i] = g.evaluate(set.point(i)).value;
  return f;
}

GridFunction make_grid(const FractalSet& set, const std::vector<double>& f, int refine,
                       std::int64_t max_nodes_per_axis) {
  if (refine < 1) throw ConfigError("grid refinement must be a positive integer (h = Delta/refine)");
  if (f.size() != set.size()) throw ConfigError("f size does not match E");
  GridFunction g;
  g.inv_h = set.denom() * refine;
  g.n = 8 * g.inv_h + 1;
  if (g.n > max_nodes_per_axis)
    throw ConfigError("grid has " + std::to_string(g.n) + " nodes per axis, cap is " +
                      std::to_string(max_nodes_per_axis));
  const std::size_t total = static_cast<std::size_t>(g.n * g.n);
  g.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(total));
  g.constrained.assign(total, 0);
  const std::int64_t D = set.denom();
  auto put = [&](std::int64_t xnum, std::int64_t ynum, double v) {
    const std::int64_t i = (xnum + 4 * D) * refine, j = (ynum + 4 * D) * refine;
    const std::size_t idx = static_cast<std::size_t>(i + g.n * j);
    g.values[static_cast<Eigen::Index>(idx)] = v;
    g.constrained[idx] = 1;
  };
  for (std::size_t i = 0; i < set.e1_size(); ++i) put(set.e1_numerator(i), 0, f[i]);
  for (std::size_t j = 0; j < set.e2_size(); ++j) put(set.e2_numerator(j), 1, f[set.global_index_e2(j)]);
  return g;
}

namespace {

// Three second-difference rows per node, with the centre clamped inward.
struct Stencil {
  std::int64_t n;
  double inv_h2;
  template <class Fn>
  void rows(std::int64_t i, std::int64_t j, Fn&& emit) const {
    const std::int64_t ci = std::clamp<std::int64_t>(i, 1, n - 2);
    const std::int64_t cj = std::clamp<std::int64_t>(j, 1, n - 2);
    auto at = [&](std::int64_t a, std::int64_t b) { return a + n * b; };
    const std::array<std::pair<std::int64_t, double>, 3> d11{
        {{at(ci - 1, cj), inv_h2}, {at(ci, cj), -2.0 * inv_h2}, {at(ci + 1, cj), inv_h2}}};
    const std::array<std::pair<std::int64_t, double>, 3> d22{
        {{at(ci, cj - 1), inv_h2}, {at(ci, cj), -2.0 * inv_h2}, {at(ci, cj + 1), inv_h2}}};
    const double q = 0.25 * inv_h2;
    const std::array<std::pair<std::int64_t, double>, 4> d12{{{at(ci + 1, cj + 1), q},
                                                              {at(ci + 1, cj - 1), -q},
                                                              {at(ci - 1, cj + 1), -q},
                                                              {at(ci - 1, cj - 1), q}}};
    emit(0, std::span<const std::pair<std::int64_t, double>>(d11));
    emit(1, std::span<const std::pair<std::int64_t, double>>(d12));
    emit(2, std::span<const std::pair<std::int64_t, double>>(d22));
  }
};

// Per-node squared Frobenius norm of the discrete Hessian.
Eigen::VectorXd node_energy(const GridFunction& g) {
  const Stencil st{g.n, static_cast<double>(g.inv_h) * static_cast<double>(g.inv_h)};
  Eigen::VectorXd s(g.n * g.n);
  for (std::int64_t j = 0; j < g.n; ++j) {
    for (std::int64_t i = 0; i < g.n; ++i) {
      double acc = 0.0;
      st.rows(i, j, [&](int kind, std::span<const std::pair<std::int64_t, double>> row) {
        double v = 0.0;
        for (const auto& [c, w] : row) v += w * g.values[c];
        acc += (kind == 1 ? 2.0 : 1.0) * v * v;
      });
      s[i + g.n * j] = acc;
    }
  }
  return s;
}

bool is_border(std::int64_t i, std::int64_t j, std::int64_t n) {
  return i == 0 || j == 0 || i == n - 1 || j == n - 1;
}

}  // namespace

double discrete_seminorm(const GridFunction& g, double p) {
  const Eigen::VectorXd s = node_energy(g);
  const double h2 = g.h() * g.h();
  double total = 0.0;
  for (Eigen::Index k = 0; k < s.size(); ++k) total += std::pow(s[k], 0.5 * p);
  return total * h2;
}

GridFunction sample_on_grid(const Extension& ext, const GridFunction& like) {
  GridFunction g = like;
  for (std::int64_t j = 0; j < g.n; ++j)
    for (std::int64_t i = 0; i < g.n; ++i) {
      const std::int64_t k = i + g.n * j;
      if (!g.constrained[static_cast<std::size_t>(k)]) g.values[k] = ext.evaluate(g.node(i, j), 0).value;
    }
  return g;
}

GridFunction sample_on_grid(const AnalyticTestFunction& fn, const GridFunction& like) {
  GridFunction g = like;
  for (std::int64_t j = 0; j < g.n; ++j)
    for (std::int64_t i = 0; i < g.n; ++i) g.values[i + g.n * j] = fn.evaluate(g.node(i, j)).value;
  return g;
}

OracleResult grid_minimal_extension(const FractalSet& set, const std::vector<double>& f, double p,
                                    const OracleOptions& opt) {
  if (!(p > 1.0 && p <= 2.0)) throw ConfigError("oracle exponent p must lie in (1, 2]");
  if (opt.stages < 1 || opt.window < 1 || opt.max_iterations_per_stage < 1)
    throw ConfigError("bad oracle iteration settings");
  OracleResult res;
  res.grid = make_grid(set, f, opt.refine, opt.max_nodes_per_axis);
  GridFunction& g = res.grid;
  const std::int64_t n = g.n;
  const std::int64_t total = n * n;
  const double h2 = g.h() * g.h();

  // Free-node numbering.
  std::vector<std::int64_t> free_id(static_cast<std::size_t>(total), -1);
  std::int64_t nfree = 0;
  for (std::int64_t k = 0; k < total; ++k)
    if (!g.constrained[static_cast<std::size_t>(k)]) free_id[static_cast<std::size_t>(k)] = nfree++;

  // B: 3 rows per node (rows scaled by sqrt of the Frobenius multiplicity).
  using Sp = Eigen::SparseMatrix<double>;
  std::vector<Eigen::Triplet<double>> tf, tc;
  tf.reserve(static_cast<std::size_t>(total) * 10);
  const Stencil st{n, static_cast<double>(g.inv_h) * static_cast<double>(g.inv_h)};
  Eigen::VectorXd fixed = Eigen::VectorXd::Zero(3 * total);
  for (std::int64_t j = 0; j < n; ++j) {
    for (std::int64_t i = 0; i < n; ++i) {
      const std::int64_t node = i + n * j;
      st.rows(i, j, [&](int kind, std::span<const std::pair<std::int64_t, double>> row) {
        const std::int64_t r = 3 * node + kind;
        const double mult = kind == 1 ? std::sqrt(2.0) : 1.0;
        for (const auto& [c, w] : row) {
          const std::int64_t fid = free_id[static_cast<std::size_t>(c)];
          if (fid >= 0) tf.emplace_back(r, fid, mult * w);
          else fixed[r] += mult * w * g.values[c];
        }
      });
    }
  }
  Sp B(3 * total, nfree);
  B.setFromTriplets(tf.begin(), tf.end());
  const Sp Bt = B.transpose();

  Eigen::VectorXd x(nfree);
  for (std::int64_t k = 0; k < total; ++k)
    if (free_id[static_cast<std::size_t>(k)] >= 0) x[free_id[static_cast<std::size_t>(k)]] = g.values[k];

#ifdef WHITNEY_HAVE_CHOLMOD
  Eigen::CholmodSupernodalLLT<Sp> solver;
#else
  Eigen::SimplicialLDLT<Sp> solver;
#endif
  bool analyzed = false;
  auto solve_weighted = [&](const Eigen::VectorXd& row_w) {
    Sp K = Bt * row_w.asDiagonal() * B;
    if (!analyzed) {
      solver.analyzePattern(K);
      analyzed = true;
    }
    solver.factorize(K);
    if (solver.info() != Eigen::Success) throw ConvergenceError("oracle factorization failed", {}, 0.0);
    const Eigen::VectorXd rhs = -(Bt * row_w.asDiagonal() * fixed);
    x = solver.solve(rhs);
  };
  auto scatter = [&]() {
    for (std::int64_t k = 0; k < total; ++k) {
      const std::int64_t fid = free_id[static_cast<std::size_t>(k)];
      if (fid >= 0) g.values[k] = x[fid];
    }
  };
  auto node_s = [&](const Eigen::VectorXd& rows) {
    Eigen::VectorXd s(total);
    for (std::int64_t k = 0; k < total; ++k)
      s[k] = rows[3 * k] * rows[3 * k] + rows[3 * k + 1] * rows[3 * k + 1] + rows[3 * k + 2] * rows[3 * k + 2];
    return s;
  };
  auto expand = [&](const Eigen::VectorXd& w) {
    Eigen::VectorXd rw(3 * total);
    for (std::int64_t k = 0; k < total; ++k) rw[3 * k] = rw[3 * k + 1] = rw[3 * k + 2] = w[k];
    return rw;
  };

  // Quadratic start (exact answer at p = 2).
  solve_weighted(Eigen::VectorXd::Ones(3 * total));
  ++res.iterations;
  Eigen::VectorXd rows = B * x + fixed;
  Eigen::VectorXd s = node_s(rows);

  if (p < 2.0) {
    const double smax = s.maxCoeff();
    double mu2 = 0.0;
    for (int stage = 0; stage < opt.stages; ++stage) {
      mu2 = smax * std::pow(10.0, -2.0 * (stage + 1));
      auto smoothed = [&](const Eigen::VectorXd& sv) {
        double t = 0.0;
        for (std::int64_t k = 0; k < total; ++k) t += std::pow(sv[k] + mu2, 0.5 * p);
        return t * h2;
      };
      std::vector<double> history{smoothed(s)};
      for (int it = 0; it < opt.max_iterations_per_stage; ++it) {
        Eigen::VectorXd w(total);
        for (std::int64_t k = 0; k < total; ++k) w[k] = std::pow(s[k] + mu2, 0.5 * p - 1.0);
        solve_weighted(expand(w));
        ++res.iterations;
        rows = B * x + fixed;
        s = node_s(rows);
        history.push_back(smoothed(s));
        const std::size_t m = history.size();
        if (m > static_cast<std::size_t>(opt.window)) {
          const double old = history[m - 1 - static_cast<std::size_t>(opt.window)];
          if (old - history.back() <= opt.tol * old) break;
        }
      }
      res.stage_objectives.push_back(history.back());
    }
    // Gradient of the last smoothed objective at the free nodes.
    Eigen::VectorXd w(total);
    for (std::int64_t k = 0; k < total; ++k) w[k] = p * std::pow(s[k] + mu2, 0.5 * p - 1.0);
    const Eigen::VectorXd rw = expand(w);
    const Eigen::VectorXd grad = Bt * rw.cwiseProduct(rows);
    const Eigen::VectorXd scale = Bt.cwiseAbs() * rw.cwiseProduct(rows).cwiseAbs();
    res.gradient_norm = grad.cwiseAbs().maxCoeff() / std::max(scale.maxCoeff(), 1e-300);
  } else {
    const Eigen::VectorXd grad = Bt * rows;
    const Eigen::VectorXd scale = Bt.cwiseAbs() * rows.cwiseAbs();
    res.gradient_norm = grad.cwiseAbs().maxCoeff() / std::max(scale.maxCoeff(), 1e-300);
  }
  scatter();
  res.objective = discrete_seminorm(g, p);
  double border = 0.0;
  for (std::int64_t j = 0; j < n; ++j)
    for (std::int64_t i = 0; i < n; ++i)
      if (is_border(i, j, n)) border += std::pow(s[i + n * j], 0.5 * p) * h2;
  res.border_share = res.objective > 0.0 ? border / res.objective : 0.0;
  return res;
}

}  // namespace whitney
