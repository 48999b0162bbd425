#include "whitney/tree_extension.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace whitney {

namespace {

double spow(double x, double e) {  // |x|^e sgn(x)
  if (x == 0.0) return 0.0;
  return x > 0.0 ? std::pow(x, e) : -std::pow(-x, e);
}

int depth_of(std::size_t id) {
  int d = 0;
  while (id > 0) {
    id = (id - 1) / 2;
    ++d;
  }
  return d;
}

void check_problem(const TreeProblem& pr) {
  if (pr.depth < 1 || pr.depth > 30) throw ConfigError("tree depth must lie in [1, 30]");
  if (!(pr.p > 1.0 && pr.p <= 2.0)) throw ConfigError("tree exponent p must lie in (1, 2]");
  if (static_cast<int>(pr.weights.size()) != pr.depth)
    throw ConfigError("expected " + std::to_string(pr.depth) + " level weights");
  for (double w : pr.weights)
    if (!(w > 0.0) || !std::isfinite(w)) throw ConfigError("level weights must be positive");
  if (pr.leaves.size() != (std::size_t{1} << pr.depth))
    throw ConfigError("expected 2^depth leaf values");
  for (double v : pr.leaves)
    if (!std::isfinite(v)) throw ConfigError("leaf values must be finite");
}

// Minimizes sum_j w_j |t - b_j|^p over t. On return diff[j] = t - b_j,
// accurate relative to its own size for the breakpoint nearest t.
struct Point1D {
  double b;
  double w;
};

template <std::size_t K>
void solve_1d(const std::array<Point1D, K>& pts, std::size_t n, double p,
              std::array<double, K>& diff) {
  const double e = p - 1.0;
  std::array<std::size_t, K> ord{};
  for (std::size_t j = 0; j < n; ++j) ord[j] = j;
  std::sort(ord.begin(), ord.begin() + static_cast<long>(n),
            [&](std::size_t x, std::size_t y) { return pts[x].b < pts[y].b; });

  // Derivative at t = b_k + s, with offsets taken relative to b_k.
  auto g_at = [&](std::size_t k, double s) {
    double g = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = (j == k) ? s : (pts[k].b - pts[j].b) + s;
      g += pts[j].w * spow(d, e);
    }
    return g;
  };
  auto dg_at = [&](std::size_t k, double s) {
    double g = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = std::abs((j == k) ? s : (pts[k].b - pts[j].b) + s);
      if (d == 0.0) return std::numeric_limits<double>::infinity();
      g += pts[j].w * e * std::pow(d, e - 1.0);
    }
    return g;
  };

  // Bracket between consecutive breakpoints.
  std::size_t lo_k = ord[0];
  std::size_t hi_k = ord[n - 1];
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t k = ord[r];
    const double g = g_at(k, 0.0);
    if (g == 0.0) {
      for (std::size_t j = 0; j < n; ++j) diff[j] = (j == k) ? 0.0 : pts[k].b - pts[j].b;
      return;
    }
    if (g < 0.0) lo_k = k;
    else {
      hi_k = k;
      break;
    }
  }
  const double gap = pts[hi_k].b - pts[lo_k].b;

  // Work from the nearer end: t = anchor + sign * s with s in [0, gap/2].
  const double mid = pts[lo_k].b + 0.5 * gap;
  const bool from_lo = g_at(lo_k, mid - pts[lo_k].b) >= 0.0;
  const std::size_t k = from_lo ? lo_k : hi_k;
  const double sign = from_lo ? 1.0 : -1.0;
  // h is increasing in s with h(0) < 0.
  auto h = [&](double s) { return sign * g_at(k, sign * s); };
  double lo = 0.0, hi = 0.5 * gap;
  double s = 0.5 * (lo + hi);
  for (int it = 0; it < 4000; ++it) {
    const double hv = h(s);
    if (hv == 0.0) break;
    if (hv < 0.0) lo = s;
    else hi = s;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) break;
    // Newton proposal.
    const double slope = dg_at(k, sign * s);
    double next = std::isfinite(slope) && slope > 0.0 ? s - hv / slope : -1.0;
    if (!(next > lo && next < hi)) {
      next = (lo > 0.0 && hi > 4.0 * lo) ? std::sqrt(lo) * std::sqrt(hi) : 0.5 * (lo + hi);
      if (lo == 0.0 && hi > 0.0) next = 0.5 * hi;
    }
    if (next == s) break;
    s = next;
  }
  for (std::size_t j = 0; j < n; ++j)
    diff[j] = (j == k) ? sign * s : (pts[k].b - pts[j].b) + sign * s;
}

}  // namespace

std::vector<double> leaf_slopes(const std::vector<double>& f, const FractalSet& set) {
  if (f.size() != set.size())
    throw ConfigError("f has " + std::to_string(f.size()) + " values, E has " +
                      std::to_string(set.size()));
  const double D = static_cast<double>(set.denom());
  std::vector<double> eta(set.e2_size());
  for (std::size_t j = 0; j < set.e2_size(); ++j) {
    const double top = f[set.global_index_e2(j)];
    const double bottom = f[set.projection_of_e2(j)];
    if (std::isnan(top) || std::isnan(bottom))
      throw ConfigError("missing f value at E2 point " + std::to_string(j) + " or its projection");
    eta[j] = (top - bottom) * D;
  }
  return eta;
}

std::vector<double> level_weights(const FractalParams& params, double p) {
  if (!(p > 1.0 && p < 2.0)) throw ConfigError("p must lie in (1, 2)");
  const double eps = params.eps();
  const int L = params.depth;
  std::vector<double> w(static_cast<std::size_t>(L));
  for (int l = 1; l <= L; ++l) {
    const int k = (l < L) ? l + 1 : L;
    w[static_cast<std::size_t>(l - 1)] = std::pow(eps, k * (2.0 - p));
  }
  return w;
}

double tree_objective(const std::vector<double>& values, const std::vector<double>& weights, double p) {
  double s = 0.0;
  for (std::size_t v = 1; v < values.size(); ++v) {
    const double d = values[v] - values[(v - 1) / 2];
    s += weights[static_cast<std::size_t>(depth_of(v) - 1)] * std::pow(std::abs(d), p);
  }
  return s;
}

double tree_seminorm(const std::vector<double>& values, const std::vector<double>& weights, double p) {
  return std::pow(tree_objective(values, weights, p), 1.0 / p);
}

double tree_kkt_residual(const std::vector<double>& edges, const std::vector<double>& weights,
                         double p, double spread) {
  const std::size_t n = edges.size();
  const std::size_t internal = (n - 1) / 2;
  const double e = p - 1.0;
  const double scale = std::pow(spread, e);
  double worst = 0.0;
  for (std::size_t v = 0; v < internal; ++v) {
    const int l = depth_of(v);
    const double wc = weights[static_cast<std::size_t>(l)];
    double g = -wc * (spow(edges[2 * v + 1], e) + spow(edges[2 * v + 2], e));
    double wsum = 2.0 * wc;
    if (v > 0) {
      const double wp = weights[static_cast<std::size_t>(l - 1)];
      g += wp * spow(edges[v], e);
      wsum += wp;
    }
    worst = std::max(worst, std::abs(g) / (wsum * scale));
  }
  return worst;
}

TreeSolution minimize_tree(const TreeProblem& pr, const TreeSolverOptions& opt) {
  check_problem(pr);
  if (!(opt.tol > 0.0)) throw ConfigError("tolerance must be positive");
  const int L = pr.depth;
  const std::size_t n = (std::size_t{2} << L) - 1;
  const std::size_t internal = (std::size_t{1} << L) - 1;
  const auto [mn, mx] = std::minmax_element(pr.leaves.begin(), pr.leaves.end());
  const double spread = *mx - *mn;

  TreeSolution sol;
  sol.values.assign(n, 0.0);
  sol.edges.assign(n, 0.0);
  std::copy(pr.leaves.begin(), pr.leaves.end(), sol.values.begin() + static_cast<long>(internal));
  if (spread == 0.0) {
    std::fill(sol.values.begin(), sol.values.begin() + static_cast<long>(internal), *mn);
    return sol;
  }

  // Bottom-up child means.
  for (std::size_t v = internal; v-- > 0;)
    sol.values[v] = 0.5 * (sol.values[2 * v + 1] + sol.values[2 * v + 2]);
  for (std::size_t v = 1; v < n; ++v) sol.edges[v] = sol.values[v] - sol.values[(v - 1) / 2];
  double root = sol.values[0];

  std::vector<int> level(internal);
  for (std::size_t v = 0; v < internal; ++v) level[v] = depth_of(v);

  auto& d = sol.edges;
  std::array<Point1D, 3> pts{};
  std::array<double, 3> diff{};
  auto relax = [&](std::size_t v) {
    const int l = level[v];
    const double wc = pr.weights[static_cast<std::size_t>(l)];
    const std::size_t c1 = 2 * v + 1, c2 = 2 * v + 2;
    if (v == 0) {
      // Shift the root by t: child edges become d_u - t.
      pts[0] = {d[c1], wc};
      pts[1] = {d[c2], wc};
      solve_1d(pts, 2, pr.p, diff);
      const double t = d[c1] + diff[0];
      root += t;
      d[c1] = -diff[0];
      d[c2] = -diff[1];
    } else {
      // New parent edge t; child edges become (d_u + d_v) - t.
      pts[0] = {0.0, pr.weights[static_cast<std::size_t>(l - 1)]};
      pts[1] = {d[c1] + d[v], wc};
      pts[2] = {d[c2] + d[v], wc};
      solve_1d(pts, 3, pr.p, diff);
      d[v] = diff[0];
      d[c1] = -diff[1];
      d[c2] = -diff[2];
    }
  };

  auto rebuild = [&]() {
    sol.values[0] = root;
    for (std::size_t v = 1; v < internal; ++v) sol.values[v] = sol.values[(v - 1) / 2] + d[v];
  };

  // Newton direction on the tree Laplacian with edge conductances
  // c_v = w p (p-1) |d_v|^(p-2), solved by elimination towards the root.
  // Steps are produced directly as edge increments.
  const double e = pr.p - 1.0;
  std::vector<double> cond(n), S(internal), r(internal), step(n), dx(internal);
  auto edge_weight = [&](std::size_t v) {
    return pr.weights[static_cast<std::size_t>(v < internal ? level[v] - 1 : L - 1)];
  };
  auto newton = [&]() {
    for (std::size_t v = 1; v < n; ++v) {
      const double a = std::max(std::abs(d[v]), 1e-280);
      cond[v] = edge_weight(v) * pr.p * e * std::pow(a, pr.p - 2.0);
    }
    for (std::size_t v = internal; v-- > 0;) {
      const std::size_t c1 = 2 * v + 1, c2 = 2 * v + 2;
      const double wc = pr.weights[static_cast<std::size_t>(level[v])];
      double g = -wc * pr.p * (spow(d[c1], e) + spow(d[c2], e));
      if (v > 0) g += edge_weight(v) * pr.p * spow(d[v], e);
      double sv = 0.0, rv = -g;
      for (std::size_t u : {c1, c2}) {
        if (u >= internal) {
          sv += cond[u];
        } else {
          const double den = cond[u] + S[u];
          sv += cond[u] * (S[u] / den);
          rv += cond[u] * (r[u] / den);
        }
      }
      S[v] = sv;
      r[v] = rv;
    }
    dx[0] = r[0] / S[0];
    step[0] = dx[0];
    for (std::size_t v = 1; v < internal; ++v) {
      const double xp = dx[(v - 1) / 2];
      const double den = cond[v] + S[v];
      step[v] = (r[v] - S[v] * xp) / den;
      dx[v] = xp + step[v];
    }
    for (std::size_t v = internal; v < n; ++v) step[v] = -dx[(v - 1) / 2];

    // Exact line search: the directional derivative is increasing in alpha.
    auto slope = [&](double alpha) {
      double s = 0.0;
      for (std::size_t v = 1; v < n; ++v)
        if (step[v] != 0.0) s += edge_weight(v) * spow(d[v] + alpha * step[v], e) * step[v];
      return s;
    };
    if (!(slope(0.0) < 0.0)) return;
    double lo = 0.0, hi = 1.0;
    while (slope(hi) < 0.0 && hi < 1e6) {
      lo = hi;
      hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (slope(mid) < 0.0) lo = mid;
      else hi = mid;
    }
    const double alpha = lo > 0.0 ? lo : 0.5 * hi;
    root += alpha * step[0];
    for (std::size_t v = 1; v < n; ++v) d[v] += alpha * step[v];
  };

  double res = tree_kkt_residual(d, pr.weights, pr.p, spread);
  int sweep = 0;
  while (res > opt.tol && sweep < opt.max_iterations) {
    newton();
    for (std::size_t v = internal; v-- > 0;) relax(v);
    for (std::size_t v = 0; v < internal; ++v) relax(v);
    ++sweep;
    res = tree_kkt_residual(d, pr.weights, pr.p, spread);
  }
  rebuild();
  sol.iterations = sweep;
  sol.kkt_residual = res;
  sol.objective = 0.0;
  for (std::size_t v = 1; v < n; ++v)
    sol.objective += pr.weights[static_cast<std::size_t>(depth_of(v) - 1)] * std::pow(std::abs(d[v]), pr.p);
  if (res > opt.tol)
    throw ConvergenceError("tree solver stopped at scaled KKT residual " + std::to_string(res),
                           sol.values, res);
  return sol;
}

}  // namespace whitney
