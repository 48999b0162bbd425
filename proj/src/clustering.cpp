#include "whitney/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace whitney {

namespace {

std::int64_t pow10(int m) { return checked_pow(10, m, std::int64_t{1} << 60); }

// N^(L-l-1) for 0 <= l <= L-1: radius numerator over D before the factor A.
std::int64_t radius_power(const FractalSet& set, int l) {
  return checked_pow(set.inv_eps(), set.depth() - l - 1, set.denom());
}

std::int64_t eps_power(const FractalSet& set, int l) {
  return checked_pow(set.inv_eps(), set.depth() - l, set.denom());
}

i128 sq(i128 v) { return v * v; }

}  // namespace

ClusterTree::ClusterTree(const FractalSet& set, const ClusterConfig& config)
    : set_(set), config_(config) {
  if (config_.ball_scale.num <= 0) throw ConfigError("ball scale A must be positive");
  if (config_.m < 0 || config_.m > 12) throw ConfigError("M must lie in [0, 12]");
  const int L = set_.depth();
  const std::int64_t N = set_.inv_eps();
  nodes_.resize((std::size_t{2} << L) - 1);
  for (int l = 0; l <= L; ++l) {
    const std::size_t count = std::size_t{1} << l;
    const std::size_t width = std::size_t{1} << (L - l);
    for (std::size_t i = 0; i < count; ++i) {
      Cluster& c = nodes_[id(l, i)];
      c.depth = l;
      c.position = static_cast<std::uint32_t>(i);
      c.prefix.resize(static_cast<std::size_t>(l));
      std::int64_t w = set_.denom();
      std::int64_t center = 0;
      for (int k = 1; k <= l; ++k) {
        w /= N;
        const int s = ((i >> (l - k)) & 1U) ? 1 : -1;
        c.prefix[static_cast<std::size_t>(k - 1)] = s;
        center += s * w;
      }
      c.center_numerator = center;
      c.first = i * width;
      c.last = (i + 1) * width;
    }
  }
  report_ = verify_separation(*this);
}

Fraction ClusterTree::radius_exact(int depth) const {
  const Fraction& a = config_.ball_scale;
  return {a.num * radius_power(set_, depth), a.den * set_.denom()};
}

Ball ClusterTree::ball(std::size_t id) const {
  const Cluster& c = nodes_[id];
  if (c.depth >= depth()) throw ConfigError("B_C is defined only below depth L");
  const double D = static_cast<double>(set_.denom());
  return {Vec2(static_cast<double>(c.center_numerator) / D, 0.5 / D),
          radius_exact(c.depth).to_double()};
}

Ball ClusterTree::hat_ball(std::size_t id) const {
  const Cluster& c = nodes_[id];
  if (c.depth < 1 || c.depth >= depth()) throw ConfigError("B-hat_C is defined for 1 <= depth <= L-1");
  Ball b = ball(id);
  b.radius *= static_cast<double>(pow10(config_.m + 1));
  return b;
}

ClusterSeparationReport verify_separation(const ClusterTree& tree) {
  ClusterSeparationReport r;
  const FractalSet& set = tree.set();
  const int L = set.depth();
  const i128 a = tree.config().ball_scale.num;
  const i128 b = tree.config().ball_scale.den;
  const i128 hat = pow10(tree.config().m + 1);
  const double inf = std::numeric_limits<double>::infinity();

  // Lengths in units of 1/(2 D b).
  r.members_inside = true;
  r.ball_nesting = r.hat_nesting = true;
  r.ball_disjoint = r.hat_disjoint = true;
  r.min_ball_gap = r.min_hat_gap = inf;
  r.min_ball_nesting_margin = r.min_hat_nesting_margin = inf;
  for (int l = 0; l <= L - 1; ++l) {
    const i128 rad = 2 * a * radius_power(set, l);
    const double unit = static_cast<double>(2 * b * eps_power(set, l));
    const std::size_t count = std::size_t{1} << l;
    for (std::size_t i = 0; i < count; ++i) {
      const Cluster& c = tree.node(ClusterTree::id(l, i));
      const auto e2 = set.e2_numerators();
      for (std::size_t k : {c.first, c.last - 1}) {
        const i128 dx = 2 * b * (static_cast<i128>(e2[k]) - c.center_numerator);
        if (sq(dx) + sq(b) > sq(rad)) r.members_inside = false;
      }
      if (l >= 1) {
        const Cluster& p = tree.node(ClusterTree::parent(ClusterTree::id(l, i)));
        const i128 prad = 2 * a * radius_power(set, l - 1);
        i128 off = 2 * b * (static_cast<i128>(c.center_numerator) - p.center_numerator);
        if (off < 0) off = -off;
        const i128 m1 = prad - off - rad;
        const i128 m2 = prad - off - hat * rad;
        r.min_ball_nesting_margin = std::min(r.min_ball_nesting_margin, static_cast<double>(m1) / unit);
        r.min_hat_nesting_margin = std::min(r.min_hat_nesting_margin, static_cast<double>(m2) / unit);
        if (m1 < 0) r.ball_nesting = false;
        if (m2 < 0) r.hat_nesting = false;
      }
      if (l >= 1 && i + 1 < count) {
        const Cluster& n = tree.node(ClusterTree::id(l, i + 1));
        const i128 gap = 2 * b * (static_cast<i128>(n.center_numerator) - c.center_numerator);
        const i128 g1 = gap - 2 * rad;
        const i128 g2 = gap - 2 * hat * rad;
        r.min_ball_gap = std::min(r.min_ball_gap, static_cast<double>(g1) / unit);
        r.min_hat_gap = std::min(r.min_hat_gap, static_cast<double>(g2) / unit);
        if (g1 <= 0) r.ball_disjoint = false;
        if (g2 <= 0) r.hat_disjoint = false;
      }
    }
  }

  // Nesting needs N (a - b) >= 10^(M+1) a; disjointness needs N b > 10^(M+1) a.
  const i128 need_disjoint = hat * a / b + 1;
  if (a > b) {
    const i128 need_nest = (hat * a + (a - b) - 1) / (a - b);
    r.hat_threshold_inv_eps = static_cast<std::int64_t>(std::max(need_nest, need_disjoint));
  } else {
    r.hat_threshold_inv_eps = -1;
  }

  if (!r.members_inside) r.failures.emplace_back("some cluster leaves its ball B_C");
  if (!r.ball_nesting) r.failures.emplace_back("B_C not inside B_parent");
  if (!r.ball_disjoint) r.failures.emplace_back("same-depth B_C intersect");
  if (!r.hat_nesting)
    r.failures.emplace_back("B-hat_C not inside B_parent (needs N >= " +
                            std::to_string(r.hat_threshold_inv_eps) + ")");
  if (!r.hat_disjoint) r.failures.emplace_back("same-depth B-hat_C intersect");
  r.passed = r.failures.empty();
  return r;
}

ClusterTree build_cluster_tree(const FractalSet& set, const ClusterConfig& config) {
  ClusterTree tree(set, config);
  const ClusterSeparationReport& r = tree.report();
  if (!r.members_inside || !r.ball_nesting || !r.ball_disjoint)
    throw GeometryError("ball system B_C infeasible for eps = 1/" + std::to_string(set.inv_eps()));
  if (config.strict && (!r.hat_nesting || !r.hat_disjoint))
    throw GeometryError("B-hat separation fails for eps = 1/" + std::to_string(set.inv_eps()) +
                        ", A = " + std::to_string(config.ball_scale.to_double()) +
                        ", M = " + std::to_string(config.m) + "; needs N >= " +
                        std::to_string(r.hat_threshold_inv_eps));
  return tree;
}

std::size_t deepest_containing_ball(const DyadicSquare& q, const Lattice& lattice,
                                    const ClusterTree& tree) {
  const FractalSet& set = tree.set();
  const i128 D = set.denom();
  const i128 P = lattice.per_unit();
  const i128 a = tree.config().ball_scale.num;
  const i128 b = tree.config().ball_scale.den;
  if (8 * P * D * b > (i128{1} << 62)) throw ConfigError("ball test exceeds exact range");

  // Common scale 2 P D b.
  const LatticeBox box = lattice.box(q);
  const i128 xs[2] = {box.x0 * 2 * D * b, box.x1 * 2 * D * b};
  const i128 ys[2] = {box.y0 * 2 * D * b, box.y1 * 2 * D * b};
  const i128 cy = P * b;
  const double qx = q.center().x();
  const double Dd = static_cast<double>(set.denom());

  for (int l = tree.depth() - 1; l >= 0; --l) {
    const std::size_t count = std::size_t{1} << l;
    const std::size_t base = ClusterTree::id(l, 0);
    // Centres are increasing in position; the nearest one or its neighbour
    // is the only possible holder since same-depth balls are disjoint.
    std::size_t lo = 0, hi = count;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      if (static_cast<double>(tree.node(base + mid).center_numerator) / Dd < qx) lo = mid + 1;
      else hi = mid;
    }
    const i128 rad = 2 * P * a * radius_power(set, l);
    for (std::size_t cand : {lo, lo - 1}) {
      if (cand >= count) continue;
      const i128 cx = 2 * P * b * tree.node(base + cand).center_numerator;
      bool inside = true;
      for (i128 x : xs)
        for (i128 y : ys)
          if (sq(x - cx) + sq(y - cy) > sq(rad)) inside = false;
      if (inside) return base + cand;
    }
  }
  return 0;
}

std::size_t assign_cluster(std::size_t q, const CzDecomposition& decomp, const ClusterTree& tree) {
  if (&decomp.set() != &tree.set() && (decomp.set().denom() != tree.set().denom() ||
                                       decomp.set().inv_eps() != tree.set().inv_eps()))
    throw ConsistencyError("decomposition and cluster tree use different sets");
  if (auto j = decomp.x_point(q)) return tree.leaf_of(*j);
  return deepest_containing_ball(decomp.square(q), decomp.lattice(), tree);
}

std::vector<std::uint32_t> assign_clusters(const CzDecomposition& decomp, const ClusterTree& tree) {
  std::vector<std::uint32_t> out(decomp.size());
  for (std::size_t q = 0; q < decomp.size(); ++q)
    out[q] = static_cast<std::uint32_t>(assign_cluster(q, decomp, tree));
  return out;
}

}  // namespace whitney
