#include "whitney/interpolant.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <boost/math/special_functions/legendre.hpp>

namespace whitney {

AffinePolynomial fit_L(double fz, std::int64_t z, double fw, std::int64_t w, std::int64_t denom) {
  if (z == w) throw ConfigError("anchors z_Q and w_Q coincide");
  const double D = static_cast<double>(denom);
  AffinePolynomial L;
  L.a1 = ((fz - fw) * D) / static_cast<double>(z - w);
  L.a0 = fz - L.a1 * (static_cast<double>(z) / D);
  return L;
}

Extension::Extension(std::shared_ptr<const CzDecomposition> decomp, std::vector<Piece> pieces,
                     AffinePolynomial tail, BumpSpec spec)
    : decomp_(std::move(decomp)), pieces_(std::move(pieces)), tail_(tail), spec_(spec) {
  if (!decomp_) throw ConsistencyError("extension without decomposition");
  if (pieces_.size() != decomp_->size()) throw ConsistencyError("one piece per square expected");
}

namespace {

Jet tail_jet(const AffinePolynomial& t, const Vec2& x) {
  Jet j;
  j.value = t(x);
  j.gradient = t.gradient();
  return j;
}

bool inside_q0(const Vec2& x) {
  return x.x() >= -4.0 && x.x() < 4.0 && x.y() >= -4.0 && x.y() < 4.0;
}

}  // namespace

Jet Extension::evaluate_in(std::size_t q, const Vec2& x, std::span<const std::uint32_t> candidates,
                           int order) const {
  // Pre-bumps; the containing square always contributes 1.
  struct Term {
    std::size_t k;
    Jet phi;
  };
  Term terms[64];
  std::size_t n = 0;
  terms[n++] = {q, pre_bump(decomp_->square(q), x, spec_)};
  for (std::uint32_t k : candidates) {
    if (k == q) continue;
    Jet j = pre_bump(decomp_->square(k), x, spec_);
    if (j.value > 0.0) {
      if (n == 64) throw GeometryError("overlap count exceeds 64");
      terms[n++] = {k, j};
    }
  }
  double s = 0.0;
  Vec2 gs = Vec2::Zero();
  Mat2 hs = Mat2::Zero();
  for (std::size_t i = 0; i < n; ++i) {
    s += terms[i].phi.value;
    gs += terms[i].phi.gradient;
    hs += terms[i].phi.hessian;
  }
  const double is = 1.0 / s;

  const AffinePolynomial ref = pieces_[q].P();
  Jet F;
  F.value = ref(x);
  F.gradient = ref.gradient();
  for (std::size_t i = 1; i < n; ++i) {
    const AffinePolynomial P = pieces_[terms[i].k].P();
    const double d0 = P.a0 - ref.a0, d1 = P.a1 - ref.a1, d2 = P.a2 - ref.a2;
    if (d0 == 0.0 && d1 == 0.0 && d2 == 0.0) continue;
    const Jet& phi = terms[i].phi;
    const double th = phi.value * is;
    const Vec2 g = (phi.gradient - th * gs) * is;
    const double Dv = d0 + d1 * x.x() + d2 * x.y();
    const Vec2 Dg(d1, d2);
    F.value += th * Dv;
    if (order >= 1) F.gradient += g * Dv + th * Dg;
    if (order >= 2) {
      const Mat2 h = (phi.hessian - g * gs.transpose() - gs * g.transpose() - th * hs) * is;
      F.hessian += h * Dv + g * Dg.transpose() + Dg * g.transpose();
    }
  }
  if (order < 1) F.gradient.setZero();
  return F;
}

Jet Extension::evaluate(const Vec2& x, int order) const {
  if (!inside_q0(x)) return tail_jet(tail_, x);
  const std::size_t q = decomp_->locate(x);
  if (spec_.margin <= 0.05) return evaluate_in(q, x, decomp_->neighbors(q), order);
  std::vector<std::uint32_t> cover;
  decomp_->for_each_covering(x, spec_.margin,
                             [&](std::size_t k) { cover.push_back(static_cast<std::uint32_t>(k)); });
  return evaluate_in(q, x, cover, order);
}

Extension assemble(const std::vector<double>& f, std::shared_ptr<const CzDecomposition> decomp,
                   const ClusterTree& tree, const TreeSolution& solution, const BumpSpec& spec) {
  if (!decomp) throw ConsistencyError("missing decomposition");
  const FractalSet& set = decomp->set();
  if (tree.set().denom() != set.denom() || tree.set().inv_eps() != set.inv_eps())
    throw ConsistencyError("cluster tree and decomposition use different sets");
  if (solution.values.size() != tree.size())
    throw ConsistencyError("tree solution has " + std::to_string(solution.values.size()) +
                           " values, tree has " + std::to_string(tree.size()) + " nodes");
  const std::vector<double> eta = leaf_slopes(f, set);
  for (std::size_t j = 0; j < eta.size(); ++j)
    if (solution.values[tree.leaf_of(j)] != eta[j])
      throw ConsistencyError("tree solution leaves do not match the slopes of f");

  const std::vector<std::uint32_t> cluster = assign_clusters(*decomp, tree);
  std::vector<Piece> pieces(decomp->size());
  const std::int64_t D = set.denom();
  for (std::size_t q = 0; q < decomp->size(); ++q) {
    const Anchors& an = decomp->anchors(q);
    if (cluster[q] >= tree.size()) throw ConsistencyError("square assigned to unknown cluster");
    Piece& pc = pieces[q];
    pc.L = fit_L(f[set.e1_index(an.z)], an.z, f[set.e1_index(an.w)], an.w, D);
    pc.cluster = cluster[q];
    pc.eta = solution.values[cluster[q]];
  }

  AffinePolynomial tail;
  bool have_tail = false;
  for (std::size_t q = 0; q < decomp->size(); ++q) {
    if (!decomp->is_boundary(q)) continue;
    const AffinePolynomial P = pieces[q].P();
    if (!have_tail) {
      tail = P;
      have_tail = true;
    } else if (!(P == tail)) {
      throw ConsistencyError("boundary squares disagree on (L0, eta0)");
    }
  }
  if (!have_tail) throw ConsistencyError("decomposition has no boundary square");
  return Extension(std::move(decomp), std::move(pieces), tail, spec);
}

PipelineResult extend(const std::vector<double>& f, std::shared_ptr<const CzDecomposition> decomp,
                      const PipelineConfig& config) {
  if (!decomp) throw ConsistencyError("missing decomposition");
  const FractalSet& set = decomp->set();
  PipelineResult r;
  r.decomp = decomp;
  if (config.p == 2.0) r.weights.assign(static_cast<std::size_t>(set.depth()), 1.0);
  else r.weights = level_weights(set.params(), config.p);
  r.tree = std::make_shared<const ClusterTree>(build_cluster_tree(set, config.cluster));
  TreeProblem pr;
  pr.depth = set.depth();
  pr.p = config.p;
  pr.weights = r.weights;
  pr.leaves = leaf_slopes(f, set);
  r.solution = minimize_tree(pr, config.tree);
  r.extension = std::make_shared<const Extension>(
      assemble(f, decomp, *r.tree, r.solution, config.bump));
  return r;
}

namespace {

struct GaussRule {
  std::vector<double> x, w;  // on [-1, 1]
};

GaussRule gauss_legendre(int n) {
  if (n < 1 || n > 40) throw ConfigError("Gauss-Legendre nodes must lie in [1, 40]");
  GaussRule g;
  const auto zeros = boost::math::legendre_p_zeros<double>(n);
  for (double z : zeros) {
    const double dp = boost::math::legendre_p_prime(n, z);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    g.x.push_back(z);
    g.w.push_back(w);
    if (z != 0.0) {
      g.x.push_back(-z);
      g.w.push_back(w);
    }
  }
  return g;
}

struct Band {
  double lo, hi;  // open support of phi along one axis
};

double integrate(const Extension& ext, double p, int k, const GaussRule& rule, std::size_t* cells) {
  const CzDecomposition& dc = ext.decomposition();
  const double margin = ext.bump_spec().margin;
  double total = 0.0;
  std::vector<double> xs, ys;
  std::vector<std::uint32_t> active;
  std::size_t cell_count = 0;
  for (std::size_t q = 0; q < dc.size(); ++q) {
    const DyadicSquare& sq = dc.square(q);
    const double d = sq.side();
    const Vec2 a = sq.corner();
    const auto nb = dc.neighbors(q);
    xs.assign({a.x(), a.x() + d});
    ys.assign({a.y(), a.y() + d});
    for (std::uint32_t k2 : nb) {
      const DyadicSquare& s2 = dc.square(k2);
      const double d2 = s2.side(), m2 = margin * d2;
      const Vec2 a2 = s2.corner();
      for (double t : {a2.x() - m2, a2.x(), a2.x() + d2, a2.x() + d2 + m2})
        if (t > a.x() && t < a.x() + d) xs.push_back(t);
      for (double t : {a2.y() - m2, a2.y(), a2.y() + d2, a2.y() + d2 + m2})
        if (t > a.y() && t < a.y() + d) ys.push_back(t);
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    std::sort(ys.begin(), ys.end());
    ys.erase(std::unique(ys.begin(), ys.end()), ys.end());

    const AffinePolynomial Pq = ext.piece(q).P();
    double sq_total = 0.0;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
      for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
        const double x0 = xs[i], x1 = xs[i + 1], y0 = ys[j], y1 = ys[j + 1];
        active.clear();
        bool differs = false;
        for (std::uint32_t k2 : nb) {
          const DyadicSquare& s2 = dc.square(k2);
          const double d2 = s2.side(), m2 = margin * d2;
          const Vec2 a2 = s2.corner();
          if (a2.x() - m2 < x1 && a2.x() + d2 + m2 > x0 && a2.y() - m2 < y1 && a2.y() + d2 + m2 > y0) {
            active.push_back(k2);
            if (!(ext.piece(k2).P() == Pq)) differs = true;
          }
        }
        if (active.empty() || !differs) continue;
        ++cell_count;
        const double hx = (x1 - x0) / k, hy = (y1 - y0) / k;
        for (int si = 0; si < k; ++si) {
          for (int sj = 0; sj < k; ++sj) {
            const double cx = x0 + (si + 0.5) * hx, cy = y0 + (sj + 0.5) * hy;
            double acc = 0.0;
            for (std::size_t u = 0; u < rule.x.size(); ++u) {
              for (std::size_t v = 0; v < rule.x.size(); ++v) {
                const Vec2 x(cx + 0.5 * hx * rule.x[u], cy + 0.5 * hy * rule.x[v]);
                const Mat2 H = ext.evaluate_in(q, x, active, 2).hessian;
                const double s2 = H(0, 0) * H(0, 0) + 2.0 * H(0, 1) * H(0, 1) + H(1, 1) * H(1, 1);
                acc += rule.w[u] * rule.w[v] * std::pow(s2, 0.5 * p);
              }
            }
            sq_total += acc * 0.25 * hx * hy;
          }
        }
      }
    }
    total += sq_total;
  }
  if (cells) *cells = cell_count;
  return total;
}

}  // namespace

SeminormEstimate seminorm(const Extension& ext, double p, const QuadratureConfig& config) {
  if (!(p >= 1.0)) throw ConfigError("seminorm exponent must be at least 1");
  if (config.subcells < 1) throw ConfigError("subcells must be positive");
  if (ext.bump_spec().margin > 0.05) throw ConfigError("quadrature assumes bump margin <= 0.05");
  const GaussRule rule = gauss_legendre(config.nodes);
  SeminormEstimate est;
  est.config = config;
  est.integral = integrate(ext, p, config.subcells, rule, &est.cells);
  est.value = std::pow(est.integral, 1.0 / p);
  if (config.estimate_error) {
    const double fine = integrate(ext, p, 2 * config.subcells, rule, nullptr);
    est.refined_value = std::pow(fine, 1.0 / p);
    const double diff = std::abs(est.value - est.refined_value);
    est.refinement_error = est.refined_value > 0.0 ? diff / est.refined_value : diff;
    est.within_tolerance = est.refinement_error <= config.tolerance;
  } else {
    est.refined_value = est.value;
  }
  return est;
}

PatchingSums patching_rhs(const Extension& ext, double p) {
  const CzDecomposition& dc = ext.decomposition();
  PatchingSums s;
  for (std::size_t q = 0; q < dc.size(); ++q) {
    const DyadicSquare& sq = dc.square(q);
    const double d = sq.side();
    const double xa = sq.corner().x(), xb = xa + d;
    const Piece& pq = ext.piece(q);
    for (std::uint32_t k : dc.neighbors(q)) {
      const Piece& pk = ext.piece(k);
      const double d0 = pq.L.a0 - pk.L.a0, d1 = pq.L.a1 - pk.L.a1;
      const double sup = std::max(std::abs(d0 + d1 * xa), std::abs(d0 + d1 * xb));
      if (sup > 0.0) s.lq_sum += std::pow(sup, p) * std::pow(d, 2.0 - 2.0 * p);
      const double de = std::abs(pq.eta - pk.eta);
      if (de > 0.0) s.eta_sum += std::pow(de, p) * std::pow(d, 2.0 - p);
    }
  }
  return s;
}

EdgeTreeReport eta_edge_vs_tree(const Extension& ext, const TreeSolution& solution,
                                const std::vector<double>& weights, double p) {
  EdgeTreeReport r;
  r.edge_sum = patching_rhs(ext, p).eta_sum;
  r.tree_sum = tree_objective(solution.values, weights, p);
  if (r.tree_sum > 0.0) r.ratio = r.edge_sum / r.tree_sum;
  else r.consistent = r.edge_sum == 0.0;
  return r;
}

TailReport check_global_tail(const Extension& ext, std::size_t count, double inset) {
  TailReport r;
  const AffinePolynomial& t = ext.tail();
  const double lo = -4.0 + inset, side = 8.0 - 2.0 * inset;
  for (std::size_t i = 0; i < count; ++i) {
    const double s = 4.0 * side * (static_cast<double>(i) + 0.5) / static_cast<double>(count);
    const int edge = std::min(3, static_cast<int>(s / side));
    const double u = s - edge * side;
    Vec2 x;
    switch (edge) {
      case 0: x = {lo + u, lo}; break;
      case 1: x = {lo + side, lo + u}; break;
      case 2: x = {lo + side - u, lo + side}; break;
      default: x = {lo, lo + side - u}; break;
    }
    const Jet F = ext.evaluate(x, 2);
    r.max_value_error = std::max(r.max_value_error, std::abs(F.value - t(x)));
    r.max_gradient_error = std::max(r.max_gradient_error, (F.gradient - t.gradient()).cwiseAbs().maxCoeff());
    r.max_hessian = std::max(r.max_hessian, F.hessian.cwiseAbs().maxCoeff());
    ++r.points;
  }
  return r;
}

double interpolation_error(const Extension& ext, const std::vector<double>& f) {
  const FractalSet& set = ext.decomposition().set();
  if (f.size() != set.size()) throw ConfigError("f size does not match E");
  double err = 0.0;
  for (std::size_t g = 0; g < set.size(); ++g)
    err = std::max(err, std::abs(ext.evaluate(set.point(g), 0).value - f[g]));
  return err;
}

}  // namespace whitney
