#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

#include "whitney/clustering.hpp"
#include "whitney/partition_of_unity.hpp"
#include "whitney/tree_extension.hpp"

namespace whitney {

/// a0 + a1 x1 + a2 x2.
struct AffinePolynomial {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0;
  double operator()(const Vec2& x) const { return a0 + a1 * x.x() + a2 * x.y(); }
  Vec2 gradient() const { return {a1, a2}; }
  friend bool operator==(const AffinePolynomial&, const AffinePolynomial&) = default;
};

/// Affine L with a2 = 0 through (z, fz) and (w, fw) on the x-axis. Abscissae
/// are numerators over `denom`. Throws ConfigError if z == w.
AffinePolynomial fit_L(double fz, std::int64_t z, double fw, std::int64_t w, std::int64_t denom);

struct Piece {
  AffinePolynomial L;   // a2 == 0
  double eta = 0.0;     // P_Q = L_Q + eta_Q x2
  std::uint32_t cluster = 0;
  AffinePolynomial P() const { return {L.a0, L.a1, eta}; }
};

class Extension {
 public:
  Extension(std::shared_ptr<const CzDecomposition> decomp, std::vector<Piece> pieces,
            AffinePolynomial tail, BumpSpec spec);

  const CzDecomposition& decomposition() const noexcept { return *decomp_; }
  std::shared_ptr<const CzDecomposition> decomposition_ptr() const noexcept { return decomp_; }
  const std::vector<Piece>& pieces() const noexcept { return pieces_; }
  const Piece& piece(std::size_t q) const { return pieces_[q]; }
  /// L0 + eta0 x2, used outside Q0.
  const AffinePolynomial& tail() const noexcept { return tail_; }
  const BumpSpec& bump_spec() const noexcept { return spec_; }

  /// F at x with derivatives up to `order` (Hessian zero for order < 2).
  /// Inside Q0: F = P_ref + sum theta_Q (P_Q - P_ref), ref the square holding x.
  Jet evaluate(const Vec2& x, int order = 2) const;
  /// Same with the containing square known and the candidate squares given.
  Jet evaluate_in(std::size_t q, const Vec2& x, std::span<const std::uint32_t> candidates,
                  int order = 2) const;

 private:
  std::shared_ptr<const CzDecomposition> decomp_;
  std::vector<Piece> pieces_;
  AffinePolynomial tail_;
  BumpSpec spec_;
};

/// Builds the pieces: L_Q through f at the anchors, eta_Q = eta_{C_Q}.
/// `f` is indexed by global point index. Throws ConsistencyError when the
/// tree, solution and decomposition disagree.
Extension assemble(const std::vector<double>& f, std::shared_ptr<const CzDecomposition> decomp,
                   const ClusterTree& tree, const TreeSolution& solution, const BumpSpec& spec = {});

struct PipelineConfig {
  double p = 1.5;
  ClusterConfig cluster{Fraction{2, 1}, 1, false};
  BumpSpec bump{};
  TreeSolverOptions tree{};
};

struct PipelineResult {
  std::shared_ptr<const CzDecomposition> decomp;
  std::shared_ptr<const ClusterTree> tree;
  std::vector<double> weights;
  TreeSolution solution;
  std::shared_ptr<const Extension> extension;
};

/// leaf_slopes -> level_weights -> minimize_tree -> assemble.
PipelineResult extend(const std::vector<double>& f, std::shared_ptr<const CzDecomposition> decomp,
                      const PipelineConfig& config);

struct QuadratureConfig {
  int subcells = 2;         // per axis, per smooth cell
  int nodes = 5;            // Gauss-Legendre nodes per axis
  double tolerance = 0.01;  // relative refinement tolerance
  bool estimate_error = true;
};

struct SeminormEstimate {
  double value = 0.0;             // ||F||_{L^{2,p}(Q0)}
  double integral = 0.0;          // value^p
  double refined_value = 0.0;     // with subcells doubled
  double refinement_error = 0.0;  // |value - refined_value| / refined_value
  bool within_tolerance = true;
  QuadratureConfig config;
  std::size_t cells = 0;          // smooth cells with nonzero integrand
};

/// Integrates (F11^2 + 2 F12^2 + F22^2)^(p/2) square by square. Each square
/// is cut at the transition-band edges of its neighbours so the integrand is
/// smooth on every cell; cells where only theta_Q is active are skipped.
SeminormEstimate seminorm(const Extension& ext, double p, const QuadratureConfig& config = {});

struct PatchingSums {
  double lq_sum = 0.0;
  double eta_sum = 0.0;
};
/// Ordered touching pairs: sum ||L_Q - L_Q'||^p_{L^inf(Q)} delta^(2-2p) and
/// sum |eta_Q - eta_Q'|^p delta^(2-p).
PatchingSums patching_rhs(const Extension& ext, double p);

struct EdgeTreeReport {
  double edge_sum = 0.0;  // sum over touching pairs |eta_Q - eta_Q'|^p delta_Q^(2-p)
  double tree_sum = 0.0;  // sum_l nu_l sum_C |eta_parent - eta_C|^p
  double ratio = 0.0;     // edge / tree; 0 when both vanish
  bool consistent = true; // false if tree_sum == 0 < edge_sum
};
EdgeTreeReport eta_edge_vs_tree(const Extension& ext, const TreeSolution& solution,
                                const std::vector<double>& weights, double p);

struct TailReport {
  std::size_t points = 0;
  double max_value_error = 0.0;
  double max_gradient_error = 0.0;
  double max_hessian = 0.0;
};
/// Compares F with L0 + eta0 x2 on `count` points of the square ring at
/// distance `inset` inside the boundary of Q0.
TailReport check_global_tail(const Extension& ext, std::size_t count = 1000, double inset = 0.01);

/// max over E of |F(x) - f(x)|.
double interpolation_error(const Extension& ext, const std::vector<double>& f);

}  // namespace whitney
