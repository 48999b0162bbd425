#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "whitney/cz_decomposition.hpp"

namespace whitney {

/// Ball scale A and separation exponent M. `strict` makes the B-hat
/// nesting/disjointness inequalities fatal; otherwise they are only reported.
struct ClusterConfig {
  Fraction ball_scale{2, 1};
  int m = 1;
  bool strict = true;
};

/// Node ids follow heap order: depth l, position i (0 <= i < 2^l, ordered by
/// abscissa) has id 2^l - 1 + i; bit (l-k) of i is s_k = +1.
struct Cluster {
  int depth = 0;
  std::uint32_t position = 0;
  SignVector prefix;
  std::int64_t center_numerator = 0;  // c_C = center_numerator / D
  std::size_t first = 0;              // members: sorted E2 indices [first, last)
  std::size_t last = 0;
  std::size_t size() const { return last - first; }
};

struct Ball {
  Vec2 center;
  double radius = 0.0;
};

struct ClusterSeparationReport {
  bool passed = false;
  bool members_inside = false;      // C in B_C
  bool ball_nesting = false;        // B_C in B_parent
  bool ball_disjoint = false;       // same-depth B_C pairwise disjoint
  bool hat_nesting = false;         // B-hat_C in B_parent
  bool hat_disjoint = false;        // same-depth B-hat_C pairwise disjoint
  /// min over depths l of dist(B_C, B_C') / eps^l; +inf when vacuous
  double min_ball_gap = 0.0;
  double min_hat_gap = 0.0;
  /// min over l of (r_parent - |c - c_parent| - r) / eps^l
  double min_ball_nesting_margin = 0.0;
  double min_hat_nesting_margin = 0.0;
  /// Smallest N for which the B-hat inequalities hold for (A, M).
  std::int64_t hat_threshold_inv_eps = 0;
  std::vector<std::string> failures;
};

class ClusterTree {
 public:
  ClusterTree(const FractalSet& set, const ClusterConfig& config);

  const FractalSet& set() const noexcept { return set_; }
  const ClusterConfig& config() const noexcept { return config_; }
  int depth() const noexcept { return set_.depth(); }
  std::size_t size() const noexcept { return nodes_.size(); }
  const Cluster& node(std::size_t id) const { return nodes_[id]; }
  const std::vector<Cluster>& nodes() const noexcept { return nodes_; }

  static std::size_t id(int depth, std::size_t position) {
    return (std::size_t{1} << depth) - 1 + position;
  }
  static std::size_t parent(std::size_t id) { return (id - 1) / 2; }
  std::size_t leaf_of(std::size_t e2_index) const { return id(depth(), e2_index); }

  /// B_C, defined for depth <= L-1.
  Ball ball(std::size_t id) const;
  /// B-hat_C, defined for 1 <= depth <= L-1.
  Ball hat_ball(std::size_t id) const;
  /// radius(B_C) = A * eps^(l+1), as a fraction numerator over D.
  Fraction radius_exact(int depth) const;

  const ClusterSeparationReport& report() const noexcept { return report_; }

 private:
  FractalSet set_;
  ClusterConfig config_;
  std::vector<Cluster> nodes_;
  ClusterSeparationReport report_;
};

/// Throws GeometryError if C in B_C, B_C nesting or B_C disjointness fail, or
/// (strict only) the B-hat inequalities fail.
ClusterTree build_cluster_tree(const FractalSet& set, const ClusterConfig& config = {});

/// Exact separation checks of the ball system.
ClusterSeparationReport verify_separation(const ClusterTree& tree);

/// Deepest cluster of depth <= L-1 whose closed ball B_C contains the closed
/// square; the root when none does.
std::size_t deepest_containing_ball(const DyadicSquare& q, const Lattice& lattice,
                                    const ClusterTree& tree);

/// C_Q: the leaf {x_Q} for Type II squares, otherwise deepest_containing_ball.
std::size_t assign_cluster(std::size_t q, const CzDecomposition& decomp, const ClusterTree& tree);
std::vector<std::uint32_t> assign_clusters(const CzDecomposition& decomp, const ClusterTree& tree);

}  // namespace whitney
