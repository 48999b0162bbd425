#pragma once

#include <cstddef>
#include <vector>

#include "whitney/fractal_set.hpp"

namespace whitney {

/// Full binary tree of depth L in heap order (see ClusterTree). Edge weights
/// are per level: weights[l-1] is the weight of every edge from depth l to
/// depth l-1.
struct TreeProblem {
  int depth = 1;
  double p = 1.5;
  std::vector<double> weights;  // size L
  std::vector<double> leaves;   // size 2^L, by position
};

struct TreeSolution {
  /// eta_C for every node in heap order; leaves equal the inputs exactly.
  std::vector<double> values;
  /// edge[v] = eta_v - eta_parent(v) for v >= 1 (edge[0] unused). Kept
  /// separately because near-ties are far below the resolution of values.
  std::vector<double> edges;
  double objective = 0.0;     // sum_l nu_l sum |eta_parent - eta_C|^p
  double kkt_residual = 0.0;  // scaled, see tree_kkt_residual
  int iterations = 0;  // Newton step + two relaxation sweeps each
};

struct TreeSolverOptions {
  double tol = 1e-10;
  int max_iterations = 500;
};

/// eta_x = (f(x) - f(x^(1), 0)) / Delta for every E2 point, sorted order.
/// `f` is indexed by global point index; NaN marks a missing value.
std::vector<double> leaf_slopes(const std::vector<double>& f, const FractalSet& set);

/// nu_l = eps^((l+1)(2-p)) for l < L and nu_L = eps^(L(2-p)); index l-1.
std::vector<double> level_weights(const FractalParams& params, double p);

/// Exact minimizer of the weighted tree objective: Newton steps on the tree
/// Laplacian alternated with coordinate relaxation sweeps.
/// Throws ConvergenceError (carrying the best node values) if the scaled KKT
/// residual does not reach tol within the sweep budget.
TreeSolution minimize_tree(const TreeProblem& problem, const TreeSolverOptions& options = {});

/// (sum_l nu_l sum_C |eta_parent - eta_C|^p)^(1/p) over heap-ordered values.
double tree_seminorm(const std::vector<double>& values, const std::vector<double>& weights, double p);
/// Same sum without the p-th root.
double tree_objective(const std::vector<double>& values, const std::vector<double>& weights, double p);

/// max_v |g_v| / (p * (sum of weights at v) * spread^(p-1)) where g_v is the
/// derivative of the objective in eta_v, computed from edge differences.
double tree_kkt_residual(const std::vector<double>& edges, const std::vector<double>& weights,
                         double p, double spread);

}  // namespace whitney
