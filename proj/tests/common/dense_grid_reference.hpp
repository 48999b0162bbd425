#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "whitney/oracle.hpp"

namespace whitney::testing {

// Rows of the discrete Hessian written out per node: D11, D12 (weight 2), D22,
// second differences centred at the nearest interior node.
inline Eigen::MatrixXd hessian_rows(std::int64_t n, double h) {
  const std::int64_t total = n * n;
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(3 * total, total);
  const double s = 1.0 / (h * h), r2 = std::sqrt(2.0);
  for (std::int64_t j = 0; j < n; ++j)
    for (std::int64_t i = 0; i < n; ++i) {
      const std::int64_t a = std::min(std::max<std::int64_t>(i, 1), n - 2);
      const std::int64_t b = std::min(std::max<std::int64_t>(j, 1), n - 2);
      const std::int64_t row = 3 * (i + n * j);
      auto at = [n](std::int64_t x, std::int64_t y) { return x + n * y; };
      B(row, at(a - 1, b)) += s;
      B(row, at(a, b)) -= 2 * s;
      B(row, at(a + 1, b)) += s;
      B(row + 1, at(a + 1, b + 1)) += r2 * s / 4;
      B(row + 1, at(a - 1, b - 1)) += r2 * s / 4;
      B(row + 1, at(a + 1, b - 1)) -= r2 * s / 4;
      B(row + 1, at(a - 1, b + 1)) -= r2 * s / 4;
      B(row + 2, at(a, b - 1)) += s;
      B(row + 2, at(a, b)) -= 2 * s;
      B(row + 2, at(a, b + 1)) += s;
    }
  return B;
}

// p = 2 minimizer by a dense solve of the normal equations on the free nodes.
inline Eigen::VectorXd dense_minimizer(const GridFunction& g) {
  const Eigen::MatrixXd B = hessian_rows(g.n, g.h());
  const Eigen::MatrixXd K = B.transpose() * B;
  std::vector<Eigen::Index> fr;
  for (Eigen::Index k = 0; k < g.values.size(); ++k)
    if (!g.constrained[static_cast<std::size_t>(k)]) fr.push_back(k);
  const Eigen::Index m = static_cast<Eigen::Index>(fr.size());
  Eigen::MatrixXd Kff(m, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) Kff(a, b) = K(fr[a], fr[b]);
    for (Eigen::Index k = 0; k < g.values.size(); ++k)
      if (g.constrained[static_cast<std::size_t>(k)]) rhs(a) -= K(fr[a], k) * g.values(k);
  }
  const Eigen::VectorXd x = Kff.ldlt().solve(rhs);
  Eigen::VectorXd out = g.values;
  for (Eigen::Index a = 0; a < m; ++a) out(fr[a]) = x(a);
  return out;
}

}  // namespace whitney::testing
