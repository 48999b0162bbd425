#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "whitney/interpolant.hpp"

namespace whitney {

/// lambda (1 - |x - c|^2 / r^2)^3 inside the disc, 0 outside. C^2.
struct RadialBump {
  Vec2 center = Vec2::Zero();
  double radius = 1.0;
  double amplitude = 1.0;
};

struct AnalyticTestFunction {
  AffinePolynomial affine;
  std::vector<RadialBump> bumps;

  Jet evaluate(const Vec2& x) const;
  /// ||G||_{L^{2,p}(R^2)} by adaptive quadrature of the radial profile;
  /// requires pairwise disjoint supports.
  double seminorm(double p) const;
  /// seminorm^p.
  double seminorm_pow(double p) const;
};

struct TestFunctionConfig {
  int bumps = 2;
  double min_radius = 0.3, max_radius = 1.0;
  double min_amplitude = 0.5, max_amplitude = 2.0;
  double affine_range = 1.0;
  /// Bump discs stay inside this box.
  double box_x = 1.5, box_y = 0.5;
};

/// Reproducible G with pairwise disjoint bump supports.
AnalyticTestFunction sample_test_function(std::uint64_t seed, const TestFunctionConfig& config = {});

/// f = G|_E indexed by global point index.
std::vector<double> restrict_to(const AnalyticTestFunction& g, const FractalSet& set);

/// Values on the nodes of [-4,4]^2 with spacing h = Delta / refine; node
/// (i, j) sits at (-4 + i h, -4 + j h), index i + n j.
struct GridFunction {
  std::int64_t inv_h = 1;  // 1/h
  std::int64_t n = 0;      // nodes per axis, 8/h + 1
  Eigen::VectorXd values;
  std::vector<std::uint8_t> constrained;

  double h() const { return 1.0 / static_cast<double>(inv_h); }
  Vec2 node(std::int64_t i, std::int64_t j) const {
    return {-4.0 + static_cast<double>(i) * h(), -4.0 + static_cast<double>(j) * h()};
  }
};

/// Grid of spacing Delta/refine with the E nodes constrained to f and free
/// nodes zero. Throws ConfigError past max_nodes_per_axis.
GridFunction make_grid(const FractalSet& set, const std::vector<double>& f, int refine,
                       std::int64_t max_nodes_per_axis = 1025);

/// sum over nodes of (D11^2 + 2 D12^2 + D22^2)^(p/2) h^2 with central second
/// differences; border nodes reuse the stencil of the nearest interior node.
double discrete_seminorm(const GridFunction& g, double p);

/// F sampled on the grid of `like`; constrained nodes carry f exactly.
GridFunction sample_on_grid(const Extension& ext, const GridFunction& like);
/// Any function sampled on the grid of `like`.
GridFunction sample_on_grid(const AnalyticTestFunction& g, const GridFunction& like);

struct OracleOptions {
  int refine = 2;                  // h = Delta / refine
  double tol = 1e-8;               // relative objective decrease per window
  int window = 3;
  int stages = 4;                  // mu continuation stages for p < 2
  int max_iterations_per_stage = 200;
  std::int64_t max_nodes_per_axis = 1025;
};

struct OracleResult {
  GridFunction grid;
  double objective = 0.0;          // discrete_seminorm (no p-th root)
  int iterations = 0;
  double gradient_norm = 0.0;      // max free-node |dJ_mu/dg| / max row scale, last stage
  std::vector<double> stage_objectives;
  double border_share = 0.0;       // fraction of the objective from border nodes
};

/// Discrete minimal extension by majorize-minimize (IRLS) with smoothing
/// (t + mu^2)^(p/2), mu decreasing over `stages`; one LDLT solve for p = 2.
OracleResult grid_minimal_extension(const FractalSet& set, const std::vector<double>& f, double p,
                                    const OracleOptions& options = {});

}  // namespace whitney
