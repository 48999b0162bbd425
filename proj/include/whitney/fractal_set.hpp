#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "whitney/exact.hpp"

namespace whitney {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// eps = 1/inv_eps, Delta = eps^depth. `min_inv_eps` is the validity
/// threshold on N; tests lower it to 4 where only combinatorics matter.
struct FractalParams {
  std::int64_t inv_eps = 8;
  int depth = 1;
  std::int64_t min_inv_eps = 8;

  double eps() const { return 1.0 / static_cast<double>(inv_eps); }
  Fraction eps_exact() const { return {1, inv_eps}; }
  Fraction eps_max() const { return {1, min_inv_eps}; }
};

/// Smallest N accepted even with an override; eps must stay below 1/2.
inline constexpr std::int64_t kAbsoluteMinInvEps = 3;
/// Largest supported depth (E2 has 2^L points).
inline constexpr int kMaxDepth = 24;

/// Sign vector s in {-1,+1}^L, s[0] = s_1.
using SignVector = std::vector<int>;

/// The point set E = E1 u E2.
///
/// Every coordinate is an integer multiple of Delta = 1/D with D = N^L, so
/// points are stored as integer numerators over D:
///   E1 = {(k/D, 0) : -D <= k <= D}
///   E2 = {(m/D, 1/D) : m = sum_l s_l N^(L-l)}
/// E1 is implicit. E2 is stored sorted by abscissa, which coincides with
/// the lexicographic order of sign vectors (-1 < +1).
///
/// Global point indices: E1 first (index k + D), then E2 in sorted order.
class FractalSet {
 public:
  explicit FractalSet(const FractalParams& params);

  const FractalParams& params() const noexcept { return params_; }
  int depth() const noexcept { return params_.depth; }
  std::int64_t inv_eps() const noexcept { return params_.inv_eps; }

  /// D = N^L = 1/Delta.
  std::int64_t denom() const noexcept { return denom_; }
  Fraction delta() const { return {1, denom_}; }
  double delta_value() const noexcept { return 1.0 / static_cast<double>(denom_); }

  std::size_t e1_size() const noexcept { return static_cast<std::size_t>(2 * denom_ + 1); }
  std::size_t e2_size() const noexcept { return e2_num_.size(); }
  std::size_t size() const noexcept { return e1_size() + e2_size(); }

  /// E1 numerator of E1 index i (i = 0 is (-1, 0)).
  std::int64_t e1_numerator(std::size_t i) const noexcept {
    return static_cast<std::int64_t>(i) - denom_;
  }
  std::size_t e1_index(std::int64_t numerator) const noexcept {
    return static_cast<std::size_t>(numerator + denom_);
  }
  /// Sorted E2 abscissa numerators.
  std::span<const std::int64_t> e2_numerators() const noexcept { return e2_num_; }
  std::int64_t e2_numerator(std::size_t j) const noexcept { return e2_num_[j]; }

  /// Sign vector of E2 point j; bit (L-l) of j encodes s_l = +1.
  SignVector e2_signs(std::size_t j) const;
  /// Inverse of e2_signs.
  std::size_t e2_index_of(const SignVector& s) const;

  Vec2 e1_point(std::size_t i) const;
  Vec2 e2_point(std::size_t j) const;
  /// Point by global index.
  Vec2 point(std::size_t g) const;
  bool is_e1(std::size_t g) const noexcept { return g < e1_size(); }
  std::size_t global_index_e2(std::size_t j) const noexcept { return e1_size() + j; }

  /// Global index of the E1 point directly below E2 point j.
  std::size_t projection_of_e2(std::size_t j) const noexcept {
    return e1_index(e2_num_[j]);
  }

  /// Exact coordinates of a global point.
  Fraction exact_x(std::size_t g) const;
  Fraction exact_y(std::size_t g) const;

 private:
  FractalParams params_;
  std::int64_t denom_ = 1;
  std::vector<std::int64_t> e2_num_;
};

/// Validates the parameters and builds E. Throws ConfigError when
/// N < params.min_inv_eps, N < 3 or L outside [1, 24].
FractalSet build_fractal_set(const FractalParams& params);

/// (sum_l s_l eps^l, Delta) as an exact numerator over D, plus the float
/// shadow. Throws ConfigError on wrong length or entries other than +-1.
struct ExactPoint {
  Fraction x;
  Fraction y;
  Vec2 shadow() const { return {x.to_double(), y.to_double()}; }
};
ExactPoint signs_to_point(const SignVector& s, const FractalParams& params);

struct SeparationReport {
  bool passed = false;
  /// Exact squared minimum distance over all pairs, in units of Delta^2.
  std::int64_t min_distance_sq_in_delta2 = 0;
  double min_distance = 0.0;
  /// Minimum gap between consecutive E2 abscissae (0 if #E2 < 2).
  Fraction min_e2_gap;
  bool separation_ok = false;   // min distance >= Delta
  bool projection_ok = false;   // (x, Delta) in E2 => (x, 0) in E1
  bool containment_ok = false;  // E in [-1,1] x [0, Delta]
  bool threshold_ok = false;    // N >= min_inv_eps
  double max_shadow_error = 0.0;
  std::vector<std::string> failures;
};

/// Checks the invariants of E. Uses the lattice structure (consecutive E1 and
/// E2 points, vertical pairs) rather than an all-pairs scan.
SeparationReport validate_separation(const FractalSet& set);

}  // namespace whitney
