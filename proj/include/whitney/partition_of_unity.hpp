#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "whitney/cz_decomposition.hpp"

namespace whitney {

/// Quintic smoothstep s(t) = 6t^5 - 15t^4 + 10t^3, clamped to [0, 1].
struct Transition {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};
Transition smoothstep(double t);

/// phi_Q = 1 on closed Q, 0 outside open (1 + 2*margin)Q. The transition runs
/// over a band of width margin * delta_Q on each side.
struct BumpSpec {
  double margin = 0.05;
};

struct Jet {
  double value = 0.0;
  Vec2 gradient = Vec2::Zero();
  Mat2 hessian = Mat2::Zero();
};

Jet pre_bump(const DyadicSquare& q, const Vec2& x, const BumpSpec& spec = {});

struct PouContribution {
  std::size_t square = 0;
  Jet theta;
};

/// theta_Q at x for every square whose pre-bump is nonzero there.
struct PouEvaluation {
  std::vector<PouContribution> contributions;
  std::size_t containing = 0;  // square holding x
};

/// Throws ConfigError outside Q0.
PouEvaluation pou_eval(const CzDecomposition& decomp, const Vec2& x, const BumpSpec& spec = {});
/// Same, with the containing square known; candidates are q and its neighbours.
void pou_eval_in(const CzDecomposition& decomp, std::size_t q, const Vec2& x,
                 const BumpSpec& spec, PouEvaluation& out);

struct PouReport {
  bool passed = false;
  std::size_t sample_count = 0;
  double partition_defect = 0.0;   // max |1 - sum theta|
  double gradient_sum = 0.0;       // max |sum grad theta| * delta
  double hessian_sum = 0.0;        // max |sum hess theta| * delta^2
  double min_theta = 0.0;
  double max_theta = 0.0;
  /// max_Q max_x |d^a theta_Q| delta_Q^|a| for |a| = 0, 1, 2
  double bound0 = 0.0, bound1 = 0.0, bound2 = 0.0;
  std::size_t max_contributions = 0;
  std::size_t support_violations = 0;
  std::vector<std::string> failures;
};

struct PouSampling {
  /// Extra uniform offsets per axis on top of the band-resolving stencil.
  int per_axis = 0;
  /// Visit every k-th square so at most this many are sampled (0: all).
  std::size_t max_squares = 0;
};

/// Samples squares on a stencil that hits the transition bands of every
/// admissible neighbour size, plus a ring just outside the fixed 1.1Q, and
/// measures POU1-POU4.
PouReport verify_pou(const CzDecomposition& decomp, const PouSampling& sampling = {},
                     const BumpSpec& spec = {});

}  // namespace whitney
