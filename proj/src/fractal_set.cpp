#include "whitney/fractal_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace whitney {

namespace {

// Keeps D * (lattice scale) products inside 128-bit arithmetic downstream.
constexpr std::int64_t kMaxDenominator = std::int64_t{1} << 40;

void check_params(const FractalParams& p) {
  if (p.min_inv_eps < kAbsoluteMinInvEps)
    throw ConfigError("min_inv_eps must be at least 3 (eps < 1/2)");
  if (p.inv_eps < p.min_inv_eps)
    throw ConfigError("inv_eps = " + std::to_string(p.inv_eps) +
                      " is below the validity threshold " + std::to_string(p.min_inv_eps));
  if (p.depth < 1) throw ConfigError("depth L must be at least 1");
  if (p.depth > kMaxDepth) throw ConfigError("depth L exceeds the supported maximum");
}

}  // namespace

FractalSet::FractalSet(const FractalParams& params) : params_(params) {
  check_params(params_);
  denom_ = checked_pow(params_.inv_eps, params_.depth, kMaxDenominator);

  const int L = params_.depth;
  const std::size_t count = std::size_t{1} << L;
  e2_num_.resize(count);
  for (std::size_t j = 0; j < count; ++j) {
    std::int64_t m = 0;
    std::int64_t w = denom_;
    for (int l = 1; l <= L; ++l) {
      w /= params_.inv_eps;  // N^(L-l)
      const bool plus = (j >> (L - l)) & 1U;
      m += plus ? w : -w;
    }
    e2_num_[j] = m;
  }
  // Lexicographic sign order is the abscissa order when eps < 1/2.
  if (!std::is_sorted(e2_num_.begin(), e2_num_.end()))
    throw GeometryError("E2 abscissae are not ordered by sign prefix");
}

SignVector FractalSet::e2_signs(std::size_t j) const {
  const int L = params_.depth;
  SignVector s(static_cast<std::size_t>(L));
  for (int l = 1; l <= L; ++l) s[static_cast<std::size_t>(l - 1)] = ((j >> (L - l)) & 1U) ? 1 : -1;
  return s;
}

std::size_t FractalSet::e2_index_of(const SignVector& s) const {
  if (static_cast<int>(s.size()) != params_.depth)
    throw ConfigError("sign vector length does not match depth");
  std::size_t j = 0;
  for (int v : s) {
    if (v != 1 && v != -1) throw ConfigError("sign entries must be +1 or -1");
    j = (j << 1) | (v == 1 ? 1U : 0U);
  }
  return j;
}

Vec2 FractalSet::e1_point(std::size_t i) const {
  return {static_cast<double>(e1_numerator(i)) / static_cast<double>(denom_), 0.0};
}

Vec2 FractalSet::e2_point(std::size_t j) const {
  const double d = static_cast<double>(denom_);
  return {static_cast<double>(e2_num_[j]) / d, 1.0 / d};
}

Vec2 FractalSet::point(std::size_t g) const {
  return is_e1(g) ? e1_point(g) : e2_point(g - e1_size());
}

Fraction FractalSet::exact_x(std::size_t g) const {
  const std::int64_t n = is_e1(g) ? e1_numerator(g) : e2_num_[g - e1_size()];
  return {n, denom_};
}

Fraction FractalSet::exact_y(std::size_t g) const {
  return is_e1(g) ? Fraction{0, 1} : Fraction{1, denom_};
}

FractalSet build_fractal_set(const FractalParams& params) { return FractalSet(params); }

ExactPoint signs_to_point(const SignVector& s, const FractalParams& params) {
  if (params.inv_eps < kAbsoluteMinInvEps) throw ConfigError("inv_eps must be at least 3");
  if (static_cast<int>(s.size()) != params.depth)
    throw ConfigError("sign vector length " + std::to_string(s.size()) +
                      " does not match depth " + std::to_string(params.depth));
  const std::int64_t D = checked_pow(params.inv_eps, params.depth, kMaxDenominator);
  std::int64_t m = 0;
  std::int64_t w = D;
  for (int v : s) {
    if (v != 1 && v != -1) throw ConfigError("sign entries must be +1 or -1");
    w /= params.inv_eps;
    m += v * w;
  }
  return {Fraction{m, D}, Fraction{1, D}};
}

SeparationReport validate_separation(const FractalSet& set) {
  SeparationReport r;
  const std::int64_t D = set.denom();
  const auto e2 = set.e2_numerators();

  // Squared distances in units of Delta^2. Consecutive E1 points: 1.
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  if (set.e1_size() >= 2) best = 1;

  std::int64_t min_gap = std::numeric_limits<std::int64_t>::max();
  for (std::size_t j = 1; j < e2.size(); ++j) {
    const std::int64_t gap = e2[j] - e2[j - 1];
    min_gap = std::min(min_gap, gap);
    best = std::min(best, gap * gap);
  }
  r.min_e2_gap = e2.size() >= 2 ? Fraction{min_gap, D} : Fraction{0, 1};

  // Nearest E1 point to each E2 point; vertical offset is exactly Delta.
  r.projection_ok = true;
  for (std::int64_t m : e2) {
    const std::int64_t k = std::clamp<std::int64_t>(m, -D, D);
    best = std::min(best, (m - k) * (m - k) + 1);
    if (k != m) r.projection_ok = false;
  }
  r.min_distance_sq_in_delta2 = best;
  r.min_distance = std::sqrt(static_cast<double>(best)) / static_cast<double>(D);
  r.separation_ok = best >= 1;

  r.containment_ok = e2.empty() || (e2.front() >= -D && e2.back() <= D);
  r.threshold_ok = set.inv_eps() >= set.params().min_inv_eps &&
                   set.inv_eps() >= kAbsoluteMinInvEps;

  // Float shadows against exact values.
  const double Dd = static_cast<double>(D);
  double err = 0.0;
  for (std::int64_t m : e2) {
    const long double exact = static_cast<long double>(m) / static_cast<long double>(D);
    const double shadow = static_cast<double>(m) / Dd;
    err = std::max(err, static_cast<double>(std::fabs(static_cast<long double>(shadow) - exact)));
  }
  r.max_shadow_error = err;

  if (!r.separation_ok) r.failures.emplace_back("pairwise separation below Delta");
  if (!r.projection_ok) r.failures.emplace_back("some E2 point does not project onto E1");
  if (!r.containment_ok) r.failures.emplace_back("E leaves [-1,1] x [0,Delta]");
  if (!r.threshold_ok) r.failures.emplace_back("eps above validity threshold");
  if (r.max_shadow_error > 1e-15) r.failures.emplace_back("float shadow drift above 1e-15");
  r.passed = r.failures.empty();
  return r;
}

}  // namespace whitney
