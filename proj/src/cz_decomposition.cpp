#include "whitney/cz_decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace whitney {

namespace {

int generation_bound(std::int64_t denom) {
  // g <= log2(8 * 9 / Delta) + 2
  const long double v = std::log2(72.0L * static_cast<long double>(denom));
  return static_cast<int>(std::floor(v)) + 2;
}

std::int64_t pow2(int e) { return std::int64_t{1} << e; }

}  // namespace

Fraction DyadicSquare::side_exact() const {
  return generation <= 3 ? Fraction{8 / pow2(generation), 1} : Fraction{1, pow2(generation - 3)};
}

bool DyadicSquare::contains(const Vec2& x) const {
  const Vec2 a = corner();
  const double d = side();
  return x.x() >= a.x() && x.x() < a.x() + d && x.y() >= a.y() && x.y() < a.y() + d;
}

DyadicSquare DyadicSquare::child(int quadrant) const {
  return {generation + 1, 2 * i + (quadrant & 1), 2 * j + ((quadrant >> 1) & 1)};
}

DyadicSquare DyadicSquare::parent() const {
  if (generation == 0) throw ConfigError("Q0 has no parent");
  return {generation - 1, i >> 1, j >> 1};
}

// ---------------------------------------------------------------------------

Lattice::Lattice(int max_generation) : max_generation_(std::max(1, max_generation)) {
  if (max_generation_ > 56) throw ConfigError("generation bound too deep for the lattice");
  per_unit_ = 5 * pow2(max_generation_ - 1);
}

LatticeBox Lattice::box(const DyadicSquare& q, Dilation c) const {
  if (q.generation > max_generation_) throw GeometryError("square finer than lattice");
  const std::int64_t scale = pow2(max_generation_ - q.generation);
  const std::int64_t side = 20 * scale;
  const std::int64_t pad = (static_cast<std::int64_t>(c) - 10) * scale;
  const std::int64_t x0 = -q0_half_width() + q.i * side;
  const std::int64_t y0 = -q0_half_width() + q.j * side;
  return {x0 - pad, x0 + side + pad, y0 - pad, y0 + side + pad};
}

LatticeBox Lattice::box(const DyadicSquare& q) const {
  const std::int64_t side = 20 * pow2(max_generation_ - q.generation);
  const std::int64_t x0 = -q0_half_width() + q.i * side;
  const std::int64_t y0 = -q0_half_width() + q.j * side;
  return {x0, x0 + side, y0, y0 + side};
}

// ---------------------------------------------------------------------------

PointCounter::PointCounter(const FractalSet& set, const Lattice& lattice)
    : set_(&set), per_unit_(lattice.per_unit()) {}

PointCounter::Range PointCounter::e1_range(const LatticeBox& b) const {
  Range r;
  if (!(b.y0 <= 0 && 0 <= b.y1)) return r;
  const i128 D = set_->denom();
  // X <= k P / D  <=>  X D <= k P
  i128 lo = ceil_div(static_cast<i128>(b.x0) * D, per_unit_);
  i128 hi = floor_div(static_cast<i128>(b.x1) * D, per_unit_);
  lo = std::max<i128>(lo, -D);
  hi = std::min<i128>(hi, D);
  if (hi < lo) return r;
  r.lo = static_cast<std::int64_t>(lo);
  r.hi = static_cast<std::int64_t>(hi);
  return r;
}

PointCounter::Range PointCounter::e2_range(const LatticeBox& b) const {
  Range r;
  const i128 D = set_->denom();
  // height 1/D in units is P / D
  if (!(static_cast<i128>(b.y0) * D <= per_unit_ && per_unit_ <= static_cast<i128>(b.y1) * D))
    return r;
  const i128 lo = ceil_div(static_cast<i128>(b.x0) * D, per_unit_);
  const i128 hi = floor_div(static_cast<i128>(b.x1) * D, per_unit_);
  if (hi < lo) return r;
  const auto e2 = set_->e2_numerators();
  const auto first = std::lower_bound(e2.begin(), e2.end(), lo,
                                      [](std::int64_t v, i128 key) { return v < key; });
  const auto last = std::upper_bound(e2.begin(), e2.end(), hi,
                                     [](i128 key, std::int64_t v) { return key < v; });
  if (first >= last) return r;
  r.lo = first - e2.begin();
  r.hi = (last - e2.begin()) - 1;
  return r;
}

// ---------------------------------------------------------------------------

bool touches(const DyadicSquare& a, const DyadicSquare& b) {
  const Lattice lat(std::max(a.generation, b.generation));
  return lat.box(a, Dilation::x1_1).intersects(lat.box(b, Dilation::x1_1));
}

SquareClass classify(const DyadicSquare& q, const Lattice& lattice, const PointCounter& counter,
                     const FractalSet& set) {
  (void)set;
  SquareClass cls;
  const LatticeBox b = lattice.box(q, Dilation::x1_1);
  const auto r1 = counter.e1_range(b);
  const auto r2 = counter.e2_range(b);
  if (r1.count() + r2.count() > 1)
    throw GeometryError("1.1Q contains more than one point of E (square g=" +
                        std::to_string(q.generation) + ")");
  if (r1.count() == 1) {
    cls.type = SquareType::I;
    cls.e1_numerator = r1.lo;
  } else if (r2.count() == 1) {
    cls.type = SquareType::II;
    cls.x_point = static_cast<std::size_t>(r2.lo);
  }
  const std::int64_t h = lattice.q0_half_width();
  cls.boundary = b.x0 <= -h || b.x1 >= h || b.y0 <= -h || b.y1 >= h;
  if (cls.boundary && cls.type != SquareType::III)
    throw GeometryError("boundary square meets E");
  return cls;
}

Anchors anchor_points(const DyadicSquare& q, const SquareClass& cls, const Lattice& lattice,
                      const PointCounter& counter, const FractalSet& set) {
  const std::int64_t D = set.denom();
  const auto adjacent = [D](std::int64_t z) { return z + 1 <= D ? z + 1 : z - 1; };
  if (cls.boundary) return {-D, D};
  if (cls.type == SquareType::I) return {*cls.e1_numerator, adjacent(*cls.e1_numerator)};
  if (cls.type == SquareType::II) {
    const std::int64_t z = set.e2_numerator(*cls.x_point);
    return {z, adjacent(z)};
  }
  const auto r = counter.e1_range(lattice.box(q, Dilation::x50));
  if (r.count() < 2)
    throw GeometryError("50Q contains fewer than two E1 points (square g=" +
                        std::to_string(q.generation) + ")");
  return {r.lo, r.hi};
}

// ---------------------------------------------------------------------------

CzDecomposition::CzDecomposition(const FractalSet& set)
    : set_(set), lattice_(generation_bound(set.denom())), counter_(set_, lattice_) {
  build_tree();
  build_neighbors();
  classify_all();
}

void CzDecomposition::build_tree() {
  nodes_.clear();
  squares_.clear();
  nodes_.push_back({DyadicSquare{}, -1, -1});
  // Explicit stack; children are appended as a block of four.
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const std::int32_t n = stack.back();
    stack.pop_back();
    const DyadicSquare sq = nodes_[static_cast<std::size_t>(n)].sq;
    if (counter_.count(lattice_.box(sq, Dilation::x3)) <= 1) {
      nodes_[static_cast<std::size_t>(n)].leaf = static_cast<std::int32_t>(squares_.size());
      squares_.push_back(sq);
      continue;
    }
    if (sq.generation + 1 > lattice_.max_generation())
      throw GeometryError("stopping rule exceeded the generation bound");
    const auto first = static_cast<std::int32_t>(nodes_.size());
    nodes_[static_cast<std::size_t>(n)].first_child = first;
    for (int k = 0; k < 4; ++k) nodes_.push_back({sq.child(k), -1, -1});
    for (int k = 3; k >= 0; --k) stack.push_back(first + k);
  }
}

std::vector<std::uint32_t> CzDecomposition::query(const LatticeBox& box, Dilation c) const {
  std::vector<std::uint32_t> out;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const Node& node = nodes_[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    // A node's c-dilation contains the c-dilation of every leaf below it.
    if (!lattice_.box(node.sq, c).intersects(box)) continue;
    if (node.leaf >= 0) {
      out.push_back(static_cast<std::uint32_t>(node.leaf));
      continue;
    }
    for (int k = 0; k < 4; ++k) stack.push_back(node.first_child + k);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void CzDecomposition::build_neighbors() {
  nbr_offset_.assign(1, 0);
  nbr_index_.clear();
  for (std::size_t q = 0; q < squares_.size(); ++q) {
    const auto hits = query(lattice_.box(squares_[q], Dilation::x1_1), Dilation::x1_1);
    for (std::uint32_t h : hits)
      if (h != q) nbr_index_.push_back(h);
    nbr_offset_.push_back(nbr_index_.size());
  }
}

void CzDecomposition::classify_all() {
  const std::size_t n = squares_.size();
  type_.resize(n);
  boundary_.resize(n);
  special_point_.assign(n, 0);
  anchors_.resize(n);
  for (std::size_t q = 0; q < n; ++q) {
    const SquareClass cls = classify(squares_[q], lattice_, counter_, set_);
    type_[q] = cls.type;
    boundary_[q] = cls.boundary ? 1 : 0;
    if (cls.x_point) special_point_[q] = static_cast<std::int64_t>(*cls.x_point);
    if (cls.e1_numerator) special_point_[q] = *cls.e1_numerator;
    anchors_[q] = anchor_points(squares_[q], cls, lattice_, counter_, set_);
  }
}

std::optional<std::size_t> CzDecomposition::x_point(std::size_t q) const {
  if (type_[q] != SquareType::II) return std::nullopt;
  return static_cast<std::size_t>(special_point_[q]);
}

std::optional<std::int64_t> CzDecomposition::e1_point(std::size_t q) const {
  if (type_[q] != SquareType::I) return std::nullopt;
  return special_point_[q];
}

std::size_t CzDecomposition::locate(const Vec2& x) const {
  if (!(x.x() >= -4.0 && x.x() < 4.0 && x.y() >= -4.0 && x.y() < 4.0))
    throw ConfigError("point outside Q0");
  std::int32_t n = 0;
  while (nodes_[static_cast<std::size_t>(n)].leaf < 0) {
    const Node& node = nodes_[static_cast<std::size_t>(n)];
    const Vec2 c = node.sq.center();
    const int quadrant = (x.x() >= c.x() ? 1 : 0) | (x.y() >= c.y() ? 2 : 0);
    n = node.first_child + quadrant;
  }
  return static_cast<std::size_t>(nodes_[static_cast<std::size_t>(n)].leaf);
}

CzDecomposition decompose(const FractalSet& set) { return CzDecomposition(set); }

// ---------------------------------------------------------------------------

namespace {

// Distance from the closed square to the nearest E1 point.
double dist_to_e1(const DyadicSquare& q, const FractalSet& set) {
  const Vec2 a = q.corner();
  const double d = q.side();
  const double D = static_cast<double>(set.denom());
  const double dy = (a.y() <= 0.0 && 0.0 <= a.y() + d) ? 0.0 : std::min(std::abs(a.y()), std::abs(a.y() + d));
  // nearest lattice abscissa k/D with |k| <= D
  const double lo = a.x(), hi = a.x() + d;
  double dx = std::numeric_limits<double>::infinity();
  for (double k : {std::floor(lo * D), std::ceil(lo * D), std::floor(hi * D), std::ceil(hi * D)}) {
    const double x = std::clamp(k, -D, D) / D;
    dx = std::min(dx, x < lo ? lo - x : (x > hi ? x - hi : 0.0));
  }
  return std::hypot(dx, dy);
}

double dist_to_e2(const DyadicSquare& q, const FractalSet& set) {
  const Vec2 a = q.corner();
  const double d = q.side();
  const double D = static_cast<double>(set.denom());
  const double h = 1.0 / D;
  const double dy = (a.y() <= h && h <= a.y() + d) ? 0.0 : std::min(std::abs(a.y() - h), std::abs(a.y() + d - h));
  const auto e2 = set.e2_numerators();
  const double cx = a.x() + 0.5 * d;
  const auto it = std::lower_bound(e2.begin(), e2.end(), cx * D,
                                   [](std::int64_t v, double key) { return static_cast<double>(v) < key; });
  double best = std::numeric_limits<double>::infinity();
  for (auto k = (it == e2.begin() ? it : it - 1); k != e2.end() && k <= it; ++k) {
    const double x = static_cast<double>(*k) / D;
    const double dx = x < a.x() ? a.x() - x : (x > a.x() + d ? x - a.x() - d : 0.0);
    best = std::min(best, std::hypot(dx, dy));
  }
  return best;
}

}  // namespace

GeometryReport verify_good_geometry(const CzDecomposition& decomp) {
  GeometryReport r;
  const FractalSet& set = decomp.set();
  const Lattice& lat = decomp.lattice();
  const PointCounter& counter = decomp.counter();
  const std::size_t n = decomp.size();
  const double delta = set.delta_value();
  r.square_count = n;

  r.min_generation = std::numeric_limits<int>::max();
  r.max_generation = 0;
  r.min_side_ok = r.side_ratio_ok = r.point_count_ok = r.parent_count_ok = true;
  r.boundary_ok = r.anchors_ok = r.touch_symmetric = true;
  r.min_side_times_9_over_delta = std::numeric_limits<double>::infinity();
  r.type12_ratio_min = r.cz3_ratio_min = r.type3_dist_ratio_min = r.anchor_ratio_min =
      std::numeric_limits<double>::infinity();
  r.min_boundary_side = std::numeric_limits<double>::infinity();

  // Total area in units of the finest generation's area.
  i128 area = 0;
  int max_gen = 0;
  for (const auto& sq : decomp.squares()) max_gen = std::max(max_gen, sq.generation);

  for (std::size_t q = 0; q < n; ++q) {
    const DyadicSquare& sq = decomp.square(q);
    const double side = sq.side();
    r.min_generation = std::min(r.min_generation, sq.generation);
    r.max_generation = std::max(r.max_generation, sq.generation);
    area += static_cast<i128>(1) << (2 * (max_gen - sq.generation));

    switch (decomp.type(q)) {
      case SquareType::I: ++r.type_counts[0]; break;
      case SquareType::II: ++r.type_counts[1]; break;
      case SquareType::III: ++r.type_counts[2]; break;
    }

    // delta_Q >= Delta / 9  <=>  72 D >= 2^g, exact.
    const bool cz1 = static_cast<i128>(72) * set.denom() >= (static_cast<i128>(1) << sq.generation);
    r.min_side_times_9_over_delta = std::min(r.min_side_times_9_over_delta, side * 9.0 / delta);
    if (!cz1) r.min_side_ok = false;

    if (counter.count(lat.box(sq, Dilation::x1_1)) > 1) r.point_count_ok = false;
    if (sq.generation > 0 && counter.count(lat.box(sq.parent(), Dilation::x3)) < 2)
      r.parent_count_ok = false;

    const auto nb = decomp.neighbors(q);
    r.max_neighbor_count = std::max(r.max_neighbor_count, nb.size());
    for (std::uint32_t o : nb) {
      const DyadicSquare& other = decomp.square(o);
      const double ratio = std::ldexp(1.0, sq.generation - other.generation);
      r.max_neighbor_side_ratio = std::max(r.max_neighbor_side_ratio, ratio);
      if (std::abs(sq.generation - other.generation) > 1) r.side_ratio_ok = false;
      const auto back = decomp.neighbors(o);
      if (!std::binary_search(back.begin(), back.end(), static_cast<std::uint32_t>(q)))
        r.touch_symmetric = false;
    }

    if (decomp.is_boundary(q)) {
      ++r.boundary_count;
      r.min_boundary_side = std::min(r.min_boundary_side, side);
      if (side < 1.0 || decomp.type(q) != SquareType::III) r.boundary_ok = false;
    }

    const double d1 = dist_to_e1(sq, set);
    const double cz3 = side / (delta + d1);
    r.cz3_ratio_min = std::min(r.cz3_ratio_min, cz3);
    r.cz3_ratio_max = std::max(r.cz3_ratio_max, cz3);
    if (decomp.type(q) == SquareType::III) {
      const double dE = std::min(d1, dist_to_e2(sq, set));
      const double t = side / dE;
      r.type3_dist_ratio_min = std::min(r.type3_dist_ratio_min, t);
      r.type3_dist_ratio_max = std::max(r.type3_dist_ratio_max, t);
    } else {
      const double t = side / delta;
      r.type12_ratio_min = std::min(r.type12_ratio_min, t);
      r.type12_ratio_max = std::max(r.type12_ratio_max, t);
    }

    const Anchors& an = decomp.anchors(q);
    const auto in50 = counter.e1_range(lat.box(sq, Dilation::x50));
    const bool inside = an.z >= in50.lo && an.z <= in50.hi && an.w >= in50.lo && an.w <= in50.hi;
    if (an.z == an.w || !inside) r.anchors_ok = false;
    const double sep = std::abs(static_cast<double>(an.z - an.w)) * delta / side;
    r.anchor_ratio_min = std::min(r.anchor_ratio_min, sep);
    r.anchor_ratio_max = std::max(r.anchor_ratio_max, sep);
  }
  r.partition_ok = area == (static_cast<i128>(1) << (2 * max_gen));
  if (r.type12_ratio_min == std::numeric_limits<double>::infinity()) r.type12_ratio_min = r.type12_ratio_max = 0.0;

  // Max cover count #{Q : x in 1.1Q}. Any set of closed boxes sharing a point
  // contains (max x0, max y0) of the set, which is (x0 of some A, y0 of some
  // B) with every member touching A; so scanning neighbour lists is exact.
  for (std::size_t a = 0; a < n; ++a) {
    const auto nb = decomp.neighbors(a);
    std::vector<std::uint32_t> local(nb.begin(), nb.end());
    local.push_back(static_cast<std::uint32_t>(a));
    std::vector<LatticeBox> boxes;
    boxes.reserve(local.size());
    for (std::uint32_t o : local) boxes.push_back(lat.box(decomp.square(o), Dilation::x1_1));
    const LatticeBox& A = boxes.back();
    for (const LatticeBox& B : boxes) {
      const std::int64_t px = A.x0, py = B.y0;
      if (!A.contains(px, py) || !B.contains(px, py)) continue;
      std::size_t c = 0;
      for (const LatticeBox& C : boxes) c += C.contains(px, py) ? 1 : 0;
      r.max_cover_count = std::max(r.max_cover_count, c);
    }
  }

  if (!r.side_ratio_ok) r.failures.emplace_back("touching squares differ by more than a factor 2");
  if (!r.min_side_ok) r.failures.emplace_back("some square has side below Delta/9");
  if (!r.point_count_ok) r.failures.emplace_back("some 1.1Q holds more than one point of E");
  if (!r.parent_count_ok) r.failures.emplace_back("some parent 3Q+ holds fewer than two points");
  if (!r.boundary_ok) r.failures.emplace_back("boundary square with side < 1 or not Type III");
  if (!r.partition_ok) r.failures.emplace_back("squares do not tile Q0");
  if (!r.anchors_ok) r.failures.emplace_back("anchor pair invalid");
  if (!r.touch_symmetric) r.failures.emplace_back("touch graph not symmetric");
  r.passed = r.failures.empty();
  return r;
}

}  // namespace whitney
