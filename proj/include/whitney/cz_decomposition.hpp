#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "whitney/fractal_set.hpp"

namespace whitney {

/// Dilation factors used by the construction, in tenths (1.1 -> 11).
enum class Dilation : int { x1_1 = 11, x3 = 30, x9 = 90, x50 = 500, x250 = 2500 };

/// Half-open dyadic square [a1, a1+d) x [a2, a2+d) obtained by bisecting
/// Q0 = [-4,4)^2 `generation` times; corner a = -4 + (i, j) * d.
struct DyadicSquare {
  int generation = 0;
  std::int64_t i = 0;
  std::int64_t j = 0;

  double side() const { return std::ldexp(8.0, -generation); }
  Fraction side_exact() const;
  Vec2 corner() const { return {-4.0 + static_cast<double>(i) * side(), -4.0 + static_cast<double>(j) * side()}; }
  Vec2 center() const { return corner() + Vec2::Constant(0.5 * side()); }
  /// Half-open membership.
  bool contains(const Vec2& x) const;
  DyadicSquare child(int quadrant) const;  // quadrant bit 0 -> x, bit 1 -> y
  DyadicSquare parent() const;

  friend bool operator==(const DyadicSquare&, const DyadicSquare&) = default;
};

/// Closed axis-parallel box in integer lattice units.
struct LatticeBox {
  std::int64_t x0, x1, y0, y1;
  bool intersects(const LatticeBox& o) const {
    return x0 <= o.x1 && o.x0 <= x1 && y0 <= o.y1 && o.y0 <= y1;
  }
  bool contains(std::int64_t x, std::int64_t y) const {
    return x0 <= x && x <= x1 && y0 <= y && y <= y1;
  }
};

/// Integer lattice fine enough to represent every dilated dyadic square up to
/// generation `max_generation` exactly: one unit is side(max_generation)/20.
class Lattice {
 public:
  explicit Lattice(int max_generation);

  int max_generation() const noexcept { return max_generation_; }
  /// Units per unit length, 5 * 2^(G-1).
  std::int64_t per_unit() const noexcept { return per_unit_; }
  /// Closed dilation cQ in lattice units.
  LatticeBox box(const DyadicSquare& q, Dilation c) const;
  LatticeBox box(const DyadicSquare& q) const;  // closure of Q itself
  /// Boundary of Q0 sits at +-4 * per_unit.
  std::int64_t q0_half_width() const noexcept { return 4 * per_unit_; }

 private:
  int max_generation_;
  std::int64_t per_unit_;
};

/// Exact counting of E points inside closed lattice boxes.
class PointCounter {
 public:
  PointCounter(const FractalSet& set, const Lattice& lattice);

  struct Range {
    std::int64_t lo = 0;  // inclusive
    std::int64_t hi = -1; // inclusive; empty when hi < lo
    std::int64_t count() const { return hi >= lo ? hi - lo + 1 : 0; }
  };
  /// E1 numerators k (point k/D) inside the box.
  Range e1_range(const LatticeBox& b) const;
  /// Sorted E2 indices inside the box.
  Range e2_range(const LatticeBox& b) const;
  std::int64_t count(const LatticeBox& b) const {
    return e1_range(b).count() + e2_range(b).count();
  }

 private:
  const FractalSet* set_;
  std::int64_t per_unit_;
};

enum class SquareType : std::uint8_t { I = 1, II = 2, III = 3 };

/// Anchor pair on E1 as numerators over D.
struct Anchors {
  std::int64_t z = 0;
  std::int64_t w = 0;
};

/// Exact predicate: closed 1.1-dilations intersect. Symmetric and reflexive.
bool touches(const DyadicSquare& a, const DyadicSquare& b);

/// The Calderon-Zygmund decomposition of Q0 for a fractal set, with its
/// quadtree, touch graph, square types, boundary flags and anchor points.
/// Immutable after construction.
class CzDecomposition {
 public:
  explicit CzDecomposition(const FractalSet& set);
  // The point counter refers into the owned set.
  CzDecomposition(const CzDecomposition&) = delete;
  CzDecomposition& operator=(const CzDecomposition&) = delete;

  const FractalSet& set() const noexcept { return set_; }
  const Lattice& lattice() const noexcept { return lattice_; }
  const PointCounter& counter() const noexcept { return counter_; }

  std::size_t size() const noexcept { return squares_.size(); }
  const DyadicSquare& square(std::size_t q) const { return squares_[q]; }
  const std::vector<DyadicSquare>& squares() const noexcept { return squares_; }

  /// Squares touching q, excluding q itself, sorted by index.
  std::span<const std::uint32_t> neighbors(std::size_t q) const {
    return {nbr_index_.data() + nbr_offset_[q], nbr_offset_[q + 1] - nbr_offset_[q]};
  }

  SquareType type(std::size_t q) const { return type_[q]; }
  bool is_boundary(std::size_t q) const { return boundary_[q] != 0; }
  /// E2 index of x_Q for Type II squares.
  std::optional<std::size_t> x_point(std::size_t q) const;
  /// E1 numerator of the point in 1.1Q for Type I squares.
  std::optional<std::int64_t> e1_point(std::size_t q) const;
  const Anchors& anchors(std::size_t q) const { return anchors_[q]; }

  /// Index of the square containing x. Throws ConfigError outside Q0.
  std::size_t locate(const Vec2& x) const;

  /// Calls fn(q) for every square whose closed (1 + 2*margin)-dilation
  /// contains x. `margin` is a fraction of the side (0.05 gives 1.1Q).
  template <class Fn>
  void for_each_covering(const Vec2& x, double margin, Fn&& fn) const {
    visit_covering(0, x, margin, fn);
  }

  /// Squares whose closed c-dilation intersects `box` (lattice units).
  std::vector<std::uint32_t> query(const LatticeBox& box, Dilation c) const;

  struct Node {
    DyadicSquare sq;
    std::int32_t first_child = -1;  // four consecutive children
    std::int32_t leaf = -1;
  };
  const std::vector<Node>& nodes() const noexcept { return nodes_; }

 private:
  template <class Fn>
  void visit_covering(std::int32_t n, const Vec2& x, double margin, Fn& fn) const {
    const Node& node = nodes_[static_cast<std::size_t>(n)];
    const double d = node.sq.side();
    const Vec2 a = node.sq.corner();
    const double pad = margin * d;
    if (x.x() < a.x() - pad || x.x() > a.x() + d + pad || x.y() < a.y() - pad ||
        x.y() > a.y() + d + pad)
      return;
    if (node.leaf >= 0) {
      fn(static_cast<std::size_t>(node.leaf));
      return;
    }
    for (int k = 0; k < 4; ++k) visit_covering(node.first_child + k, x, margin, fn);
  }

  void build_tree();
  void build_neighbors();
  void classify_all();

  FractalSet set_;
  Lattice lattice_;
  PointCounter counter_;
  std::vector<Node> nodes_;
  std::vector<DyadicSquare> squares_;
  std::vector<std::size_t> nbr_offset_;
  std::vector<std::uint32_t> nbr_index_;
  std::vector<SquareType> type_;
  std::vector<std::uint8_t> boundary_;
  std::vector<std::int64_t> special_point_;  // E2 index (II) or E1 numerator (I)
  std::vector<Anchors> anchors_;
};

/// Runs the stopping rule #(3Q n E) <= 1 from Q0, then classifies the
/// squares and picks anchors.
CzDecomposition decompose(const FractalSet& set);

/// Classification of one square from scratch (exact counts in 1.1Q).
struct SquareClass {
  SquareType type = SquareType::III;
  bool boundary = false;
  std::optional<std::size_t> x_point;       // E2 index, Type II
  std::optional<std::int64_t> e1_numerator;  // Type I
};
/// Throws GeometryError when 1.1Q holds more than one point of E.
SquareClass classify(const DyadicSquare& q, const Lattice& lattice, const PointCounter& counter,
                     const FractalSet& set);

/// Anchor rule: boundary -> (-1, 1); Type I -> the E1 point of 1.1Q and its
/// right neighbour (left at x = 1); Type II -> projection of x_Q and its
/// neighbour; otherwise min and max of 50Q n E1. Throws GeometryError if a
/// non-boundary square has fewer than two E1 points in 50Q.
Anchors anchor_points(const DyadicSquare& q, const SquareClass& cls, const Lattice& lattice,
                      const PointCounter& counter, const FractalSet& set);

struct GeometryReport {
  bool passed = false;
  std::size_t square_count = 0;
  std::array<std::size_t, 3> type_counts{};  // I, II, III
  std::size_t boundary_count = 0;
  int min_generation = 0;
  int max_generation = 0;

  double max_neighbor_side_ratio = 0.0;
  std::size_t max_neighbor_count = 0;
  std::size_t max_cover_count = 0;
  /// min over Q of delta_Q * 9 / Delta; must be >= 1.
  double min_side_times_9_over_delta = 0.0;
  /// delta_Q / Delta over Type I and II squares.
  double type12_ratio_min = 0.0, type12_ratio_max = 0.0;
  /// delta_Q / (Delta + dist(Q, E1)) over all squares.
  double cz3_ratio_min = 0.0, cz3_ratio_max = 0.0;
  /// delta_Q / dist(Q, E) over Type III squares.
  double type3_dist_ratio_min = 0.0, type3_dist_ratio_max = 0.0;
  /// |z_Q - w_Q| / delta_Q.
  double anchor_ratio_min = 0.0, anchor_ratio_max = 0.0;
  double min_boundary_side = 0.0;

  bool side_ratio_ok = false;
  bool min_side_ok = false;
  bool point_count_ok = false;    // #(1.1Q n E) <= 1
  bool parent_count_ok = false;   // #(3Q+ n E) >= 2
  bool boundary_ok = false;       // boundary squares: side >= 1, Type III
  bool partition_ok = false;      // areas sum to 64
  bool anchors_ok = false;        // z != w, both in 50Q n E1
  bool touch_symmetric = false;
  std::vector<std::string> failures;
};

GeometryReport verify_good_geometry(const CzDecomposition& decomp);

}  // namespace whitney
