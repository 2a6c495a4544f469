#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gffsle/common.hpp"

namespace gffsle {

/// Triangular-lattice site a + b*omega, omega = exp(i*pi/3).
struct LatticeCoord {
  int a = 0;
  int b = 0;
  friend bool operator==(LatticeCoord, LatticeCoord) = default;
};

/// Unit lattice directions in counterclockwise order: 1, w, w^2, -1, w^4, w^5.
inline constexpr std::array<LatticeCoord, 6> kLatticeDirections{
    {{1, 0}, {0, 1}, {-1, 1}, {-1, 0}, {0, -1}, {1, -1}}};

inline LatticeCoord operator+(LatticeCoord p, LatticeCoord q) { return {p.a + q.a, p.b + q.b}; }
inline LatticeCoord operator-(LatticeCoord p, LatticeCoord q) { return {p.a - q.a, p.b - q.b}; }

/// Index k with kLatticeDirections[k] == d, or -1.
int direction_index(LatticeCoord d);

inline Point lattice_point(LatticeCoord c) {
  return {c.a + 0.5 * c.b, 0.5 * kSqrt3 * c.b};
}

/// FEM conductance of an edge shared by two unit equilateral triangles, cot(pi/3).
inline const double kInteriorEdgeWeight = 1.0 / kSqrt3;

/// A domain of the triangular grid: the union of lattice triangles bounded by a
/// simple closed lattice cycle, with two complementary marked boundary arcs.
///
/// Vertex positions are `origin + scale * (a + b*omega)`; the lattice structure
/// is independent of the scale. The boundary cycle runs counterclockwise.
/// The arc endpoints are midpoints of the two boundary edges whose ends lie on
/// different arcs: x_edge (minus -> plus, counterclockwise) and y_edge
/// (plus -> minus). x is the clockwise endpoint of the plus arc.
class TgDomain {
 public:
  /// Builds the domain spanned by all lattice triangles with three vertices in
  /// `sites`. Throws DomainError unless that union is a simply connected region
  /// bounded by a simple lattice cycle.
  static TgDomain from_sites(const std::vector<LatticeCoord>& sites, double scale = 1.0,
                             Point origin = {0.0, 0.0});

  std::size_t num_vertices() const { return coords_.size(); }
  std::size_t num_interior() const { return interior_ids_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }

  const std::vector<LatticeCoord>& coords() const { return coords_; }
  const std::vector<Point>& positions() const { return positions_; }
  Point position(int v) const { return positions_[static_cast<std::size_t>(v)]; }
  bool is_interior(int v) const { return interior_[static_cast<std::size_t>(v)]; }
  const std::vector<int>& interior_vertices() const { return interior_ids_; }

  /// Neighbors along domain edges, ordered counterclockwise (absent slots are -1).
  const std::array<int, 6>& neighbors(int v) const { return neighbors_[static_cast<std::size_t>(v)]; }

  /// Vertex at a lattice site, or -1.
  int find(LatticeCoord c) const;

  /// Triangles as counterclockwise vertex triples.
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  /// Triangle with the counterclockwise-ordered vertices (u, v, w) in some rotation, or -1.
  int find_triangle(int u, int v, int w) const;
  /// Triangle lying to the left of the directed edge u -> v, or -1.
  int triangle_left_of(int u, int v) const;

  const std::vector<int>& boundary_cycle() const { return boundary_cycle_; }
  /// Position of v in the boundary cycle, or -1 for interior vertices.
  int boundary_position(int v) const { return boundary_pos_[static_cast<std::size_t>(v)]; }

  bool in_arc_plus(int v) const;
  bool in_arc_minus(int v) const;
  /// Arc vertices in counterclockwise order, arc_plus from x to y, arc_minus from y to x.
  std::vector<int> arc_plus() const;
  std::vector<int> arc_minus() const;

  /// Boundary-cycle positions i of the arc edges (cycle[i], cycle[i+1]).
  int x_edge_position() const { return x_pos_; }
  int y_edge_position() const { return y_pos_; }
  std::array<int, 2> x_edge() const;
  std::array<int, 2> y_edge() const;
  Point x_point() const;
  Point y_point() const;

  /// Marks the plus arc as cycle positions x_pos+1 .. y_pos (cyclically).
  void set_arcs(int x_edge_position, int y_edge_position);
  /// Exchanges the roles of the two arcs (and of x and y).
  TgDomain with_arcs_swapped() const;

  double scale() const { return scale_; }
  Point origin() const { return origin_; }
  double edge_weight() const { return kInteriorEdgeWeight; }

  /// Boundary polygon in counterclockwise order (vertex positions).
  std::vector<Point> boundary_polygon() const;
  Point centroid() const;
  /// True when p lies in the closed polygon.
  bool contains(Point p) const;

  nlohmann::json to_json() const;

 private:
  double scale_ = 1.0;
  Point origin_{0.0, 0.0};
  std::vector<LatticeCoord> coords_;
  std::vector<Point> positions_;
  std::vector<bool> interior_;
  std::vector<int> interior_ids_;
  std::vector<std::array<int, 6>> neighbors_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<std::array<int, 6>> vertex_triangles_;  // triangle to the left of (v, neighbor k)
  std::vector<int> boundary_cycle_;
  std::vector<int> boundary_pos_;
  std::vector<bool> plus_;  // per boundary position
  int x_pos_ = -1;
  int y_pos_ = -1;
  int min_a_ = 0, min_b_ = 0, span_a_ = 0, span_b_ = 0;
  std::vector<int> site_index_;
};

/// Rhombus with corners 0, n, n + n*omega, n*omega (lattice units). The arcs are
/// split next to corner 0 and next to the corner nearest `split_fraction` of
/// the perimeter (counterclockwise from corner 0). Requires side_n >= 2.
TgDomain build_rhombus_domain(int side_n, double split_fraction = 0.5, double scale = 1.0);

/// Regular hexagon of side n centred at the origin, split like the rhombus.
TgDomain build_hexagon_domain(int side_n, double split_fraction = 0.5, double scale = 1.0);

/// Approximation of the box [-width/2, width/2] x [0, height] by lattice
/// triangles of side `mesh`, with its bottom row on the real axis. The arcs
/// split at the bottom and top edges straddling Re z = 0, so the plus arc is
/// the right half of the boundary.
TgDomain build_box_domain(double width, double height, double mesh);

/// Distance from `center` to the complement of the domain (0 on the boundary).
/// Throws DomainError if center lies outside the closed domain.
double inradius(const TgDomain& domain, Point center);

/// Dual (hexagonal) edge crossing the primal edge u -> v. The left triangle
/// always exists; boundary edges have no right triangle and end at the edge
/// midpoint.
struct DualEdge {
  Point from;
  Point to;
  int u = -1;
  int v = -1;
  int left_triangle = -1;
  int right_triangle = -1;  // -1 when the primal edge lies on the boundary
  bool on_boundary() const { return right_triangle < 0; }
};

/// Hexagonal dual of the domain's triangulation: one dual edge per primal edge.
struct DualPathGraph {
  std::vector<DualEdge> hex_edges;
  int x_edge_index = -1;  // dual stubs ending at the arc endpoints
  int y_edge_index = -1;
};

DualPathGraph dual_graph(const TgDomain& domain);

/// Number of primal edges of the domain triangulation.
std::size_t count_primal_edges(const TgDomain& domain);

}  // namespace gffsle
