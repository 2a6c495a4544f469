#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "gffsle/lattice.hpp"

using namespace gffsle;

namespace {

double segment_distance(Point p, Point a, Point b) {
  const Point d = b - a;
  const double s = std::clamp(std::real((p - a) * std::conj(d)) / std::norm(d), 0.0, 1.0);
  return std::abs(p - (a + s * d));
}

void expect_domain_invariants(const TgDomain& d) {
  const auto& cycle = d.boundary_cycle();
  std::set<int> distinct(cycle.begin(), cycle.end());
  EXPECT_EQ(distinct.size(), cycle.size());
  EXPECT_EQ(cycle.size() + d.num_interior(), d.num_vertices());

  // consecutive cycle vertices are lattice neighbours
  for (std::size_t i = 0; i < cycle.size(); ++i) {
    const int u = cycle[i], v = cycle[(i + 1) % cycle.size()];
    EXPECT_GE(direction_index(d.coords()[v] - d.coords()[u]), 0);
  }

  std::size_t plus = 0, minus = 0;
  for (int v : cycle) {
    EXPECT_NE(d.in_arc_plus(v), d.in_arc_minus(v));
    plus += d.in_arc_plus(v);
    minus += d.in_arc_minus(v);
  }
  EXPECT_GT(plus, 0u);
  EXPECT_GT(minus, 0u);
  EXPECT_EQ(d.arc_plus().size(), plus);
  EXPECT_EQ(d.arc_minus().size(), minus);

  for (int v : d.interior_vertices()) {
    for (int n : d.neighbors(v)) EXPECT_GE(n, 0);
  }
  EXPECT_GT(d.edge_weight(), 0.0);

  const auto x = d.x_edge(), y = d.y_edge();
  EXPECT_TRUE(d.in_arc_minus(x[0]));
  EXPECT_TRUE(d.in_arc_plus(x[1]));
  EXPECT_TRUE(d.in_arc_plus(y[0]));
  EXPECT_TRUE(d.in_arc_minus(y[1]));
  EXPECT_GT(std::abs(d.x_point() - d.y_point()), 0.0);
}

}  // namespace

TEST(Rhombus, SideTwoHasOneInteriorVertex) {
  const auto d = build_rhombus_domain(2, 0.5);
  EXPECT_EQ(d.num_interior(), 1u);
  EXPECT_EQ(d.boundary_cycle().size(), 8u);
  EXPECT_GE(d.arc_plus().size(), 1u);
  EXPECT_GE(d.arc_minus().size(), 1u);
  expect_domain_invariants(d);
}

TEST(Rhombus, InteriorCountSide40) {
  const auto d = build_rhombus_domain(40, 0.5);
  EXPECT_EQ(d.num_interior(), 1521u);
  expect_domain_invariants(d);
}

TEST(Rhombus, ScaleOnlyMovesPositions) {
  const auto a = build_rhombus_domain(5, 0.5, 1.0);
  const auto b = build_rhombus_domain(5, 0.5, 0.25);
  ASSERT_EQ(a.num_vertices(), b.num_vertices());
  for (std::size_t v = 0; v < a.num_vertices(); ++v) {
    EXPECT_EQ(a.coords()[v], b.coords()[v]);
    EXPECT_NEAR(std::abs(0.25 * a.position(static_cast<int>(v)) - b.position(static_cast<int>(v))), 0.0, 1e-12);
  }
}

TEST(Rhombus, RejectsTinySide) { EXPECT_THROW(build_rhombus_domain(1), DomainError); }

TEST(Rhombus, SwappedArcs) {
  const auto d = build_rhombus_domain(6, 0.3);
  const auto s = d.with_arcs_swapped();
  for (int v : d.boundary_cycle()) EXPECT_EQ(d.in_arc_plus(v), s.in_arc_minus(v));
  expect_domain_invariants(s);
}

TEST(Hexagon, Invariants) {
  const auto d = build_hexagon_domain(4);
  // 3n(n+1)+1 sites, 6n on the boundary
  EXPECT_EQ(d.num_vertices(), 61u);
  EXPECT_EQ(d.boundary_cycle().size(), 24u);
  expect_domain_invariants(d);
}

TEST(Box, BottomOnRealAxisAndPlusOnTheRight) {
  const auto d = build_box_domain(4.0, 2.0, 0.5);
  expect_domain_invariants(d);
  for (int v : d.boundary_cycle()) {
    const Point p = d.position(v);
    EXPECT_GE(p.imag(), -1e-12);
    if (std::abs(p.real()) > 0.3) EXPECT_EQ(d.in_arc_plus(v), p.real() > 0.0);
  }
}

TEST(FromSites, RejectsDisconnectedRegion) {
  std::vector<LatticeCoord> sites{{0, 0}, {1, 0}, {0, 1}, {5, 5}, {6, 5}, {5, 6}};
  EXPECT_THROW(TgDomain::from_sites(sites), DomainError);
}

TEST(FromSites, FindAndTriangles) {
  const auto d = build_rhombus_domain(3);
  EXPECT_EQ(d.num_triangles(), 18u);
  for (std::size_t v = 0; v < d.num_vertices(); ++v) EXPECT_EQ(d.find(d.coords()[v]), static_cast<int>(v));
  EXPECT_EQ(d.find({10, 10}), -1);
  for (std::size_t t = 0; t < d.num_triangles(); ++t) {
    const auto tri = d.triangles()[t];
    EXPECT_EQ(d.find_triangle(tri[1], tri[2], tri[0]), static_cast<int>(t));
    EXPECT_EQ(d.triangle_left_of(tri[0], tri[1]), static_cast<int>(t));
  }
}

TEST(Inradius, SideTwoBarycenter) {
  const auto d = build_rhombus_domain(2);
  const double r = inradius(d, d.centroid());
  EXPECT_GT(r, 0.0);
  EXPECT_LE(r, 2.0);
}

TEST(Inradius, ZeroOnBoundary) {
  const auto d = build_rhombus_domain(4);
  const int v = d.boundary_cycle()[3];
  EXPECT_NEAR(inradius(d, d.position(v)), 0.0, 1e-12);
  EXPECT_THROW(inradius(d, {-10.0, -10.0}), DomainError);
}

TEST(Inradius, MatchesDenseBoundarySampling) {
  const auto d = build_rhombus_domain(40);
  const Point c = d.centroid();
  const auto poly = d.boundary_polygon();
  double brute = 1e300;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point a = poly[i], b = poly[(i + 1) % poly.size()];
    for (int k = 0; k <= 200; ++k) brute = std::min(brute, std::abs(c - (a + (k / 200.0) * (b - a))));
    brute = std::min(brute, segment_distance(c, a, b));
  }
  EXPECT_NEAR(inradius(d, c), brute, 1e-9);
}

TEST(DualGraph, OneDualEdgePerPrimalEdge) {
  for (int n : {2, 3, 7}) {
    const auto d = build_rhombus_domain(n);
    const auto g = dual_graph(d);
    EXPECT_EQ(g.hex_edges.size(), count_primal_edges(d));
    std::set<std::pair<int, int>> crossed;
    for (const auto& e : g.hex_edges) {
      EXPECT_TRUE(crossed.insert({std::min(e.u, e.v), std::max(e.u, e.v)}).second);
      EXPECT_GE(direction_index(d.coords()[e.v] - d.coords()[e.u]), 0);
      if (e.on_boundary()) EXPECT_TRUE(!d.is_interior(e.u) && !d.is_interior(e.v));
    }
  }
}

TEST(DualGraph, SideThreeHandCount) {
  // 16 vertices, 18 triangles: 16 + 18 - 1 edges by Euler
  const auto d = build_rhombus_domain(3);
  EXPECT_EQ(count_primal_edges(d), 33u);
  EXPECT_EQ(dual_graph(d).hex_edges.size(), 33u);
}

TEST(DualGraph, ArcEndpointStubs) {
  const auto d = build_rhombus_domain(5);
  const auto g = dual_graph(d);
  ASSERT_GE(g.x_edge_index, 0);
  ASSERT_GE(g.y_edge_index, 0);
  for (int idx : {g.x_edge_index, g.y_edge_index}) {
    const auto& e = g.hex_edges[static_cast<std::size_t>(idx)];
    EXPECT_TRUE(e.on_boundary());
    EXPECT_NE(d.in_arc_plus(e.u), d.in_arc_plus(e.v));
  }
  EXPECT_NEAR(std::abs(g.hex_edges[static_cast<std::size_t>(g.x_edge_index)].to - d.x_point()), 0.0, 1e-12);
}
