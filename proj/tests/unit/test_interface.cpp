#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "gffsle/field.hpp"
#include "gffsle/interface.hpp"

using namespace gffsle;

namespace {

FieldSample signs_field(const TgDomain& d, const std::vector<std::pair<LatticeCoord, double>>& interior) {
  FieldSample f = harmonic_extension(d, arc_boundary_data(d, kCriticalLambda));
  for (const auto& [c, value] : interior) f.values[d.find(c)] = value;
  return f;
}

void expect_path_invariants(const TgDomain& d, const FieldSample& f, const InterfacePath& path) {
  ASSERT_TRUE(path.complete);
  EXPECT_NEAR(std::abs(path.dual_points.front() - d.x_point()), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(path.dual_points.back() - d.y_point()), 0.0, 1e-12);
  std::set<int> tris(path.triangles.begin(), path.triangles.end());
  EXPECT_EQ(tris.size(), path.triangles.size());
  EXPECT_EQ(path.dual_points.size(), path.triangles.size() + 2);
  for (int v : path.left_vertices) EXPECT_TRUE(d.is_interior(v) ? f.values[v] < 0.0 : d.in_arc_minus(v));
  for (int v : path.right_vertices) EXPECT_TRUE(d.is_interior(v) ? f.values[v] > 0.0 : d.in_arc_plus(v));
  for (const auto& [m, p] : path.crossed) {
    EXPECT_TRUE(std::binary_search(path.left_vertices.begin(), path.left_vertices.end(), m));
    EXPECT_TRUE(std::binary_search(path.right_vertices.begin(), path.right_vertices.end(), p));
  }
}

}  // namespace

TEST(TraceInterface, SideThreeHandTraced) {
  // interior (1,1)+ (1,2)- (2,1)- (2,2)+; x between (0,0) and (1,0), y between (2,3) and (3,3)
  const auto d = build_rhombus_domain(3);
  const auto f = signs_field(d, {{{1, 1}, 0.4}, {{1, 2}, -0.4}, {{2, 1}, -0.4}, {{2, 2}, 0.4}});
  const auto path = trace_interface(d, f);
  const std::vector<std::pair<LatticeCoord, LatticeCoord>> expected{
      {{0, 0}, {1, 0}}, {{0, 1}, {1, 0}}, {{0, 1}, {1, 1}}, {{0, 2}, {1, 1}}, {{1, 2}, {1, 1}},
      {{2, 1}, {1, 1}}, {{2, 1}, {2, 0}}, {{2, 1}, {3, 0}}, {{2, 1}, {3, 1}}, {{2, 1}, {2, 2}},
      {{1, 2}, {2, 2}}, {{1, 3}, {2, 2}}, {{2, 3}, {2, 2}}, {{2, 3}, {3, 2}}, {{2, 3}, {3, 3}}};
  ASSERT_EQ(path.crossed.size(), expected.size());
  for (std::size_t k = 0; k < expected.size(); ++k) {
    EXPECT_EQ(d.coords()[path.crossed[k][0]], expected[k].first) << "step " << k;
    EXPECT_EQ(d.coords()[path.crossed[k][1]], expected[k].second) << "step " << k;
  }
  EXPECT_EQ(path.num_steps(), 14u);
  expect_path_invariants(d, f, path);
}

TEST(TraceInterface, AllPositiveHugsMinusArc) {
  const auto d = build_rhombus_domain(6);
  FieldSample f = harmonic_extension(d, arc_boundary_data(d, kCriticalLambda));
  for (int v : d.interior_vertices()) f.values[v] = 1.0;
  const auto path = trace_interface(d, f);
  auto minus = d.arc_minus();
  std::sort(minus.begin(), minus.end());
  EXPECT_EQ(path.left_vertices, minus);
  for (const auto& e : path.crossed) EXPECT_TRUE(d.in_arc_minus(e[0]));
  expect_path_invariants(d, f, path);
}

TEST(TraceInterface, NegationWithSwappedArcsReverses) {
  const auto d = build_rhombus_domain(10, 0.4);
  const auto s = d.with_arcs_swapped();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto f = sample_dgff(d, arc_boundary_data(d, kCriticalLambda), seed);
    FieldSample g = f;
    g.values = -f.values;
    const auto p = trace_interface(d, f);
    const auto q = trace_interface(s, g);
    ASSERT_EQ(p.dual_points.size(), q.dual_points.size());
    for (std::size_t k = 0; k < p.dual_points.size(); ++k) {
      EXPECT_NEAR(std::abs(p.dual_points[k] - q.dual_points[q.dual_points.size() - 1 - k]), 0.0, 1e-12);
    }
    EXPECT_EQ(p.left_vertices, q.right_vertices);
    expect_path_invariants(d, f, p);
  }
}

TEST(TraceInterface, Errors) {
  const auto d = build_rhombus_domain(4);
  FieldSample f = harmonic_extension(d, arc_boundary_data(d, kCriticalLambda));
  f.values[d.interior_vertices()[0]] = 0.0;
  f.values[d.interior_vertices()[1]] = 0.0;
  f.values[d.interior_vertices()[2]] = 0.0;
  EXPECT_THROW(trace_interface(d, f), DomainError);
  FieldSample bad = harmonic_extension(d, arc_boundary_data(d, -kCriticalLambda));
  EXPECT_THROW(trace_interface(d, bad), DomainError);
}

TEST(InterfaceExplorer, RevealsOnlyWhatItVisits) {
  const auto d = build_rhombus_domain(20);
  const auto f = sample_dgff(d, arc_boundary_data(d, kCriticalLambda), 11);
  std::set<int> queried;
  InterfaceExplorer ex(d, [&](int v) {
    queried.insert(v);
    return f.values[v] > 0.0;
  });
  for (int k = 0; k < 15 && ex.step(); ++k) {
  }
  EXPECT_EQ(ex.path().num_steps(), 15u);
  for (int v : queried) {
    EXPECT_TRUE(d.is_interior(v));
    EXPECT_NE(std::find(ex.revealed().begin(), ex.revealed().end(), v), ex.revealed().end());
  }
  EXPECT_LE(ex.num_revealed(), 15u + 2u);
  const auto full = ex.finish();
  EXPECT_EQ(full.crossed, trace_interface(d, f).crossed);
}

TEST(LevelCrossings, LieOnCrossedEdges) {
  const auto d = build_rhombus_domain(8);
  const auto f = sample_dgff(d, arc_boundary_data(d, kCriticalLambda), 5);
  const auto path = trace_interface(d, f);
  const auto pts = path.level_crossings(d, f.values);
  ASSERT_EQ(pts.size(), path.crossed.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const Point a = d.position(path.crossed[k][0]), b = d.position(path.crossed[k][1]);
    EXPECT_NEAR(std::abs(pts[k] - a) + std::abs(pts[k] - b), std::abs(b - a), 1e-12);
  }
}

TEST(HeightGap, ZeroWhenFieldIsExactlyPlusMinusLambda) {
  const auto d = build_rhombus_domain(12);
  auto f = sample_dgff(d, arc_boundary_data(d, kCriticalLambda), 2);
  const auto path = trace_interface(d, f);
  for (int v : path.left_vertices) f.values[v] = -kCriticalLambda;
  for (int v : path.right_vertices) f.values[v] = kCriticalLambda;
  const HeightGap gap(d, f, path);
  for (int v : d.interior_vertices()) {
    const bool on_path = std::binary_search(path.left_vertices.begin(), path.left_vertices.end(), v) ||
                         std::binary_search(path.right_vertices.begin(), path.right_vertices.end(), v);
    if (on_path) {
      EXPECT_THROW(gap(v), DomainError);
    } else {
      EXPECT_NEAR(gap(v), 0.0, 1e-12);
    }
  }
}

TEST(HeightGap, HarmonicFieldMatchesTwoSolves) {
  const auto d = build_rhombus_domain(9);
  const auto f = harmonic_extension(d, arc_boundary_data(d, kCriticalLambda));
  const auto path = trace_interface(d, f);
  std::vector<char> pinned(d.num_vertices(), 0);
  Eigen::VectorXd arcs = f.values;
  for (int v : d.boundary_cycle()) pinned[v] = 1;
  for (int v : path.left_vertices) pinned[v] = 1, arcs[v] = -kCriticalLambda;
  for (int v : path.right_vertices) pinned[v] = 1, arcs[v] = kCriticalLambda;
  const DirichletProblem problem(d, pinned);
  const Eigen::VectorXd h_t = problem.extend(f.values);
  const Eigen::VectorXd f_t = problem.extend(arcs);
  for (int v : problem.free_vertices()) {
    EXPECT_NEAR(height_gap_statistic(d, f, path, v), h_t[v] - f_t[v], 1e-12);
  }
}

TEST(GraphDistance, RhombusCorner) {
  const auto d = build_rhombus_domain(5);
  const int corner = d.find({0, 0});
  const auto dist = graph_distance(d, {corner});
  EXPECT_EQ(dist[corner], 0);
  EXPECT_EQ(dist[d.find({5, 0})], 5);
  EXPECT_EQ(dist[d.find({5, 5})], 10);
  EXPECT_EQ(dist[d.find({3, 2})], 5);
}
