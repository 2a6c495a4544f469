#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Dense>

#include "gffsle/field.hpp"
#include "gffsle/interface.hpp"
#include "gffsle/stats.hpp"

using namespace gffsle;

namespace {

std::vector<double> boundary_from(const TgDomain& d, const std::function<double(Point)>& f) {
  std::vector<double> data;
  for (int v : d.boundary_cycle()) data.push_back(f(d.position(v)));
  return data;
}

// FEM interpolant of vertex values at p, located by brute force over triangles.
double interpolate(const TgDomain& d, const Eigen::VectorXd& c, Point p, Point* grad) {
  for (const auto& tri : d.triangles()) {
    const Point a = d.position(tri[0]), b = d.position(tri[1]), e = d.position(tri[2]);
    const double det = std::imag(std::conj(b - a) * (e - a));
    const double l1 = std::imag(std::conj(p - a) * (e - a)) / det;
    const double l2 = std::imag(std::conj(b - a) * (p - a)) / det;
    const double l0 = 1.0 - l1 - l2;
    if (l0 < -1e-12 || l1 < -1e-12 || l2 < -1e-12) continue;
    // gradient of the affine interpolant: solve on the triangle's two edges
    Eigen::Matrix2d m;
    m << (b - a).real(), (b - a).imag(), (e - a).real(), (e - a).imag();
    const Eigen::Vector2d g = m.inverse() * Eigen::Vector2d(c[tri[1]] - c[tri[0]], c[tri[2]] - c[tri[0]]);
    if (grad) *grad = {g[0], g[1]};
    return l0 * c[tri[0]] + l1 * c[tri[1]] + l2 * c[tri[2]];
  }
  if (grad) *grad = 0.0;
  return 0.0;
}

Eigen::MatrixXd dense_interior_inverse(const TgDomain& d) {
  const Eigen::MatrixXd l = Eigen::MatrixXd(dirichlet_form(d).matrix);
  const auto& in = d.interior_vertices();
  Eigen::MatrixXd block(in.size(), in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    for (std::size_t j = 0; j < in.size(); ++j) block(i, j) = l(in[i], in[j]);
  }
  return block.inverse();
}

}  // namespace

TEST(DirichletForm, ConstantHasZeroEnergy) {
  const auto d = build_rhombus_domain(5);
  const auto form = dirichlet_form(d);
  EXPECT_NEAR(form.energy(Eigen::VectorXd::Constant(d.num_vertices(), 3.7)), 0.0, 1e-12);
  const Eigen::VectorXd rows = form.matrix * Eigen::VectorXd::Ones(d.num_vertices());
  EXPECT_LT(rows.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(DirichletForm, LinearFunctionGivesArea) {
  const auto d = build_rhombus_domain(2);
  Eigen::VectorXd f(d.num_vertices());
  for (std::size_t v = 0; v < d.num_vertices(); ++v) f[v] = d.position(static_cast<int>(v)).real();
  const double area = d.num_triangles() * kSqrt3 / 4.0;
  EXPECT_NEAR(dirichlet_form(d).energy(f), area, 1e-12);
}

TEST(DirichletForm, SingleVertexIndicator) {
  const auto d = build_rhombus_domain(2);
  Eigen::VectorXd f = Eigen::VectorXd::Zero(d.num_vertices());
  f[d.interior_vertices().front()] = 1.0;
  EXPECT_NEAR(dirichlet_form(d).energy(f), 2.0 * kSqrt3, 1e-12);
}

TEST(DirichletForm, MatchesEdgeSum) {
  const auto d = build_rhombus_domain(4);
  Eigen::VectorXd f(d.num_vertices());
  for (std::size_t v = 0; v < d.num_vertices(); ++v) f[v] = std::sin(1.0 + 0.7 * v);
  double sum = 0.0;
  for (std::size_t v = 0; v < d.num_vertices(); ++v) {
    for (int w : d.neighbors(static_cast<int>(v))) {
      if (w <= static_cast<int>(v)) continue;
      const bool boundary_edge = d.triangle_left_of(static_cast<int>(v), w) < 0 || d.triangle_left_of(w, static_cast<int>(v)) < 0;
      sum += (boundary_edge ? 0.5 : 1.0) * kInteriorEdgeWeight * std::pow(f[v] - f[w], 2);
    }
  }
  EXPECT_NEAR(dirichlet_form(d).energy(f), sum, 1e-10);
}

TEST(HarmonicExtension, Constant) {
  const auto d = build_hexagon_domain(3);
  const auto h = harmonic_extension(d, std::vector<double>(d.boundary_cycle().size(), 1.25));
  for (std::size_t v = 0; v < d.num_vertices(); ++v) EXPECT_NEAR(h.values[v], 1.25, 1e-12);
}

TEST(HarmonicExtension, LinearIsDiscreteHarmonic) {
  const auto d = build_rhombus_domain(6);
  const auto h = harmonic_extension(d, boundary_from(d, [](Point p) { return p.real(); }));
  for (int v : d.interior_vertices()) EXPECT_NEAR(h.values[v], d.position(v).real(), 1e-10);
  for (std::size_t i = 0; i < d.boundary_cycle().size(); ++i) {
    EXPECT_EQ(h.values[d.boundary_cycle()[i]], h.boundary_data[i]);
  }
}

TEST(HarmonicExtension, SideTwoMeanOfNeighbours) {
  const auto d = build_rhombus_domain(2);
  const auto data = arc_boundary_data(d, kCriticalLambda);
  const auto h = harmonic_extension(d, data);
  const int v = d.interior_vertices().front();
  double mean = 0.0;
  for (int n : d.neighbors(v)) mean += h.values[n] / 6.0;
  EXPECT_NEAR(h.values[v], mean, 1e-14);
}

TEST(HarmonicExtension, RejectsWrongLength) {
  const auto d = build_rhombus_domain(3);
  EXPECT_THROW(harmonic_extension(d, {1.0, 2.0}), DomainError);
}

TEST(SampleDgff, BoundaryExactAndDeterministic) {
  const auto d = build_rhombus_domain(8);
  const auto data = arc_boundary_data(d, kCriticalLambda);
  const auto a = sample_dgff(d, data, 42);
  const auto b = sample_dgff(d, data, 42);
  const auto c = sample_dgff(d, data, 43);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NE(a.values, c.values);
  for (std::size_t i = 0; i < data.size(); ++i) EXPECT_EQ(a.values[d.boundary_cycle()[i]], data[i]);
  EXPECT_TRUE(a.values.allFinite());
}

TEST(SampleDgff, SingleVertexVariance) {
  const auto d = build_rhombus_domain(2);
  const DgffSampler sampler(d);
  const std::vector<double> zero(d.boundary_cycle().size(), 0.0);
  const int v = d.interior_vertices().front();
  stats::RunningStats sq;
  for (std::uint64_t i = 0; i < 100000; ++i) sq.push(std::pow(sampler.sample(zero, 9, i).values[v], 2));
  EXPECT_LT(std::abs(sq.mean() - kSqrt3 / 6.0), 3.0 * sq.std_error());
}

TEST(SampleDgff, SamplerMatchesFreeFunction) {
  const auto d = build_rhombus_domain(5);
  const auto data = arc_boundary_data(d, 0.3);
  EXPECT_EQ(DgffSampler(d).sample(data, 7, 0).values, sample_dgff(d, data, 7).values);
}

TEST(DiscreteGreen, SingleVertex) {
  const auto d = build_rhombus_domain(2);
  const int v = d.interior_vertices().front();
  EXPECT_NEAR(discrete_green(d, v, v), kSqrt3 / 6.0, 1e-14);
}

TEST(DiscreteGreen, ThreeVertexStripMatchesDenseInverse) {
  // a row of three interior sites with full hexagonal neighbourhoods
  std::vector<LatticeCoord> sites;
  for (int a = 0; a <= 4; ++a) sites.push_back({a, 0});
  for (int a = 0; a <= 3; ++a) sites.push_back({a, 1});
  for (int a = 1; a <= 4; ++a) sites.push_back({a, -1});
  const auto d = TgDomain::from_sites(sites);
  ASSERT_EQ(d.num_interior(), 3u);
  const auto inv = dense_interior_inverse(d);
  const auto& in = d.interior_vertices();
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_NEAR(discrete_green(d, in[i], in[j]), inv(i, j), 1e-12);
      EXPECT_DOUBLE_EQ(discrete_green(d, in[i], in[j]), discrete_green(d, in[j], in[i]));
    }
  }
}

TEST(DirichletProblem, GreenMatrixAndExtension) {
  const auto d = build_rhombus_domain(5);
  const DirichletProblem p(d);
  const auto inv = dense_interior_inverse(d);
  EXPECT_LT((p.green_matrix() - inv).cwiseAbs().maxCoeff(), 1e-12);

  std::vector<char> pinned(d.num_vertices(), 0);
  for (int v : d.boundary_cycle()) pinned[v] = 1;
  pinned[d.interior_vertices()[4]] = 1;
  EXPECT_THROW(DirichletProblem(d, std::vector<char>(d.num_vertices(), 0)), DomainError);
  const DirichletProblem q(d, pinned);
  EXPECT_EQ(q.num_free(), d.num_interior() - 1);
  Eigen::VectorXd vals = Eigen::VectorXd::Zero(d.num_vertices());
  vals[d.interior_vertices()[4]] = 2.0;
  const Eigen::VectorXd ext = q.extend(vals);
  EXPECT_EQ(ext[d.interior_vertices()[4]], 2.0);
  const Eigen::VectorXd lap = dirichlet_form(d).matrix * ext;
  for (int v : q.free_vertices()) EXPECT_NEAR(lap[v], 0.0, 1e-10);
}

TEST(ProjectFem, FixesPiecewiseAffineFunctions) {
  const auto d = build_rhombus_domain(4);
  Eigen::VectorXd c = Eigen::VectorXd::Zero(d.num_vertices());
  for (int v : d.interior_vertices()) c[v] = std::cos(0.3 * v);
  SmoothFunction f{[&](Point p) { return interpolate(d, c, p, nullptr); },
                   [&](Point p) {
                     Point g;
                     interpolate(d, c, p, &g);
                     return g;
                   }};
  const auto r = project_fem(f, d, PlanarMap::identity());
  EXPECT_LT(r.error, 1e-9 * r.norm);
  for (int v : d.interior_vertices()) EXPECT_NEAR(r.coefficients[v], c[v], 1e-9);
}

TEST(ProjectFem, ErrorShrinksOnNestedRefinement) {
  const Point center = build_rhombus_domain(4).centroid();
  const auto f = radial_bump(center, 1.2);
  double previous = 1e300;
  for (int n : {8, 16, 32, 64}) {
    const auto d = build_rhombus_domain(n, 0.5, 4.0 / n);
    const auto r = project_fem(f, d, PlanarMap::identity());
    EXPECT_LE(r.error, previous);
    previous = r.error;
  }
}

TEST(ProjectFem, RejectsFunctionsNotVanishingOnBoundary) {
  const auto d = build_rhombus_domain(4);
  const auto f = radial_bump(d.centroid(), 10.0);
  EXPECT_THROW(project_fem(f, d, PlanarMap::identity()), DomainError);
}

TEST(AddBump, IdentityAndInverse) {
  const auto d = build_rhombus_domain(10);
  const auto h = sample_dgff(d, arc_boundary_data(d, kCriticalLambda), 3);
  EXPECT_EQ(add_bump(h, d, Eigen::VectorXd::Zero(d.num_vertices())).values, h.values);
  const Eigen::VectorXd psi = vertex_bump(d, d.centroid(), 3.0, 0.8);
  const auto back = add_bump(add_bump(h, d, psi), d, -psi);
  EXPECT_LT((back.values - h.values).cwiseAbs().maxCoeff(), 1e-14);
  EXPECT_THROW(vertex_bump(d, d.centroid(), 50.0, 1.0), DomainError);
}

TEST(AddBump, ConstantShiftMatchesLevelTracer) {
  const auto d = build_rhombus_domain(12);
  const double c = 0.3;
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(d.num_vertices());
  for (int v : d.interior_vertices()) psi[v] = -c;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto h = sample_dgff(d, arc_boundary_data(d, kCriticalLambda), seed);
    const auto shifted = trace_interface(d, add_bump(h, d, psi));
    TraceOptions at_c;
    at_c.level = c;
    const auto level = trace_interface(d, h, at_c);
    EXPECT_EQ(shifted.crossed, level.crossed);
  }
}
