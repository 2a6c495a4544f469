#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gffsle/continuum.hpp"
#include "gffsle/stats.hpp"

using namespace gffsle;

namespace {

EnsembleOptions small_ensemble(std::size_t runs, double lambda = kCriticalLambda) {
  EnsembleOptions o;
  o.runs = runs;
  o.delta = 1e-3;
  o.seed = 5;
  o.lambda = lambda;
  return o;
}

const Check* find_check(const Report& r, const std::string& name) {
  for (const auto& c : r.checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

}  // namespace

TEST(GreenH, ClosedFormAndSymmetry) {
  const double expected = std::log(3.0) / (2.0 * kPi);
  EXPECT_NEAR(green_h({0, 1}, {0, 2}), expected, 1e-15);
  EXPECT_NEAR(expected, 0.1748495, 1e-7);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-2.0, 2.0), v(0.01, 3.0);
  for (int k = 0; k < 100; ++k) {
    const Point x{u(rng), v(rng)}, y{u(rng), v(rng)};
    EXPECT_DOUBLE_EQ(green_h(x, y), green_h(y, x));
    EXPECT_GT(green_h(x, y), 0.0);
  }
  EXPECT_LT(green_h({0, 1}, {0.5, 1e-9}), 1e-8);
  EXPECT_EQ(green_h({0, 1}, {0.5, 0.0}), 0.0);
  EXPECT_THROW(green_h({0, 1}, {0, 1}), DomainError);
  EXPECT_THROW(green_h({0, 1}, {0, -1}), DomainError);
}

TEST(HtEval, AxisAndBoundaryValues) {
  const double l = kCriticalLambda;
  EXPECT_NEAR(h_t_eval({0, 1}, 0.0, l), 0.0, 1e-15);
  EXPECT_NEAR(h_t_eval({3.0, 1e-9}, 0.0, l), l, 1e-9);
  EXPECT_NEAR(h_t_eval({-3.0, 1e-9}, 0.0, l), -l, 1e-9);
  EXPECT_EQ(h_t_eval({2.0, 0.0}, 1.0, l), l);
  EXPECT_EQ(h_t_eval({0.5, 0.0}, 1.0, l), -l);
  EXPECT_THROW(h_t_eval({1.0, 0.0}, 1.0, l), DomainError);
  EXPECT_THROW(h_t_eval({1.0, -0.1}, 0.0, l), DomainError);
}

TEST(Energy, TimeZeroValues) {
  LatticeTestFunction single;
  single.points = {{0, 1}};
  single.weights = {1.0};
  EXPECT_EQ(energy(single), 0.0);
  EXPECT_NEAR(energy(two_point_test_function()), 2.0 * std::log(3.0) / (2.0 * kPi), 1e-14);
  // the Renormalized diagonal at time zero is log(2 Im z)/(2 pi) per unit mass
  EXPECT_NEAR(energy(single, SelfEnergy::Renormalized), std::log(2.0) / (2.0 * kPi), 1e-14);
}

TEST(Energy, NonincreasingAlongSle4) {
  const auto rho = two_point_test_function();
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto w = sample_sle4_driving(0.3, 1e-4, seed);
    SlitFlow flow(w, rho.points);
    double previous = energy(rho);
    std::vector<Point> g(2), dg(2);
    while (flow.step()) {
      for (std::size_t i = 0; i < 2; ++i) g[i] = flow.g(i), dg[i] = flow.derivative(i);
      const double e = energy(rho, g, dg, flow.driving());
      EXPECT_LE(e, previous + 1e-12);
      previous = e;
    }
  }
}

TEST(TestFunctions, BumpAndVertexFunctions) {
  const auto bump = bump_test_function({0.0, 2.0}, 0.5, 0.05);
  EXPECT_NEAR(bump.total_mass(), 1.0, 1e-12);
  for (Point p : bump.points) {
    EXPECT_GT(p.imag(), 0.0);
    EXPECT_LE(std::abs(p - Point{0.0, 2.0}), 0.5);
  }
  EXPECT_THROW(bump_test_function({0.0, 0.3}, 0.5, 0.05), DomainError);

  const auto d = build_box_domain(8.0, 4.0, 0.5);
  const auto rho = vertex_test_function(d, {1.0, 2.0}, 1.0);
  EXPECT_NEAR(rho.total_mass(), 1.0, 1e-12);
  EXPECT_NEAR(rho.cell_radius, 0.5 * std::exp(-kLatticeGreenConstant), 1e-15);
  Eigen::VectorXd ones = Eigen::VectorXd::Ones(d.num_vertices());
  EXPECT_NEAR(rho.pairing(ones), 1.0, 1e-12);
}

TEST(SelfEnergy, Modes) {
  const Point g{0.3, 0.8}, dg{1.5, 0.2};
  EXPECT_EQ(self_energy(g, dg, 0.1, SelfEnergy::Exclude), 0.0);
  const double ren = std::log(2.0 * g.imag() / std::abs(dg)) / (2.0 * kPi);
  EXPECT_NEAR(self_energy(g, dg, 0.1, SelfEnergy::Renormalized), ren, 1e-15);
  EXPECT_NEAR(self_energy(g, dg, 0.1, SelfEnergy::Cell), ren - std::log(0.1) / (2.0 * kPi), 1e-15);
}

TEST(Martingale, DegenerateCheckpointPasses) {
  const auto r = verify_height_martingale({0, 1}, {0.0}, small_ensemble(10));
  EXPECT_TRUE(r.passed());
}

TEST(Martingale, SmallEnsemblePasses) {
  const auto r = verify_height_martingale({0, 1}, {0.0, 0.05, 0.1}, small_ensemble(1000));
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.checks.size(), 4u);
}

TEST(Qv, ZeroHorizonIsTrivial) {
  const auto r = verify_qv_relation({0, 1}, {0, 1}, 0.0, small_ensemble(10));
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.details["mean_green_drop"].get<double>(), 0.0);
}

TEST(Qv, WrongLambdaFails) {
  const auto good = verify_qv_relation({0, 1}, {0, 1}, 0.2, small_ensemble(2000));
  const auto bad = verify_qv_relation({0, 1}, {0, 1}, 0.2, small_ensemble(2000, 2.0 * kCriticalLambda));
  EXPECT_TRUE(good.passed());
  EXPECT_FALSE(bad.passed());
  EXPECT_GE(std::abs(find_check(bad, "residual z-score")->statistic), 3.0);
}

TEST(EnergyClock, ZeroHorizonIsEmpty) {
  const auto r = verify_energy_clock(two_point_test_function(), 0.0, small_ensemble(10));
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.checks.size(), 1u);
}

TEST(EnergyClock, SmallEnsemble) {
  const auto r = verify_energy_clock(two_point_test_function(), 0.2, small_ensemble(2000));
  EXPECT_TRUE(r.passed());
}

TEST(Coupling, DeterministicAndLeftSideNearMinusLambda) {
  CouplingOptions o;
  const CouplingBuilder builder(o);
  const auto a = builder.sample(3, 0);
  const auto b = builder.sample(3, 0);
  EXPECT_EQ(a.field.values, b.field.values);
  EXPECT_EQ(a.driving.values, b.driving.values);

  const auto& d = builder.domain();
  int far_left = -1;
  for (int v : d.interior_vertices()) {
    const Point p = d.position(v);
    if (p.real() < -6.5 && p.imag() < 1.0 && (far_left < 0 || p.real() < d.position(far_left).real())) far_left = v;
  }
  ASSERT_GE(far_left, 0);
  stats::RunningStats s;
  for (std::uint64_t i = 0; i < 200; ++i) s.push(builder.sample(4, i).field.values[far_left]);
  EXPECT_LT(std::abs(s.mean() + kCriticalLambda), 0.1 * kCriticalLambda + 3.0 * s.std_error());
}

TEST(Coupling, RejectsBadOptions) {
  CouplingOptions o;
  o.horizon = 0.0;
  EXPECT_THROW(CouplingBuilder{o}, DomainError);
}
