#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "gffsle/localset.hpp"

using namespace gffsle;

namespace {

double max_abs_z(const Report& r) {
  double z = 0.0;
  for (const auto& c : r.checks) z = std::max(z, std::abs(c.statistic));
  return z;
}

std::vector<int> mask_members(const std::vector<char>& mask) {
  std::vector<int> out;
  for (std::size_t v = 0; v < mask.size(); ++v) {
    if (mask[v]) out.push_back(static_cast<int>(v));
  }
  return out;
}

}  // namespace

TEST(ConditionalLaw, AllInteriorIsDegenerate) {
  const auto d = build_rhombus_domain(4);
  const auto data = arc_boundary_data(d, kCriticalLambda);
  std::vector<double> values;
  for (int v : d.interior_vertices()) values.push_back(0.1 * v - 0.5);
  const auto law = condition_on_set(d, data, d.interior_vertices(), values);
  for (std::size_t k = 0; k < values.size(); ++k) EXPECT_EQ(law.mean()[d.interior_vertices()[k]], values[k]);
  EXPECT_EQ(law.covariance_matrix().cwiseAbs().maxCoeff(), 0.0);
}

TEST(ConditionalLaw, EmptySetIsTheDgff) {
  const auto d = build_rhombus_domain(5);
  const auto data = arc_boundary_data(d, kCriticalLambda);
  const auto law = condition_on_set(d, data, {}, {});
  const auto h = harmonic_extension(d, data);
  EXPECT_LT((law.mean() - h.values).cwiseAbs().maxCoeff(), 1e-12);
  for (int u : d.interior_vertices()) {
    for (int v : d.interior_vertices()) EXPECT_NEAR(law.covariance(u, v), discrete_green(d, u, v), 1e-12);
  }
}

TEST(ConditionalLaw, SingleVertexDomain) {
  const auto d = build_rhombus_domain(2);
  const int v = d.interior_vertices().front();
  const auto law = condition_on_set(d, arc_boundary_data(d, 1.0), {v}, {0.7});
  EXPECT_EQ(law.mean()[v], 0.7);
  EXPECT_EQ(law.covariance(v, v), 0.0);
}

TEST(ConditionalLaw, SchurComplementMarkov) {
  // conditioning on a separating set decouples the two sides exactly
  const auto d = build_rhombus_domain(6);
  std::vector<int> set;
  for (int v : d.interior_vertices()) {
    if (d.coords()[v].a == 3) set.push_back(v);
  }
  const auto law = condition_on_set(d, arc_boundary_data(d, kCriticalLambda), set, std::vector<double>(set.size(), 0.2));
  for (int u : d.interior_vertices()) {
    for (int v : d.interior_vertices()) {
      if ((d.coords()[u].a - 3) * (d.coords()[v].a - 3) < 0) EXPECT_NEAR(law.covariance(u, v), 0.0, 1e-12);
    }
  }
}

TEST(ConditionalLaw, RejectsMismatchedValues) {
  const auto d = build_rhombus_domain(4);
  EXPECT_THROW(condition_on_set(d, arc_boundary_data(d, 1.0), {d.interior_vertices()[0]}, {}), DomainError);
}

TEST(SetRules, RandomizedRuleNeedsGenerator) {
  const auto d = build_rhombus_domain(4);
  const auto h = sample_dgff(d, arc_boundary_data(d, kCriticalLambda), 1);
  const auto rule = random_level_cluster_rule(0.3);
  EXPECT_THROW(rule(d, h.values), DomainError);
  Rng aux = make_rng(1);
  EXPECT_EQ(rule(d, h.values, &aux).size(), d.num_vertices());
}

TEST(SetRules, AlgorithmicLocalityAudit) {
  const auto d = build_rhombus_domain(6);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto h = sample_dgff(d, arc_boundary_data(d, kCriticalLambda), seed);
    EXPECT_TRUE(audit_reads(boundary_cluster_rule(Arc::Minus), d, h.values).empty());
    EXPECT_TRUE(audit_reads(boundary_cluster_rule(Arc::Plus, 0.3), d, h.values).empty());
    EXPECT_TRUE(audit_reads(exploration_rule(10), d, h.values).empty());
    EXPECT_TRUE(audit_reads(deterministic_rule({d.interior_vertices()[3]}), d, h.values).empty());
  }
  // {h < 0} reads every vertex, including those it leaves out
  bool leaked = false;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto h = sample_dgff(d, arc_boundary_data(d, kCriticalLambda), seed);
    leaked |= !audit_reads(negative_set_rule(), d, h.values).empty();
  }
  EXPECT_TRUE(leaked);
}

TEST(SetRules, MinusClusterContainsMinusArc) {
  const auto d = build_rhombus_domain(6);
  const auto h = sample_dgff(d, arc_boundary_data(d, kCriticalLambda), 4);
  const auto mask = boundary_cluster_rule(Arc::Minus)(d, h.values);
  for (int v : d.arc_minus()) EXPECT_TRUE(mask[v]);
  // outer boundary vertices are positive or on the plus arc
  for (int v : mask_members(mask)) {
    if (d.is_interior(v) && h.values[v] > 0.0) {
      bool touches = false;
      for (int n : d.neighbors(v)) touches |= n >= 0 && mask[n] && (d.in_arc_minus(n) || h.values[n] < 0.0);
      EXPECT_TRUE(touches);
    }
  }
}

TEST(Locality, DeterministicPasses) {
  const auto d = build_rhombus_domain(4);
  const auto r = test_locality(deterministic_rule({d.interior_vertices()[0], d.interior_vertices()[4]}), d, 5000, 1);
  EXPECT_TRUE(r.passed());
}

TEST(Locality, NegativeSetFails) {
  const auto d = build_rhombus_domain(4);
  const auto r = test_locality(negative_set_rule(), d, 20000, 1);
  EXPECT_FALSE(r.passed());
  EXPECT_GE(max_abs_z(r), 4.0);
}

TEST(Locality, BoundaryClusterPasses) {
  const auto d = build_rhombus_domain(4);
  const auto r = test_locality(boundary_cluster_rule(Arc::Minus), d, 20000, 1);
  EXPECT_TRUE(r.passed()) << r.to_json().dump(1);
}

TEST(Ccup, SameDeterministicSet) {
  const auto d = build_rhombus_domain(4);
  const std::vector<int> s{d.interior_vertices()[1], d.interior_vertices()[2]};
  const CcupSampler sampler(deterministic_rule(s), deterministic_rule(s), d, 3);
  const auto draw = sampler.sample(0);
  EXPECT_EQ(draw.both, draw.first);
  EXPECT_EQ(mask_members(draw.both), s);
  const auto res = ccup_union(deterministic_rule(s), deterministic_rule(s), d, 5000, 3);
  EXPECT_TRUE(res.passed());
}

TEST(Ccup, DisjointArcClustersPass) {
  const auto d = build_rhombus_domain(4);
  const auto res = ccup_union(boundary_cluster_rule(Arc::Minus, -kCriticalLambda),
                              boundary_cluster_rule(Arc::Plus, kCriticalLambda), d, 20000, 7);
  EXPECT_TRUE(res.first_gate.passed());
  EXPECT_TRUE(res.second_gate.passed());
  EXPECT_TRUE(res.passed());
  const CcupSampler sampler(boundary_cluster_rule(Arc::Minus), boundary_cluster_rule(Arc::Plus), d, 7);
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto draw = sampler.sample(i);
    for (std::size_t v = 0; v < d.num_vertices(); ++v) EXPECT_EQ(draw.both[v], draw.first[v] || draw.second[v]);
  }
}

TEST(Ccup, GateRejectsNonLocalRule) {
  const auto d = build_rhombus_domain(4);
  EXPECT_THROW(ccup_union(boundary_cluster_rule(Arc::Minus), negative_set_rule(), d, 20000, 2), DomainError);
}

TEST(Harmonicity, DeterministicSetIsExact) {
  const auto d = build_rhombus_domain(4);
  const std::vector<int> c{d.interior_vertices()[0]};
  const auto r = conditional_mean_harmonicity(deterministic_rule(c), d, 20000, 1);
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.details["distinct_sets"].get<std::size_t>(), 1u);
  // vertices next to C are never tested
  for (const auto& check : r.checks) {
    const int v = std::stoi(check.name.substr(check.name.rfind("v=") + 2));
    for (int n : d.neighbors(v)) EXPECT_NE(n, c.front());
    EXPECT_NE(v, c.front());
  }
}

TEST(Harmonicity, UndersampledWarns) {
  const auto d = build_rhombus_domain(4);
  const auto r = conditional_mean_harmonicity(negative_set_rule(), d, 50, 1);
  EXPECT_TRUE(r.details.contains("warning"));
}
