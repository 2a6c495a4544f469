#include "gffsle/localset.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <random>
#include <set>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "gffsle/interface.hpp"
#include "gffsle/parallel.hpp"
#include "gffsle/stats.hpp"

namespace gffsle {

namespace {

std::vector<double> resolve_boundary(const TgDomain& domain, const std::vector<double>& data, double lambda) {
  if (!data.empty()) return data;
  if (!(lambda > 0.0)) throw DomainError("lambda must be positive");
  return arc_boundary_data(domain, lambda);
}

// Cluster of `inside` vertices joined to `seeds`, plus its outer vertex boundary.
std::vector<char> grow_cluster(const FieldReader& h, const std::vector<int>& seeds,
                               const std::function<bool(double)>& inside) {
  const TgDomain& d = h.domain();
  std::vector<char> mask(d.num_vertices(), 0);
  std::deque<int> queue;
  for (int v : seeds) {
    mask[static_cast<std::size_t>(v)] = 1;
    queue.push_back(v);
  }
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int u : d.neighbors(v)) {
      if (u < 0 || mask[static_cast<std::size_t>(u)]) continue;
      mask[static_cast<std::size_t>(u)] = 1;
      // boundary vertices of the other arc stop the cluster
      if (d.is_interior(u) && inside(h(u))) queue.push_back(u);
    }
  }
  return mask;
}

}  // namespace

std::vector<char> SetRule::operator()(const TgDomain& domain, const Eigen::VectorXd& values, Rng* aux) const {
  if (randomized && aux == nullptr) throw DomainError("rule '" + name + "' needs an auxiliary seed");
  if (static_cast<std::size_t>(values.size()) != domain.num_vertices()) throw DomainError("rule: field size mismatch");
  auto mask = evaluator(FieldReader(domain, values), aux);
  if (mask.size() != domain.num_vertices()) throw DomainError("rule '" + name + "' returned a mask of the wrong size");
  return mask;
}

SetRule deterministic_rule(std::vector<int> vertices) {
  SetRule r;
  r.name = "deterministic";
  r.evaluator = [vertices = std::move(vertices)](const FieldReader& h, Rng*) {
    std::vector<char> mask(h.domain().num_vertices(), 0);
    for (int v : vertices) {
      if (v < 0 || static_cast<std::size_t>(v) >= mask.size()) throw DomainError("deterministic_rule: vertex out of range");
      mask[static_cast<std::size_t>(v)] = 1;
    }
    return mask;
  };
  return r;
}

SetRule negative_set_rule() {
  SetRule r;
  r.name = "negative-set";
  r.evaluator = [](const FieldReader& h, Rng*) {
    std::vector<char> mask(h.domain().num_vertices(), 0);
    for (std::size_t v = 0; v < mask.size(); ++v) mask[v] = h(static_cast<int>(v)) < 0.0;
    return mask;
  };
  return r;
}

SetRule boundary_cluster_rule(Arc arc, double level) {
  SetRule r;
  r.name = arc == Arc::Minus ? "minus-cluster" : "plus-cluster";
  r.evaluator = [arc, level](const FieldReader& h, Rng*) {
    if (arc == Arc::Minus) return grow_cluster(h, h.domain().arc_minus(), [level](double x) { return x < level; });
    return grow_cluster(h, h.domain().arc_plus(), [level](double x) { return x > level; });
  };
  return r;
}

SetRule random_level_cluster_rule(double spread) {
  if (!(spread >= 0.0)) throw DomainError("random_level_cluster_rule: spread must be nonnegative");
  SetRule r;
  r.name = "random-level-cluster";
  r.randomized = true;
  r.evaluator = [spread](const FieldReader& h, Rng* aux) {
    const double level = std::uniform_real_distribution<double>(-spread, spread)(*aux);
    return grow_cluster(h, h.domain().arc_minus(), [level](double x) { return x < level; });
  };
  return r;
}

SetRule exploration_rule(std::size_t max_steps) {
  SetRule r;
  r.name = "exploration";
  r.evaluator = [max_steps](const FieldReader& h, Rng*) {
    InterfaceExplorer walk(h.domain(), [&h](int v) {
      const double x = h(v);
      if (x == 0.0) throw DomainError("exploration_rule: field value exactly 0");
      return x > 0.0;
    });
    walk.finish(max_steps);
    std::vector<char> mask(h.domain().num_vertices(), 0);
    for (int v : walk.revealed()) mask[static_cast<std::size_t>(v)] = 1;
    return mask;
  };
  return r;
}

std::vector<int> audit_reads(const SetRule& rule, const TgDomain& domain, const Eigen::VectorXd& values, Rng* aux) {
  if (rule.randomized && aux == nullptr) throw DomainError("rule '" + rule.name + "' needs an auxiliary seed");
  std::vector<int> trace;
  const auto mask = rule.evaluator(FieldReader(domain, values, &trace), aux);
  std::set<int> outside;
  for (int v : trace) {
    if (!mask[static_cast<std::size_t>(v)]) outside.insert(v);
  }
  return {outside.begin(), outside.end()};
}

namespace {

std::vector<char> pinned_mask(const TgDomain& domain, const std::vector<int>& set) {
  std::vector<char> pinned(domain.num_vertices(), 0);
  for (int v : domain.boundary_cycle()) pinned[static_cast<std::size_t>(v)] = 1;
  for (int v : set) {
    if (v < 0 || static_cast<std::size_t>(v) >= pinned.size()) throw DomainError("condition_on_set: vertex out of range");
    pinned[static_cast<std::size_t>(v)] = 1;
  }
  return pinned;
}

}  // namespace

ConditionalLaw::ConditionalLaw(const TgDomain& domain, const std::vector<double>& boundary_data,
                               const std::vector<int>& set, const std::vector<double>& values)
    : n_(domain.num_vertices()), problem_(domain, pinned_mask(domain, set)) {
  if (values.size() != set.size()) throw DomainError("condition_on_set: one value per vertex of C is required");
  if (boundary_data.size() != domain.boundary_cycle().size()) {
    throw DomainError("condition_on_set: boundary_data must have one entry per boundary vertex");
  }
  Eigen::VectorXd data = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
  for (std::size_t i = 0; i < boundary_data.size(); ++i) data[domain.boundary_cycle()[i]] = boundary_data[i];
  std::vector<char> seen(n_, 0);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const auto v = static_cast<std::size_t>(set[i]);
    if (!std::isfinite(values[i])) throw DomainError("condition_on_set: values must be finite");
    if (seen[v]++) throw DomainError("condition_on_set: vertex listed twice");
    if (!domain.is_interior(set[i]) && data[set[i]] != values[i]) {
      throw DomainError("condition_on_set: value on a boundary vertex disagrees with the boundary data");
    }
    data[set[i]] = values[i];
  }
  mean_ = problem_.extend(data);
}

double ConditionalLaw::covariance(int u, int v) const {
  if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n_ || static_cast<std::size_t>(v) >= n_) {
    throw DomainError("covariance: vertex out of range");
  }
  if (!problem_.is_free(u) || !problem_.is_free(v)) return 0.0;
  return problem_.green(u, v);
}

Eigen::MatrixXd ConditionalLaw::covariance_matrix() const {
  const auto n = static_cast<Eigen::Index>(n_);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  const auto& free = problem_.free_vertices();
  if (free.empty()) return out;
  const Eigen::MatrixXd g = problem_.green_matrix();
  for (std::size_t i = 0; i < free.size(); ++i) {
    for (std::size_t j = 0; j < free.size(); ++j) {
      out(free[i], free[j]) = g(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return out;
}

ConditionalLaw condition_on_set(const TgDomain& domain, const std::vector<double>& boundary_data,
                                const std::vector<int>& set, const std::vector<double>& values) {
  return ConditionalLaw(domain, boundary_data, set, values);
}

namespace {

// E[h_B | h off B] = M h_N with N the outer neighbours of B; residual sum has variance s2.
struct TestedSet {
  std::vector<int> vertices;
  std::vector<int> outer;
  Eigen::MatrixXd weights;  // |B| x |N|
  double s2 = 0.0;
};

TestedSet make_tested_set(const TgDomain& domain, const Eigen::SparseMatrix<double>& lap, std::vector<int> b) {
  TestedSet t;
  std::sort(b.begin(), b.end());
  t.vertices = b;
  std::set<int> outer;
  for (int v : b) {
    for (int u : domain.neighbors(v)) {
      if (u >= 0 && !std::binary_search(b.begin(), b.end(), u)) outer.insert(u);
    }
  }
  t.outer.assign(outer.begin(), outer.end());
  const auto nb = static_cast<Eigen::Index>(b.size()), nn = static_cast<Eigen::Index>(t.outer.size());
  Eigen::MatrixXd lbb(nb, nb), lbn(nb, nn);
  for (Eigen::Index i = 0; i < nb; ++i) {
    for (Eigen::Index j = 0; j < nb; ++j) lbb(i, j) = lap.coeff(b[i], b[j]);
    for (Eigen::Index j = 0; j < nn; ++j) lbn(i, j) = lap.coeff(b[i], t.outer[j]);
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(lbb);
  t.weights = -llt.solve(lbn);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(nb);
  t.s2 = ones.dot(llt.solve(ones));
  return t;
}

std::vector<TestedSet> tested_sets(const TgDomain& domain, bool pairs) {
  const auto lap = dirichlet_form(domain).matrix;
  std::vector<TestedSet> out;
  for (int v : domain.interior_vertices()) out.push_back(make_tested_set(domain, lap, {v}));
  if (pairs) {
    for (int v : domain.interior_vertices()) {
      for (int u : domain.neighbors(v)) {
        if (u > v && domain.is_interior(u)) out.push_back(make_tested_set(domain, lap, {v, u}));
      }
    }
  }
  return out;
}

std::string set_label(const std::vector<int>& b) {
  std::string s = "{";
  for (std::size_t i = 0; i < b.size(); ++i) s += (i ? "," : "") + std::to_string(b[i]);
  return s + "}";
}

// z-score of the covariance of x with an indicator; 0 when the indicator is constant.
struct IndicatorTest {
  double z = 0.0;
  double se = 0.0;
};

IndicatorTest indicator_covariance(const std::vector<char>& ind, const std::vector<double>& x) {
  const std::size_t n = ind.size();
  double p = 0.0;
  for (char c : ind) p += c;
  p /= static_cast<double>(n);
  if (p == 0.0 || p == 1.0) return {};
  stats::RunningStats s;
  for (std::size_t i = 0; i < n; ++i) s.push((ind[i] - p) * x[i]);
  const double se = s.std_error();
  return {se > 0.0 ? s.mean() / se : 0.0, se};
}

}  // namespace

Report test_locality(const SetRule& rule, const TgDomain& domain, std::size_t n_samples, std::uint64_t seed,
                     const LocalityOptions& options) {
  if (n_samples < 2) throw DomainError("test_locality: at least two samples are required");
  Report report;
  report.name = "locality";
  report.details["rule"] = rule.name;
  report.details["samples"] = n_samples;
  const auto boundary = resolve_boundary(domain, options.boundary_data, options.lambda);
  const DgffSampler sampler(domain);
  const Eigen::VectorXd mean = sampler.mean(boundary);
  const auto sets = tested_sets(domain, options.test_pairs);
  const std::size_t nb = sets.size();

  std::vector<char> empty(n_samples * nb);
  std::vector<double> resid(n_samples * nb);
  parallel_for(n_samples, options.threads, [&](std::size_t i) {
    Rng rng = make_rng(seed, i);
    const FieldSample h = sampler.sample(mean, rng);
    Rng aux = make_rng(stream_seed(seed, i), 2);
    const auto a = rule(domain, h.values, &aux);
    for (std::size_t k = 0; k < nb; ++k) {
      const auto& t = sets[k];
      bool hit = false;
      Eigen::VectorXd hn(static_cast<Eigen::Index>(t.outer.size()));
      for (std::size_t j = 0; j < t.outer.size(); ++j) hn[static_cast<Eigen::Index>(j)] = h.values[t.outer[j]];
      const Eigen::VectorXd cm = t.weights * hn;
      double r = 0.0;
      for (std::size_t j = 0; j < t.vertices.size(); ++j) {
        hit = hit || a[static_cast<std::size_t>(t.vertices[j])];
        r += h.values[t.vertices[j]] - cm[static_cast<Eigen::Index>(j)];
      }
      empty[i * nb + k] = !hit;
      resid[i * nb + k] = r;
    }
  });

  auto& per = report.details["sets"] = nlohmann::json::array();
  std::size_t starved = 0;
  std::vector<char> ind(n_samples);
  std::vector<double> lin(n_samples), quad(n_samples);
  for (std::size_t k = 0; k < nb; ++k) {
    std::size_t disjoint = 0;
    for (std::size_t i = 0; i < n_samples; ++i) {
      ind[i] = empty[i * nb + k];
      disjoint += static_cast<std::size_t>(ind[i]);
      // unit-variance channels
      const double r = resid[i * nb + k] / std::sqrt(sets[k].s2);
      lin[i] = r;
      quad[i] = r * r - 1.0;
    }
    const std::size_t minority = std::min(disjoint, n_samples - disjoint);
    if (minority > 0 && minority < 20) ++starved;
    const auto l = indicator_covariance(ind, lin), q = indicator_covariance(ind, quad);
    const std::string label = set_label(sets[k].vertices);
    report.add("B=" + label + " linear", l.z, l.se, options.threshold, std::abs(l.z) < options.threshold);
    report.add("B=" + label + " quadratic", q.z, q.se, options.threshold, std::abs(q.z) < options.threshold);
    per.push_back({{"B", sets[k].vertices}, {"disjoint", disjoint}, {"z_linear", l.z}, {"z_quadratic", q.z}});
  }
  if (starved > 0) {
    report.details["warning"] = std::to_string(starved) + " tested sets have fewer than 20 samples on one side; widen the sample";
  }
  return report;
}

CcupSampler::CcupSampler(SetRule first, SetRule second, const TgDomain& domain, std::uint64_t seed,
                         const LocalityOptions& options)
    : first_(std::move(first)),
      second_(std::move(second)),
      domain_(&domain),
      seed_(seed),
      boundary_(resolve_boundary(domain, options.boundary_data, options.lambda)),
      sampler_(domain) {
  union_.name = first_.name + " ccup " + second_.name;
  union_.randomized = true;
  union_.evaluator = [a = first_, b = second_](const FieldReader& h, Rng* aux) {
    // independent auxiliary streams for the two sets
    Rng ra((*aux)()), rb((*aux)());
    auto m = a.evaluator(h, &ra);
    const auto mb = b.evaluator(h, &rb);
    for (std::size_t v = 0; v < m.size(); ++v) m[v] = m[v] || mb[v];
    return m;
  };
}

CcupDraw CcupSampler::sample(std::uint64_t index) const {
  CcupDraw d;
  d.field = sampler_.sample(boundary_, seed_, index);
  Rng aux = make_rng(stream_seed(seed_, index), 2);
  Rng ra(aux()), rb(aux());
  d.first = first_(*domain_, d.field.values, &ra);
  d.second = second_(*domain_, d.field.values, &rb);
  d.both = d.first;
  for (std::size_t v = 0; v < d.both.size(); ++v) d.both[v] = d.both[v] || d.second[v];
  return d;
}

CcupResult ccup_union(const SetRule& first, const SetRule& second, const TgDomain& domain, std::size_t n_samples,
                      std::uint64_t seed, const LocalityOptions& options) {
  CcupResult out;
  out.first_gate = test_locality(first, domain, n_samples, seed, options);
  if (!out.first_gate.passed()) throw DomainError("ccup_union: rule '" + first.name + "' fails the locality gate");
  out.second_gate = test_locality(second, domain, n_samples, seed + 1, options);
  if (!out.second_gate.passed()) throw DomainError("ccup_union: rule '" + second.name + "' fails the locality gate");
  const CcupSampler sampler(first, second, domain, seed, options);
  out.union_report = test_locality(sampler.union_rule(), domain, n_samples, seed + 2, options);
  out.union_report.name = "ccup-locality";
  return out;
}

Report conditional_mean_harmonicity(const SetRule& rule, const TgDomain& domain, std::size_t n_samples,
                                    std::uint64_t seed, const HarmonicityOptions& options) {
  Report report;
  report.name = "harmonicity";
  report.details["rule"] = rule.name;
  report.details["samples"] = n_samples;
  const auto boundary = resolve_boundary(domain, options.boundary_data, options.lambda);
  const DgffSampler sampler(domain);
  const Eigen::VectorXd mean = sampler.mean(boundary);
  const auto& interior = domain.interior_vertices();
  const std::size_t ni = interior.size(), nv = domain.num_vertices();

  struct Stratum {
    std::size_t hits = 0;
    std::vector<stats::RunningStats> defect;
  };
  std::map<std::vector<char>, Stratum> strata;
  constexpr std::size_t kBlock = 8192;
  std::vector<std::vector<char>> masks(kBlock);
  std::vector<double> defects(kBlock * ni);
  for (std::size_t start = 0; start < n_samples; start += kBlock) {
    const std::size_t len = std::min(kBlock, n_samples - start);
    parallel_for(len, options.threads, [&](std::size_t j) {
      const std::size_t i = start + j;
      Rng rng = make_rng(seed, i);
      const FieldSample h = sampler.sample(mean, rng);
      Rng aux = make_rng(stream_seed(seed, i), 2);
      masks[j] = rule(domain, h.values, &aux);
      for (std::size_t k = 0; k < ni; ++k) {
        const int v = interior[k];
        double s = 0.0;
        for (int u : domain.neighbors(v)) s += h.values[u];
        defects[j * ni + k] = h.values[v] - s / 6.0;
      }
    });
    for (std::size_t j = 0; j < len; ++j) {
      auto& st = strata[masks[j]];
      if (st.defect.empty()) st.defect.resize(ni);
      ++st.hits;
      for (std::size_t k = 0; k < ni; ++k) st.defect[k].push(defects[j * ni + k]);
    }
  }

  std::size_t tested_strata = 0;
  auto& list = report.details["strata"] = nlohmann::json::array();
  for (const auto& [mask, st] : strata) {
    if (st.hits < options.min_hits) continue;
    ++tested_strata;
    std::vector<int> members;
    for (std::size_t v = 0; v < nv; ++v) {
      if (mask[v] && domain.is_interior(static_cast<int>(v))) members.push_back(static_cast<int>(v));
    }
    std::size_t probes = 0;
    for (std::size_t k = 0; k < ni; ++k) {
      const int v = interior[k];
      if (mask[static_cast<std::size_t>(v)]) continue;
      bool adjacent = false;
      // boundary members of C carry known data and stay in the stencil
      for (int u : domain.neighbors(v)) adjacent = adjacent || (mask[static_cast<std::size_t>(u)] && domain.is_interior(u));
      if (adjacent) continue;
      const auto& s = st.defect[k];
      const double se = s.std_error();
      const double z = se > 0.0 ? s.mean() / se : 0.0;
      report.add("C" + std::to_string(tested_strata - 1) + "=" + set_label(members) + " v=" + std::to_string(v), z, se,
                 options.threshold,
                 std::abs(z) < options.threshold);
      ++probes;
    }
    list.push_back({{"stratum", tested_strata - 1}, {"interior_members", members}, {"hits", st.hits}, {"probes", probes}});
  }
  report.details["distinct_sets"] = strata.size();
  report.details["tested_strata"] = tested_strata;
  if (report.checks.empty()) report.details["warning"] = "undersampled: no stratum reached the hit threshold with a testable vertex";
  return report;
}

}  // namespace gffsle
