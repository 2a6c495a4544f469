#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gffsle/field.hpp"
#include "gffsle/lattice.hpp"
#include "gffsle/report.hpp"
#include "gffsle/rng.hpp"

namespace gffsle {

/// Field access for set rules. Every interior read is recorded when a trace is
/// attached, which is what the algorithmic-locality audit inspects.
class FieldReader {
 public:
  FieldReader(const TgDomain& domain, const Eigen::VectorXd& values, std::vector<int>* trace = nullptr)
      : domain_(&domain), values_(&values), trace_(trace) {}
  double operator()(int v) const {
    if (trace_ && domain_->is_interior(v)) trace_->push_back(v);
    return (*values_)[v];
  }
  const TgDomain& domain() const { return *domain_; }

 private:
  const TgDomain* domain_;
  const Eigen::VectorXd* values_;
  std::vector<int>* trace_;
};

/// A random vertex set A as a function of the field (and, for randomized rules,
/// of an auxiliary generator independent of it).
struct SetRule {
  std::string name;
  std::function<std::vector<char>(const FieldReader&, Rng*)> evaluator;
  bool randomized = false;

  /// Membership mask over all vertices. Throws DomainError when a randomized
  /// rule gets no generator.
  std::vector<char> operator()(const TgDomain& domain, const Eigen::VectorXd& values, Rng* aux = nullptr) const;
};

/// A fixed set.
SetRule deterministic_rule(std::vector<int> vertices);
/// {v : h(v) < 0}. Not local.
SetRule negative_set_rule();
enum class Arc { Minus, Plus };
/// The cluster of {h < level} (Minus) or {h > level} (Plus) joined to that
/// boundary arc, together with its outer vertex boundary.
SetRule boundary_cluster_rule(Arc arc, double level = 0.0);
/// boundary_cluster_rule(Minus, U) with U uniform on [-spread, spread] drawn
/// from the auxiliary generator.
SetRule random_level_cluster_rule(double spread);
/// Vertices revealed by the interface exploration from x, stopped after
/// `max_steps` triangles (or at y).
SetRule exploration_rule(std::size_t max_steps);

/// Interior vertices read by `rule` on this field that lie outside the set it
/// returned; empty for an algorithmically local rule.
std::vector<int> audit_reads(const SetRule& rule, const TgDomain& domain, const Eigen::VectorXd& values,
                             Rng* aux = nullptr);

/// Law of the DGFF given its values on C (and the boundary data).
class ConditionalLaw {
 public:
  ConditionalLaw(const TgDomain& domain, const std::vector<double>& boundary_data, const std::vector<int>& set,
                 const std::vector<double>& values);

  /// Harmonic extension of the data on C and the boundary.
  const Eigen::VectorXd& mean() const { return mean_; }
  /// Green's function of the complement of C; zero when u or v is in C or on the boundary.
  double covariance(int u, int v) const;
  /// Dense covariance over all vertices.
  Eigen::MatrixXd covariance_matrix() const;
  const DirichletProblem& problem() const { return problem_; }

 private:
  std::size_t n_;
  DirichletProblem problem_;
  Eigen::VectorXd mean_;
};

/// Throws DomainError if values and set differ in length or name a boundary vertex twice.
ConditionalLaw condition_on_set(const TgDomain& domain, const std::vector<double>& boundary_data,
                                const std::vector<int>& set, const std::vector<double>& values);

struct LocalityOptions {
  /// Boundary data of the sampled fields; empty means -lambda / +lambda on the arcs.
  std::vector<double> boundary_data;
  double lambda = kCriticalLambda;
  double threshold = 4.0;  // |z| bound per tested set
  bool test_pairs = true;  // adjacent interior pairs besides single vertices
  unsigned threads = 1;
};

/// For every tested B (interior singletons and adjacent pairs): residual
/// r = sum_B (h - E[h | h off B]) is N(0, s^2) and independent of h off B, so
/// under locality both r and r^2 - s^2 are uncorrelated with 1{A n B empty}.
/// One check per B and channel, |z| < threshold.
Report test_locality(const SetRule& rule, const TgDomain& domain, std::size_t n_samples, std::uint64_t seed,
                     const LocalityOptions& options = {});

/// A1 and A2 drawn conditionally independently given h (independent auxiliary
/// streams per sample).
struct CcupDraw {
  FieldSample field;
  std::vector<char> first;
  std::vector<char> second;
  std::vector<char> both;  // union
};

class CcupSampler {
 public:
  CcupSampler(SetRule first, SetRule second, const TgDomain& domain, std::uint64_t seed,
              const LocalityOptions& options = {});
  CcupDraw sample(std::uint64_t index) const;
  /// The union as a randomized rule of its own.
  const SetRule& union_rule() const { return union_; }

 private:
  SetRule first_, second_, union_;
  const TgDomain* domain_;
  std::uint64_t seed_;
  std::vector<double> boundary_;
  DgffSampler sampler_;
};

struct CcupResult {
  Report first_gate;
  Report second_gate;
  Report union_report;
  bool passed() const { return union_report.passed(); }
};

/// Gates on test_locality of both rules (DomainError naming the failing rule),
/// then tests the union.
CcupResult ccup_union(const SetRule& first, const SetRule& second, const TgDomain& domain, std::size_t n_samples,
                      std::uint64_t seed, const LocalityOptions& options = {});

struct HarmonicityOptions {
  std::size_t min_hits = 200;
  double threshold = 4.0;
  unsigned threads = 1;
  double lambda = kCriticalLambda;
  std::vector<double> boundary_data;
};

/// Stratifies samples by the realized A = C; for strata with at least min_hits
/// samples checks h(v) - mean of its 6 neighbours has mean zero at interior
/// v outside C with no interior neighbour in C.
Report conditional_mean_harmonicity(const SetRule& rule, const TgDomain& domain, std::size_t n_samples,
                                    std::uint64_t seed, const HarmonicityOptions& options = {});

}  // namespace gffsle
