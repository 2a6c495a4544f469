#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gffsle/conformal.hpp"
#include "gffsle/field.hpp"
#include "gffsle/interface.hpp"
#include "gffsle/lattice.hpp"
#include "gffsle/loewner.hpp"
#include "gffsle/report.hpp"

namespace gffsle {

struct DomainSpec {
  std::string shape = "rhombus";  // rhombus | hexagon
  int side = 60;
  double split = 0.5;
  double scale = 1.0;
};

TgDomain build_domain(const DomainSpec& spec);

/// psi = height * (1 - |z-c|^2/r^2)^4 added to the field before tracing.
struct BumpSpec {
  Point center;
  double radius = 1.0;
  double height = 0.0;

  /// "cx,cy,r,height".
  static BumpSpec parse(const std::string& text);
};

/// Settings of one experiment. The text form is INI with sections
/// [experiment], [domain], [field], [zipper] and [verify]; see README.
struct ExperimentConfig {
  std::string name = "interface";
  std::uint64_t seed = 1;
  std::size_t runs = 500;  // ensemble size
  unsigned threads = 1;
  std::string out_dir = "out";

  DomainSpec domain;
  double lambda = kCriticalLambda;
  std::optional<BumpSpec> bump;

  int zipper_subdiv = 4;
  double extract_delta = 1e-3;  // capacity increment of the extraction zipper
  double t_min = 0.05;
  double t_max = 0.5;
  double t_step = 0.05;

  // verifiers
  std::size_t verify_runs = 10000;
  double verify_delta = 1e-3;
  double verify_horizon = 0.2;
  std::size_t coupling_runs = 2000;
  std::string locality_rule = "minus-cluster";
  int locality_side = 4;
  std::size_t locality_samples = 20000;
  std::vector<int> projection_sides{10, 20, 40, 80};
  int height_gap_side = 80;
  std::size_t height_gap_runs = 60;
  std::vector<int> height_gap_distances{5, 10, 20, 30};

  /// DomainError unless lambda > 0, runs >= 1 and every tolerance is positive.
  void validate() const;
  /// Canonical INI text; parse_config(snapshot()) reproduces the config.
  std::string snapshot() const;
  /// FNV-1a of the snapshot.
  std::string hash() const;
};

ExperimentConfig parse_config(const std::string& ini_text);
ExperimentConfig load_config(const std::filesystem::path& file);
/// GFFSLE_OUT overrides out_dir, GFFSLE_THREADS overrides threads.
void apply_environment(ExperimentConfig& config);

/// One seed of sample -> trace -> map -> extract. On failure `error` holds the
/// message of the stage that threw and later fields are empty.
struct InterfaceRun {
  std::uint64_t index = 0;
  std::string error;
  FieldSample field;
  InterfacePath path;
  std::vector<Point> mapped;  // path in H, from 0; the y endpoint is dropped
  DrivingFunction driving;

  bool ok() const { return error.empty(); }
};

/// Domain, conformal map and DGFF factorization shared by all seeds.
class InterfacePipeline {
 public:
  explicit InterfacePipeline(const ExperimentConfig& config);

  const TgDomain& domain() const { return *domain_; }
  const ConformalMap& map() const { return map_; }
  const ExperimentConfig& config() const { return config_; }

  FieldSample sample(std::uint64_t index) const;
  InterfacePath trace(const FieldSample& field) const;
  std::vector<Point> to_half_plane(const InterfacePath& path) const;
  DrivingFunction extract(const std::vector<Point>& mapped) const;
  /// All four stages; never throws for stage errors.
  InterfaceRun run(std::uint64_t index) const;

 private:
  ExperimentConfig config_;
  std::shared_ptr<const TgDomain> domain_;
  ConformalMap map_;
  std::shared_ptr<const DgffSampler> sampler_;
  std::vector<double> boundary_;
  Eigen::VectorXd psi_;
};

struct PipelineResult {
  Report report;
  std::vector<InterfaceRun> runs;
};

/// Runs every seed, then fits Var(W_t) against t on the configured grid and
/// tests normality of the increments (standardized per time step, pooled).
/// With a single run only the completion check is made. The completion check
/// fails when more than 1% of seeds raise an error.
PipelineResult run_interface_pipeline(const ExperimentConfig& config);

/// Writes runs/<index>.driving.csv (and .path.csv), report.json and
/// config.snapshot under dir.
void write_pipeline_outputs(const std::filesystem::path& dir, const ExperimentConfig& config,
                            const PipelineResult& result);

/// Log-log slope of the Dirichlet-norm projection error of a fixed bump
/// against the inradius r_D, over rhombi of the given sides.
Report verify_projection(const std::vector<int>& sides, unsigned threads = 1);

/// Ensemble of sampled interfaces on a rhombus: |h_T(v) - F_T(v)| at every
/// interior probe at each graph distance from V- u V+ (probes within distance
/// 2 of the boundary are skipped). Passes when the medians do not increase.
Report verify_height_gap(int side, std::size_t runs, const std::vector<int>& distances, std::uint64_t seed,
                         double lambda = kCriticalLambda, unsigned threads = 1);

/// Names accepted by run_verifier.
const std::vector<std::string>& verifier_names();

/// martingale | qv | energy-clock | coupling | projection | locality | height-gap.
/// DomainError for an unknown name.
Report run_verifier(const ExperimentConfig& config, const std::string& which);

/// Adds the version, config hash and config to a report's JSON.
nlohmann::json stamped(const Report& report, const ExperimentConfig& config);

}  // namespace gffsle
