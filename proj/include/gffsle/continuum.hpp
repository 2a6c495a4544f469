#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "gffsle/field.hpp"
#include "gffsle/lattice.hpp"
#include "gffsle/loewner.hpp"
#include "gffsle/report.hpp"

namespace gffsle {

/// G(x, y) = log|(conj(x) - y)/(x - y)| / (2 pi). Zero when either point is
/// on R; DomainError for x == y or a point below R.
double green_h(Point x, Point y);

/// lambda (1 - 2 arg(g - W)/pi). On R the value is -lambda left of W and
/// +lambda right of it; DomainError below R or at g == W.
double h_t_eval(Point g, double w, double lambda);

/// 2 pi times the gap between the diagonal of the zero-boundary DGFF
/// (unit mesh) and log of the conformal radius: gamma + log(2 sqrt 3).
inline const double kLatticeGreenConstant = 0.57721566490153286 + std::log(2.0 * kSqrt3);

/// Point masses in H. For vertex-based functions `vertices` lists the domain
/// vertex of every point. `cell_radius` is the cutoff of the Cell self-energy.
struct LatticeTestFunction {
  std::vector<Point> points;
  std::vector<double> weights;
  std::vector<int> vertices;
  double cell_radius = 0.0;
  std::string tag;

  double total_mass() const;
  /// sum_k w_k values[vertices[k]]; needs vertices.
  double pairing(const Eigen::VectorXd& values) const;
};

/// Unit masses at i and 2i.
LatticeTestFunction two_point_test_function();

/// Bump (1 - |z-c|^2/r^2)^4 sampled on a square grid of the given spacing,
/// normalized to mass 1; cell radius of the equal-area disc (self-energy
/// log(1/r) + 1/4 of a uniform disc folded into the radius).
LatticeTestFunction bump_test_function(Point center, double radius, double spacing);

/// The same bump on the interior vertices of a domain, normalized to mass 1.
/// The cell radius mesh * exp(-kLatticeGreenConstant) makes the Cell
/// self-energy equal to the DGFF variance at a vertex.
LatticeTestFunction vertex_test_function(const TgDomain& domain, Point center, double radius);

enum class SelfEnergy {
  Exclude,       // drop the diagonal
  Renormalized,  // log(2 Im g / |g'|) / (2 pi): the time-dependent part, exact for QV of point masses
  Cell,          // Renormalized - log(cell_radius) / (2 pi)
};

double self_energy(Point g, Point dg, double cell_radius, SelfEnergy mode);

/// E_t(rho) = sum_{j,k} w_j w_k G(g_j - W, g_k - W) with the diagonal given by
/// `mode`; g and dg are the time-t map and derivative at the support points.
/// Throws SwallowedError naming the first support point that left H.
double energy(const LatticeTestFunction& rho, std::span<const Point> g, std::span<const Point> dg, double w,
              SelfEnergy mode = SelfEnergy::Exclude);
/// Time-zero energy.
double energy(const LatticeTestFunction& rho, SelfEnergy mode = SelfEnergy::Exclude);

/// Ensemble of SLE4 runs. Statistics are read on the grid k * delta; the flow
/// itself runs `substeps` slits per grid step.
struct EnsembleOptions {
  std::size_t runs = 10000;
  double delta = 1e-3;
  unsigned substeps = 8;
  std::uint64_t seed = 1;
  double lambda = kCriticalLambda;
  unsigned threads = 1;
};

/// Mean of h_t(z) - h_s(z) within 3 standard errors of 0 for every pair of
/// checkpoints, plus |h_t(z)| <= lambda throughout.
Report verify_height_martingale(Point z, std::vector<double> checkpoints, const EnsembleOptions& options);

/// Per run, sum_k dh(x) dh(y) + G_T(x,y) - G_0(x,y) (the diagonal uses the
/// Renormalized self-energy when x == y). Passes when the mean relative
/// residual is at most 5% and its z-score below 3; includes the Brownian
/// control of the covariation estimator.
Report verify_qv_relation(Point x, Point y, double horizon, const EnsembleOptions& options);

/// (h_t, rho) against the clock u = E_0 - E_t (Renormalized diagonal):
/// pooled sum (d(h,rho))^2 / sum du in [0.9, 1.1], KS p > 0.01 for one
/// normalized increment per run, and for two or more points the cross
/// covariation of h at the first two points against -dG (5%).
Report verify_energy_clock(const LatticeTestFunction& rho, double horizon, const EnsembleOptions& options);

struct CouplingOptions {
  double width = 16.0;
  double height = 8.0;
  double mesh = 0.5;
  double horizon = 0.5;
  double delta = 1e-3;
  double lambda = kCriticalLambda;
  /// Adds the harmonic extension of the outer field's values on the box walls,
  /// so that the field is the half-plane GFF restricted to the box.
  bool box_correction = true;
};

struct CouplingSample {
  DrivingFunction driving;
  HalfPlanePath path;
  FieldSample field;
  std::vector<char> pinned;  // box boundary and endpoints of lattice edges crossing the path
};

/// SLE4 up to the horizon; h_T = lambda(1 - 2 arg(g_T - W_T)/pi) at the
/// vertices of the box; a zero-boundary DGFF on the box minus the path; and
/// (optionally) the wall correction.
class CouplingBuilder {
 public:
  explicit CouplingBuilder(const CouplingOptions& options = {});
  const TgDomain& domain() const { return *domain_; }
  const CouplingOptions& options() const { return options_; }
  /// Throws DomainError if the path comes within one mesh of the box walls.
  CouplingSample sample(std::uint64_t seed, std::uint64_t index = 0) const;

 private:
  CouplingOptions options_;
  std::shared_ptr<const TgDomain> domain_;
  std::vector<int> walls_;  // boundary vertices off the real axis
};

CouplingSample build_coupling(std::uint64_t seed, const CouplingOptions& options = {});

/// Three fixed vertex bumps of radius 1 in the default box.
std::vector<LatticeTestFunction> default_coupling_test_functions(const TgDomain& domain);

/// For each rho: |Var(h, rho)/E_0(rho) - 1| <= 0.05 (Cell diagonal) and the mean
/// within 3 standard errors of (h_0, rho), h_0 the harmonic extension of +-lambda.
Report verify_coupling(const CouplingBuilder& builder, const std::vector<LatticeTestFunction>& rhos,
                       std::size_t runs, std::uint64_t seed, unsigned threads = 1);

}  // namespace gffsle
