#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "gffsle/lattice.hpp"
#include "gffsle/rng.hpp"

namespace gffsle {

/// Real height per vertex. boundary_data is indexed by boundary-cycle position.
struct FieldSample {
  Eigen::VectorXd values;
  std::vector<double> boundary_data;
  std::optional<std::uint64_t> seed;

  double operator[](int v) const { return values[v]; }
};

/// Boundary data equal to -lambda on arc_minus and +lambda on arc_plus.
std::vector<double> arc_boundary_data(const TgDomain& domain, double lambda);

/// Graph Laplacian with FEM (cotangent) conductances: 1/sqrt(3) on edges shared
/// by two triangles, half that on boundary edges, so that f^T L f is the
/// Dirichlet energy of the piecewise-affine interpolant of f.
struct DirichletForm {
  Eigen::SparseMatrix<double> matrix;
  double weight = kInteriorEdgeWeight;

  double energy(const Eigen::VectorXd& f) const;
};

DirichletForm dirichlet_form(const TgDomain& domain);

/// Zero-boundary Gaussian and harmonic solves on the free vertices of a domain.
/// Every boundary vertex must be pinned; further interior vertices may be.
/// The factorization is built once and the object is read-only afterwards.
class DirichletProblem {
 public:
  explicit DirichletProblem(const TgDomain& domain);
  DirichletProblem(const TgDomain& domain, const std::vector<char>& pinned);

  std::size_t num_free() const { return free_.size(); }
  const std::vector<int>& free_vertices() const { return free_; }
  bool is_free(int v) const { return free_index_[static_cast<std::size_t>(v)] >= 0; }
  int free_index(int v) const { return free_index_[static_cast<std::size_t>(v)]; }

  /// Replaces the free entries of `values` by the discrete harmonic extension
  /// of its pinned entries. Throws NumericalError if the residual exceeds 1e-8.
  Eigen::VectorXd extend(const Eigen::VectorXd& values) const;

  /// Zero-boundary DGFF on the free vertices (zero on pinned ones).
  Eigen::VectorXd sample_noise(Rng& rng) const;
  /// Same, from a caller-supplied standard normal vector of length num_free().
  Eigen::VectorXd noise_from_normals(const Eigen::VectorXd& normals) const;

  /// Solves L_ff x = rhs (both indexed like free_vertices()).
  Eigen::VectorXd solve_free(const Eigen::VectorXd& rhs) const;

  /// Inverse of the free block, entry (u, v).
  double green(int u, int v) const;
  /// Dense inverse of the free block (rows follow free_vertices()).
  Eigen::MatrixXd green_matrix() const;

  const Eigen::SparseMatrix<double>& free_block() const { return lff_; }

 private:
  struct Factor;
  std::size_t n_ = 0;
  std::vector<int> free_;
  std::vector<int> free_index_;
  std::vector<int> pinned_;
  Eigen::SparseMatrix<double> lff_;
  Eigen::SparseMatrix<double> lfp_;
  std::shared_ptr<const Factor> factor_;
};

FieldSample harmonic_extension(const TgDomain& domain, const std::vector<double>& boundary_data);

/// Harmonic extension of boundary_data plus a zero-boundary DGFF with density
/// proportional to exp(-E(f)/2), E the Dirichlet form.
FieldSample sample_dgff(const TgDomain& domain, const std::vector<double>& boundary_data,
                        std::uint64_t seed);

/// Reuses one factorization across an ensemble; replicate i draws from stream (seed, i).
class DgffSampler {
 public:
  explicit DgffSampler(const TgDomain& domain);
  FieldSample sample(const std::vector<double>& boundary_data, std::uint64_t seed,
                     std::uint64_t index = 0) const;
  FieldSample sample(const Eigen::VectorXd& mean, Rng& rng) const;
  Eigen::VectorXd mean(const std::vector<double>& boundary_data) const;
  const DirichletProblem& problem() const { return problem_; }

 private:
  const TgDomain* domain_;
  DirichletProblem problem_;
};

/// Covariance of the zero-boundary DGFF at interior vertices u, v.
double discrete_green(const TgDomain& domain, int u, int v);

/// A smooth function on the upper half-plane, given with its gradient
/// (df/dx + i df/dy).
struct SmoothFunction {
  std::function<double(Point)> value;
  std::function<Point(Point)> gradient;
};

/// Compactly supported radial bump height * (1 - |w-c|^2/r^2)^4.
SmoothFunction radial_bump(Point center, double radius, double height = 1.0);

/// A map from the domain's plane to H with its complex derivative.
struct PlanarMap {
  std::function<Point(Point)> value;
  std::function<Point(Point)> derivative;

  static PlanarMap identity();
};

struct ProjectionResult {
  Eigen::VectorXd coefficients;  // per vertex, zero on the boundary
  double error = 0.0;            // Dirichlet norm of P f_D - f_D
  double norm = 0.0;             // Dirichlet norm of f_D
};

/// Dirichlet-orthogonal projection of f o map onto zero-boundary piecewise-affine
/// functions. Integrals use the 3-point Gauss rule on each triangle.
/// Throws DomainError if f o map does not vanish along the boundary.
ProjectionResult project_fem(const SmoothFunction& f, const TgDomain& domain, const PlanarMap& map_to_h);

/// Pointwise sum; psi must vanish on boundary vertices.
FieldSample add_bump(const FieldSample& field, const TgDomain& domain, const Eigen::VectorXd& psi);

/// Radial bump sampled at vertex positions. Throws DomainError if it reaches the boundary.
Eigen::VectorXd vertex_bump(const TgDomain& domain, Point center, double radius, double height);

}  // namespace gffsle
