#include "gffsle/field.hpp"

#include <cmath>
#include <random>

#include <Eigen/SparseCholesky>

namespace gffsle {

std::vector<double> arc_boundary_data(const TgDomain& domain, double lambda) {
  std::vector<double> data;
  data.reserve(domain.boundary_cycle().size());
  for (int v : domain.boundary_cycle()) data.push_back(domain.in_arc_plus(v) ? lambda : -lambda);
  return data;
}

double DirichletForm::energy(const Eigen::VectorXd& f) const {
  if (f.size() != matrix.rows()) throw DomainError("DirichletForm::energy: size mismatch");
  return f.dot(matrix * f);
}

DirichletForm dirichlet_form(const TgDomain& domain) {
  const auto n = static_cast<Eigen::Index>(domain.num_vertices());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * 7);
  // each triangle contributes cot(pi/3)/2 to each of its edges
  const double half = 0.5 * kInteriorEdgeWeight;
  for (const auto& t : domain.triangles()) {
    for (std::size_t e = 0; e < 3; ++e) {
      const int u = t[e], v = t[(e + 1) % 3];
      trip.emplace_back(u, u, half);
      trip.emplace_back(v, v, half);
      trip.emplace_back(u, v, -half);
      trip.emplace_back(v, u, -half);
    }
  }
  DirichletForm form;
  form.matrix.resize(n, n);
  form.matrix.setFromTriplets(trip.begin(), trip.end());
  return form;
}

struct DirichletProblem::Factor {
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
};

DirichletProblem::DirichletProblem(const TgDomain& domain)
    : DirichletProblem(domain, [&] {
        std::vector<char> pinned(domain.num_vertices(), 0);
        for (int v : domain.boundary_cycle()) pinned[static_cast<std::size_t>(v)] = 1;
        return pinned;
      }()) {}

DirichletProblem::DirichletProblem(const TgDomain& domain, const std::vector<char>& pinned)
    : n_(domain.num_vertices()) {
  if (pinned.size() != n_) throw DomainError("DirichletProblem: pinned mask has the wrong size");
  free_index_.assign(n_, -1);
  std::vector<int> pinned_index(n_, -1);
  for (std::size_t v = 0; v < n_; ++v) {
    if (!pinned[v] && !domain.is_interior(static_cast<int>(v))) {
      throw DomainError("DirichletProblem: boundary vertices must be pinned");
    }
    if (pinned[v]) {
      pinned_index[v] = static_cast<int>(pinned_.size());
      pinned_.push_back(static_cast<int>(v));
    } else {
      free_index_[v] = static_cast<int>(free_.size());
      free_.push_back(static_cast<int>(v));
    }
  }
  const auto nf = static_cast<Eigen::Index>(free_.size());
  const auto np = static_cast<Eigen::Index>(pinned_.size());
  std::vector<Eigen::Triplet<double>> ff, fp;
  const double w = kInteriorEdgeWeight;  // every edge at a free (interior) vertex is shared by two triangles
  for (std::size_t i = 0; i < free_.size(); ++i) {
    const int v = free_[i];
    ff.emplace_back(static_cast<int>(i), static_cast<int>(i), 6.0 * w);
    for (int u : domain.neighbors(v)) {
      const auto uu = static_cast<std::size_t>(u);
      if (free_index_[uu] >= 0) {
        ff.emplace_back(static_cast<int>(i), free_index_[uu], -w);
      } else {
        fp.emplace_back(static_cast<int>(i), pinned_index[uu], -w);
      }
    }
  }
  lff_.resize(nf, nf);
  lff_.setFromTriplets(ff.begin(), ff.end());
  lfp_.resize(nf, np);
  lfp_.setFromTriplets(fp.begin(), fp.end());
  auto factor = std::make_shared<Factor>();
  if (nf > 0) {
    factor->llt.compute(lff_);
    if (factor->llt.info() != Eigen::Success) {
      throw NumericalError("DirichletProblem: Cholesky factorization failed");
    }
  }
  factor_ = std::move(factor);
}

Eigen::VectorXd DirichletProblem::extend(const Eigen::VectorXd& values) const {
  if (static_cast<std::size_t>(values.size()) != n_) throw DomainError("DirichletProblem::extend: size mismatch");
  Eigen::VectorXd out = values;
  if (free_.empty()) return out;
  Eigen::VectorXd xp(static_cast<Eigen::Index>(pinned_.size()));
  for (std::size_t i = 0; i < pinned_.size(); ++i) xp[static_cast<Eigen::Index>(i)] = values[pinned_[i]];
  const Eigen::VectorXd rhs = -(lfp_ * xp);
  const Eigen::VectorXd xf = factor_->llt.solve(rhs);
  const double resid = (lff_ * xf - rhs).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, xp.size() > 0 ? xp.cwiseAbs().maxCoeff() : 0.0);
  if (!(resid <= 1e-8 * scale)) throw NumericalError("DirichletProblem::extend: residual above 1e-8");
  for (std::size_t i = 0; i < free_.size(); ++i) out[free_[i]] = xf[static_cast<Eigen::Index>(i)];
  return out;
}

Eigen::VectorXd DirichletProblem::noise_from_normals(const Eigen::VectorXd& normals) const {
  if (static_cast<std::size_t>(normals.size()) != free_.size()) {
    throw DomainError("DirichletProblem::noise_from_normals: size mismatch");
  }
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_));
  if (free_.empty()) return out;
  // P A P^-1 = L L^T, so x = P^-1 L^-T z has covariance A^-1
  const auto& llt = factor_->llt;
  const Eigen::VectorXd y = llt.matrixU().solve(normals);
  const Eigen::VectorXd x = llt.permutationPinv() * y;
  for (std::size_t i = 0; i < free_.size(); ++i) out[free_[i]] = x[static_cast<Eigen::Index>(i)];
  return out;
}

Eigen::VectorXd DirichletProblem::sample_noise(Rng& rng) const {
  std::normal_distribution<double> normal;
  Eigen::VectorXd z(static_cast<Eigen::Index>(free_.size()));
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = normal(rng);
  return noise_from_normals(z);
}

Eigen::VectorXd DirichletProblem::solve_free(const Eigen::VectorXd& rhs) const {
  if (static_cast<std::size_t>(rhs.size()) != free_.size()) throw DomainError("solve_free: size mismatch");
  if (free_.empty()) return rhs;
  return factor_->llt.solve(rhs);
}

double DirichletProblem::green(int u, int v) const {
  const int iu = free_index(u), iv = free_index(v);
  if (iu < 0 || iv < 0) throw DomainError("green: both vertices must be free");
  Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(free_.size()));
  e[iv] = 1.0;
  return factor_->llt.solve(e)[iu];
}

Eigen::MatrixXd DirichletProblem::green_matrix() const {
  const auto nf = static_cast<Eigen::Index>(free_.size());
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(nf, nf);
  if (nf == 0) return id;
  return factor_->llt.solve(id);
}

namespace {

Eigen::VectorXd pinned_values(const TgDomain& domain, const std::vector<double>& boundary_data) {
  if (boundary_data.size() != domain.boundary_cycle().size()) {
    throw DomainError("boundary_data must have one entry per boundary vertex");
  }
  Eigen::VectorXd values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(domain.num_vertices()));
  for (std::size_t i = 0; i < boundary_data.size(); ++i) {
    if (!std::isfinite(boundary_data[i])) throw DomainError("boundary_data must be finite");
    values[domain.boundary_cycle()[i]] = boundary_data[i];
  }
  return values;
}

}  // namespace

FieldSample harmonic_extension(const TgDomain& domain, const std::vector<double>& boundary_data) {
  const DirichletProblem problem(domain);
  FieldSample out;
  out.values = problem.extend(pinned_values(domain, boundary_data));
  out.boundary_data = boundary_data;
  return out;
}

DgffSampler::DgffSampler(const TgDomain& domain) : domain_(&domain), problem_(domain) {}

Eigen::VectorXd DgffSampler::mean(const std::vector<double>& boundary_data) const {
  return problem_.extend(pinned_values(*domain_, boundary_data));
}

FieldSample DgffSampler::sample(const Eigen::VectorXd& mean, Rng& rng) const {
  FieldSample out;
  out.values = mean + problem_.sample_noise(rng);
  out.boundary_data.reserve(domain_->boundary_cycle().size());
  for (int v : domain_->boundary_cycle()) out.boundary_data.push_back(mean[v]);
  return out;
}

FieldSample DgffSampler::sample(const std::vector<double>& boundary_data, std::uint64_t seed,
                                std::uint64_t index) const {
  Rng rng = make_rng(seed, index);
  FieldSample out = sample(mean(boundary_data), rng);
  out.boundary_data = boundary_data;
  out.seed = seed;
  return out;
}

FieldSample sample_dgff(const TgDomain& domain, const std::vector<double>& boundary_data, std::uint64_t seed) {
  return DgffSampler(domain).sample(boundary_data, seed);
}

double discrete_green(const TgDomain& domain, int u, int v) {
  const auto n = static_cast<int>(domain.num_vertices());
  if (u < 0 || v < 0 || u >= n || v >= n || !domain.is_interior(u) || !domain.is_interior(v)) {
    throw DomainError("discrete_green: vertices must be interior");
  }
  return DirichletProblem(domain).green(u, v);
}

SmoothFunction radial_bump(Point center, double radius, double height) {
  if (!(radius > 0.0)) throw DomainError("radial_bump: radius must be positive");
  const double r2 = radius * radius;
  SmoothFunction f;
  f.value = [=](Point w) {
    const double s = std::norm(w - center) / r2;
    if (s >= 1.0) return 0.0;
    const double q = 1.0 - s;
    return height * q * q * q * q;
  };
  f.gradient = [=](Point w) {
    const double s = std::norm(w - center) / r2;
    if (s >= 1.0) return Point{0.0, 0.0};
    const double q = 1.0 - s;
    return -8.0 * height * q * q * q / r2 * (w - center);
  };
  return f;
}

PlanarMap PlanarMap::identity() {
  return {[](Point z) { return z; }, [](Point) { return Point{1.0, 0.0}; }};
}

ProjectionResult project_fem(const SmoothFunction& f, const TgDomain& domain, const PlanarMap& map_to_h) {
  const auto n = static_cast<Eigen::Index>(domain.num_vertices());
  for (int v : domain.boundary_cycle()) {
    const Point p = domain.position(v);
    if (f.value(map_to_h.value(p)) != 0.0) {
      throw DomainError("project_fem: support of the pulled-back function reaches the boundary");
    }
  }

  static constexpr double kBary[3][3] = {{2.0 / 3, 1.0 / 6, 1.0 / 6}, {1.0 / 6, 2.0 / 3, 1.0 / 6},
                                         {1.0 / 6, 1.0 / 6, 2.0 / 3}};
  const std::size_t nt = domain.num_triangles();
  // gradients of f o phi at the quadrature nodes: conj(phi') * grad f(phi)
  std::vector<std::array<Point, 3>> grad(nt);
  std::vector<std::array<Point, 3>> hat(nt);
  std::vector<double> area(nt);
  Eigen::VectorXd load = Eigen::VectorXd::Zero(n);
  double norm2 = 0.0;
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tri = domain.triangles()[t];
    const Point p[3] = {domain.position(tri[0]), domain.position(tri[1]), domain.position(tri[2])};
    const Point e1 = p[1] - p[0], e2 = p[2] - p[0];
    area[t] = 0.5 * (e1.real() * e2.imag() - e1.imag() * e2.real());
    for (int k = 0; k < 3; ++k) {
      hat[t][static_cast<std::size_t>(k)] = Point{0.0, 1.0} * (p[(k + 2) % 3] - p[(k + 1) % 3]) / (2.0 * area[t]);
    }
    for (int q = 0; q < 3; ++q) {
      const Point z = kBary[q][0] * p[0] + kBary[q][1] * p[1] + kBary[q][2] * p[2];
      const Point w = map_to_h.value(z);
      const Point g = f.gradient(w);
      grad[t][static_cast<std::size_t>(q)] = (g == Point{0.0, 0.0}) ? g : std::conj(map_to_h.derivative(z)) * g;
    }
    Point mean_grad{0.0, 0.0};
    for (int q = 0; q < 3; ++q) {
      mean_grad += grad[t][static_cast<std::size_t>(q)] / 3.0;
      norm2 += area[t] / 3.0 * std::norm(grad[t][static_cast<std::size_t>(q)]);
    }
    for (std::size_t k = 0; k < 3; ++k) {
      const Point h = hat[t][k];
      load[tri[k]] += area[t] * (mean_grad.real() * h.real() + mean_grad.imag() * h.imag());
    }
  }

  const DirichletProblem problem(domain);
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(problem.num_free()));
  for (std::size_t i = 0; i < problem.free_vertices().size(); ++i) {
    rhs[static_cast<Eigen::Index>(i)] = load[problem.free_vertices()[i]];
  }
  const Eigen::VectorXd coeff_free = problem.solve_free(rhs);
  ProjectionResult out;
  out.coefficients = Eigen::VectorXd::Zero(n);
  for (std::size_t i = 0; i < problem.free_vertices().size(); ++i) {
    out.coefficients[problem.free_vertices()[i]] = coeff_free[static_cast<Eigen::Index>(i)];
  }

  double err2 = 0.0;
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tri = domain.triangles()[t];
    Point gp{0.0, 0.0};
    for (std::size_t k = 0; k < 3; ++k) gp += out.coefficients[tri[k]] * hat[t][k];
    for (std::size_t q = 0; q < 3; ++q) err2 += area[t] / 3.0 * std::norm(grad[t][q] - gp);
  }
  out.error = std::sqrt(err2);
  out.norm = std::sqrt(norm2);
  return out;
}

FieldSample add_bump(const FieldSample& field, const TgDomain& domain, const Eigen::VectorXd& psi) {
  if (psi.size() != field.values.size()) throw DomainError("add_bump: size mismatch");
  for (int v : domain.boundary_cycle()) {
    if (psi[v] != 0.0) throw DomainError("add_bump: psi must vanish on boundary vertices");
  }
  if (!psi.allFinite()) throw DomainError("add_bump: psi must be finite");
  FieldSample out = field;
  out.values += psi;
  return out;
}

Eigen::VectorXd vertex_bump(const TgDomain& domain, Point center, double radius, double height) {
  const SmoothFunction f = radial_bump(center, radius, height);
  Eigen::VectorXd psi(static_cast<Eigen::Index>(domain.num_vertices()));
  for (std::size_t v = 0; v < domain.num_vertices(); ++v) {
    psi[static_cast<Eigen::Index>(v)] = f.value(domain.positions()[v]);
  }
  for (int v : domain.boundary_cycle()) {
    if (psi[v] != 0.0) throw DomainError("vertex_bump: bump support reaches the boundary");
  }
  return psi;
}

}  // namespace gffsle
