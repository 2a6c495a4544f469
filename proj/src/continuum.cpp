#include "gffsle/continuum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "gffsle/parallel.hpp"
#include "gffsle/rng.hpp"
#include "gffsle/stats.hpp"

namespace gffsle {

namespace {

constexpr double kInv2Pi = 1.0 / (2.0 * kPi);

double bump_density(Point z, Point center, double radius) {
  const double s = 1.0 - std::norm(z - center) / (radius * radius);
  return s > 0.0 ? s * s * s * s : 0.0;
}

void normalize(LatticeTestFunction& rho) {
  const double mass = rho.total_mass();
  if (!(mass > 0.0)) throw DomainError("test function has no mass");
  for (double& w : rho.weights) w /= mass;
}

std::size_t grid_index(double t, double delta) {
  return static_cast<std::size_t>(std::llround(t / delta));
}

// G_t between two support points, diagonal renormalized.
double green_t(Point gx, Point dgx, Point gy, bool same) {
  return same ? self_energy(gx, dgx, 1.0, SelfEnergy::Renormalized) : green_h(gx, gy);
}

DrivingFunction ensemble_driving(double horizon, const EnsembleOptions& o, std::size_t run) {
  if (o.substeps < 1 || !(o.delta > 0.0)) throw DomainError("ensemble: delta and substeps must be positive");
  return sample_sle4_driving(horizon, o.delta / o.substeps, o.seed, run);
}

// Runs the flow to the next grid point; false at the end of the driving.
bool advance(SlitFlow& flow, unsigned substeps) {
  for (unsigned s = 0; s < substeps; ++s) {
    if (!flow.step()) return false;
  }
  return true;
}

}  // namespace

double green_h(Point x, Point y) {
  if (x.imag() < 0.0 || y.imag() < 0.0) throw DomainError("green_h: points must lie in the closed upper half-plane");
  if (x == y) throw DomainError("green_h: singular at x == y");
  if (x.imag() == 0.0 || y.imag() == 0.0) return 0.0;
  // |x - conj y|^2 = |x - y|^2 + 4 Im x Im y; written so that swapping x, y is exact
  const double dx = x.real() - y.real(), dy = x.imag() - y.imag();
  return 0.5 * kInv2Pi * std::log1p(4.0 * x.imag() * y.imag() / (dx * dx + dy * dy));
}

double h_t_eval(Point g, double w, double lambda) {
  const Point z = g - w;
  if (z.imag() < 0.0) throw DomainError("h_t_eval: point below the real axis");
  if (z == Point{0.0, 0.0}) throw DomainError("h_t_eval: point at the driving value");
  if (z.imag() == 0.0) return z.real() > 0.0 ? lambda : -lambda;
  return lambda * (1.0 - 2.0 * std::arg(z) / kPi);
}

double LatticeTestFunction::total_mass() const {
  double m = 0.0;
  for (double w : weights) m += w;
  return m;
}

double LatticeTestFunction::pairing(const Eigen::VectorXd& values) const {
  if (vertices.size() != weights.size()) throw DomainError("pairing: test function has no vertex list");
  double s = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) s += weights[k] * values[vertices[k]];
  return s;
}

LatticeTestFunction two_point_test_function() {
  LatticeTestFunction rho;
  rho.points = {{0.0, 1.0}, {0.0, 2.0}};
  rho.weights = {1.0, 1.0};
  rho.tag = "two-point";
  return rho;
}

LatticeTestFunction bump_test_function(Point center, double radius, double spacing) {
  if (!(radius > 0.0) || !(spacing > 0.0)) throw DomainError("bump_test_function: radius and spacing must be positive");
  if (!(center.imag() > radius)) throw DomainError("bump_test_function: support must stay above the real axis");
  LatticeTestFunction rho;
  const int m = static_cast<int>(std::ceil(radius / spacing));
  for (int i = -m; i <= m; ++i) {
    for (int j = -m; j <= m; ++j) {
      const Point z = center + Point{i * spacing, j * spacing};
      const double d = bump_density(z, center, radius);
      if (d > 0.0) {
        rho.points.push_back(z);
        rho.weights.push_back(d);
      }
    }
  }
  normalize(rho);
  // uniform disc of radius a: self-energy (log(1/a) + 1/4)/(2 pi)
  rho.cell_radius = spacing / std::sqrt(kPi) * std::exp(-0.25);
  rho.tag = "bump";
  return rho;
}

LatticeTestFunction vertex_test_function(const TgDomain& domain, Point center, double radius) {
  if (!(radius > 0.0)) throw DomainError("vertex_test_function: radius must be positive");
  LatticeTestFunction rho;
  for (int v : domain.interior_vertices()) {
    const double d = bump_density(domain.position(v), center, radius);
    if (d > 0.0) {
      rho.points.push_back(domain.position(v));
      rho.weights.push_back(d);
      rho.vertices.push_back(v);
    }
  }
  normalize(rho);
  rho.cell_radius = domain.scale() * std::exp(-kLatticeGreenConstant);
  rho.tag = "vertex-bump";
  return rho;
}

double self_energy(Point g, Point dg, double cell_radius, SelfEnergy mode) {
  switch (mode) {
    case SelfEnergy::Exclude:
      return 0.0;
    case SelfEnergy::Renormalized:
      return kInv2Pi * std::log(2.0 * g.imag() / std::abs(dg));
    case SelfEnergy::Cell:
      if (!(cell_radius > 0.0)) throw DomainError("self_energy: Cell mode needs a positive cell radius");
      return kInv2Pi * (std::log(2.0 * g.imag() / std::abs(dg)) - std::log(cell_radius));
  }
  return 0.0;
}

double energy(const LatticeTestFunction& rho, std::span<const Point> g, std::span<const Point> dg, double w,
              SelfEnergy mode) {
  const std::size_t n = rho.points.size();
  if (g.size() != n || dg.size() != n || rho.weights.size() != n) throw DomainError("energy: size mismatch");
  for (std::size_t j = 0; j < n; ++j) {
    if (!(g[j].imag() > 0.0)) {
      throw SwallowedError("energy: support point " + std::to_string(j) + " left the half-plane", 0.0);
    }
  }
  double e = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    e += rho.weights[j] * rho.weights[j] * self_energy(g[j] - w, dg[j], rho.cell_radius, mode);
    for (std::size_t k = j + 1; k < n; ++k) e += 2.0 * rho.weights[j] * rho.weights[k] * green_h(g[j] - w, g[k] - w);
  }
  return e;
}

double energy(const LatticeTestFunction& rho, SelfEnergy mode) {
  const std::vector<Point> ones(rho.points.size(), Point{1.0, 0.0});
  return energy(rho, rho.points, ones, 0.0, mode);
}

Report verify_height_martingale(Point z, std::vector<double> checkpoints, const EnsembleOptions& options) {
  Report report;
  report.name = "martingale";
  std::sort(checkpoints.begin(), checkpoints.end());
  if (checkpoints.empty() || checkpoints.front() < 0.0) throw DomainError("verify_height_martingale: bad checkpoints");
  const double horizon = checkpoints.back();
  const std::size_t n = options.runs;
  if (n < 100) report.details["warning"] = "fewer than 100 runs: low power";
  std::vector<std::size_t> idx;
  for (double t : checkpoints) idx.push_back(grid_index(t, options.delta));
  const std::size_t m = checkpoints.size();
  std::vector<double> h(n * m, 0.0);
  std::vector<char> in_range(n, 1);
  if (horizon > 0.0) {
    parallel_for(n, options.threads, [&](std::size_t r) {
      const auto w = ensemble_driving(horizon, options, r);
      const Point pts[] = {z};
      SlitFlow flow(w, pts);
      std::size_t c = 0;
      do {
        const double v = h_t_eval(flow.g(0), flow.driving(), options.lambda);
        if (std::abs(v) > options.lambda) in_range[r] = 0;
        while (c < m && idx[c] * options.substeps == flow.index()) h[r * m + c++] = v;
      } while (flow.step());
    });
  } else {
    std::fill(h.begin(), h.end(), h_t_eval(z, 0.0, options.lambda));
  }
  auto& pairs = report.details["pairs"] = nlohmann::json::array();
  for (std::size_t a = 0; a < m; ++a) {
    for (std::size_t b = a + 1; b < m; ++b) {
      stats::RunningStats s;
      for (std::size_t r = 0; r < n; ++r) s.push(h[r * m + b] - h[r * m + a]);
      const double se = s.std_error();
      const double zscore = se > 0.0 ? s.mean() / se : 0.0;
      std::ostringstream label;
      label << "drift " << checkpoints[a] << " -> " << checkpoints[b];
      const std::string name = label.str();
      report.add(name, zscore, se, 3.0, std::abs(zscore) < 3.0);
      pairs.push_back({{"s", checkpoints[a]}, {"t", checkpoints[b]}, {"mean", s.mean()}, {"se", se}, {"z", zscore}});
    }
  }
  const auto bad = static_cast<double>(std::count(in_range.begin(), in_range.end(), 0));
  report.add("range |h| <= lambda", bad, 0.0, 0.0, bad == 0.0);
  report.details["runs"] = n;
  report.details["z"] = {z.real(), z.imag()};
  return report;
}

Report verify_qv_relation(Point x, Point y, double horizon, const EnsembleOptions& options) {
  Report report;
  report.name = "qv";
  const std::size_t n = options.runs;
  const bool same = x == y;
  std::vector<double> residual(n, 0.0), drop(n, 0.0), bm(n, 0.0);
  if (horizon > 0.0) {
    parallel_for(n, options.threads, [&](std::size_t r) {
      const auto w = ensemble_driving(horizon, options, r);
      const Point pts[] = {x, y};
      SlitFlow flow(w, pts);
      const double g0 = green_t(x, 1.0, y, same);
      double hx = h_t_eval(x, 0.0, options.lambda), hy = h_t_eval(y, 0.0, options.lambda), cov = 0.0;
      while (advance(flow, options.substeps)) {
        const double nx = h_t_eval(flow.g(0), flow.driving(), options.lambda);
        const double ny = h_t_eval(flow.g(1), flow.driving(), options.lambda);
        cov += (nx - hx) * (ny - hy);
        hx = nx;
        hy = ny;
      }
      const double gt = green_t(flow.g(0), flow.derivative(0), flow.g(1), same);
      residual[r] = cov + gt - g0;
      drop[r] = g0 - gt;
      // Brownian control: sum of squared increments of W/2 against the horizon
      double q = 0.0;
      for (std::size_t k = options.substeps; k < w.size(); k += options.substeps) {
        const double dw = w.values[k] - w.values[k - options.substeps];
        q += 0.25 * dw * dw;
      }
      bm[r] = q / horizon - 1.0;
    });
  }
  stats::RunningStats res, dg, ctrl;
  for (std::size_t r = 0; r < n; ++r) {
    res.push(residual[r]);
    dg.push(drop[r]);
    ctrl.push(bm[r]);
  }
  const double rel = dg.mean() != 0.0 ? res.mean() / dg.mean() : 0.0;
  const double rel_se = dg.mean() != 0.0 ? res.std_error() / std::abs(dg.mean()) : 0.0;
  const double zscore = res.std_error() > 0.0 ? res.mean() / res.std_error() : 0.0;
  report.add("estimator control (relative bias)", ctrl.mean(), ctrl.std_error(), 0.01, std::abs(ctrl.mean()) <= 0.01);
  report.add("relative residual", rel, rel_se, 0.05, std::abs(rel) <= 0.05);
  report.add("residual z-score", zscore, 1.0, 3.0, std::abs(zscore) < 3.0);
  report.details["mean_covariation_gap"] = res.mean();
  report.details["mean_green_drop"] = dg.mean();
  report.details["runs"] = n;
  report.details["lambda"] = options.lambda;
  report.details["x"] = {x.real(), x.imag()};
  report.details["y"] = {y.real(), y.imag()};
  return report;
}

Report verify_energy_clock(const LatticeTestFunction& rho, double horizon, const EnsembleOptions& options) {
  Report report;
  report.name = "energy-clock";
  const std::size_t n = options.runs;
  const std::size_t np = rho.points.size();
  const auto steps = grid_index(horizon, options.delta);
  if (horizon <= 0.0 || steps == 0) {
    report.add("empty horizon", 0.0, 0.0, 0.0, true);
    return report;
  }
  const bool cross = np >= 2;
  std::vector<double> sq(n, 0.0), du(n, 0.0), normalized(n, 0.0), cross_cov(n, 0.0), cross_drop(n, 0.0);
  parallel_for(n, options.threads, [&](std::size_t r) {
    const auto w = ensemble_driving(horizon, options, r);
    SlitFlow flow(w, rho.points);
    std::vector<Point> g(np), dg(np);
    auto load = [&] {
      for (std::size_t i = 0; i < np; ++i) {
        g[i] = flow.g(i);
        dg[i] = flow.derivative(i);
      }
    };
    auto pair = [&] {
      double s = 0.0;
      for (std::size_t i = 0; i < np; ++i) s += rho.weights[i] * h_t_eval(g[i], flow.driving(), options.lambda);
      return s;
    };
    load();
    double m_prev = pair(), e_prev = energy(rho, g, dg, flow.driving(), SelfEnergy::Renormalized);
    double h0 = 0.0, h1 = 0.0;
    if (cross) {
      h0 = h_t_eval(g[0], flow.driving(), options.lambda);
      h1 = h_t_eval(g[1], flow.driving(), options.lambda);
    }
    const double g01_start = cross ? green_h(g[0], g[1]) : 0.0;
    const std::size_t pick = (r * 7919 + 13) % steps;
    std::size_t k = 0;
    while (advance(flow, options.substeps)) {
      load();
      const double m = pair(), e = energy(rho, g, dg, flow.driving(), SelfEnergy::Renormalized);
      const double dm = m - m_prev, de = e_prev - e;
      sq[r] += dm * dm;
      du[r] += de;
      if (k++ == pick) normalized[r] = de > 0.0 ? dm / std::sqrt(de) : 0.0;
      if (cross) {
        const double n0 = h_t_eval(g[0], flow.driving(), options.lambda);
        const double n1 = h_t_eval(g[1], flow.driving(), options.lambda);
        cross_cov[r] += (n0 - h0) * (n1 - h1);
        h0 = n0;
        h1 = n1;
      }
      m_prev = m;
      e_prev = e;
    }
    if (cross) cross_drop[r] = g01_start - green_h(g[0], g[1]);
  });
  double sum_sq = 0.0, sum_du = 0.0;
  stats::RunningStats ratio_terms;
  for (std::size_t r = 0; r < n; ++r) {
    sum_sq += sq[r];
    sum_du += du[r];
  }
  const double ratio = sum_sq / sum_du;
  // standard error of a ratio of sums, by the delta method over runs
  for (std::size_t r = 0; r < n; ++r) ratio_terms.push(sq[r] - ratio * du[r]);
  const double ratio_se = ratio_terms.std_error() * static_cast<double>(n) / sum_du;
  report.add("variance ratio", ratio, ratio_se, 0.1, ratio >= 0.9 && ratio <= 1.1);
  const auto ks = stats::ks_test_normal(normalized);
  report.add("increment normality (KS p)", ks.pvalue, 0.0, 0.01, ks.pvalue > 0.01);
  if (cross) {
    stats::RunningStats c, d;
    for (std::size_t r = 0; r < n; ++r) {
      c.push(cross_cov[r]);
      d.push(cross_drop[r]);
    }
    const double rel = c.mean() / d.mean() - 1.0;
    report.add("cross covariation vs -dG", rel, c.std_error() / d.mean(), 0.05, std::abs(rel) <= 0.05);
  }
  report.details["E0"] = energy(rho, SelfEnergy::Renormalized);
  report.details["mean_clock"] = sum_du / static_cast<double>(n);
  report.details["ks_statistic"] = ks.statistic;
  report.details["runs"] = n;
  report.details["lambda"] = options.lambda;
  return report;
}

namespace {

bool segments_cross(Point p1, Point p2, Point q1, Point q2) {
  auto cr = [](Point a, Point b) { return a.real() * b.imag() - a.imag() * b.real(); };
  const double d1 = cr(p2 - p1, q1 - p1), d2 = cr(p2 - p1, q2 - p1);
  const double d3 = cr(q2 - q1, p1 - q1), d4 = cr(q2 - q1, p2 - q1);
  return ((d1 > 0.0) != (d2 > 0.0)) && ((d3 > 0.0) != (d4 > 0.0));
}

}  // namespace

CouplingBuilder::CouplingBuilder(const CouplingOptions& options)
    : options_(options),
      domain_(std::make_shared<const TgDomain>(build_box_domain(options.width, options.height, options.mesh))) {
  if (!(options.horizon > 0.0) || !(options.delta > 0.0) || !(options.lambda > 0.0)) {
    throw DomainError("CouplingBuilder: horizon, delta and lambda must be positive");
  }
  for (int v : domain_->boundary_cycle()) {
    if (domain_->position(v).imag() > 0.0) walls_.push_back(v);
  }
}

CouplingSample CouplingBuilder::sample(std::uint64_t seed, std::uint64_t index) const {
  const TgDomain& d = *domain_;
  const double mesh = options_.mesh;
  CouplingSample out;
  out.driving = sample_sle4_driving(options_.horizon, options_.delta, seed, index);
  out.path = trace_from_driving(out.driving);
  const double half = 0.5 * options_.width;
  for (Point p : out.path.points) {
    if (std::abs(p.real()) > half - mesh || p.imag() > options_.height - mesh) {
      throw DomainError("build_coupling: path leaves the box, enlarge it or shorten the horizon");
    }
  }

  // pins: box boundary and both ends of every lattice edge the path crosses
  out.pinned.assign(d.num_vertices(), 0);
  for (int v : d.boundary_cycle()) out.pinned[static_cast<std::size_t>(v)] = 1;
  const Point origin = d.origin();
  auto coord = [&](Point p, double& a, double& b) {
    const Point q = (p - origin) / mesh;
    b = q.imag() / (0.5 * kSqrt3);
    a = q.real() - 0.5 * b;
  };
  for (std::size_t k = 0; k + 1 < out.path.points.size(); ++k) {
    const Point p0 = out.path.points[k], p1 = out.path.points[k + 1];
    double a0, b0, a1, b1;
    coord(p0, a0, b0);
    coord(p1, a1, b1);
    const int alo = static_cast<int>(std::floor(std::min(a0, a1))) - 1, ahi = static_cast<int>(std::ceil(std::max(a0, a1))) + 1;
    const int blo = static_cast<int>(std::floor(std::min(b0, b1))) - 1, bhi = static_cast<int>(std::ceil(std::max(b0, b1))) + 1;
    for (int a = alo; a <= ahi; ++a) {
      for (int b = blo; b <= bhi; ++b) {
        const int v = d.find({a, b});
        if (v < 0) continue;
        for (int dir = 0; dir < 3; ++dir) {
          const int u = d.find(LatticeCoord{a, b} + kLatticeDirections[static_cast<std::size_t>(dir)]);
          if (u >= 0 && segments_cross(d.position(v), d.position(u), p0, p1)) {
            out.pinned[static_cast<std::size_t>(v)] = 1;
            out.pinned[static_cast<std::size_t>(u)] = 1;
          }
        }
      }
    }
  }

  SlitFlow flow(out.driving, d.positions());
  while (flow.step()) {
  }
  const double wt = flow.driving();
  const auto nv = static_cast<Eigen::Index>(d.num_vertices());
  Eigen::VectorXd ht(nv), outer = Eigen::VectorXd::Zero(nv);
  for (Eigen::Index v = 0; v < nv; ++v) ht[v] = h_t_eval(flow.g(static_cast<std::size_t>(v)), wt, options_.lambda);

  Rng rng = make_rng(stream_seed(seed, index), 1);
  std::normal_distribution<double> normal;
  if (options_.box_correction && !walls_.empty()) {
    // outer GFF of H minus the hull, read on the walls
    const auto m = static_cast<Eigen::Index>(walls_.size());
    const double radius = mesh * std::exp(-kLatticeGreenConstant);
    Eigen::MatrixXd cov(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      const auto vi = static_cast<std::size_t>(walls_[static_cast<std::size_t>(i)]);
      const Point gi = flow.g(vi) - wt;
      cov(i, i) = self_energy(gi, flow.derivative(vi), radius, SelfEnergy::Cell);
      for (Eigen::Index j = 0; j < i; ++j) {
        const Point gj = flow.g(static_cast<std::size_t>(walls_[static_cast<std::size_t>(j)])) - wt;
        cov(i, j) = cov(j, i) = green_h(gi, gj);
      }
    }
    const Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw NumericalError("build_coupling: wall covariance is not positive definite");
    Eigen::VectorXd z(m);
    for (Eigen::Index i = 0; i < m; ++i) z[i] = normal(rng);
    const Eigen::VectorXd x = llt.matrixL() * z;
    for (Eigen::Index i = 0; i < m; ++i) outer[walls_[static_cast<std::size_t>(i)]] = x[i];
  }

  const DirichletProblem problem(d, out.pinned);
  const Eigen::VectorXd layer = problem.extend(outer);
  out.field.values = ht + layer + problem.sample_noise(rng);
  out.field.seed = seed;
  for (int v : d.boundary_cycle()) out.field.boundary_data.push_back(out.field.values[v]);
  return out;
}

CouplingSample build_coupling(std::uint64_t seed, const CouplingOptions& options) {
  return CouplingBuilder(options).sample(seed);
}

std::vector<LatticeTestFunction> default_coupling_test_functions(const TgDomain& domain) {
  return {vertex_test_function(domain, {-3.0, 3.0}, 1.0), vertex_test_function(domain, {3.0, 3.0}, 1.0),
          vertex_test_function(domain, {0.0, 4.5}, 1.0)};
}

Report verify_coupling(const CouplingBuilder& builder, const std::vector<LatticeTestFunction>& rhos,
                       std::size_t runs, std::uint64_t seed, unsigned threads) {
  Report report;
  report.name = "coupling";
  const std::size_t nr = rhos.size();
  std::vector<double> pairings(runs * nr, 0.0);
  parallel_for(runs, threads, [&](std::size_t r) {
    const auto s = builder.sample(seed, r);
    for (std::size_t j = 0; j < nr; ++j) pairings[r * nr + j] = rhos[j].pairing(s.field.values);
  });
  const double lambda = builder.options().lambda;
  auto& per = report.details["test_functions"] = nlohmann::json::array();
  for (std::size_t j = 0; j < nr; ++j) {
    stats::RunningStats s;
    for (std::size_t r = 0; r < runs; ++r) s.push(pairings[r * nr + j]);
    const double e0 = energy(rhos[j], SelfEnergy::Cell);
    double mean0 = 0.0;
    for (std::size_t k = 0; k < rhos[j].points.size(); ++k) mean0 += rhos[j].weights[k] * h_t_eval(rhos[j].points[k], 0.0, lambda);
    const double ratio = s.variance() / e0 - 1.0;
    const double ratio_se = std::sqrt(2.0 / static_cast<double>(runs - 1));
    const double zmean = (s.mean() - mean0) / s.std_error();
    const std::string tag = "rho" + std::to_string(j);
    report.add(tag + " Var/E0 - 1", ratio, ratio_se, 0.05, std::abs(ratio) <= 0.05);
    report.add(tag + " mean z-score", zmean, 1.0, 3.0, std::abs(zmean) < 3.0);
    per.push_back({{"variance", s.variance()}, {"E0", e0}, {"mean", s.mean()}, {"predicted_mean", mean0},
                   {"support", rhos[j].points.size()}});
  }
  report.details["runs"] = runs;
  return report;
}

}  // namespace gffsle
