#include "gffsle/conformal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <nlohmann/json.hpp>

#include "gffsle/rng.hpp"

namespace gffsle {

namespace {

using Real = long double;
using LPoint = std::complex<Real>;

constexpr LPoint kI{0.0L, 1.0L};

// Branch of sqrt(w^2 + b^2) that keeps the side of the imaginary axis; points on
// the slit itself (and its foot) go left, which is the domain's side.
LPoint unzip(LPoint w, Real b) {
  LPoint r = std::sqrt(w * w + b * b);
  if (w.real() < 0.0L || (w.real() == 0.0L && r.imag() == 0.0L)) r = -r;
  return r;
}

LPoint rezip(LPoint g, Real b) {
  LPoint r = std::sqrt(g * g - b * b);
  if ((g.real() < 0.0L) != (r.real() < 0.0L) && r.real() != 0.0L) r = -r;
  if (r.imag() < 0.0L) r = -r;
  return r;
}

LPoint widen(Point z) { return {z.real(), z.imag()}; }
Point narrow(LPoint z) { return {static_cast<double>(z.real()), static_cast<double>(z.imag())}; }

// long double as a (hi, lo) pair of doubles
nlohmann::json split(Real x) {
  const double hi = static_cast<double>(x);
  return {hi, static_cast<double>(x - hi)};
}
Real join(const nlohmann::json& j) { return static_cast<Real>(j.at(0).get<double>()) + j.at(1).get<double>(); }

}  // namespace

ConformalMap::LPoint ConformalMap::open(LPoint z) const {
  return kI * std::sqrt((z - b1_) / (z - b0_));
}

ConformalMap::LPoint ConformalMap::unopen(LPoint v) const {
  const LPoint m = -(v * v);
  return (m * b0_ - b1_) / (m - 1.0L);
}

Point ConformalMap::map(Point z) const {
  LPoint w = open(widen(z));
  for (const auto& s : slits_) w = unzip(w / (1.0L - s.alpha * w), s.b);
  const LPoint t = w / (1.0L - beta_ * w);
  return narrow(scale_ * (shift_ - t) * (shift_ + t));
}

Point ConformalMap::inverse(Point u) const {
  LPoint t = kI * std::sqrt(widen(u) / scale_ - shift_ * shift_);
  LPoint w = t / (1.0L + beta_ * t);
  for (auto it = slits_.rbegin(); it != slits_.rend(); ++it) {
    const LPoint v = rezip(w, it->b);
    w = v / (1.0L + it->alpha * v);
  }
  return narrow(unopen(w));
}

Point ConformalMap::derivative(Point z) const {
  const LPoint zl = widen(z);
  const LPoint sm = std::sqrt((zl - b1_) / (zl - b0_));
  const LPoint dm = (b1_ - b0_) / ((zl - b0_) * (zl - b0_));
  LPoint d = kI * dm / (2.0L * sm);
  LPoint w = kI * sm;
  for (const auto& s : slits_) {
    const LPoint den = 1.0L - s.alpha * w;
    const LPoint v = w / den;
    const LPoint g = unzip(v, s.b);
    d *= v / (g * den * den);
    w = g;
  }
  const LPoint den = 1.0L - beta_ * w;
  const LPoint t = w / den;
  return narrow(d * scale_ * (-2.0L) * t / (den * den));
}

double ConformalMap::boundary_image(int cycle_position) const {
  if (cycle_position < 0 || static_cast<std::size_t>(cycle_position) >= vertex_nodes_.size()) {
    throw DomainError("boundary_image: cycle position out of range");
  }
  return node_images_[vertex_nodes_[static_cast<std::size_t>(cycle_position)]];
}

PlanarMap ConformalMap::as_planar_map() const {
  return {[this](Point z) { return map(z); }, [this](Point z) { return derivative(z); }};
}

nlohmann::json ConformalMap::to_json() const {
  nlohmann::json j;
  j["b0"] = {split(b0_.real()), split(b0_.imag())};
  j["b1"] = {split(b1_.real()), split(b1_.imag())};
  j["beta"] = split(beta_);
  j["shift"] = split(shift_);
  j["scale"] = split(scale_);
  auto& slits = j["slits"] = nlohmann::json::array();
  for (const auto& s : slits_) slits.push_back({split(s.alpha), split(s.b)});
  auto& nodes = j["nodes"] = nlohmann::json::array();
  for (const auto& z : nodes_) nodes.push_back({z.real(), z.imag()});
  j["node_images"] = node_images_;
  j["vertex_nodes"] = vertex_nodes_;
  return j;
}

ConformalMap ConformalMap::from_json(const nlohmann::json& j) {
  ConformalMap m;
  m.b0_ = {join(j.at("b0").at(0)), join(j.at("b0").at(1))};
  m.b1_ = {join(j.at("b1").at(0)), join(j.at("b1").at(1))};
  m.beta_ = join(j.at("beta"));
  m.shift_ = join(j.at("shift"));
  m.scale_ = join(j.at("scale"));
  for (const auto& s : j.at("slits")) m.slits_.push_back({join(s.at(0)), join(s.at(1))});
  if (j.contains("nodes")) {
    for (const auto& z : j.at("nodes")) m.nodes_.emplace_back(z.at(0).get<double>(), z.at(1).get<double>());
    // +inf is written as null
    for (const auto& v : j.at("node_images")) {
      m.node_images_.push_back(v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>());
    }
    m.vertex_nodes_ = j.at("vertex_nodes").get<std::vector<std::size_t>>();
  }
  return m;
}

ConformalMap map_domain_to_H(const TgDomain& domain, int subdiv, int refine) {
  if (subdiv < 1 || refine < 0) throw DomainError("map_domain_to_H: subdiv must be positive, refine nonnegative");
  subdiv += subdiv % 2;
  const auto& cycle = domain.boundary_cycle();
  const auto m = cycle.size();
  const auto ypos = static_cast<std::size_t>(domain.y_edge_position());
  const auto xpos = static_cast<std::size_t>(domain.x_edge_position());
  const auto plus = domain.arc_plus();
  const int mid_vertex = plus[(plus.size() - 1) / 2];

  // optional geometric refinement of the closing half-edge towards y
  std::vector<double> fractions, closing;
  for (int k = 1; k <= subdiv / 2; ++k) fractions.push_back(static_cast<double>(k) / (subdiv / 2));
  closing = fractions;
  for (int r = 1; r <= refine; ++r) closing.push_back(std::ldexp(fractions.front(), -r));
  std::sort(closing.begin(), closing.end());

  ConformalMap out;
  std::vector<Point>& nodes = out.nodes_;
  const Point y = domain.y_point();
  const Point a_pt = domain.position(cycle[ypos]);
  const Point b_pt = domain.position(cycle[(ypos + 1) % m]);
  std::size_t x_node = 0, mid_node = 0;
  nodes.push_back(y);
  for (double f : fractions) nodes.push_back(y + f * (b_pt - y));
  out.vertex_nodes_.assign(m, 0);
  out.vertex_nodes_[(ypos + 1) % m] = nodes.size() - 1;
  for (std::size_t j = 1; j < m; ++j) {
    const std::size_t pos = (ypos + j) % m;
    const Point p = domain.position(cycle[pos]);
    const Point q = domain.position(cycle[(pos + 1) % m]);
    if (cycle[pos] == mid_vertex) mid_node = nodes.size() - 1;
    for (int k = 1; k <= subdiv; ++k) {
      nodes.push_back(p + (static_cast<double>(k) / subdiv) * (q - p));
      if (pos == xpos && 2 * k == subdiv) x_node = nodes.size() - 1;
    }
    out.vertex_nodes_[(pos + 1) % m] = nodes.size() - 1;
  }
  for (auto it = closing.rbegin() + 1; it != closing.rend(); ++it) nodes.push_back(y + *it * (a_pt - y));
  if (x_node == 0 || mid_node == 0) throw DomainError("map_domain_to_H: arc endpoints not found on the boundary");

  const std::size_t n = nodes.size();
  out.b0_ = widen(nodes[0]);
  out.b1_ = widen(nodes[1]);
  std::vector<LPoint> img(n);
  for (std::size_t k = 1; k < n; ++k) img[k] = out.open(widen(nodes[k]));
  img[1] = {0.0L, 0.0L};
  Real beta = 0.0L;
  out.slits_.reserve(n - 2);
  for (std::size_t k = 2; k < n; ++k) {
    const LPoint q = img[k];
    if (!std::isfinite(q.real()) || !std::isfinite(q.imag()) || !(q.imag() > 0.0L)) {
      throw NumericalError("map_domain_to_H: boundary node left the half-plane, refine the boundary");
    }
    const Real r2 = std::norm(q);
    const ConformalMap::Slit s{q.real() / r2, r2 / q.imag()};
    out.slits_.push_back(s);
    for (std::size_t j = 1; j < n; ++j) {
      if (j != k) img[j] = unzip(img[j] / (1.0L - s.alpha * img[j]), s.b);
    }
    img[k] = {0.0L, 0.0L};
    beta -= s.alpha;
    beta /= std::sqrt(1.0L + s.b * s.b * beta * beta);
  }
  out.beta_ = beta;
  auto straighten = [&](LPoint w) { return (w / (1.0L - beta * w)).real(); };
  out.shift_ = straighten(img[x_node]);
  auto lift = [&](LPoint w) {
    const Real t = straighten(w);
    return (out.shift_ - t) * (out.shift_ + t);
  };
  const Real p = lift(img[mid_node]);
  if (!(p > 0.0L)) throw NumericalError("map_domain_to_H: normalization failed (arc orientation)");
  out.scale_ = 1.0L / p;
  out.node_images_.assign(n, std::numeric_limits<double>::infinity());
  for (std::size_t k = 1; k < n; ++k) out.node_images_[k] = static_cast<double>(out.scale_ * lift(img[k]));
  return out;
}

HarmonicMeasureEstimate harmonic_measure_mc(const TgDomain& domain, Point z, int walks, std::uint64_t seed,
                                            double eps) {
  if (walks < 1) throw DomainError("harmonic_measure_mc: walks must be positive");
  if (!domain.contains(z)) throw DomainError("harmonic_measure_mc: start point outside the domain");
  const auto poly = domain.boundary_polygon();
  const auto& cycle = domain.boundary_cycle();
  const std::size_t m = poly.size();
  auto nearest = [&](Point p, std::size_t& seg, double& s) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
      const Point a = poly[i], ab = poly[(i + 1) % m] - a;
      const double t = std::clamp(((p - a) * std::conj(ab)).real() / std::norm(ab), 0.0, 1.0);
      const double d = std::abs(p - (a + t * ab));
      if (d < best) {
        best = d;
        seg = i;
        s = t;
      }
    }
    return best;
  };
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  const double tol = eps * domain.scale();
  int hits = 0;
  for (int w = 0; w < walks; ++w) {
    Point p = z;
    std::size_t seg = 0;
    double s = 0.0;
    for (double d = nearest(p, seg, s); d > tol; d = nearest(p, seg, s)) p += std::polar(d, angle(rng));
    const int v = s < 0.5 ? cycle[seg] : cycle[(seg + 1) % m];
    if (domain.in_arc_plus(v)) ++hits;
  }
  HarmonicMeasureEstimate est;
  est.value = static_cast<double>(hits) / walks;
  est.std_error = std::sqrt(std::max(est.value * (1.0 - est.value), 1e-12) / walks);
  return est;
}

}  // namespace gffsle
