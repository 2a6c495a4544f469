#include "gffsle/loewner.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <boost/numeric/odeint.hpp>

#include "gffsle/rng.hpp"

namespace gffsle {

namespace odeint = boost::numeric::odeint;

void DrivingFunction::validate() const {
  if (times.empty() || times.size() != values.size()) {
    throw DomainError("DrivingFunction: times and values must be nonempty and of equal length");
  }
  if (times.front() != 0.0) throw DomainError("DrivingFunction: times must start at 0");
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!std::isfinite(values[k]) || !std::isfinite(times[k])) throw DomainError("DrivingFunction: non-finite sample");
    if (k > 0 && !(times[k] > times[k - 1])) throw DomainError("DrivingFunction: times must increase strictly");
  }
}

double DrivingFunction::operator()(double t) const {
  if (times.empty()) throw DomainError("DrivingFunction: empty");
  const double eps = 1e-12 * std::max(1.0, horizon());
  if (t < -eps || t > horizon() + eps) throw DomainError("DrivingFunction: time outside [0, horizon]");
  if (t <= times.front()) return values.front();
  if (t >= times.back()) return values.back();
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const auto k = static_cast<std::size_t>(it - times.begin());
  const double s = (t - times[k - 1]) / (times[k] - times[k - 1]);
  return values[k - 1] + s * (values[k] - values[k - 1]);
}

DrivingFunction DrivingFunction::resampled(double delta) const {
  if (!(delta > 0.0)) throw DomainError("DrivingFunction::resampled: delta must be positive");
  DrivingFunction out;
  const auto n = static_cast<std::size_t>(std::floor(horizon() / delta + 1e-9));
  for (std::size_t k = 0; k <= n; ++k) {
    const double t = std::min(horizon(), static_cast<double>(k) * delta);
    out.times.push_back(t);
    out.values.push_back((*this)(t));
  }
  return out;
}

Point VerticalSlit::apply(Point w) const {
  const Point z = w - c;
  Point s = std::sqrt(z * z + y * y);
  if (z.real() < 0.0) s = -s;
  return c + s;
}

Point VerticalSlit::inverse(Point u) const {
  const Point z = u - c;
  return c + std::sqrt(z - y) * std::sqrt(z + y);
}

Point VerticalSlit::derivative(Point w) const {
  return (w - c) / (apply(w) - c);
}

namespace {

using State = std::vector<double>;

// Root r of u = (g - W)^2 in the closed upper half-plane.
Point tip_offset(Point u) {
  Point r = std::sqrt(u);
  return r.imag() < 0.0 ? -r : r;
}

// The state carries u = (g - W)^2, for which du/dt = 4 - 2 W' (g - W) stays
// regular where g meets the driving point, and log g' with
// d(log g')/dt = -2/u. One linear piece of W at a time.
void integrate_piece(State& x, double t0, double t1, double slope, double tol) {
  if (!(t1 > t0)) return;
  const std::size_t n = x.size() / 4;
  auto rhs = [&](const State& s, State& ds, double) {
    for (std::size_t i = 0; i < n; ++i) {
      const Point u{s[4 * i], s[4 * i + 1]};
      const Point du = 4.0 - 2.0 * slope * tip_offset(u);
      const Point dlog = -2.0 / u;
      ds[4 * i] = du.real();
      ds[4 * i + 1] = du.imag();
      ds[4 * i + 2] = dlog.real();
      ds[4 * i + 3] = dlog.imag();
    }
  };
  auto stepper = odeint::make_controlled<odeint::runge_kutta_dopri5<State>>(tol, tol);
  odeint::integrate_adaptive(stepper, rhs, x, t0, t1, 0.25 * (t1 - t0));
}

// |g - W| below 1e-7, or a log-derivative that has blown up
void check_swallowed(const State& x, double t, bool with_derivative) {
  for (std::size_t i = 0; i < x.size() / 4; ++i) {
    const bool hit = !(std::hypot(x[4 * i], x[4 * i + 1]) >= 1e-14);
    const bool blown = with_derivative && !(std::isfinite(x[4 * i + 2]) && std::isfinite(x[4 * i + 3]));
    if (hit || blown) throw SwallowedError("Loewner flow: point swallowed by the hull", t);
  }
}

State initial_state(std::span<const Point> z, double w0) {
  State x(4 * z.size(), 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (!(z[i].imag() > 0.0)) throw DomainError("Loewner flow: points must lie in the open upper half-plane");
    const Point u = (z[i] - w0) * (z[i] - w0);
    x[4 * i] = u.real();
    x[4 * i + 1] = u.imag();
  }
  return x;
}

}  // namespace

Point solve_forward(const DrivingFunction& w, Point z, double t) {
  w.validate();
  if (t < 0.0 || t > w.horizon() * (1.0 + 1e-12)) throw DomainError("solve_forward: t outside the driving horizon");
  if (t == 0.0) {
    if (!(z.imag() > 0.0)) throw DomainError("Loewner flow: points must lie in the open upper half-plane");
    return z;
  }
  const Point zs[1] = {z};
  State x = initial_state(zs, w.values.front());
  double wt = w.values.front();
  for (std::size_t k = 0; k + 1 < w.size() && w.times[k] < t; ++k) {
    const double t1 = std::min(t, w.times[k + 1]);
    const double slope = (w.values[k + 1] - w.values[k]) / (w.times[k + 1] - w.times[k]);
    integrate_piece(x, w.times[k], t1, slope, 1e-10);
    wt = w.values[k] + slope * (t1 - w.times[k]);
  }
  // only the endpoint: a point met by the tip earlier continues to its boundary image
  check_swallowed(x, t, false);
  return wt + tip_offset({x[0], x[1]});
}

LoewnerFlow::LoewnerFlow(const DrivingFunction& w, std::span<const Point> z, double tolerance)
    : w_(&w), n_(z.size()), tol_(tolerance) {
  w.validate();
  state_ = initial_state(z, w.values.front());
}

bool LoewnerFlow::step() {
  if (k_ + 1 >= w_->size()) return false;
  const double t0 = w_->times[k_], t1 = w_->times[k_ + 1];
  const double slope = (w_->values[k_ + 1] - w_->values[k_]) / (t1 - t0);
  integrate_piece(state_, t0, t1, slope, tol_);
  ++k_;
  check_swallowed(state_, t1, true);
  return true;
}

Point LoewnerFlow::g(std::size_t i) const {
  return w_->values[k_] + tip_offset({state_[4 * i], state_[4 * i + 1]});
}

Point LoewnerFlow::derivative(std::size_t i) const {
  return std::exp(Point{state_[4 * i + 2], state_[4 * i + 3]});
}

SlitFlow::SlitFlow(const DrivingFunction& w, std::span<const Point> z)
    : w_(&w), g_(z.begin(), z.end()), dg_(z.size(), Point{1.0, 0.0}) {
  w.validate();
  for (Point p : z) {
    if (p.imag() < 0.0) throw DomainError("SlitFlow: points must lie in the closed upper half-plane");
  }
}

bool SlitFlow::step() {
  if (k_ + 1 >= w_->size()) return false;
  const VerticalSlit s{w_->values[k_ + 1], 2.0 * std::sqrt(w_->times[k_ + 1] - w_->times[k_])};
  for (std::size_t i = 0; i < g_.size(); ++i) {
    const Point next = s.apply(g_[i]);
    dg_[i] *= (g_[i] - s.c) / (next - s.c);
    g_[i] = next;
  }
  ++k_;
  return true;
}

namespace {

double cross(Point a, Point b) { return a.real() * b.imag() - a.imag() * b.real(); }

bool segments_cross(Point p1, Point p2, Point q1, Point q2) {
  const double d1 = cross(p2 - p1, q1 - p1), d2 = cross(p2 - p1, q2 - p1);
  const double d3 = cross(q2 - q1, p1 - q1), d4 = cross(q2 - q1, p2 - q1);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

Point push_through(const std::vector<VerticalSlit>& slits, Point p) {
  for (const auto& s : slits) p = s.apply(p);
  return p;
}

}  // namespace

double halfplane_capacity(const HalfPlanePath& path) {
  const auto& p = path.points;
  if (p.size() < 2) return 0.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    for (std::size_t j = i + 2; j + 1 < p.size(); ++j) {
      if (segments_cross(p[i], p[i + 1], p[j], p[j + 1])) {
        throw DomainError("halfplane_capacity: path crosses itself");
      }
    }
  }
  return extract_driving(path, 0.0).horizon();
}

DrivingFunction extract_driving(const HalfPlanePath& path, double delta, double t_max) {
  const auto& p = path.points;
  if (p.empty()) throw DomainError("extract_driving: empty path");
  if (!(delta >= 0.0)) throw DomainError("extract_driving: delta must be nonnegative");
  const double scale = std::max(1.0, std::abs(p.front()));
  if (std::abs(p.front().imag()) > 1e-9 * scale) throw DomainError("extract_driving: path must start on R");
  DrivingFunction out;
  out.times.push_back(0.0);
  out.values.push_back(p.front().real());
  std::vector<VerticalSlit> slits;
  double t = 0.0;
  for (std::size_t k = 1; k < p.size() && t < t_max; ++k) {
    const Point q = push_through(slits, p[k]);
    const double tol = 1e-9 * std::max(1.0, std::abs(q));
    if (!std::isfinite(q.real()) || !std::isfinite(q.imag())) throw NumericalError("extract_driving: non-finite image");
    if (q.imag() < -tol) throw DomainError("extract_driving: path touches R away from its tip (hull collapse)");
    if (q.imag() <= tol) continue;
    const double dt = 0.25 * q.imag() * q.imag();
    // increments of exactly delta arrive with rounding noise
    if (dt < delta * (1.0 - 1e-6) && k + 1 < p.size()) continue;
    slits.push_back({q.real(), q.imag()});
    t += dt;
    out.times.push_back(t);
    out.values.push_back(q.real());
  }
  return out;
}

HalfPlanePath trace_from_driving(const DrivingFunction& w, int substeps) {
  w.validate();
  if (substeps < 1) throw DomainError("trace_from_driving: substeps must be positive");
  std::vector<VerticalSlit> slits;
  slits.reserve((w.size() - 1) * static_cast<std::size_t>(substeps));
  HalfPlanePath path;
  path.points.push_back({w.values.front(), 0.0});
  path.times.push_back(0.0);
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    const double dt = (w.times[k + 1] - w.times[k]) / substeps;
    const double y = 2.0 * std::sqrt(dt);
    for (int j = 1; j <= substeps; ++j) {
      const double s = static_cast<double>(j) / substeps;
      slits.push_back({w.values[k] + s * (w.values[k + 1] - w.values[k]), y});
    }
    Point z{slits.back().c, slits.back().y};
    for (auto it = slits.rbegin() + 1; it != slits.rend(); ++it) z = it->inverse(z);
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag()) || z.imag() < -1e-12) {
      throw NumericalError("trace_from_driving: tip left the half-plane, refine the step");
    }
    path.points.push_back(z);
    path.times.push_back(w.times[k + 1]);
  }
  return path;
}

DrivingFunction sample_sle4_driving(double horizon, double delta, std::uint64_t seed, std::uint64_t index) {
  if (!(horizon > 0.0) || !(delta > 0.0)) throw DomainError("sample_sle4_driving: horizon and step must be positive");
  const auto n = static_cast<std::size_t>(std::llround(horizon / delta));
  if (n == 0) throw DomainError("sample_sle4_driving: step longer than horizon");
  Rng rng = make_rng(seed, index);
  std::normal_distribution<double> normal;
  DrivingFunction w;
  w.times.reserve(n + 1);
  w.values.reserve(n + 1);
  w.times.push_back(0.0);
  w.values.push_back(0.0);
  const double sd = 2.0 * std::sqrt(delta);
  for (std::size_t k = 1; k <= n; ++k) {
    w.times.push_back(static_cast<double>(k) * delta);
    w.values.push_back(w.values.back() + sd * normal(rng));
  }
  return w;
}

double driving_sup_distance(const DrivingFunction& w1, const DrivingFunction& w2, double t_max) {
  const double end = std::min({t_max, w1.horizon(), w2.horizon()});
  double d = 0.0;
  for (const auto* f : {&w1, &w2}) {
    for (double t : f->times) {
      if (t > end) break;
      d = std::max(d, std::abs(w1(t) - w2(t)));
    }
  }
  return d;
}

double d_star(Point z, Point w) {
  auto psi = [](Point p) {
    if (std::isinf(p.real()) || std::isinf(p.imag())) return Point{1.0, 0.0};
    return (p - Point{0.0, 1.0}) / (p + Point{0.0, 1.0});
  };
  return std::abs(psi(z) - psi(w));
}

double d_strong(const HalfPlanePath& path1, const HalfPlanePath& path2) {
  if (path1.points.size() != path2.points.size() || path1.times.size() != path2.times.size()) {
    throw DomainError("d_strong: paths must share a time grid (resample first)");
  }
  for (std::size_t k = 0; k < path1.times.size(); ++k) {
    if (std::abs(path1.times[k] - path2.times[k]) > 1e-12 * std::max(1.0, std::abs(path1.times[k]))) {
      throw DomainError("d_strong: paths must share a time grid (resample first)");
    }
  }
  double d = 0.0;
  for (std::size_t k = 0; k < path1.points.size(); ++k) d = std::max(d, d_star(path1.points[k], path2.points[k]));
  return d;
}

}  // namespace gffsle
