#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "gffsle/common.hpp"

namespace gffsle {

/// Samples (t_k, W_k) of a driving function, interpolated linearly in between.
struct DrivingFunction {
  std::vector<double> times;
  std::vector<double> values;

  std::size_t size() const { return times.size(); }
  double horizon() const { return times.empty() ? 0.0 : times.back(); }
  /// Throws DomainError unless times start at 0, increase strictly and values are finite.
  void validate() const;
  /// Linear interpolation; t outside [0, horizon] is an error.
  double operator()(double t) const;
  /// Resampled on the grid k*delta, k = 0..floor(horizon/delta).
  DrivingFunction resampled(double delta) const;
};

/// Points of a curve in the closed upper half-plane, starting on R. `times` is
/// either empty or holds one capacity time per point.
struct HalfPlanePath {
  std::vector<Point> points;
  std::vector<double> times;
};

/// Vertical-slit map g(w) = c + sqrt((w-c)^2 + y^2): the conformal map of
/// H minus the segment [c, c+iy] onto H with g(w) = w + O(1/w). Its
/// half-plane capacity is y^2/4. The branch keeps Re(g - c) on the side of Re(w - c).
struct VerticalSlit {
  double c = 0.0;
  double y = 0.0;

  Point apply(Point w) const;
  Point inverse(Point u) const;
  Point derivative(Point w) const;
  double capacity() const { return 0.25 * y * y; }
};

/// Solution of dg/dt = 2/(g - W_t), g_0(z) = z, integrated with dopri5 at
/// absolute and relative tolerance 1e-10 over each linear piece of W.
/// Throws SwallowedError if |g_t - W_t| < 1e-7 at the requested time t. A point
/// met by the tip earlier is carried on to its image on the real line.
Point solve_forward(const DrivingFunction& w, Point z, double t);

/// Batch version that also tracks g_t'(z) via d(log g')/dt = -2/(g - W)^2.
/// Steps from one sample time of W to the next.
class LoewnerFlow {
 public:
  LoewnerFlow(const DrivingFunction& w, std::span<const Point> z, double tolerance = 1e-10);

  /// Advances to the next sample time; false once the horizon is reached.
  bool step();
  std::size_t index() const { return k_; }
  double time() const { return w_->times[k_]; }
  double driving() const { return w_->values[k_]; }
  std::size_t size() const { return n_; }
  Point g(std::size_t i) const;
  Point derivative(std::size_t i) const;

 private:
  const DrivingFunction* w_;
  std::size_t n_;
  std::size_t k_ = 0;
  double tol_;
  std::vector<double> state_;  // per point: (g - W)^2 and log g'
};

/// Exact Loewner chain of the driving that jumps to W_{k+1} at the start of
/// step k and then stays constant: g <- W_{k+1} + sqrt((g - W_{k+1})^2 + 4 dt).
/// trace_from_driving with one substep inverts the same chain, so the traced
/// path is exactly the hull of this flow.
class SlitFlow {
 public:
  SlitFlow(const DrivingFunction& w, std::span<const Point> z);

  bool step();
  std::size_t index() const { return k_; }
  double time() const { return w_->times[k_]; }
  double driving() const { return w_->values[k_]; }
  std::size_t size() const { return g_.size(); }
  Point g(std::size_t i) const { return g_[i]; }
  Point derivative(std::size_t i) const { return dg_[i]; }

 private:
  const DrivingFunction* w_;
  std::size_t k_ = 0;
  std::vector<Point> g_;
  std::vector<Point> dg_;
};

/// Capacity of the hull of a simple path from R (sum of slit capacities of
/// the zipper composition through every point). Throws DomainError on a
/// self-crossing polyline.
double halfplane_capacity(const HalfPlanePath& path);

/// Vertical-slit zipper. Each point is pushed through the slits chosen so far;
/// it becomes the next node once its capacity increment Im^2/4 reaches
/// `delta` (the last point is always taken). Stops after time t_max.
/// Throws DomainError if a point lands strictly below R (hull collapse).
DrivingFunction extract_driving(const HalfPlanePath& path, double delta,
                                double t_max = std::numeric_limits<double>::infinity());

/// gamma(t_k) = g_{t_k}^{-1}(W_{t_k}) for every sample time of W, using
/// `substeps` vertical slits per sample interval with linearly interpolated
/// driving values. With one substep this is the exact inverse of
/// extract_driving on the same grid. Throws NumericalError if a point leaves
/// the closed half-plane.
HalfPlanePath trace_from_driving(const DrivingFunction& w, int substeps = 1);

/// sup |W1(t) - W2(t)| over the sample times of both functions in [0, t_max],
/// each interpolated linearly.
double driving_sup_distance(const DrivingFunction& w1, const DrivingFunction& w2, double t_max);

/// W_{k delta} = 2 * Brownian motion, k = 0..round(horizon/delta), from stream (seed, index).
DrivingFunction sample_sle4_driving(double horizon, double delta, std::uint64_t seed, std::uint64_t index = 0);

/// |Psi(z) - Psi(w)| with Psi(z) = (z - i)/(z + i); infinite inputs map to 1.
double d_star(Point z, Point w);

/// max_k d_star(path1[k], path2[k]); the time grids must agree.
double d_strong(const HalfPlanePath& path1, const HalfPlanePath& path2);

}  // namespace gffsle
