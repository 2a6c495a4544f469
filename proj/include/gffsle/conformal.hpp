#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "gffsle/field.hpp"
#include "gffsle/lattice.hpp"

namespace gffsle {

/// Conformal map of a TG-domain onto H built by the geodesic zipper.
///
/// Boundary nodes b_0 = y, b_1, ..., b_{N-1} run counterclockwise; the lattice
/// edges are subdivided evenly. z -> i sqrt((z - b_1)/(z - b_0)) opens the
/// domain at y. Each further node q is unzipped by z -> sqrt(w^2 + b^2) with
/// w = z/(1 - alpha z), which sends the circular arc from 0 to q orthogonal to R
/// onto [0, ib] and then onto R. A last Moebius map sends the image of y to
/// infinity, straightening the closing edge, and t -> s (t_x - t)(t_x + t)
/// with s > 0 opens the plane so that x -> 0 and the middle vertex of arc_plus -> 1.
class ConformalMap {
 public:
  Point map(Point z) const;
  Point inverse(Point w) const;
  Point derivative(Point z) const;

  PlanarMap as_planar_map() const;

  const std::vector<Point>& nodes() const { return nodes_; }
  /// Real images of the nodes (node 0 maps to infinity and is reported as +inf).
  const std::vector<double>& node_images() const { return node_images_; }
  /// Image of the boundary vertex at a cycle position, from the tracked node
  /// images (map() itself is meant for interior points).
  double boundary_image(int cycle_position) const;
  std::size_t num_slits() const { return slits_.size(); }

  nlohmann::json to_json() const;
  static ConformalMap from_json(const nlohmann::json& j);

 private:
  friend ConformalMap map_domain_to_H(const TgDomain&, int, int);
  // the composition runs in extended precision: points near x are crowded
  // into a tiny interval before the final squaring
  using Real = long double;
  using LPoint = std::complex<Real>;
  struct Slit {
    Real alpha = 0.0;  // 1/a, a the far end of the arc's circle on R
    Real b = 0.0;
  };
  LPoint open(LPoint z) const;  // z -> i sqrt(M(z))
  LPoint unopen(LPoint v) const;
  LPoint b0_, b1_;
  std::vector<Slit> slits_;
  Real beta_ = 0.0;   // 1/(image of y) after the last slit
  Real shift_ = 0.0;  // image of x before squaring
  Real scale_ = 1.0;
  std::vector<Point> nodes_;
  std::vector<double> node_images_;
  std::vector<std::size_t> vertex_nodes_;  // node index per boundary-cycle position
};

/// `subdiv` nodes per lattice edge (rounded up to even so the arc endpoints
/// are nodes), `refine` extra geometric levels on the closing half-edge at y.
ConformalMap map_domain_to_H(const TgDomain& domain, int subdiv = 4, int refine = 0);

/// Monte Carlo harmonic measure of arc_plus seen from z: walk-on-spheres
/// Brownian motion stopped within `eps` of the boundary.
struct HarmonicMeasureEstimate {
  double value = 0.0;
  double std_error = 0.0;
};
HarmonicMeasureEstimate harmonic_measure_mc(const TgDomain& domain, Point z, int walks, std::uint64_t seed,
                                            double eps = 1e-4);

}  // namespace gffsle
