#pragma once

#include <array>
#include <functional>
#include <limits>
#include <vector>

#include "gffsle/field.hpp"
#include "gffsle/lattice.hpp"

namespace gffsle {

/// Chordal dual path from x towards y. Step k crosses the primal edge
/// crossed[k] = (minus vertex, plus vertex); the plus vertex is on the right.
struct InterfacePath {
  std::vector<Point> dual_points;              // x, triangle centroids..., y when complete
  std::vector<std::array<int, 2>> crossed;     // primal edges crossed, in order
  std::vector<int> triangles;                  // triangles entered, in order
  std::vector<int> left_vertices;              // V-, sorted
  std::vector<int> right_vertices;             // V+, sorted
  bool complete = false;                       // reached the y edge

  std::size_t num_steps() const { return triangles.size(); }
  /// Points where the linear interpolant of `values` crosses `level` on each
  /// crossed edge.
  std::vector<Point> level_crossings(const TgDomain& domain, const Eigen::VectorXd& values,
                                     double level = 0.0) const;
};

/// Sign oracle for the exploration: true when the vertex counts as plus.
using SignQuery = std::function<bool(int)>;

/// Step-by-step exploration of the interface. Only vertices the walk actually
/// reaches are queried, so the explored prefix depends on nothing else.
class InterfaceExplorer {
 public:
  /// Boundary vertices are classified by their arc and never queried.
  InterfaceExplorer(const TgDomain& domain, SignQuery interior_sign);

  /// Crosses one more triangle; false once the y edge has been reached.
  bool step();
  bool done() const { return path_.complete; }
  const InterfacePath& path() const { return path_; }
  /// Vertices whose sign has been revealed (interior ones queried, boundary ones
  /// adjacent to the walk).
  const std::vector<int>& revealed() const { return revealed_; }
  /// Number of revealed vertices.
  std::size_t num_revealed() const { return revealed_.size(); }
  /// Current edge (minus, plus) the walk sits on.
  std::array<int, 2> front() const { return edge_; }

  InterfacePath finish(std::size_t max_steps = std::numeric_limits<std::size_t>::max());

 private:
  bool is_plus(int v);
  const TgDomain* domain_;
  SignQuery sign_;
  std::array<int, 2> edge_;
  InterfacePath path_;
  std::vector<char> state_;         // 0 unknown, 1 minus, 2 plus
  std::vector<char> seen_triangle_;
  std::vector<int> revealed_;
};

struct TraceOptions {
  double level = 0.0;
  std::size_t max_steps = std::numeric_limits<std::size_t>::max();
};

/// Interface of {field > level} and {field < level} from x to y. Boundary
/// values must lie above the level on arc_plus and below it on arc_minus
/// (DomainError otherwise); an interior value equal to the level is a tie and
/// raises DomainError.
InterfacePath trace_interface(const TgDomain& domain, const FieldSample& field, const TraceOptions& options = {});

/// h_T - F_T at probe vertices: h_T interpolates the field harmonically off
/// V- u V+ u boundary, F_T interpolates -lambda on V-, +lambda on V+ and the
/// boundary data. One factorization serves all probes.
class HeightGap {
 public:
  /// lambda <= 0 means: read it off the boundary data, which must be +-lambda.
  HeightGap(const TgDomain& domain, const FieldSample& field, const InterfacePath& path, double lambda = 0.0);

  /// Throws DomainError for probes on the boundary or on the interface.
  double operator()(int probe) const;
  const Eigen::VectorXd& interpolated_field() const { return h_t_; }
  const Eigen::VectorXd& interpolated_arcs() const { return f_t_; }
  double lambda() const { return lambda_; }

 private:
  const TgDomain* domain_;
  std::vector<char> pinned_;
  Eigen::VectorXd h_t_;
  Eigen::VectorXd f_t_;
  double lambda_;
};

double height_gap_statistic(const TgDomain& domain, const FieldSample& field, const InterfacePath& path,
                            int probe);

/// Graph distance (lattice steps) from every vertex to the nearest vertex of `sources`.
std::vector<int> graph_distance(const TgDomain& domain, const std::vector<int>& sources);

}  // namespace gffsle
