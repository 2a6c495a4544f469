#include "gffsle/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace gffsle {

int direction_index(LatticeCoord d) {
  for (int k = 0; k < 6; ++k) {
    if (kLatticeDirections[static_cast<std::size_t>(k)] == d) return k;
  }
  return -1;
}

namespace {

double segment_distance(Point p, Point a, Point b) {
  const Point ab = b - a;
  const double len2 = std::norm(ab);
  double s = len2 > 0.0 ? ((p - a) * std::conj(ab)).real() / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  return std::abs(p - (a + s * ab));
}

}  // namespace

TgDomain TgDomain::from_sites(const std::vector<LatticeCoord>& sites, double scale, Point origin) {
  if (sites.empty()) throw DomainError("TgDomain: empty site set");
  if (!(scale > 0.0)) throw DomainError("TgDomain: scale must be positive");

  TgDomain d;
  d.scale_ = scale;
  d.origin_ = origin;

  int max_a = std::numeric_limits<int>::min(), max_b = std::numeric_limits<int>::min();
  d.min_a_ = std::numeric_limits<int>::max();
  d.min_b_ = std::numeric_limits<int>::max();
  for (auto s : sites) {
    d.min_a_ = std::min(d.min_a_, s.a);
    d.min_b_ = std::min(d.min_b_, s.b);
    max_a = std::max(max_a, s.a);
    max_b = std::max(max_b, s.b);
  }
  // one-site margin so neighbor lookups never leave the grid
  d.min_a_ -= 1;
  d.min_b_ -= 1;
  d.span_a_ = max_a - d.min_a_ + 2;
  d.span_b_ = max_b - d.min_b_ + 2;
  d.site_index_.assign(static_cast<std::size_t>(d.span_a_) * static_cast<std::size_t>(d.span_b_), -1);

  for (auto s : sites) {
    const auto slot = static_cast<std::size_t>(s.a - d.min_a_) * static_cast<std::size_t>(d.span_b_) +
                      static_cast<std::size_t>(s.b - d.min_b_);
    if (d.site_index_[slot] >= 0) continue;
    d.site_index_[slot] = static_cast<int>(d.coords_.size());
    d.coords_.push_back(s);
    d.positions_.push_back(origin + scale * lattice_point(s));
  }

  const std::size_t n = d.coords_.size();
  d.vertex_triangles_.assign(n, {-1, -1, -1, -1, -1, -1});
  auto add_triangle = [&](LatticeCoord p, LatticeCoord q, LatticeCoord r) {
    const int ip = d.find(p), iq = d.find(q), ir = d.find(r);
    if (ip < 0 || iq < 0 || ir < 0) return;
    const int t = static_cast<int>(d.triangles_.size());
    d.triangles_.push_back({ip, iq, ir});
    const std::array<std::pair<LatticeCoord, LatticeCoord>, 3> edges{{{p, q}, {q, r}, {r, p}}};
    const std::array<int, 3> ids{ip, iq, ir};
    for (std::size_t e = 0; e < 3; ++e) {
      const int k = direction_index(edges[e].second - edges[e].first);
      d.vertex_triangles_[static_cast<std::size_t>(ids[e])][static_cast<std::size_t>(k)] = t;
    }
  };
  for (std::size_t i = 0; i < n; ++i) {
    const LatticeCoord s = d.coords_[i];
    add_triangle(s, s + LatticeCoord{1, 0}, s + LatticeCoord{0, 1});
    // down triangle anchored at its bottom vertex
    add_triangle(s, s + LatticeCoord{0, 1}, s + LatticeCoord{-1, 1});
  }
  if (d.triangles_.empty()) throw DomainError("TgDomain: sites span no lattice triangle");

  d.neighbors_.assign(n, {-1, -1, -1, -1, -1, -1});
  d.interior_.assign(n, false);
  std::vector<int> next(n, -1);
  std::size_t boundary_edges = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int v = static_cast<int>(i);
    bool all_triangles = true;
    bool any_triangle = false;
    for (int k = 0; k < 6; ++k) {
      const int w = d.find(d.coords_[i] + kLatticeDirections[static_cast<std::size_t>(k)]);
      const int left = d.vertex_triangles_[i][static_cast<std::size_t>(k)];
      all_triangles = all_triangles && left >= 0;
      any_triangle = any_triangle || left >= 0;
      if (w < 0) continue;
      const int right = d.triangle_left_of(w, v);
      if (left >= 0 || right >= 0) d.neighbors_[i][static_cast<std::size_t>(k)] = w;
      if (left >= 0 && right < 0) {
        if (next[i] >= 0) throw DomainError("TgDomain: boundary is not a simple curve (pinched vertex)");
        next[i] = w;
        ++boundary_edges;
      }
    }
    if (!any_triangle) throw DomainError("TgDomain: site not covered by any lattice triangle");
    d.interior_[i] = all_triangles;
  }

  int start = -1;
  for (std::size_t i = 0; i < n; ++i) {
    if (next[i] >= 0) {
      start = static_cast<int>(i);
      break;
    }
  }
  if (start < 0) throw DomainError("TgDomain: no boundary");
  d.boundary_pos_.assign(n, -1);
  int v = start;
  do {
    if (d.boundary_pos_[static_cast<std::size_t>(v)] >= 0) {
      throw DomainError("TgDomain: boundary walk revisits a vertex");
    }
    d.boundary_pos_[static_cast<std::size_t>(v)] = static_cast<int>(d.boundary_cycle_.size());
    d.boundary_cycle_.push_back(v);
    v = next[static_cast<std::size_t>(v)];
    if (v < 0) throw DomainError("TgDomain: open boundary chain");
  } while (v != start);
  if (d.boundary_cycle_.size() != boundary_edges) {
    throw DomainError("TgDomain: boundary has several components (domain not simply connected)");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (d.interior_[i] && d.boundary_pos_[i] >= 0) d.interior_[i] = false;
    if (!d.interior_[i] && d.boundary_pos_[i] < 0) {
      throw DomainError("TgDomain: vertex is neither interior nor on the boundary cycle");
    }
    if (d.interior_[i]) d.interior_ids_.push_back(static_cast<int>(i));
  }
  d.plus_.assign(d.boundary_cycle_.size(), false);
  return d;
}

int TgDomain::find(LatticeCoord c) const {
  const int ia = c.a - min_a_, ib = c.b - min_b_;
  if (ia < 0 || ib < 0 || ia >= span_a_ || ib >= span_b_) return -1;
  return site_index_[static_cast<std::size_t>(ia) * static_cast<std::size_t>(span_b_) +
                     static_cast<std::size_t>(ib)];
}

int TgDomain::triangle_left_of(int u, int v) const {
  const int k = direction_index(coords_[static_cast<std::size_t>(v)] - coords_[static_cast<std::size_t>(u)]);
  if (k < 0) return -1;
  return vertex_triangles_[static_cast<std::size_t>(u)][static_cast<std::size_t>(k)];
}

int TgDomain::find_triangle(int u, int v, int w) const {
  const int t = triangle_left_of(u, v);
  if (t < 0) return -1;
  const auto& tri = triangles_[static_cast<std::size_t>(t)];
  return (tri[0] == w || tri[1] == w || tri[2] == w) ? t : -1;
}

bool TgDomain::in_arc_plus(int v) const {
  const int p = boundary_position(v);
  return p >= 0 && plus_[static_cast<std::size_t>(p)];
}

bool TgDomain::in_arc_minus(int v) const {
  const int p = boundary_position(v);
  return p >= 0 && !plus_[static_cast<std::size_t>(p)];
}

std::vector<int> TgDomain::arc_plus() const {
  std::vector<int> out;
  const auto m = boundary_cycle_.size();
  for (auto p = (static_cast<std::size_t>(x_pos_) + 1) % m;; p = (p + 1) % m) {
    out.push_back(boundary_cycle_[p]);
    if (p == static_cast<std::size_t>(y_pos_)) break;
  }
  return out;
}

std::vector<int> TgDomain::arc_minus() const {
  std::vector<int> out;
  const auto m = boundary_cycle_.size();
  for (auto p = (static_cast<std::size_t>(y_pos_) + 1) % m;; p = (p + 1) % m) {
    out.push_back(boundary_cycle_[p]);
    if (p == static_cast<std::size_t>(x_pos_)) break;
  }
  return out;
}

std::array<int, 2> TgDomain::x_edge() const {
  const auto m = boundary_cycle_.size();
  return {boundary_cycle_[static_cast<std::size_t>(x_pos_)],
          boundary_cycle_[(static_cast<std::size_t>(x_pos_) + 1) % m]};
}

std::array<int, 2> TgDomain::y_edge() const {
  const auto m = boundary_cycle_.size();
  return {boundary_cycle_[static_cast<std::size_t>(y_pos_)],
          boundary_cycle_[(static_cast<std::size_t>(y_pos_) + 1) % m]};
}

Point TgDomain::x_point() const {
  const auto e = x_edge();
  return 0.5 * (position(e[0]) + position(e[1]));
}

Point TgDomain::y_point() const {
  const auto e = y_edge();
  return 0.5 * (position(e[0]) + position(e[1]));
}

void TgDomain::set_arcs(int x_edge_position, int y_edge_position) {
  const int m = static_cast<int>(boundary_cycle_.size());
  if (x_edge_position < 0 || x_edge_position >= m || y_edge_position < 0 || y_edge_position >= m ||
      x_edge_position == y_edge_position) {
    throw DomainError("TgDomain::set_arcs: arc endpoints must be two distinct boundary edges");
  }
  x_pos_ = x_edge_position;
  y_pos_ = y_edge_position;
  plus_.assign(static_cast<std::size_t>(m), false);
  for (int p = (x_pos_ + 1) % m;; p = (p + 1) % m) {
    plus_[static_cast<std::size_t>(p)] = true;
    if (p == y_pos_) break;
  }
}

TgDomain TgDomain::with_arcs_swapped() const {
  TgDomain d = *this;
  d.set_arcs(y_pos_, x_pos_);
  return d;
}

std::vector<Point> TgDomain::boundary_polygon() const {
  std::vector<Point> poly;
  poly.reserve(boundary_cycle_.size());
  for (int v : boundary_cycle_) poly.push_back(position(v));
  return poly;
}

Point TgDomain::centroid() const {
  const auto poly = boundary_polygon();
  double area2 = 0.0;
  Point c{0.0, 0.0};
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Point p = poly[i], q = poly[(i + 1) % poly.size()];
    const double cross = p.real() * q.imag() - q.real() * p.imag();
    area2 += cross;
    c += cross * (p + q);
  }
  return c / (3.0 * area2);
}

bool TgDomain::contains(Point p) const {
  const auto poly = boundary_polygon();
  const double tol = 1e-12 * scale_;
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Point a = poly[j], b = poly[i];
    if (segment_distance(p, a, b) <= tol) return true;
    if ((b.imag() > p.imag()) != (a.imag() > p.imag())) {
      const double x = a.real() + (p.imag() - a.imag()) * (b.real() - a.real()) / (b.imag() - a.imag());
      if (p.real() < x) inside = !inside;
    }
  }
  return inside;
}

nlohmann::json TgDomain::to_json() const {
  nlohmann::json j;
  j["scale"] = scale_;
  j["origin"] = {origin_.real(), origin_.imag()};
  auto& verts = j["vertices"] = nlohmann::json::array();
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    verts.push_back({{"id", i},
                     {"a", coords_[i].a},
                     {"b", coords_[i].b},
                     {"x", positions_[i].real()},
                     {"y", positions_[i].imag()},
                     {"interior", static_cast<bool>(interior_[i])}});
  }
  j["boundary_cycle"] = boundary_cycle_;
  j["arc_plus"] = arc_plus();
  j["arc_minus"] = arc_minus();
  j["x_edge"] = x_edge();
  j["y_edge"] = y_edge();
  j["x_point"] = {x_point().real(), x_point().imag()};
  j["y_point"] = {y_point().real(), y_point().imag()};
  return j;
}

namespace {

void split_at_corners(TgDomain& d, const std::vector<LatticeCoord>& corners, double split_fraction) {
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw DomainError("split_fraction must lie in (0, 1)");
  }
  const int m = static_cast<int>(corners.size());
  const int k = std::clamp(static_cast<int>(std::lround(split_fraction * m)), 1, m - 1);
  const int x_pos = d.boundary_position(d.find(corners[0]));
  const int y_pos = d.boundary_position(d.find(corners[static_cast<std::size_t>(k)]));
  d.set_arcs(x_pos, y_pos);
}

}  // namespace

TgDomain build_rhombus_domain(int side_n, double split_fraction, double scale) {
  if (side_n < 2) throw DomainError("build_rhombus_domain: side_n must be at least 2");
  std::vector<LatticeCoord> sites;
  sites.reserve(static_cast<std::size_t>((side_n + 1) * (side_n + 1)));
  for (int a = 0; a <= side_n; ++a) {
    for (int b = 0; b <= side_n; ++b) sites.push_back({a, b});
  }
  TgDomain d = TgDomain::from_sites(sites, scale);
  split_at_corners(d, {{0, 0}, {side_n, 0}, {side_n, side_n}, {0, side_n}}, split_fraction);
  return d;
}

TgDomain build_hexagon_domain(int side_n, double split_fraction, double scale) {
  if (side_n < 1) throw DomainError("build_hexagon_domain: side_n must be at least 1");
  std::vector<LatticeCoord> sites;
  for (int a = -side_n; a <= side_n; ++a) {
    for (int b = -side_n; b <= side_n; ++b) {
      if (std::abs(a + b) <= side_n) sites.push_back({a, b});
    }
  }
  TgDomain d = TgDomain::from_sites(sites, scale);
  std::vector<LatticeCoord> corners;
  for (auto dir : kLatticeDirections) corners.push_back({side_n * dir.a, side_n * dir.b});
  split_at_corners(d, corners, split_fraction);
  return d;
}

TgDomain build_box_domain(double width, double height, double mesh) {
  if (!(width > 0.0 && height > 0.0 && mesh > 0.0)) {
    throw DomainError("build_box_domain: dimensions must be positive");
  }
  const Point origin{0.5 * mesh, 0.0};
  const double row = 0.5 * kSqrt3 * mesh;
  const int rows = static_cast<int>(std::floor(height / row + 1e-9));
  const double half = 0.5 * width + 1e-9;
  std::vector<LatticeCoord> sites;
  for (int b = 0; b <= rows; ++b) {
    const double shift = origin.real() + 0.5 * mesh * b;
    const int a_lo = static_cast<int>(std::ceil((-half - shift) / mesh));
    const int a_hi = static_cast<int>(std::floor((half - shift) / mesh));
    for (int a = a_lo; a <= a_hi; ++a) sites.push_back({a, b});
  }
  TgDomain d = TgDomain::from_sites(sites, mesh, origin);

  int x_vertex = -1, y_vertex = -1;
  for (std::size_t i = 0; i < d.num_vertices(); ++i) {
    const Point p = d.positions()[i];
    const int v = static_cast<int>(i);
    if (d.coords()[i].b == 0 && p.real() < 0.0 &&
        (x_vertex < 0 || p.real() > d.position(x_vertex).real())) {
      x_vertex = v;
    }
    if (d.coords()[i].b == rows && p.real() >= 0.0 &&
        (y_vertex < 0 || p.real() < d.position(y_vertex).real())) {
      y_vertex = v;
    }
  }
  if (x_vertex < 0 || y_vertex < 0) throw DomainError("build_box_domain: box too small for its mesh");
  d.set_arcs(d.boundary_position(x_vertex), d.boundary_position(y_vertex));
  return d;
}

double inradius(const TgDomain& domain, Point center) {
  if (!domain.contains(center)) throw DomainError("inradius: center lies outside the domain");
  const auto poly = domain.boundary_polygon();
  double r = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < poly.size(); ++i) {
    r = std::min(r, segment_distance(center, poly[i], poly[(i + 1) % poly.size()]));
  }
  return r;
}

namespace {

Point triangle_centroid(const TgDomain& d, int t) {
  const auto& tri = d.triangles()[static_cast<std::size_t>(t)];
  return (d.position(tri[0]) + d.position(tri[1]) + d.position(tri[2])) / 3.0;
}

}  // namespace

DualPathGraph dual_graph(const TgDomain& domain) {
  DualPathGraph g;
  const auto xe = domain.x_edge();
  const auto ye = domain.y_edge();
  for (std::size_t t = 0; t < domain.num_triangles(); ++t) {
    const auto& tri = domain.triangles()[t];
    for (std::size_t e = 0; e < 3; ++e) {
      const int u = tri[e], v = tri[(e + 1) % 3];
      const int right = domain.triangle_left_of(v, u);
      if (right >= 0 && u > v) continue;
      DualEdge de;
      de.u = u;
      de.v = v;
      de.left_triangle = static_cast<int>(t);
      de.right_triangle = right;
      de.from = triangle_centroid(domain, static_cast<int>(t));
      de.to = right >= 0 ? triangle_centroid(domain, right) : 0.5 * (domain.position(u) + domain.position(v));
      if (right < 0 && u == xe[0] && v == xe[1]) g.x_edge_index = static_cast<int>(g.hex_edges.size());
      if (right < 0 && u == ye[0] && v == ye[1]) g.y_edge_index = static_cast<int>(g.hex_edges.size());
      g.hex_edges.push_back(de);
    }
  }
  return g;
}

std::size_t count_primal_edges(const TgDomain& domain) {
  std::size_t count = 0;
  for (std::size_t v = 0; v < domain.num_vertices(); ++v) {
    for (int w : domain.neighbors(static_cast<int>(v))) {
      if (w > static_cast<int>(v)) ++count;
    }
  }
  return count;
}

}  // namespace gffsle
