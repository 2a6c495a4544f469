#include "gffsle/interface.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace gffsle {

namespace {

Point triangle_centroid(const TgDomain& domain, int t) {
  const auto& tri = domain.triangles()[static_cast<std::size_t>(t)];
  return (domain.position(tri[0]) + domain.position(tri[1]) + domain.position(tri[2])) / 3.0;
}

void sort_unique(std::vector<int>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

std::vector<Point> InterfacePath::level_crossings(const TgDomain& domain, const Eigen::VectorXd& values,
                                                  double level) const {
  std::vector<Point> out;
  out.reserve(crossed.size());
  for (const auto& [m, p] : crossed) {
    const double hm = values[m] - level, hp = values[p] - level;
    if (!(hm < 0.0 && hp > 0.0)) throw DomainError("level_crossings: values do not change sign across the path");
    const double s = -hm / (hp - hm);
    out.push_back(domain.position(m) + s * (domain.position(p) - domain.position(m)));
  }
  return out;
}

InterfaceExplorer::InterfaceExplorer(const TgDomain& domain, SignQuery interior_sign)
    : domain_(&domain),
      sign_(std::move(interior_sign)),
      edge_(domain.x_edge()),
      state_(domain.num_vertices(), 0),
      seen_triangle_(domain.num_triangles(), 0) {
  is_plus(edge_[0]);
  is_plus(edge_[1]);
  path_.dual_points.push_back(domain.x_point());
  path_.crossed.push_back(edge_);
  path_.left_vertices.push_back(edge_[0]);
  path_.right_vertices.push_back(edge_[1]);
}

bool InterfaceExplorer::is_plus(int v) {
  auto& s = state_[static_cast<std::size_t>(v)];
  if (s == 0) {
    const bool plus = domain_->is_interior(v) ? sign_(v) : domain_->in_arc_plus(v);
    s = plus ? 2 : 1;
    revealed_.push_back(v);
  }
  return s == 2;
}

bool InterfaceExplorer::step() {
  if (path_.complete) return false;
  const auto [m, p] = edge_;
  const int t = domain_->triangle_left_of(m, p);
  if (t < 0) throw NumericalError("InterfaceExplorer: walk left the domain away from y (sign data inconsistent)");
  if (seen_triangle_[static_cast<std::size_t>(t)]) throw NumericalError("InterfaceExplorer: walk revisited a triangle");
  seen_triangle_[static_cast<std::size_t>(t)] = 1;
  const auto& tri = domain_->triangles()[static_cast<std::size_t>(t)];
  int w = -1;
  for (int v : tri) {
    if (v != m && v != p) w = v;
  }
  path_.triangles.push_back(t);
  path_.dual_points.push_back(triangle_centroid(*domain_, t));
  if (is_plus(w)) {
    edge_ = {m, w};
    path_.right_vertices.push_back(w);
  } else {
    edge_ = {w, p};
    path_.left_vertices.push_back(w);
  }
  path_.crossed.push_back(edge_);
  const auto y = domain_->y_edge();
  if (edge_[0] == y[1] && edge_[1] == y[0]) {
    path_.complete = true;
    path_.dual_points.push_back(domain_->y_point());
  }
  return true;
}

InterfacePath InterfaceExplorer::finish(std::size_t max_steps) {
  while (!path_.complete && path_.num_steps() < max_steps) step();
  InterfacePath out = path_;
  sort_unique(out.left_vertices);
  sort_unique(out.right_vertices);
  return out;
}

InterfacePath trace_interface(const TgDomain& domain, const FieldSample& field, const TraceOptions& options) {
  const auto& h = field.values;
  if (static_cast<std::size_t>(h.size()) != domain.num_vertices()) {
    throw DomainError("trace_interface: field size does not match the domain");
  }
  for (int v : domain.boundary_cycle()) {
    const double d = h[v] - options.level;
    if (domain.in_arc_plus(v) ? !(d > 0.0) : !(d < 0.0)) {
      throw DomainError("trace_interface: boundary values must lie above the level on arc_plus and below on arc_minus");
    }
  }
  InterfaceExplorer explorer(domain, [&](int v) {
    const double d = h[v] - options.level;
    if (d == 0.0 || !std::isfinite(d)) throw DomainError("trace_interface: vertex value ties the level");
    return d > 0.0;
  });
  return explorer.finish(options.max_steps);
}

HeightGap::HeightGap(const TgDomain& domain, const FieldSample& field, const InterfacePath& path, double lambda)
    : domain_(&domain), pinned_(domain.num_vertices(), 0), lambda_(lambda) {
  const auto n = domain.num_vertices();
  if (static_cast<std::size_t>(field.values.size()) != n) throw DomainError("HeightGap: field size does not match");
  const auto& cycle = domain.boundary_cycle();
  if (lambda_ <= 0.0) {
    lambda_ = std::abs(field.values[cycle.front()]);
    for (int v : cycle) {
      const double want = domain.in_arc_plus(v) ? lambda_ : -lambda_;
      if (std::abs(field.values[v] - want) > 1e-12 * std::max(1.0, lambda_)) {
        throw DomainError("HeightGap: boundary data is not +-lambda on the arcs");
      }
    }
  }
  Eigen::VectorXd h = field.values, f = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (int v : cycle) {
    pinned_[static_cast<std::size_t>(v)] = 1;
    f[v] = field.values[v];
  }
  for (int v : path.left_vertices) {
    pinned_[static_cast<std::size_t>(v)] = 1;
    if (domain.is_interior(v)) f[v] = -lambda_;
  }
  for (int v : path.right_vertices) {
    pinned_[static_cast<std::size_t>(v)] = 1;
    if (domain.is_interior(v)) f[v] = lambda_;
  }
  const DirichletProblem problem(domain, pinned_);
  h_t_ = problem.extend(h);
  f_t_ = problem.extend(f);
}

double HeightGap::operator()(int probe) const {
  if (probe < 0 || static_cast<std::size_t>(probe) >= pinned_.size()) throw DomainError("HeightGap: probe out of range");
  if (pinned_[static_cast<std::size_t>(probe)]) throw DomainError("HeightGap: probe lies on the boundary or the interface");
  return h_t_[probe] - f_t_[probe];
}

double height_gap_statistic(const TgDomain& domain, const FieldSample& field, const InterfacePath& path,
                            int probe) {
  return HeightGap(domain, field, path)(probe);
}

std::vector<int> graph_distance(const TgDomain& domain, const std::vector<int>& sources) {
  std::vector<int> dist(domain.num_vertices(), -1);
  std::deque<int> queue;
  for (int s : sources) {
    if (dist[static_cast<std::size_t>(s)] < 0) {
      dist[static_cast<std::size_t>(s)] = 0;
      queue.push_back(s);
    }
  }
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int u : domain.neighbors(v)) {
      if (u >= 0 && dist[static_cast<std::size_t>(u)] < 0) {
        dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + 1;
        queue.push_back(u);
      }
    }
  }
  return dist;
}

}  // namespace gffsle
