#include "netimg/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace netimg {

namespace {

double angle_from(const Vec2& array_pos, const Vec2& p, const char* what) {
  const double dx = array_pos.x() - p.x();
  const double dy = array_pos.y() - p.y();
  if (dx == 0.0 && dy == 0.0) {
    throw DomainError(std::string(what) + ": point coincides with the array position");
  }
  // atan(dy/dx) + pi*1[x_array < x] equals atan2(dy, dx) modulo 2pi.
  double a = std::atan2(dy, dx);
  if (a <= -kPi / 2) a += 2 * kPi;
  return a;
}

bool point_in_polygon(const std::vector<Vec2>& v, const Vec2& p) {
  bool inside = false;
  const std::size_t n = v.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = v[i];
    const Vec2& b = v[j];
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x_cross = (b.x() - a.x()) * (p.y() - a.y()) / (b.y() - a.y()) + a.x();
      if (p.x() < x_cross) inside = !inside;
    }
  }
  return inside;
}

bool segments_cross(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
  auto orient = [](const Vec2& a, const Vec2& b, const Vec2& c) {
    const double v = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
    return (v > 0) - (v < 0);
  };
  const int o1 = orient(p1, p2, q1);
  const int o2 = orient(p1, p2, q2);
  const int o3 = orient(q1, q2, p1);
  const int o4 = orient(q1, q2, p2);
  return o1 * o2 < 0 && o3 * o4 < 0;
}

}  // namespace

Vec2 RegionOfInterest::clamp(const Vec2& p) const {
  return {std::min(std::max(p.x(), x1), x2), std::min(std::max(p.y(), y1), y2)};
}

void RegionOfInterest::validate() const {
  if (!(x1 < x2) || !(y1 < y2)) throw std::invalid_argument("region of interest requires x1 < x2 and y1 < y2");
}

bool contains(const TargetShape& shape, const Vec2& p) {
  struct Visitor {
    const Vec2& p;
    bool operator()(const PolygonShape& s) const { return point_in_polygon(s.vertices, p); }
    bool operator()(const DiscShape& s) const { return (p - s.center).squaredNorm() <= s.radius * s.radius; }
    bool operator()(const AnnulusShape& s) const {
      const double r2 = (p - s.center).squaredNorm();
      return r2 >= s.inner_radius * s.inner_radius && r2 <= s.outer_radius * s.outer_radius;
    }
    bool operator()(const RasterMaskShape& s) const {
      const double cx = (p.x() - s.origin.x()) / s.cell_size;
      const double cy = (p.y() - s.origin.y()) / s.cell_size;
      if (cx < 0 || cy < 0) return false;
      const int c = static_cast<int>(cx);
      const int r = static_cast<int>(cy);
      if (c >= s.cols || r >= s.rows) return false;
      return s.at(r, c);
    }
  };
  return std::visit(Visitor{p}, shape);
}

Box bounds(const TargetShape& shape) {
  struct Visitor {
    Box operator()(const PolygonShape& s) const {
      Box b{s.vertices.front(), s.vertices.front()};
      for (const auto& v : s.vertices) {
        b.lo = b.lo.cwiseMin(v);
        b.hi = b.hi.cwiseMax(v);
      }
      return b;
    }
    Box operator()(const DiscShape& s) const {
      return {s.center - Vec2::Constant(s.radius), s.center + Vec2::Constant(s.radius)};
    }
    Box operator()(const AnnulusShape& s) const {
      return {s.center - Vec2::Constant(s.outer_radius), s.center + Vec2::Constant(s.outer_radius)};
    }
    Box operator()(const RasterMaskShape& s) const {
      return {s.origin, s.origin + Vec2(s.cols * s.cell_size, s.rows * s.cell_size)};
    }
  };
  return std::visit(Visitor{}, shape);
}

void validate(const TargetShape& shape, const RegionOfInterest& roi) {
  if (const auto* poly = std::get_if<PolygonShape>(&shape)) {
    const auto& v = poly->vertices;
    if (v.size() < 3) throw std::invalid_argument("polygon needs at least three vertices");
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        if (j == i + 1 || (i == 0 && j == n - 1)) continue;
        if (segments_cross(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n])) {
          throw std::invalid_argument("polygon is not simple");
        }
      }
    }
  } else if (const auto* disc = std::get_if<DiscShape>(&shape)) {
    if (!(disc->radius > 0)) throw std::invalid_argument("disc radius must be positive");
  } else if (const auto* ann = std::get_if<AnnulusShape>(&shape)) {
    if (!(ann->inner_radius >= 0) || !(ann->inner_radius < ann->outer_radius)) {
      throw std::invalid_argument("annulus requires 0 <= inner radius < outer radius");
    }
  } else if (const auto* mask = std::get_if<RasterMaskShape>(&shape)) {
    if (mask->rows <= 0 || mask->cols <= 0 || !(mask->cell_size > 0) ||
        mask->cells.size() != static_cast<std::size_t>(mask->rows) * mask->cols) {
      throw std::invalid_argument("raster mask dimensions are inconsistent");
    }
  }
  const Box b = bounds(shape);
  constexpr double slack = 1e-9;
  if (b.lo.x() < roi.x1 - slack || b.lo.y() < roi.y1 - slack || b.hi.x() > roi.x2 + slack ||
      b.hi.y() > roi.y2 + slack) {
    throw std::invalid_argument("target shape extends outside the region of interest");
  }
}

bool Scene::in_targets(const Vec2& p) const {
  return std::any_of(targets.begin(), targets.end(), [&](const TargetShape& s) { return contains(s, p); });
}

const FieldOfView* Scene::fov_for(int k) const {
  for (const auto& f : fovs) {
    if (f.receiver == k) return &f;
  }
  return nullptr;
}

void Scene::validate() const {
  roi.validate();
  if (tx.role != ArrayRole::transmit) throw std::invalid_argument("scene transmitter must have the transmit role");
  if (tx.num_antennas < 1) throw std::invalid_argument("transmit array needs at least one antenna");
  if (rxs.empty()) throw std::invalid_argument("scene needs at least one receiver");
  for (const auto& rx : rxs) {
    if (rx.num_antennas < 1) throw std::invalid_argument("receive array needs at least one antenna");
    if (rx.role != ArrayRole::receive) throw std::invalid_argument("receiver arrays must have the receive role");
  }
  if (!(beta0_sq > 0)) throw std::invalid_argument("reference path loss must be positive");
  for (const auto& f : fovs) {
    if (f.receiver < 0 || f.receiver >= num_receivers()) throw std::invalid_argument("field of view names an unknown receiver");
    if (!(f.blind_width >= 0) || f.blind_width >= 2 * kPi) throw std::invalid_argument("blind sector width must lie in [0, 2pi)");
  }
  for (const auto& t : targets) netimg::validate(t, roi);
}

double aod(const Vec2& tx_pos, const Vec2& p) { return angle_from(tx_pos, p, "aod"); }

double aoa(const Vec2& rx_pos, const Vec2& p) { return angle_from(rx_pos, p, "aoa"); }

CVec steer_from_sine(double sine, int n) {
  CVec out(n);
  for (int i = 0; i < n; ++i) out[i] = std::polar(1.0, -kPi * i * sine);
  return out;
}

CVec steer_tx(double phi, int n) { return steer_from_sine(std::sin(phi), n); }

CVec steer_rx(double theta, int n) { return steer_from_sine(std::sin(theta), n); }

double sine_of_angle(const Vec2& array_pos, const Vec2& p) {
  const double d = (array_pos - p).norm();
  if (d == 0.0) throw DomainError("sine_of_angle: point coincides with the array position");
  return (array_pos.y() - p.y()) / d;
}

double path_loss(const Vec2& tx_pos, const Vec2& rx_pos, const Vec2& p, double beta0_sq) {
  const double dt2 = (p - tx_pos).squaredNorm();
  const double dr2 = (p - rx_pos).squaredNorm();
  if (dt2 == 0.0 || dr2 == 0.0) throw DomainError("path_loss: zero propagation distance");
  return beta0_sq / (dt2 * dr2);
}

double wrap_pi(double angle) {
  double a = std::remainder(angle, 2 * kPi);  // [-pi, pi]
  if (a <= -kPi) a += 2 * kPi;
  return a;
}

double bearing(const Vec2& from, const Vec2& p) { return std::atan2(p.y() - from.y(), p.x() - from.x()); }

bool visibility(const Scene& scene, int k, const Vec2& p) {
  const FieldOfView* fov = scene.fov_for(k);
  if (fov == nullptr || fov->blind_width <= 0.0) return true;
  if (fov->blind_width >= 2 * kPi) return false;
  const double off = std::abs(wrap_pi(bearing(scene.rxs.at(k).position, p) - fov->blind_center));
  return off > fov->blind_width / 2;
}

}  // namespace netimg
