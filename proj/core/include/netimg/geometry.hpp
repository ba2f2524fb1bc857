#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "netimg/types.hpp"

namespace netimg {

enum class ArrayRole { transmit, receive };

/// Half-wavelength uniform linear array. The spacing is implicit in the
/// steering vectors.
struct Array2D {
  Vec2 position = Vec2::Zero();
  int num_antennas = 1;
  ArrayRole role = ArrayRole::receive;
};

struct RegionOfInterest {
  double x1 = 0.0;
  double x2 = 1.0;
  double y1 = 0.0;
  double y2 = 1.0;

  double width() const { return x2 - x1; }
  double height() const { return y2 - y1; }
  bool contains(const Vec2& p) const { return p.x() >= x1 && p.x() <= x2 && p.y() >= y1 && p.y() <= y2; }
  Vec2 clamp(const Vec2& p) const;
  void validate() const;
};

struct Box {
  Vec2 lo;
  Vec2 hi;
};

struct PolygonShape {
  std::vector<Vec2> vertices;
};

struct DiscShape {
  Vec2 center = Vec2::Zero();
  double radius = 1.0;
};

struct AnnulusShape {
  Vec2 center = Vec2::Zero();
  double inner_radius = 0.5;
  double outer_radius = 1.0;
};

/// Boolean occupancy grid. Row 0 is the bottom row (smallest y); cell (r, c)
/// covers [origin + c*cell, origin + (c+1)*cell) x [origin + r*cell, ...).
struct RasterMaskShape {
  Vec2 origin = Vec2::Zero();
  double cell_size = 1.0;
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> cells;  // row-major, rows * cols

  bool at(int r, int c) const { return cells[static_cast<std::size_t>(r) * cols + c] != 0; }
};

using TargetShape = std::variant<PolygonShape, DiscShape, AnnulusShape, RasterMaskShape>;

bool contains(const TargetShape& shape, const Vec2& p);
Box bounds(const TargetShape& shape);
void validate(const TargetShape& shape, const RegionOfInterest& roi);

/// Angular blind sector of one receiver. Angles in radians.
struct FieldOfView {
  int receiver = 0;
  double blind_center = 0.0;
  double blind_width = 0.0;
};

struct Scene {
  RegionOfInterest roi;
  std::vector<TargetShape> targets;
  Array2D tx{Vec2::Zero(), 1, ArrayRole::transmit};
  std::vector<Array2D> rxs;
  std::vector<FieldOfView> fovs;
  double beta0_sq = 1e-7;

  int num_receivers() const { return static_cast<int>(rxs.size()); }
  bool in_targets(const Vec2& p) const;
  const FieldOfView* fov_for(int k) const;
  void validate() const;
};

/// Angle of departure from the transmitter towards p, in (-pi/2, 3pi/2].
double aod(const Vec2& tx_pos, const Vec2& p);
/// Angle of arrival at the receiver from p, in (-pi/2, 3pi/2].
double aoa(const Vec2& rx_pos, const Vec2& p);

/// [1, e^{-j pi sin(phi)}, ..., e^{-j pi (n-1) sin(phi)}]
CVec steer_tx(double phi, int n);
CVec steer_rx(double theta, int n);
/// Same as steer_tx but parameterized directly by sin(angle).
CVec steer_from_sine(double sine, int n);

/// sin of the departure/arrival angle as a closed form of positions:
/// (y_array - y) / |p_array - p|.
double sine_of_angle(const Vec2& array_pos, const Vec2& p);

/// beta0^2 |p - tx|^-2 |p - rx|^-2
double path_loss(const Vec2& tx_pos, const Vec2& rx_pos, const Vec2& p, double beta0_sq);

/// Bearing of p as seen from `from`, in (-pi, pi].
double bearing(const Vec2& from, const Vec2& p);
/// Wraps an angle into (-pi, pi].
double wrap_pi(double angle);

/// True when p lies outside receiver k's blind sector.
bool visibility(const Scene& scene, int k, const Vec2& p);

}  // namespace netimg
