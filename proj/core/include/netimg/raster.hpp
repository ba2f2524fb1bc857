#pragma once

#include <filesystem>
#include <vector>

#include "netimg/geometry.hpp"
#include "netimg/types.hpp"

namespace netimg {

/// Q1 x Q2 cells over the RoI. Cell index = row * q1 + col, row 0 at the
/// smallest y.
struct RasterSpec {
  int q1 = 1;  // columns (x)
  int q2 = 1;  // rows (y)
  RegionOfInterest roi;

  int size() const { return q1 * q2; }
  double cell_width() const { return roi.width() / q1; }
  double cell_height() const { return roi.height() / q2; }
  Vec2 center(int idx) const;
  std::vector<Vec2> centers() const;
  /// Index of the cell holding p (p clamped to the RoI).
  int locate(const Vec2& p) const;
  void validate() const;
};

struct RegularRaster {
  RasterSpec spec;
  RVec values;
};

void write_raster_csv(const std::filesystem::path& path, const RasterSpec& spec, const RVec& values);
RVec read_raster_csv(const std::filesystem::path& path, const RasterSpec& spec);
/// 8-bit binary PGM, min-max normalized, top row = largest y.
void write_raster_pgm(const std::filesystem::path& path, const RasterSpec& spec, const RVec& values);

}  // namespace netimg
