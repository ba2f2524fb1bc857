#pragma once

#include <filesystem>
#include <string>

#include "netimg/geometry.hpp"

namespace netimg {

/// INI scene schema (angles in degrees, beta0 in dB):
///
///   [scene]   beta0_db
///   [roi]     x1 x2 y1 y2
///   [tx]      x y antennas
///   [rxN]     x y antennas blind_center_deg blind_width_deg   (N = 0, 1, ...)
///   [targetN] kind = polygon | disc | annulus | mask
///             polygon: vertices = "x y; x y; ..."
///             disc:    cx cy radius
///             annulus: cx cy inner_radius outer_radius
///             mask:    origin_x origin_y cell_size rows = "#..#/.##./..." (top row first)
Scene load_scene(const std::filesystem::path& path);
Scene parse_scene(const std::string& text);
std::string format_scene(const Scene& scene);
void save_scene(const std::filesystem::path& path, const Scene& scene);

}  // namespace netimg
