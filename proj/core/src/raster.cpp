#include "netimg/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace netimg {

Vec2 RasterSpec::center(int idx) const {
  const int r = idx / q1;
  const int c = idx % q1;
  return {roi.x1 + (c + 0.5) * cell_width(), roi.y1 + (r + 0.5) * cell_height()};
}

std::vector<Vec2> RasterSpec::centers() const {
  std::vector<Vec2> out(size());
  for (int i = 0; i < size(); ++i) out[i] = center(i);
  return out;
}

int RasterSpec::locate(const Vec2& p) const {
  const int c = std::clamp(static_cast<int>(std::floor((p.x() - roi.x1) / cell_width())), 0, q1 - 1);
  const int r = std::clamp(static_cast<int>(std::floor((p.y() - roi.y1) / cell_height())), 0, q2 - 1);
  return r * q1 + c;
}

void RasterSpec::validate() const {
  if (q1 < 1 || q2 < 1) throw std::invalid_argument("RasterSpec: dimensions must be positive");
  roi.validate();
}

void write_raster_csv(const std::filesystem::path& path, const RasterSpec& spec, const RVec& values) {
  if (values.size() != spec.size()) throw std::invalid_argument("write_raster_csv: size mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17);
  for (int r = 0; r < spec.q2; ++r) {
    for (int c = 0; c < spec.q1; ++c) {
      if (c) out << ',';
      out << values[r * spec.q1 + c];
    }
    out << '\n';
  }
}

RVec read_raster_csv(const std::filesystem::path& path, const RasterSpec& spec) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  RVec values(spec.size());
  std::string line;
  int r = 0;
  while (std::getline(in, line) && r < spec.q2) {
    std::stringstream ss(line);
    std::string cell;
    int c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= spec.q1) throw std::runtime_error("read_raster_csv: too many columns in " + path.string());
      values[r * spec.q1 + c] = std::stod(cell);
      ++c;
    }
    if (c != spec.q1) throw std::runtime_error("read_raster_csv: too few columns in " + path.string());
    ++r;
  }
  if (r != spec.q2) throw std::runtime_error("read_raster_csv: wrong row count in " + path.string());
  return values;
}

void write_raster_pgm(const std::filesystem::path& path, const RasterSpec& spec, const RVec& values) {
  if (values.size() != spec.size()) throw std::invalid_argument("write_raster_pgm: size mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P5\n" << spec.q1 << ' ' << spec.q2 << "\n255\n";
  const double lo = values.size() ? values.minCoeff() : 0.0;
  const double hi = values.size() ? values.maxCoeff() : 0.0;
  const double span = hi - lo;
  for (int r = spec.q2 - 1; r >= 0; --r) {
    for (int c = 0; c < spec.q1; ++c) {
      const double t = span > 0 ? (values[r * spec.q1 + c] - lo) / span : 0.0;
      out.put(static_cast<char>(static_cast<unsigned char>(std::lround(255.0 * t))));
    }
  }
}

}  // namespace netimg
