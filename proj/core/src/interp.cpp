#include "netimg/interp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/LU>

#include "netimg/numerics.hpp"

namespace netimg {

NearestIndex::NearestIndex(std::vector<Vec2> sites, const RegionOfInterest& bounds) : sites_(std::move(sites)) {
  if (sites_.empty()) throw std::invalid_argument("NearestIndex: no sites");
  Vec2 lo(bounds.x1, bounds.y1);
  Vec2 hi(bounds.x2, bounds.y2);
  for (const auto& s : sites_) {
    lo = lo.cwiseMin(s);
    hi = hi.cwiseMax(s);
  }
  lo_ = lo;
  const Vec2 extent = (hi - lo).cwiseMax(1e-9);
  cell_ = std::sqrt(extent.x() * extent.y() / static_cast<double>(sites_.size()));
  if (!(cell_ > 0)) cell_ = std::max(extent.x(), extent.y());
  nx_ = std::max(1, static_cast<int>(std::ceil(extent.x() / cell_)));
  ny_ = std::max(1, static_cast<int>(std::ceil(extent.y() / cell_)));
  buckets_.assign(static_cast<std::size_t>(nx_) * ny_, {});
  for (int i = 0; i < static_cast<int>(sites_.size()); ++i) {
    const int bx = std::clamp(static_cast<int>((sites_[i].x() - lo_.x()) / cell_), 0, nx_ - 1);
    const int by = std::clamp(static_cast<int>((sites_[i].y() - lo_.y()) / cell_), 0, ny_ - 1);
    buckets_[static_cast<std::size_t>(by) * nx_ + bx].push_back(i);
  }
}

std::vector<int> NearestIndex::k_nearest(const Vec2& p, int k) const {
  k = std::min<int>(k, static_cast<int>(sites_.size()));
  std::vector<int> out;
  if (k <= 0) return out;
  const int bx = std::clamp(static_cast<int>(std::floor((p.x() - lo_.x()) / cell_)), 0, nx_ - 1);
  const int by = std::clamp(static_cast<int>(std::floor((p.y() - lo_.y()) / cell_)), 0, ny_ - 1);
  std::vector<std::pair<double, int>> found;
  const int max_ring = std::max(nx_, ny_);
  for (int ring = 0; ring <= max_ring; ++ring) {
    for (int y = by - ring; y <= by + ring; ++y) {
      if (y < 0 || y >= ny_) continue;
      for (int x = bx - ring; x <= bx + ring; ++x) {
        if (x < 0 || x >= nx_) continue;
        if (std::max(std::abs(x - bx), std::abs(y - by)) != ring) continue;
        for (int i : buckets_[static_cast<std::size_t>(y) * nx_ + x]) found.emplace_back((sites_[i] - p).squaredNorm(), i);
      }
    }
    if (static_cast<int>(found.size()) < k) continue;
    const bool all_covered = bx - ring <= 0 && by - ring <= 0 && bx + ring >= nx_ - 1 && by + ring >= ny_ - 1;
    std::nth_element(found.begin(), found.begin() + (k - 1), found.end());
    const double kth = found[k - 1].first;
    if (all_covered) break;
    // Distance from p to the boundary of the visited block bounds every unvisited site.
    const double x_lo = lo_.x() + (bx - ring) * cell_;
    const double x_hi = lo_.x() + (bx + ring + 1) * cell_;
    const double y_lo = lo_.y() + (by - ring) * cell_;
    const double y_hi = lo_.y() + (by + ring + 1) * cell_;
    double margin = std::numeric_limits<double>::infinity();
    if (bx - ring > 0) margin = std::min(margin, p.x() - x_lo);
    if (bx + ring < nx_ - 1) margin = std::min(margin, x_hi - p.x());
    if (by - ring > 0) margin = std::min(margin, p.y() - y_lo);
    if (by + ring < ny_ - 1) margin = std::min(margin, y_hi - p.y());
    if (margin > 0 && margin * margin > kth) break;
  }
  std::sort(found.begin(), found.end());
  for (int i = 0; i < k; ++i) out.push_back(found[i].second);
  return out;
}

int NearestIndex::nearest(const Vec2& p) const { return k_nearest(p, 1).front(); }

VoronoiPartition VoronoiPartition::build(const std::vector<Vec2>& sites, const RegionOfInterest& roi, int resolution) {
  if (resolution < 1) throw std::invalid_argument("VoronoiPartition: resolution must be positive");
  VoronoiPartition part;
  part.resolution = resolution;
  part.roi = roi;
  part.sites = sites;
  const NearestIndex index(sites, roi);
  part.labels.resize(static_cast<std::size_t>(resolution) * resolution);
  const double w = roi.width() / resolution;
  const double h = roi.height() / resolution;
  for (int r = 0; r < resolution; ++r) {
    for (int c = 0; c < resolution; ++c) {
      const Vec2 p(roi.x1 + (c + 0.5) * w, roi.y1 + (r + 0.5) * h);
      part.labels[static_cast<std::size_t>(r) * resolution + c] = index.nearest(p);
    }
  }
  return part;
}

SparseWeights sibson_weights(const std::vector<Vec2>& sites, const std::vector<Vec2>& queries,
                             const RegionOfInterest& roi, int resolution) {
  const auto site_part = VoronoiPartition::build(sites, roi, resolution);
  const auto query_part = VoronoiPartition::build(queries, roi, resolution);
  const auto n_sites = static_cast<std::int64_t>(sites.size());
  std::vector<std::int64_t> keys(site_part.labels.size());
  for (std::size_t i = 0; i < keys.size(); ++i) keys[i] = query_part.labels[i] * n_sites + site_part.labels[i];
  std::sort(keys.begin(), keys.end());

  SparseWeights weights(queries.size());
  for (std::size_t i = 0; i < keys.size();) {
    std::size_t j = i;
    while (j < keys.size() && keys[j] == keys[i]) ++j;
    weights[keys[i] / n_sites].emplace_back(static_cast<int>(keys[i] % n_sites), static_cast<double>(j - i));
    i = j;
  }
  const NearestIndex site_index(sites, roi);
  for (std::size_t q = 0; q < queries.size(); ++q) {
    auto& row = weights[q];
    if (row.empty()) {
      row.emplace_back(site_index.nearest(queries[q]), 1.0);
      continue;
    }
    double total = 0.0;
    for (const auto& [idx, w] : row) total += w;
    for (auto& entry : row) entry.second /= total;
  }
  return weights;
}

PlaneFit plane_fit_gradient(const std::vector<Vec2>& points, const std::vector<double>& values) {
  if (points.size() != values.size()) throw std::invalid_argument("plane_fit_gradient: size mismatch");
  PlaneFit fit;
  if (points.size() < 3) {
    fit.degenerate = true;
    return fit;
  }
  Vec2 mean = Vec2::Zero();
  double vmean = 0.0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    mean += points[i];
    vmean += values[i];
  }
  mean /= static_cast<double>(points.size());
  vmean /= static_cast<double>(points.size());
  Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
  Vec2 rhs = Vec2::Zero();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec2 d = points[i] - mean;
    a += d * d.transpose();
    rhs += d * (values[i] - vmean);
  }
  const double det = a.determinant();
  const double scale = a.trace();
  if (!(scale > 0) || det <= 1e-12 * scale * scale) {
    fit.degenerate = true;
    return fit;
  }
  fit.gradient = a.inverse() * rhs;
  return fit;
}

Eigen::Matrix2d structure_tensor(const std::vector<Vec2>& gradients, const std::vector<double>& weights) {
  if (gradients.size() != weights.size()) throw std::invalid_argument("structure_tensor: size mismatch");
  Eigen::Matrix2d j = Eigen::Matrix2d::Zero();
  for (std::size_t i = 0; i < gradients.size(); ++i) j += weights[i] * gradients[i] * gradients[i].transpose();
  return j;
}

double ep_weight(double w_sib, const Vec2& d, const Eigen::Matrix2d& j, double sigma_ep2) {
  if (!(sigma_ep2 > 0)) throw std::invalid_argument("ep_weight: sigma_ep2 must be positive");
  return w_sib * std::exp(-d.dot(j * d) / (2.0 * sigma_ep2));
}

void EPConfig::validate(const RasterSpec& spec) const {
  if (plane_fit_neighbors < 2) throw std::invalid_argument("EPConfig: plane fit needs at least 3 points");
  if (sigma_ep2 && !(*sigma_ep2 > 0)) throw std::invalid_argument("EPConfig: sigma_ep2 must be positive");
  if (resolution != 0 && resolution < spec.q1) throw std::invalid_argument("EPConfig: resolution below Q1'");
}

InterpResult interpolate(const std::vector<Vec2>& sites, const RVec& values, const RasterSpec& spec,
                         const EPConfig& config) {
  spec.validate();
  config.validate(spec);
  if (static_cast<long>(sites.size()) != values.size() || sites.empty()) {
    throw std::invalid_argument("interpolate: sites and values must be nonempty and of equal length");
  }
  const int resolution = config.resolution > 0 ? config.resolution : 8 * spec.q1;
  const auto centers = spec.centers();
  const auto sib = sibson_weights(sites, centers, spec.roi, resolution);

  InterpResult result;
  result.raster.spec = spec;
  result.raster.values = RVec::Zero(spec.size());
  if (config.mode == InterpMode::natural_neighbor) {
    for (int q = 0; q < spec.size(); ++q) {
      double acc = 0.0;
      for (const auto& [s, w] : sib[q]) acc += w * values[s];
      result.raster.values[q] = acc;
    }
    return result;
  }

  // Plane-fit gradients at the irregular points.
  const NearestIndex index(sites, spec.roi);
  std::vector<Vec2> grads(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const auto nb = index.k_nearest(sites[i], config.plane_fit_neighbors + 1);
    std::vector<Vec2> pts;
    std::vector<double> vals;
    pts.push_back(sites[i]);
    vals.push_back(values[static_cast<long>(i)]);
    for (int n : nb) {
      if (n == static_cast<int>(i)) continue;
      if (static_cast<int>(pts.size()) > config.plane_fit_neighbors) break;
      pts.push_back(sites[n]);
      vals.push_back(values[n]);
    }
    const auto fit = plane_fit_gradient(pts, vals);
    if (fit.degenerate) ++result.degenerate_fits;
    grads[i] = fit.gradient;
  }

  std::vector<Eigen::Matrix2d> tensors(spec.size());
  std::vector<double> lambda1;
  double dist_acc = 0.0;
  long dist_count = 0;
  for (int q = 0; q < spec.size(); ++q) {
    Eigen::Matrix2d j = Eigen::Matrix2d::Zero();
    for (const auto& [s, w] : sib[q]) {
      j += w * grads[s] * grads[s].transpose();
      dist_acc += (sites[s] - centers[q]).squaredNorm();
      ++dist_count;
    }
    tensors[q] = j;
    const double l1 = svd2(j).lambda1;
    if (l1 > 0) lambda1.push_back(l1);
  }
  double sigma2 = 1.0;
  if (config.sigma_ep2) {
    sigma2 = *config.sigma_ep2;
  } else if (!lambda1.empty() && dist_count > 0) {
    auto mid = lambda1.begin() + static_cast<long>(lambda1.size() / 2);
    std::nth_element(lambda1.begin(), mid, lambda1.end());
    const double candidate = *mid * (dist_acc / static_cast<double>(dist_count)) / 4.0;
    if (candidate > 0 && std::isfinite(candidate)) sigma2 = candidate;
  }
  result.sigma_ep2 = sigma2;

  for (int q = 0; q < spec.size(); ++q) {
    double num = 0.0;
    double den = 0.0;
    for (const auto& [s, w] : sib[q]) {
      const double we = ep_weight(w, sites[s] - centers[q], tensors[q], sigma2);
      num += we * values[s];
      den += we;
    }
    if (!(den > 0)) {
      num = 0.0;
      for (const auto& [s, w] : sib[q]) num += w * values[s];
      den = 1.0;
    }
    result.raster.values[q] = num / den;
  }
  return result;
}

InterpResult interpolate(const GridModel& grid, const RasterSpec& spec, const EPConfig& config) {
  return interpolate(grid.positions, grid.gamma, spec, config);
}

}  // namespace netimg
