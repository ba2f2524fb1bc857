#pragma once

#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "netimg/raster.hpp"
#include "netimg/single_view.hpp"

namespace netimg {

/// Bucket grid for nearest-site queries inside a rectangle.
class NearestIndex {
 public:
  NearestIndex(std::vector<Vec2> sites, const RegionOfInterest& bounds);

  int nearest(const Vec2& p) const;
  /// Indices of the k closest sites, closest first (ties by lower index).
  std::vector<int> k_nearest(const Vec2& p, int k) const;
  const std::vector<Vec2>& sites() const { return sites_; }

 private:
  std::vector<Vec2> sites_;
  Vec2 lo_;
  double cell_ = 1.0;
  int nx_ = 1;
  int ny_ = 1;
  std::vector<std::vector<int>> buckets_;
};

/// Nearest-site labels of an R x R raster laid over the RoI.
struct VoronoiPartition {
  int resolution = 0;
  RegionOfInterest roi;
  std::vector<Vec2> sites;
  std::vector<int> labels;  // row-major, row 0 at the smallest y

  static VoronoiPartition build(const std::vector<Vec2>& sites, const RegionOfInterest& roi, int resolution);
};

/// Per query, the (site index, weight) pairs with nonzero weight.
using SparseWeights = std::vector<std::vector<std::pair<int, double>>>;

/// Sibson weights: overlap of the query's Voronoi cell (among the queries)
/// with each site's cell, by counting co-labelled raster cells.
SparseWeights sibson_weights(const std::vector<Vec2>& sites, const std::vector<Vec2>& queries,
                             const RegionOfInterest& roi, int resolution);

struct PlaneFit {
  Vec2 gradient = Vec2::Zero();
  bool degenerate = false;
};

/// Least-squares plane through the samples; its slope is the gradient.
PlaneFit plane_fit_gradient(const std::vector<Vec2>& points, const std::vector<double>& values);

Eigen::Matrix2d structure_tensor(const std::vector<Vec2>& gradients, const std::vector<double>& weights);

double ep_weight(double w_sib, const Vec2& d, const Eigen::Matrix2d& j, double sigma_ep2);

enum class InterpMode { edge_preserving, natural_neighbor };

struct EPConfig {
  int plane_fit_neighbors = 8;        // nearest points besides the point itself
  std::optional<double> sigma_ep2;    // default from the structure-tensor statistics
  int resolution = 0;                 // 0 selects 8 * Q1'
  InterpMode mode = InterpMode::edge_preserving;

  void validate(const RasterSpec& spec) const;
};

struct InterpResult {
  RegularRaster raster;
  double sigma_ep2 = 0.0;
  int degenerate_fits = 0;
};

InterpResult interpolate(const std::vector<Vec2>& sites, const RVec& values, const RasterSpec& spec,
                         const EPConfig& config);
InterpResult interpolate(const GridModel& grid, const RasterSpec& spec, const EPConfig& config);

}  // namespace netimg
