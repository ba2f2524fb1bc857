#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "netimg/raster.hpp"
#include "netimg/signal.hpp"
#include "netimg/single_view.hpp"

namespace netimg {

/// Cell-centre membership in the union of the scene's targets.
std::vector<std::uint8_t> truth_mask(const Scene& scene, const std::vector<Vec2>& centers);
std::vector<std::uint8_t> truth_mask(const Scene& scene, const RasterSpec& spec);

/// 10 log10(sidelobe / mainlobe) in dB; +inf when the mainlobe is empty and
/// -inf when the sidelobe is empty.
double p_islr(const RVec& values, const std::vector<std::uint8_t>& truth);
double p_islr(const RegularRaster& image, const Scene& scene);

double iou(const std::vector<std::uint8_t>& support, const std::vector<std::uint8_t>& truth);
double iou(const RegularRaster& image, const Scene& scene, double fraction = 0.95);

/// Largest normalized inner product between distinct dictionary columns.
double coherence(const CMat& columns);
inline double coherence(const Dictionary& dict) { return coherence(dict.columns); }

struct DiscretizationDiag {
  double model_gap = 0.0;          // |Psi - Psi0|_F
  double projected_gap = 0.0;      // |Psi - P Psi0 P|_F
  double orthogonal_energy = 0.0;  // |P_perp Psi0|_F
};

/// Psi = V Gamma_r Gamma_beta V^H of the grid and Psi0 the noise-free true
/// covariance; P projects onto the span of the active columns.
DiscretizationDiag discretization_diag(const GridModel& grid, const Dictionary& dict, const CMat& psi0);
DiscretizationDiag discretization_diag(const GridModel& grid, const Dictionary& dict, const ScattererCloud& cloud,
                                       const Pilot& pilot, const Scene& scene, int k);

/// I(p) = v^H S v / |v|^4 at every cell centre, divided by its maximum.
RVec matched_filter_image(const CMat& s_hat, const ArrayResponse& response, const RasterSpec& spec);

struct MetricsReport {
  double p_islr = 0.0;
  double iou = 0.0;
  std::optional<double> coherence;
  std::optional<double> runtime_s;
  std::map<std::string, std::string> config;
};

/// JSON text; infinite P-ISLR values become the strings "inf" / "-inf".
std::string to_json(const MetricsReport& report);
MetricsReport score(const RegularRaster& image, const Scene& scene, double fraction = 0.95);

}  // namespace netimg
