#include "netimg/metrics.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

namespace netimg {

std::vector<std::uint8_t> truth_mask(const Scene& scene, const std::vector<Vec2>& centers) {
  std::vector<std::uint8_t> mask(centers.size());
  for (std::size_t i = 0; i < centers.size(); ++i) mask[i] = scene.in_targets(centers[i]) ? 1 : 0;
  return mask;
}

std::vector<std::uint8_t> truth_mask(const Scene& scene, const RasterSpec& spec) {
  return truth_mask(scene, spec.centers());
}

double p_islr(const RVec& values, const std::vector<std::uint8_t>& truth) {
  if (static_cast<std::size_t>(values.size()) != truth.size()) throw std::invalid_argument("p_islr: size mismatch");
  double main = 0.0;
  double side = 0.0;
  for (long i = 0; i < values.size(); ++i) (truth[i] ? main : side) += values[i];
  if (main <= 0 && side <= 0) throw std::invalid_argument("p_islr: image is zero");
  if (main <= 0) return std::numeric_limits<double>::infinity();
  if (side <= 0) return -std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(side / main);
}

double p_islr(const RegularRaster& image, const Scene& scene) {
  return p_islr(image.values, truth_mask(scene, image.spec));
}

double iou(const std::vector<std::uint8_t>& support, const std::vector<std::uint8_t>& truth) {
  if (support.size() != truth.size()) throw std::invalid_argument("iou: size mismatch");
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    inter += (support[i] && truth[i]) ? 1 : 0;
    uni += (support[i] || truth[i]) ? 1 : 0;
  }
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

double iou(const RegularRaster& image, const Scene& scene, double fraction) {
  return iou(threshold_support(image.values, fraction), truth_mask(scene, image.spec));
}

double coherence(const CMat& columns) {
  const long q = columns.cols();
  if (q < 2) return 0.0;
  CMat unit = columns;
  for (long i = 0; i < q; ++i) {
    const double n = unit.col(i).norm();
    if (n > 0) unit.col(i) /= n;
  }
  constexpr long kBlock = 512;
  double best = 0.0;
  for (long i0 = 0; i0 < q; i0 += kBlock) {
    const long bi = std::min(kBlock, q - i0);
    for (long j0 = i0; j0 < q; j0 += kBlock) {
      const long bj = std::min(kBlock, q - j0);
      const CMat g = unit.middleCols(i0, bi).adjoint() * unit.middleCols(j0, bj);
      for (long j = 0; j < bj; ++j) {
        for (long i = 0; i < bi; ++i) {
          if (i0 + i >= j0 + j) continue;
          best = std::max(best, std::abs(g(i, j)));
        }
      }
    }
  }
  return std::min(best, 1.0);
}

DiscretizationDiag discretization_diag(const GridModel& grid, const Dictionary& dict, const CMat& psi0) {
  const long n = dict.dim();
  std::vector<int> active;
  for (int q = 0; q < grid.size(); ++q) {
    if (grid.gamma[q] > 0) active.push_back(q);
  }
  CMat psi = CMat::Zero(n, n);
  DiscretizationDiag out;
  if (active.empty()) {
    out.model_gap = psi0.norm();
    out.projected_gap = 0.0;
    out.orthogonal_energy = psi0.norm();
    return out;
  }
  CMat vbar(n, static_cast<long>(active.size()));
  for (std::size_t j = 0; j < active.size(); ++j) vbar.col(static_cast<long>(j)) = dict.columns.col(active[j]);
  CMat w = vbar;
  for (std::size_t j = 0; j < active.size(); ++j) {
    w.col(static_cast<long>(j)) *= std::sqrt(grid.gamma[active[j]] * grid.gamma_beta[active[j]]);
  }
  psi.noalias() = w * w.adjoint();

  // Orthonormal basis of span(vbar) from the eigenvectors of vbar vbar^H.
  Eigen::SelfAdjointEigenSolver<CMat> eig(vbar * vbar.adjoint());
  const double top = eig.eigenvalues().maxCoeff();
  std::vector<long> keep;
  for (long i = 0; i < n; ++i) {
    if (eig.eigenvalues()[i] > 1e-10 * top) keep.push_back(i);
  }
  CMat basis(n, static_cast<long>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) basis.col(static_cast<long>(j)) = eig.eigenvectors().col(keep[j]);
  const CMat proj = basis * basis.adjoint();
  const CMat perp = CMat::Identity(n, n) - proj;

  out.model_gap = (psi - psi0).norm();
  out.projected_gap = (psi - proj * psi0 * proj).norm();
  out.orthogonal_energy = (perp * psi0).norm();
  return out;
}

DiscretizationDiag discretization_diag(const GridModel& grid, const Dictionary& dict, const ScattererCloud& cloud,
                                       const Pilot& pilot, const Scene& scene, int k) {
  return discretization_diag(grid, dict, true_covariance(cloud, pilot, scene, k, NoiseModel{0.0}));
}

RVec matched_filter_image(const CMat& s_hat, const ArrayResponse& response, const RasterSpec& spec) {
  if (s_hat.rows() != response.dim()) throw std::invalid_argument("matched_filter_image: dimension mismatch");
  RVec out(spec.size());
  CVec v(response.dim());
  for (int i = 0; i < spec.size(); ++i) {
    response.column(spec.center(i), v);
    const double n2 = v.squaredNorm();
    out[i] = v.dot(s_hat * v).real() / (n2 * n2);
  }
  const double top = out.maxCoeff();
  if (top > 0) out /= top;
  return out;
}

namespace {

nlohmann::json finite_or_sentinel(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

}  // namespace

std::string to_json(const MetricsReport& report) {
  nlohmann::json j;
  j["p_islr_db"] = finite_or_sentinel(report.p_islr);
  j["iou"] = report.iou;
  if (report.coherence) j["coherence"] = *report.coherence;
  if (report.runtime_s) j["runtime_s"] = *report.runtime_s;
  if (!report.config.empty()) j["config"] = report.config;
  return j.dump(2);
}

MetricsReport score(const RegularRaster& image, const Scene& scene, double fraction) {
  MetricsReport r;
  const auto truth = truth_mask(scene, image.spec);
  r.p_islr = p_islr(image.values, truth);
  r.iou = iou(threshold_support(image.values, fraction), truth);
  return r;
}

}  // namespace netimg
