#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "netimg/geometry.hpp"
#include "netimg/numerics.hpp"
#include "netimg/signal.hpp"
#include "netimg/types.hpp"

namespace netimg {

/// Phase-I optimization state of one receiver.
struct GridModel {
  std::vector<Vec2> positions;
  std::vector<Vec2> initial_positions;
  RVec gamma;       // effective scattering intensities in [0, 1]
  RVec gamma_beta;  // path loss per grid index, fixed at the initial position
  std::vector<std::pair<int, int>> adjacency;
  std::vector<std::vector<int>> neighbors;
  double d_max = 0.0;
  RegionOfInterest roi;

  int size() const { return static_cast<int>(positions.size()); }
  /// Rebuilds `neighbors` from `adjacency`.
  void index_neighbors();
};

/// sqrt(q) x sqrt(q) lattice of cell centres over the RoI with 4-neighbour
/// adjacency. d_max <= 0 selects 0.6 times the grid spacing.
GridModel uniform_grid(const Scene& scene, int k, int q, double d_max = -1.0);

struct Dictionary {
  CMat columns;  // (L N_rx) x Q

  int dim() const { return static_cast<int>(columns.rows()); }
  int size() const { return static_cast<int>(columns.cols()); }
};

Dictionary build_dictionary(const ArrayResponse& response, const std::vector<Vec2>& positions);

/// Sample covariance together with a low-rank factor F (S = F F^H) used to
/// evaluate quadratic forms and traces cheaply.
struct CovarianceData {
  CMat s_hat;
  CMat factor;
  double noise_variance = 1.0;

  static CovarianceData make(const CMat& s_hat, double noise_variance);
  int dim() const { return static_cast<int>(s_hat.rows()); }
};

struct Phase1Event {
  enum class Kind { intensity_pass, position_step };
  Kind kind = Kind::intensity_pass;
  int iteration = 0;
  double cost = 0.0;
};

struct Phase1Config {
  std::optional<double> eta;  // default eta_scale / mean(gamma_beta)^2
  double eta_scale = 1e3;
  double eps1 = 1e-4;
  double eps2 = 1e-3;
  int iter_max = 15;
  int iter1 = 3;
  int iter2 = 5;
  double armijo_step = 0.1;  // metres of maximal displacement for the first trial
  double armijo_shrink = 0.5;
  double armijo_c = 1e-4;
  int armijo_max_backtracks = 20;
  int subset_size = 0;  // 0 visits every index
  double active_threshold = 1e-6;
  std::optional<double> d_max;
  bool optimize_positions = true;
  int refresh_interval = 500;
  std::uint64_t seed = 0;
  /// Invoked with the exact penalized cost after every intensity pass and
  /// every accepted position step. Costs a factorization per call.
  std::function<void(const Phase1Event&)> observer;

  void validate() const;
};

double default_eta(const GridModel& grid, double scale = 1e3);

/// Inverse and log-det of V Gamma_r Gamma_beta V^H + sigma^2 I built from
/// sigma^{-2} I by one rank-1 update per active index.
HermitianInverse model_covariance_inverse(const GridModel& grid, const Dictionary& dict, double noise_variance,
                                          int refresh_interval = 500);

/// Explicit model covariance.
CMat model_covariance(const GridModel& grid, const Dictionary& dict, double noise_variance);

/// eta/2 sum over adjacent pairs of (gamma_q gb_q - gamma_q' gb_q')^2.
double cluster_penalty(const GridModel& grid, double eta);

/// ln|Sigma| + tr(Sigma^{-1} S) + cluster penalty, via a fresh Cholesky factorization.
double penalized_ml_cost(const GridModel& grid, const Dictionary& dict, const CovarianceData& data, double eta);
/// Same cost using an already maintained inverse.
double penalized_ml_cost(const GridModel& grid, const HermitianInverse& inv, const CovarianceData& data, double eta);

struct CoordinateResult {
  double d = 0.0;
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  double e = 0.0;
  double objective = 0.0;  // f_q(d), zero at d = 0
};

/// Increment objective f_q(d) of a single intensity coordinate.
double coordinate_objective(double d, const CoordinateResult& coeffs, const GridModel& grid, int q, double eta);

/// Exact minimization over gamma_q, applied to the grid and the inverse.
CoordinateResult coordinate_step(GridModel& grid, const Dictionary& dict, HermitianInverse& inv,
                                 const CovarianceData& data, int q, double eta);

void intensity_sweep(GridModel& grid, const Dictionary& dict, HermitianInverse& inv, const CovarianceData& data,
                     double eta, const Phase1Config& config, std::mt19937_64& rng, int iteration = 0);

std::vector<int> active_set(const GridModel& grid, double threshold = 1e-6);

/// Gradient of ln|Sigma| + tr(Sigma^{-1} S) with respect to the positions of
/// the active indices, ordered (x_0, y_0, x_1, y_1, ...).
RVec position_gradient(const GridModel& grid, const ArrayResponse& response, const HermitianInverse& inv,
                       const CovarianceData& data, const std::vector<int>& active);

/// Rectangle clamp followed by pull-back into the d_max ball around the
/// initial position, alternated until both constraints hold.
Vec2 project_position(const Vec2& p, const Vec2& p0, const RegionOfInterest& roi, double d_max);

struct PositionSweepResult {
  double first_gradient_norm = 0.0;
  int accepted_steps = 0;
};

PositionSweepResult position_sweep(GridModel& grid, Dictionary& dict, HermitianInverse& inv,
                                   const ArrayResponse& response, const CovarianceData& data, double eta,
                                   const Phase1Config& config, int iteration = 0);

struct Phase1Result {
  GridModel grid;
  Dictionary dict;
  double eta = 0.0;
  double final_cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

Phase1Result run_phase1(const CMat& s_hat, const Scene& scene, int k, const Pilot& pilot, double noise_variance,
                        int q, const Phase1Config& config);

/// Smallest descending-order prefix whose sum reaches fraction * total.
std::vector<std::uint8_t> threshold_support(const RVec& values, double fraction = 0.95);

}  // namespace netimg
