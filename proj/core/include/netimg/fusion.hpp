#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "netimg/numerics.hpp"
#include "netimg/raster.hpp"

namespace netimg {

/// Forward differences along x then y with replicate boundary, stacked as
/// [D_x; D_y] : R^Q -> R^{2Q}.
class TVOperator {
 public:
  TVOperator(int q1, int q2);

  int size() const { return q1_ * q2_; }
  RVec apply(const RVec& gamma) const;
  RVec adjoint(const RVec& z) const;
  /// D^T D gamma
  RVec normal(const RVec& gamma) const { return adjoint(apply(gamma)); }

 private:
  int q1_;
  int q2_;
};

struct FusionInputs {
  RasterSpec spec;
  std::vector<RVec> images;      // gamma'_{r,k}
  std::vector<RVec> gamma_beta;  // path loss per receiver at the cell centres

  int num_views() const { return static_cast<int>(images.size()); }
  void validate() const;
  /// Copy with every path-loss raster divided by the mean over all views and cells.
  FusionInputs normalized() const;
};

struct FusionState {
  RVec gamma;
  RMat lambda;  // K x Q, entries 0 or 1
  RVec z;
  RVec u;
};

struct FusionConfig {
  std::optional<double> mu;   // default 0.01 * max input
  std::optional<double> eta;  // default eta_ratio * mu
  double eta_ratio = 0.1;
  double rho = 1.0;
  double cg_tol = 1e-10;
  int cg_max_iter = 500;
  int iter_max = 50;
  int iter1 = 30;
  double eps1 = 1e-5;
  double eps2 = 1e-5;
  bool normalize_weights = true;

  void validate() const;
};

struct ResolvedPenalties {
  double mu = 0.0;
  double eta = 0.0;
  double rho = 1.0;
};

ResolvedPenalties resolve_penalties(const FusionInputs& inputs, const FusionConfig& config);

double wls_cost(const FusionState& state, const FusionInputs& inputs);

struct ObjectiveParts {
  double wls = 0.0;
  double sparsity = 0.0;
  double tv = 0.0;
  double total() const { return wls + sparsity + tv; }
};

ObjectiveParts fusion_objective(const FusionState& state, const FusionInputs& inputs, const TVOperator& d,
                                const ResolvedPenalties& pen);

/// Closed-form visibility selection: receiver k joins cell q iff
/// gamma'_{k,q} >= gamma'_q / 2.
RMat lambda_update(const FusionState& state, const FusionInputs& inputs);

struct GammaUpdateInfo {
  int cg_iterations = 0;
  bool cg_converged = false;
};

GammaUpdateInfo gamma_update(FusionState& state, const FusionInputs& inputs, const TVOperator& d,
                             const ResolvedPenalties& pen, const FusionConfig& config);

RVec soft_threshold(const RVec& x, double threshold);
void z_update(FusionState& state, const TVOperator& d, const ResolvedPenalties& pen);
void u_update(FusionState& state, const TVOperator& d);

struct FusionTraceRow {
  int iteration = 0;
  double objective = 0.0;
  double residual = 0.0;  // |z - D gamma|
};

struct FusionResult {
  FusionState state;
  ResolvedPenalties penalties;
  std::vector<FusionTraceRow> trace;
  int iterations = 0;
  bool converged = false;
  int cg_failures = 0;
};

FusionResult run_fusion(const FusionInputs& inputs, const FusionConfig& config);

void write_trace_csv(const std::filesystem::path& path, const std::vector<FusionTraceRow>& trace);

}  // namespace netimg
