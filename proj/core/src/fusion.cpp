#include "netimg/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <iomanip>

namespace netimg {

TVOperator::TVOperator(int q1, int q2) : q1_(q1), q2_(q2) {
  if (q1 < 1 || q2 < 1) throw std::invalid_argument("TVOperator: dimensions must be positive");
}

RVec TVOperator::apply(const RVec& g) const {
  const int n = size();
  RVec out = RVec::Zero(2 * n);
  for (int r = 0; r < q2_; ++r) {
    for (int c = 0; c < q1_; ++c) {
      const int i = r * q1_ + c;
      if (c + 1 < q1_) out[i] = g[i + 1] - g[i];
      if (r + 1 < q2_) out[n + i] = g[i + q1_] - g[i];
    }
  }
  return out;
}

RVec TVOperator::adjoint(const RVec& z) const {
  const int n = size();
  RVec out = RVec::Zero(n);
  for (int r = 0; r < q2_; ++r) {
    for (int c = 0; c < q1_; ++c) {
      const int i = r * q1_ + c;
      if (c + 1 < q1_) {
        out[i + 1] += z[i];
        out[i] -= z[i];
      }
      if (r + 1 < q2_) {
        out[i + q1_] += z[n + i];
        out[i] -= z[n + i];
      }
    }
  }
  return out;
}

void FusionInputs::validate() const {
  spec.validate();
  if (images.empty()) throw std::invalid_argument("FusionInputs: need at least one view");
  if (images.size() != gamma_beta.size()) throw std::invalid_argument("FusionInputs: one weight raster per view");
  for (std::size_t k = 0; k < images.size(); ++k) {
    if (images[k].size() != spec.size() || gamma_beta[k].size() != spec.size()) {
      throw std::invalid_argument("FusionInputs: raster dimensions differ");
    }
    if (!(gamma_beta[k].minCoeff() > 0)) throw std::invalid_argument("FusionInputs: path losses must be positive");
  }
}

FusionInputs FusionInputs::normalized() const {
  FusionInputs out = *this;
  double sum = 0.0;
  long count = 0;
  for (const auto& gb : gamma_beta) {
    sum += gb.sum();
    count += gb.size();
  }
  if (sum > 0) {
    const double mean = sum / static_cast<double>(count);
    for (auto& gb : out.gamma_beta) gb /= mean;
  }
  return out;
}

void FusionConfig::validate() const {
  if (mu && *mu < 0) throw std::invalid_argument("FusionConfig: mu must be nonnegative");
  if (eta && *eta < 0) throw std::invalid_argument("FusionConfig: eta must be nonnegative");
  if (!(eta_ratio >= 0)) throw std::invalid_argument("FusionConfig: eta_ratio must be nonnegative");
  if (!(rho > 0)) throw std::invalid_argument("FusionConfig: rho must be positive");
  if (!(cg_tol > 0) || cg_max_iter < 1) throw std::invalid_argument("FusionConfig: bad CG settings");
  if (iter_max < 1 || iter1 < 1) throw std::invalid_argument("FusionConfig: iteration caps must be positive");
  if (!(eps1 > 0) || !(eps2 > 0)) throw std::invalid_argument("FusionConfig: tolerances must be positive");
}

ResolvedPenalties resolve_penalties(const FusionInputs& inputs, const FusionConfig& config) {
  double top = 0.0;
  for (const auto& img : inputs.images) top = std::max(top, img.maxCoeff());
  ResolvedPenalties pen;
  pen.mu = config.mu.value_or(0.01 * top);
  pen.eta = config.eta.value_or(config.eta_ratio * pen.mu);
  pen.rho = config.rho;
  return pen;
}

double wls_cost(const FusionState& state, const FusionInputs& inputs) {
  double acc = 0.0;
  for (int k = 0; k < inputs.num_views(); ++k) {
    const RVec& img = inputs.images[k];
    const RVec& gb = inputs.gamma_beta[k];
    for (long q = 0; q < img.size(); ++q) {
      const double lam = state.lambda(k, q);
      const double diff = img[q] - state.gamma[q];
      acc += lam * gb[q] * diff * diff + (1.0 - lam) * gb[q] * img[q] * img[q];
    }
  }
  return acc;
}

ObjectiveParts fusion_objective(const FusionState& state, const FusionInputs& inputs, const TVOperator& d,
                                const ResolvedPenalties& pen) {
  ObjectiveParts parts;
  parts.wls = wls_cost(state, inputs);
  parts.sparsity = pen.mu * state.gamma.lpNorm<1>();
  parts.tv = pen.eta * d.apply(state.gamma).lpNorm<1>();
  return parts;
}

RMat lambda_update(const FusionState& state, const FusionInputs& inputs) {
  const long q = state.gamma.size();
  RMat lambda(inputs.num_views(), q);
  for (int k = 0; k < inputs.num_views(); ++k) {
    for (long i = 0; i < q; ++i) {
      const double g = state.gamma[i];
      lambda(k, i) = g * g - 2.0 * g * inputs.images[k][i] > 0 ? 0.0 : 1.0;
    }
  }
  return lambda;
}

GammaUpdateInfo gamma_update(FusionState& state, const FusionInputs& inputs, const TVOperator& d,
                             const ResolvedPenalties& pen, const FusionConfig& config) {
  const long n = state.gamma.size();
  RVec diag = RVec::Zero(n);
  RVec rhs = RVec::Zero(n);
  for (int k = 0; k < inputs.num_views(); ++k) {
    for (long i = 0; i < n; ++i) {
      const double w = 2.0 * inputs.gamma_beta[k][i] * state.lambda(k, i);
      diag[i] += w;
      rhs[i] += w * inputs.images[k][i];
    }
  }
  rhs += pen.rho * d.adjoint(state.z + state.u);
  rhs.array() -= pen.mu;
  const LinearOperator op = [&](const RVec& x, RVec& out) {
    out = diag.cwiseProduct(x) + pen.rho * d.normal(x);
  };
  const auto cg = cg_solve(op, rhs, config.cg_tol, config.cg_max_iter, state.gamma);
  state.gamma = cg.x.cwiseMax(0.0).cwiseMin(1.0);
  return {cg.iterations, cg.converged};
}

RVec soft_threshold(const RVec& x, double threshold) {
  RVec out(x.size());
  for (long i = 0; i < x.size(); ++i) {
    const double mag = std::abs(x[i]) - threshold;
    out[i] = mag > 0 ? std::copysign(mag, x[i]) : 0.0;
  }
  return out;
}

void z_update(FusionState& state, const TVOperator& d, const ResolvedPenalties& pen) {
  state.z = soft_threshold(d.apply(state.gamma) - state.u, pen.eta / pen.rho);
}

void u_update(FusionState& state, const TVOperator& d) { state.u += state.z - d.apply(state.gamma); }

namespace {

double relative_change(double diff, double ref) {
  if (ref > 0) return diff / ref;
  return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
}

}  // namespace

FusionResult run_fusion(const FusionInputs& raw_inputs, const FusionConfig& config) {
  raw_inputs.validate();
  config.validate();
  const FusionInputs inputs = config.normalize_weights ? raw_inputs.normalized() : raw_inputs;
  const TVOperator d(inputs.spec.q1, inputs.spec.q2);

  FusionResult result;
  result.penalties = resolve_penalties(inputs, config);
  auto& st = result.state;
  st.gamma = RVec::Zero(inputs.spec.size());
  for (const auto& img : inputs.images) st.gamma += img;
  st.gamma = st.gamma.cwiseMax(0.0).cwiseMin(1.0);
  st.z = d.apply(st.gamma);
  st.u = RVec::Zero(st.z.size());
  st.lambda = RMat::Ones(inputs.num_views(), inputs.spec.size());

  for (int it = 0; it < config.iter_max; ++it) {
    const RVec gamma_prev = st.gamma;
    const RMat lambda_prev = st.lambda;
    st.lambda = lambda_update(st, inputs);
    for (int inner = 0; inner < config.iter1; ++inner) {
      const auto info = gamma_update(st, inputs, d, result.penalties, config);
      if (!info.cg_converged) ++result.cg_failures;
      z_update(st, d, result.penalties);
      u_update(st, d);
    }
    result.iterations = it + 1;
    result.trace.push_back(
        {it + 1, fusion_objective(st, inputs, d, result.penalties).total(), (st.z - d.apply(st.gamma)).norm()});
    const double dg = relative_change((st.gamma - gamma_prev).norm(), gamma_prev.norm());
    const double dl = relative_change((st.lambda - lambda_prev).norm(), lambda_prev.norm());
    if (dg <= config.eps1 && dl <= config.eps2) {
      result.converged = true;
      break;
    }
  }
  return result;
}

void write_trace_csv(const std::filesystem::path& path, const std::vector<FusionTraceRow>& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << std::setprecision(17) << "iteration,objective,residual\n";
  for (const auto& row : trace) out << row.iteration << ',' << row.objective << ',' << row.residual << '\n';
}

}  // namespace netimg
