#include "netimg/single_view.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace netimg {

void GridModel::index_neighbors() {
  neighbors.assign(positions.size(), {});
  for (const auto& [a, b] : adjacency) {
    neighbors[a].push_back(b);
    neighbors[b].push_back(a);
  }
}

GridModel uniform_grid(const Scene& scene, int k, int q, double d_max) {
  const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(q))));
  if (q < 1 || n * n != q) throw std::invalid_argument("uniform_grid: Q must be a positive perfect square");
  const auto& roi = scene.roi;
  const double dx = roi.width() / n;
  const double dy = roi.height() / n;
  GridModel grid;
  grid.roi = roi;
  grid.positions.reserve(q);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) grid.positions.emplace_back(roi.x1 + (c + 0.5) * dx, roi.y1 + (r + 0.5) * dy);
  }
  grid.initial_positions = grid.positions;
  grid.gamma = RVec::Zero(q);
  grid.gamma_beta.resize(q);
  const Vec2& tx = scene.tx.position;
  const Vec2& rx = scene.rxs.at(k).position;
  for (int i = 0; i < q; ++i) grid.gamma_beta[i] = path_loss(tx, rx, grid.positions[i], scene.beta0_sq);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const int i = r * n + c;
      if (c + 1 < n) grid.adjacency.emplace_back(i, i + 1);
      if (r + 1 < n) grid.adjacency.emplace_back(i, i + n);
    }
  }
  grid.index_neighbors();
  grid.d_max = d_max > 0 ? d_max : 0.6 * std::min(dx, dy);
  return grid;
}

Dictionary build_dictionary(const ArrayResponse& response, const std::vector<Vec2>& positions) {
  return Dictionary{response.columns(positions)};
}

CovarianceData CovarianceData::make(const CMat& s_hat, double noise_variance) {
  if (s_hat.rows() != s_hat.cols()) throw std::invalid_argument("CovarianceData: sample covariance must be square");
  if (!(noise_variance > 0)) throw std::invalid_argument("CovarianceData: noise variance must be positive");
  CovarianceData data;
  data.s_hat = s_hat;
  data.noise_variance = noise_variance;
  Eigen::SelfAdjointEigenSolver<CMat> eig(s_hat);
  const RVec& lam = eig.eigenvalues();
  const double top = lam.size() > 0 ? lam.maxCoeff() : 0.0;
  std::vector<int> keep;
  for (int i = 0; i < lam.size(); ++i) {
    if (top > 0 && lam[i] > 1e-12 * top) keep.push_back(i);
  }
  data.factor.resize(s_hat.rows(), static_cast<long>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    data.factor.col(static_cast<long>(j)) = eig.eigenvectors().col(keep[j]) * std::sqrt(lam[keep[j]]);
  }
  return data;
}

void Phase1Config::validate() const {
  if (eta && *eta < 0) throw std::invalid_argument("Phase1Config: eta must be nonnegative");
  if (!(eta_scale >= 0)) throw std::invalid_argument("Phase1Config: eta_scale must be nonnegative");
  if (!(eps1 > 0) || !(eps2 > 0)) throw std::invalid_argument("Phase1Config: tolerances must be positive");
  if (iter_max < 1 || iter1 < 0 || iter2 < 0) throw std::invalid_argument("Phase1Config: bad iteration caps");
  if (!(armijo_step > 0) || !(armijo_shrink > 0 && armijo_shrink < 1) || !(armijo_c > 0 && armijo_c < 1)) {
    throw std::invalid_argument("Phase1Config: bad Armijo parameters");
  }
  if (subset_size < 0) throw std::invalid_argument("Phase1Config: subset size must be nonnegative");
  if (d_max && !(*d_max > 0)) throw std::invalid_argument("Phase1Config: d_max must be positive");
}

double default_eta(const GridModel& grid, double scale) {
  const double mean = grid.gamma_beta.mean();
  return scale / (mean * mean);
}

HermitianInverse model_covariance_inverse(const GridModel& grid, const Dictionary& dict, double noise_variance,
                                          int refresh_interval) {
  auto inv = HermitianInverse::scaled_identity(dict.dim(), noise_variance, refresh_interval);
  for (int q = 0; q < grid.size(); ++q) {
    if (grid.gamma[q] > 0) inv.rank1_update(dict.columns.col(q), grid.gamma[q] * grid.gamma_beta[q]);
  }
  return inv;
}

CMat model_covariance(const GridModel& grid, const Dictionary& dict, double noise_variance) {
  std::vector<int> idx;
  for (int q = 0; q < grid.size(); ++q) {
    if (grid.gamma[q] > 0) idx.push_back(q);
  }
  CMat w(dict.dim(), static_cast<long>(idx.size()));
  for (std::size_t j = 0; j < idx.size(); ++j) {
    w.col(static_cast<long>(j)) = dict.columns.col(idx[j]) * std::sqrt(grid.gamma[idx[j]] * grid.gamma_beta[idx[j]]);
  }
  CMat sigma = CMat::Identity(dict.dim(), dict.dim()) * noise_variance;
  if (!idx.empty()) sigma.noalias() += w * w.adjoint();
  return sigma;
}

double cluster_penalty(const GridModel& grid, double eta) {
  if (eta == 0.0) return 0.0;
  double acc = 0.0;
  for (const auto& [a, b] : grid.adjacency) {
    const double diff = grid.gamma[a] * grid.gamma_beta[a] - grid.gamma[b] * grid.gamma_beta[b];
    acc += diff * diff;
  }
  return 0.5 * eta * acc;
}

namespace {

// ln|Sigma| + tr(Sigma^{-1} F F^H) through a Cholesky factorization.
double ml_cost_from_sigma(const CMat& sigma, const CMat& factor) {
  Eigen::LLT<CMat> llt(sigma);
  if (llt.info() != Eigen::Success) throw NumericError("model covariance is not positive definite");
  const CMat& l = llt.matrixLLT();
  double log_det = 0.0;
  for (long i = 0; i < l.rows(); ++i) log_det += std::log(l(i, i).real());
  log_det *= 2.0;
  double trace = 0.0;
  if (factor.cols() > 0) trace = llt.matrixL().solve(factor).squaredNorm();
  return log_det + trace;
}

}  // namespace

double penalized_ml_cost(const GridModel& grid, const Dictionary& dict, const CovarianceData& data, double eta) {
  return ml_cost_from_sigma(model_covariance(grid, dict, data.noise_variance), data.factor) +
         cluster_penalty(grid, eta);
}

double penalized_ml_cost(const GridModel& grid, const HermitianInverse& inv, const CovarianceData& data, double eta) {
  const double trace = inv.inverse().cwiseProduct(data.s_hat.conjugate()).sum().real();
  return inv.log_det() + trace + cluster_penalty(grid, eta);
}

double coordinate_objective(double d, const CoordinateResult& cf, const GridModel& grid, int q, double eta) {
  const double one = 1.0 + d * cf.a;
  double value = std::log(one) - d * cf.b / one;
  if (eta != 0.0) {
    const double gb = grid.gamma_beta[q];
    double pen = 0.0;
    for (int nb : grid.neighbors[q]) {
      const double base = grid.gamma[q] * gb - grid.gamma[nb] * grid.gamma_beta[nb];
      const double shifted = d * gb + base;
      pen += shifted * shifted - base * base;
    }
    value += 0.5 * eta * pen;
  }
  return value;
}

CoordinateResult coordinate_step(GridModel& grid, const Dictionary& dict, HermitianInverse& inv,
                                 const CovarianceData& data, int q, double eta) {
  const double gb = grid.gamma_beta[q];
  const double g = grid.gamma[q];
  const auto v = dict.columns.col(q);
  const CVec u = inv.inverse() * v;
  CoordinateResult cf;
  cf.a = gb * v.dot(u).real();
  const CVec fu = data.factor.adjoint() * u;
  cf.b = gb * fu.squaredNorm();
  if (eta != 0.0) {
    double sum = 0.0;
    for (int nb : grid.neighbors[q]) sum += g * gb - grid.gamma[nb] * grid.gamma_beta[nb];
    cf.c = eta * static_cast<double>(grid.neighbors[q].size()) * gb * gb;
    cf.e = eta * gb * sum;
  }
  const double a = cf.a;
  double lo = -g;
  if (1.0 + lo * a <= 1e-12) lo = -1.0 / a + 1e-10;
  const double hi = 1.0 - g;

  std::vector<double> candidates{0.0, lo, hi};
  const auto roots = cubic_real_roots(a * a * cf.c, 2.0 * a * cf.c + a * a * cf.e, a * a + cf.c + 2.0 * a * cf.e,
                                      a - cf.b + cf.e);
  for (double r : roots.roots) {
    if (r >= lo && r <= hi) candidates.push_back(r);
  }
  double best_d = 0.0;
  double best_f = 0.0;
  for (double d : candidates) {
    if (1.0 + d * a <= 1e-12) d = -1.0 / a + 1e-10;
    const double f = coordinate_objective(d, cf, grid, q, eta);
    if (f < best_f) {
      best_f = f;
      best_d = d;
    }
  }
  cf.d = best_d;
  cf.objective = best_f;
  if (best_d != 0.0) {
    grid.gamma[q] = std::clamp(g + best_d, 0.0, 1.0);
    const double applied = grid.gamma[q] - g;
    if (applied != 0.0) inv.rank1_update(v, u, applied * gb);
  }
  return cf;
}

void intensity_sweep(GridModel& grid, const Dictionary& dict, HermitianInverse& inv, const CovarianceData& data,
                     double eta, const Phase1Config& config, std::mt19937_64& rng, int iteration) {
  std::vector<int> order(grid.size());
  for (int pass = 0; pass < config.iter1; ++pass) {
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const std::size_t count =
        config.subset_size > 0 ? std::min<std::size_t>(config.subset_size, order.size()) : order.size();
    for (std::size_t i = 0; i < count; ++i) coordinate_step(grid, dict, inv, data, order[i], eta);
    if (config.observer) {
      config.observer({Phase1Event::Kind::intensity_pass, iteration, penalized_ml_cost(grid, dict, data, eta)});
    }
  }
}

std::vector<int> active_set(const GridModel& grid, double threshold) {
  std::vector<int> out;
  for (int q = 0; q < grid.size(); ++q) {
    if (grid.gamma[q] > threshold) out.push_back(q);
  }
  return out;
}

RVec position_gradient(const GridModel& grid, const ArrayResponse& response, const HermitianInverse& inv,
                       const CovarianceData& data, const std::vector<int>& active) {
  if (active.empty()) throw std::invalid_argument("position_gradient: active set is empty");
  RVec grad(2 * static_cast<long>(active.size()));
  const CMat& sinv = inv.inverse();
  for (std::size_t j = 0; j < active.size(); ++j) {
    const int q = active[j];
    const double g = grid.gamma[q] * grid.gamma_beta[q];
    const auto jet = response.column_jet(grid.positions[q]);
    // Quantities of the covariance with index q removed, from the full inverse.
    const CVec u = sinv * jet.v;
    const double s_full = jet.v.dot(u).real();
    const double keep = 1.0 - g * s_full;
    if (!(keep > 0)) throw NumericError("position_gradient: downdated covariance is not positive definite");
    const CVec w = u / keep;
    const double s_rem = jet.v.dot(w).real();
    const CVec fw = data.factor.adjoint() * w;
    const double t = fw.squaredNorm();
    const CVec resid = jet.v - data.factor * fw;
    CVec a_resid = sinv * resid;
    a_resid += u * (g * u.dot(resid) / keep);
    const double den = 1.0 + g * s_rem;
    const auto component = [&](const CVec& dv) {
      return 2.0 * g * dv.dot(a_resid).real() / den + 2.0 * g * g * t * dv.dot(w).real() / (den * den);
    };
    grad[2 * static_cast<long>(j)] = component(jet.dx);
    grad[2 * static_cast<long>(j) + 1] = component(jet.dy);
  }
  return grad;
}

Vec2 project_position(const Vec2& p, const Vec2& p0, const RegionOfInterest& roi, double d_max) {
  Vec2 out = p;
  for (int round = 0; round < 10; ++round) {
    out = roi.clamp(out);
    const Vec2 off = out - p0;
    const double dist = off.norm();
    if (dist > d_max) out = p0 + off * (d_max / dist);
    if (roi.contains(out) && (out - p0).norm() <= d_max * (1.0 + 1e-12)) break;
  }
  return out;
}

PositionSweepResult position_sweep(GridModel& grid, Dictionary& dict, HermitianInverse& inv,
                                   const ArrayResponse& response, const CovarianceData& data, double eta,
                                   const Phase1Config& config, int iteration) {
  PositionSweepResult result;
  for (int it = 0; it < config.iter2; ++it) {
    const auto active = active_set(grid, config.active_threshold);
    if (active.empty()) break;
    const RVec grad = position_gradient(grid, response, inv, data, active);
    if (it == 0) result.first_gradient_norm = grad.norm();
    const double gmax = grad.cwiseAbs().maxCoeff();
    if (!(gmax > 0)) break;

    const long n = dict.dim();
    CMat w_old(n, static_cast<long>(active.size()));
    for (std::size_t j = 0; j < active.size(); ++j) {
      const int q = active[j];
      w_old.col(static_cast<long>(j)) = dict.columns.col(q) * std::sqrt(grid.gamma[q] * grid.gamma_beta[q]);
    }
    CMat base = inv.matrix();
    base.noalias() -= w_old * w_old.adjoint();
    const double f0 = ml_cost_from_sigma(inv.matrix(), data.factor);

    double step = config.armijo_step / gmax;
    bool accepted = false;
    std::vector<Vec2> trial(active.size());
    CMat trial_cols(n, static_cast<long>(active.size()));
    CMat trial_sigma;
    for (int bt = 0; bt <= config.armijo_max_backtracks; ++bt) {
      double decrease = 0.0;
      for (std::size_t j = 0; j < active.size(); ++j) {
        const int q = active[j];
        const Vec2 g2(grad[2 * static_cast<long>(j)], grad[2 * static_cast<long>(j) + 1]);
        trial[j] = project_position(grid.positions[q] - step * g2, grid.initial_positions[q], grid.roi, grid.d_max);
        decrease += g2.dot(grid.positions[q] - trial[j]);
        trial_cols.col(static_cast<long>(j)) = response.column(trial[j]);
      }
      CMat w_new = trial_cols;
      for (std::size_t j = 0; j < active.size(); ++j) {
        const int q = active[j];
        w_new.col(static_cast<long>(j)) *= std::sqrt(grid.gamma[q] * grid.gamma_beta[q]);
      }
      trial_sigma = base;
      trial_sigma.noalias() += w_new * w_new.adjoint();
      const double f1 = ml_cost_from_sigma(trial_sigma, data.factor);
      if (decrease > 0 && f1 <= f0 - config.armijo_c * decrease) {
        accepted = true;
        break;
      }
      step *= config.armijo_shrink;
    }
    if (!accepted) break;
    for (std::size_t j = 0; j < active.size(); ++j) {
      grid.positions[active[j]] = trial[j];
      dict.columns.col(active[j]) = trial_cols.col(static_cast<long>(j));
    }
    inv = HermitianInverse::from_matrix(trial_sigma, inv.refresh_interval());
    ++result.accepted_steps;
    if (config.observer) {
      config.observer({Phase1Event::Kind::position_step, iteration, penalized_ml_cost(grid, dict, data, eta)});
    }
  }
  return result;
}

Phase1Result run_phase1(const CMat& s_hat, const Scene& scene, int k, const Pilot& pilot, double noise_variance,
                        int q, const Phase1Config& config) {
  config.validate();
  const ArrayResponse response(scene, k, pilot);
  if (s_hat.rows() != response.dim()) throw std::invalid_argument("run_phase1: covariance size does not match arrays");
  Phase1Result out;
  out.grid = uniform_grid(scene, k, q, config.d_max.value_or(-1.0));
  out.dict = build_dictionary(response, out.grid.positions);
  const auto data = CovarianceData::make(s_hat, noise_variance);
  out.eta = config.eta.value_or(default_eta(out.grid, config.eta_scale));
  auto inv = model_covariance_inverse(out.grid, out.dict, noise_variance, config.refresh_interval);
  auto rng = substream(config.seed, 0x5eedU, static_cast<std::uint64_t>(k));

  for (int it = 0; it < config.iter_max; ++it) {
    const RVec previous = out.grid.gamma;
    intensity_sweep(out.grid, out.dict, inv, data, out.eta, config, rng, it);
    double grad_norm = 0.0;
    if (config.optimize_positions) {
      grad_norm = position_sweep(out.grid, out.dict, inv, response, data, out.eta, config, it).first_gradient_norm;
    }
    out.iterations = it + 1;
    const double change = (out.grid.gamma - previous).squaredNorm();
    const double ref = previous.squaredNorm();
    const bool small_change = ref > 0 ? change / ref <= config.eps1 : change == 0.0;
    if (small_change && grad_norm <= config.eps2) {
      out.converged = true;
      break;
    }
  }
  out.final_cost = penalized_ml_cost(out.grid, out.dict, data, out.eta);
  return out;
}

std::vector<std::uint8_t> threshold_support(const RVec& values, double fraction) {
  if (!(fraction > 0 && fraction <= 1)) throw std::invalid_argument("threshold_support: fraction must be in (0, 1]");
  std::vector<std::uint8_t> mask(values.size(), 0);
  const double total = values.cwiseMax(0.0).sum();
  if (!(total > 0)) return mask;
  std::vector<long> order(values.size());
  std::iota(order.begin(), order.end(), 0L);
  std::stable_sort(order.begin(), order.end(), [&](long i, long j) { return values[i] > values[j]; });
  const double target = fraction * total * (1.0 - 1e-12);
  double acc = 0.0;
  for (long i : order) {
    mask[i] = 1;
    acc += std::max(values[i], 0.0);
    if (acc >= target) break;
  }
  return mask;
}

}  // namespace netimg
