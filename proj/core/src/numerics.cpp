#include "netimg/numerics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>

namespace netimg {

HermitianInverse HermitianInverse::scaled_identity(int n, double sigma2, int refresh_interval) {
  if (!(sigma2 > 0)) throw std::invalid_argument("scaled_identity: variance must be positive");
  HermitianInverse h;
  h.sigma_ = CMat::Identity(n, n) * sigma2;
  h.inv_ = CMat::Identity(n, n) / sigma2;
  h.log_det_ = n * std::log(sigma2);
  h.refresh_interval_ = refresh_interval;
  return h;
}

HermitianInverse HermitianInverse::from_matrix(const CMat& sigma, int refresh_interval) {
  HermitianInverse h;
  h.sigma_ = sigma;
  h.refresh_interval_ = refresh_interval;
  h.refresh();
  return h;
}

void HermitianInverse::refresh() {
  Eigen::LLT<CMat> llt(sigma_);
  if (llt.info() != Eigen::Success) throw SingularUpdateError("HermitianInverse::refresh: matrix is not positive definite");
  const long n = sigma_.rows();
  inv_ = llt.solve(CMat::Identity(n, n));
  inv_ = (0.5 * (inv_ + inv_.adjoint())).eval();
  const auto& l = llt.matrixLLT();
  double ld = 0.0;
  for (long i = 0; i < n; ++i) ld += std::log(l(i, i).real());
  log_det_ = 2.0 * ld;
  since_refresh_ = 0;
}

void HermitianInverse::rank1_update(const CVec& v, double s) {
  const CVec inv_v = inv_ * v;
  rank1_update(v, inv_v, s);
}

void HermitianInverse::rank1_update(const CVec& v, const CVec& inv_v, double s) {
  if (s == 0.0) return;
  const double quad = v.dot(inv_v).real();  // v^H Sigma^{-1} v
  const double denom = 1.0 + s * quad;
  if (!(denom > 0.0)) throw SingularUpdateError("rank1_update: update would make the covariance indefinite");
  inv_.noalias() -= (s / denom) * inv_v * inv_v.adjoint();
  sigma_.noalias() += s * v * v.adjoint();
  log_det_ += std::log(denom);
  if (refresh_interval_ > 0 && ++since_refresh_ >= refresh_interval_) refresh();
}

HermitianInverse rank1_update(HermitianInverse inv, const CVec& v, double s) {
  inv.rank1_update(v, s);
  return inv;
}

namespace {

double horner(double c3, double c2, double c1, double c0, double x) { return ((c3 * x + c2) * x + c1) * x + c0; }

double polish(double c3, double c2, double c1, double c0, double x) {
  for (int it = 0; it < 3; ++it) {
    const double f = horner(c3, c2, c1, c0, x);
    const double df = (3 * c3 * x + 2 * c2) * x + c1;
    if (df == 0.0 || !std::isfinite(df)) break;
    const double step = f / df;
    const double nx = x - step;
    if (!std::isfinite(nx)) break;
    if (std::abs(horner(c3, c2, c1, c0, nx)) > std::abs(f)) break;
    x = nx;
    if (step == 0.0) break;
  }
  return x;
}

void quadratic_roots(double a, double b, double c, std::vector<double>& out) {
  const double disc = b * b - 4 * a * c;
  if (disc < 0) {
    // Near-tangent double roots can come out slightly negative.
    if (disc > -1e-14 * b * b) out.push_back(-b / (2 * a));
    return;
  }
  const double sq = std::sqrt(disc);
  const double q = -0.5 * (b + std::copysign(sq, b));
  if (q != 0.0) {
    out.push_back(q / a);
    out.push_back(c / q);
  } else {
    out.push_back(0.0);
  }
}

void depressed_cubic_roots(double c3, double c2, double c1, double c0, std::vector<double>& out) {
  const double a = c2 / c3;
  const double b = c1 / c3;
  const double c = c0 / c3;
  // x = t - a/3, t^3 + p t + q = 0
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const double shift = -a / 3.0;
  const double disc = (q / 2) * (q / 2) + (p / 3) * (p / 3) * (p / 3);
  if (p == 0.0 && q == 0.0) {
    out.push_back(shift);
  } else if (disc > 0) {
    const double sq = std::sqrt(disc);
    const double u = std::cbrt(-q / 2 + sq);
    const double v = std::cbrt(-q / 2 - sq);
    out.push_back(u + v + shift);
  } else if (p < 0) {
    const double r = 2.0 * std::sqrt(-p / 3.0);
    const double arg = std::clamp(3.0 * q / (p * r), -1.0, 1.0);
    const double theta = std::acos(arg) / 3.0;
    for (int k = 0; k < 3; ++k) out.push_back(r * std::cos(theta - 2.0 * kPi * k / 3.0) + shift);
  } else {
    out.push_back(std::cbrt(-q) + shift);
  }
}

}  // namespace

CubicRoots cubic_real_roots(double c3, double c2, double c1, double c0) {
  CubicRoots result;
  const double scale = std::max({std::abs(c3), std::abs(c2), std::abs(c1), std::abs(c0)});
  if (scale == 0.0) {
    result.identically_zero = true;
    return result;
  }
  const double tol = 1e-12 * scale;
  std::vector<double> raw;
  if (std::abs(c3) > tol) {
    depressed_cubic_roots(c3, c2, c1, c0, raw);
  } else if (std::abs(c2) > tol) {
    quadratic_roots(c2, c1, c0, raw);
    c3 = 0.0;
  } else if (std::abs(c1) > tol) {
    raw.push_back(-c0 / c1);
    c3 = c2 = 0.0;
  } else {
    return result;  // nonzero constant
  }
  for (double& r : raw) r = polish(c3, c2, c1, c0, r);
  std::sort(raw.begin(), raw.end());
  for (double r : raw) {
    if (!std::isfinite(r)) continue;
    if (!result.roots.empty() && std::abs(r - result.roots.back()) <= 1e-9 * std::max(1.0, std::abs(r))) continue;
    result.roots.push_back(r);
  }
  return result;
}

CgResult cg_solve(const LinearOperator& apply_a, const RVec& b, double tol, int max_iter, const RVec& x0) {
  CgResult res;
  const long n = b.size();
  if (!b.allFinite()) throw NumericError("cg_solve: right-hand side is not finite");
  const double b_norm = b.norm();
  if (b_norm == 0.0) {
    res.x = RVec::Zero(n);
    res.converged = true;
    return res;
  }
  res.x = (x0.size() == n) ? x0 : RVec::Zero(n);
  RVec ax(n);
  apply_a(res.x, ax);
  RVec r = b - ax;
  double rr = r.squaredNorm();
  const double target = tol * b_norm;
  res.residual_norm = std::sqrt(rr);
  if (res.residual_norm <= target) {
    res.converged = true;
    return res;
  }
  RVec p = r;
  RVec ap(n);
  for (int it = 0; it < max_iter; ++it) {
    apply_a(p, ap);
    const double pap = p.dot(ap);
    if (!std::isfinite(pap)) throw NumericError("cg_solve: operator produced non-finite values");
    if (pap <= 0.0) break;  // direction in the null space of a semidefinite operator
    const double alpha = rr / pap;
    res.x.noalias() += alpha * p;
    r.noalias() -= alpha * ap;
    const double rr_new = r.squaredNorm();
    res.iterations = it + 1;
    res.residual_norm = std::sqrt(rr_new);
    if (!std::isfinite(rr_new)) throw NumericError("cg_solve: residual is not finite");
    if (res.residual_norm <= target) {
      res.converged = true;
      return res;
    }
    p = r + (rr_new / rr) * p;
    rr = rr_new;
  }
  return res;
}

Eigen2 svd2(const Eigen::Matrix2d& j) {
  const double a = j(0, 0);
  const double b = 0.5 * (j(0, 1) + j(1, 0));
  const double c = j(1, 1);
  Eigen2 out;
  const double mean = 0.5 * (a + c);
  const double rad = std::hypot(0.5 * (a - c), b);
  out.lambda1 = mean + rad;
  out.lambda2 = mean - rad;
  if (rad <= 1e-300) return out;  // isotropic: canonical axes
  Vec2 f = (a >= c) ? Vec2(out.lambda1 - c, b) : Vec2(b, out.lambda1 - a);
  out.f1 = f.normalized();
  out.f2 = Vec2(-out.f1.y(), out.f1.x());
  return out;
}

}  // namespace netimg
