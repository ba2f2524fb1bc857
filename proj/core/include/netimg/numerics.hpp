#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "netimg/types.hpp"

namespace netimg {

/// Inverse of a Hermitian positive-definite matrix kept current under
/// rank-1 modifications, together with the log-determinant of the matrix
/// itself. The forward matrix is tracked as well so the inverse can be
/// refreshed by a direct factorization every `refresh_interval` updates.
class HermitianInverse {
 public:
  HermitianInverse() = default;

  /// sigma2 * I of size n.
  static HermitianInverse scaled_identity(int n, double sigma2, int refresh_interval = 500);
  /// Factorizes an explicit Hermitian positive-definite matrix.
  static HermitianInverse from_matrix(const CMat& sigma, int refresh_interval = 500);

  int dim() const { return static_cast<int>(inv_.rows()); }
  const CMat& inverse() const { return inv_; }
  const CMat& matrix() const { return sigma_; }
  double log_det() const { return log_det_; }
  int refresh_interval() const { return refresh_interval_; }
  int updates_since_refresh() const { return since_refresh_; }

  /// Sigma <- Sigma + s v v^H. Throws SingularUpdateError when
  /// 1 + s v^H Sigma^{-1} v <= 0.
  void rank1_update(const CVec& v, double s);
  /// Same update with inv_v = Sigma^{-1} v supplied by the caller.
  void rank1_update(const CVec& v, const CVec& inv_v, double s);

  /// Recomputes the inverse and log-det from the tracked matrix.
  void refresh();

 private:
  CMat inv_;
  CMat sigma_;
  double log_det_ = 0.0;
  int refresh_interval_ = 500;
  int since_refresh_ = 0;
};

/// Functional form of HermitianInverse::rank1_update.
HermitianInverse rank1_update(HermitianInverse inv, const CVec& v, double s);

struct CubicRoots {
  std::vector<double> roots;     // ascending, duplicates collapsed
  bool identically_zero = false;  // every coefficient vanished
};

/// Real roots of c3 d^3 + c2 d^2 + c1 d + c0, degrading to the quadratic,
/// linear or constant case when leading coefficients fall below
/// 1e-12 * max|coeff|.
CubicRoots cubic_real_roots(double c3, double c2, double c1, double c0);

using LinearOperator = std::function<void(const RVec& x, RVec& out)>;

struct CgResult {
  RVec x;
  int iterations = 0;
  double residual_norm = 0.0;
  bool converged = false;
};

/// Conjugate gradient for symmetric positive semidefinite operators. Stops
/// when |Ax - b| <= tol |b| or after max_iter iterations. x0 is an optional
/// warm start (empty means zero).
CgResult cg_solve(const LinearOperator& apply_a, const RVec& b, double tol, int max_iter, const RVec& x0 = RVec());

struct Eigen2 {
  double lambda1 = 0.0;  // >= lambda2
  double lambda2 = 0.0;
  Vec2 f1 = Vec2::UnitX();
  Vec2 f2 = Vec2::UnitY();
};

/// Closed-form eigendecomposition of a symmetric 2x2 matrix.
Eigen2 svd2(const Eigen::Matrix2d& j);

}  // namespace netimg
