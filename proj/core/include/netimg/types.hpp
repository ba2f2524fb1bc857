#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace netimg {

using Complex = std::complex<double>;
using Vec2 = Eigen::Vector2d;
using RVec = Eigen::VectorXd;
using CVec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using CMat = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;

// Raised for geometrically undefined inputs (coincident points, zero distances).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Raised when a rank-1 modification would make the covariance indefinite.
class SingularUpdateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-finite values met inside an iterative kernel.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed configuration or scene file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

}  // namespace netimg
