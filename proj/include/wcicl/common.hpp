// Copyright 2026 The wcicl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WCICL_COMMON_HPP_
#define WCICL_COMMON_HPP_

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace wcicl {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec15 = Eigen::Matrix<double, 15, 1>;
using Mat15 = Eigen::Matrix<double, 15, 15>;
using Mat3x15 = Eigen::Matrix<double, 3, 15>;
using RowVec15 = Eigen::Matrix<double, 1, 15>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr double kStandardGravity = 9.80665;
inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Error-state layout [dp, dv, phi, dbg, dba]; dp, dv, phi are estimate minus
// truth, dbg and dba are residual biases (truth minus estimate).
inline constexpr int kErrorStateDim = 15;
inline constexpr int kPos = 0;
inline constexpr int kVel = 3;
inline constexpr int kAtt = 6;
inline constexpr int kGyroBias = 9;
inline constexpr int kAccelBias = 12;

/// Raised when a covariance that must be inverted is singular or too badly
/// conditioned (condition number above kMaxCondition).
class SingularCovariance : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when two ranging modules coincide, so the line-of-sight direction is
/// undefined.
class DegenerateGeometry : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidSegment : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace linalg {

inline constexpr double kMaxCondition = 1e12;

template <typename Derived>
void symmetrize(Eigen::MatrixBase<Derived>& m) {
  m = (0.5 * (m + m.transpose())).eval();
}

template <typename Derived>
typename Derived::PlainObject symmetrized(const Eigen::MatrixBase<Derived>& m) {
  return 0.5 * (m + m.transpose());
}

/// Inverse of a symmetric positive-definite matrix through LDLT, with a
/// condition-number guard computed from the pivots.
inline MatX spd_inverse(const MatX& m, const char* what = "covariance") {
  const Eigen::LDLT<MatX> ldlt(symmetrized(m));
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
    throw SingularCovariance(std::string(what) + " is not positive definite");
  }
  const auto d = ldlt.vectorD();
  const double dmax = d.maxCoeff();
  const double dmin = d.minCoeff();
  if (!(dmin > 0.0) || dmax / dmin > kMaxCondition) {
    throw SingularCovariance(std::string(what) + " is singular or ill-conditioned");
  }
  MatX inv = ldlt.solve(MatX::Identity(m.rows(), m.cols()));
  symmetrize(inv);
  return inv;
}

inline double min_eigenvalue(const MatX& m) {
  if (m.size() == 0) {
    return 0.0;
  }
  const Eigen::SelfAdjointEigenSolver<MatX> es(symmetrized(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

inline double max_asymmetry(const MatX& m) {
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

}  // namespace linalg
}  // namespace wcicl

#endif  // WCICL_COMMON_HPP_
