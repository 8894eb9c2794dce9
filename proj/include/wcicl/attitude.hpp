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

#ifndef WCICL_ATTITUDE_HPP_
#define WCICL_ATTITUDE_HPP_

#include "wcicl/common.hpp"

#include <Eigen/Geometry>

namespace wcicl {

/// Rotation matrix C_b^n mapping body-frame vectors into the navigation frame.
using RotationMatrix = Mat3;

/// Small attitude error (radians). The nominal rotation relates to the true one
/// through C_hat = (I - [phi x]) C, i.e. the error sits on the navigation side.
using PhiAngle = Vec3;

/// Hamilton, scalar-first unit quaternion representing q_b^n.
class UnitQuaternion {
 public:
  UnitQuaternion() : q_(Eigen::Quaterniond::Identity()) {}
  UnitQuaternion(double w, double x, double y, double z) : q_(w, x, y, z) { q_.normalize(); }
  explicit UnitQuaternion(const Eigen::Quaterniond& q) : q_(q.normalized()) {}

  static UnitQuaternion identity() { return {}; }

  /// Adopts components that are already unit-norm (within 1e-9) verbatim, so
  /// decoded values keep their exact bits; anything else is normalized.
  static UnitQuaternion from_normalized(double w, double x, double y, double z) {
    UnitQuaternion out;
    out.q_ = Eigen::Quaterniond(w, x, y, z);
    if (std::abs(out.q_.squaredNorm() - 1.0) > 1e-9) {
      out.q_.normalize();
    }
    return out;
  }

  /// Exponential map of a rotation vector.
  static UnitQuaternion from_rotation_vector(const Vec3& rv) {
    const double angle = rv.norm();
    const double half = 0.5 * angle;
    // sin(half)/angle, with its Taylor expansion near zero.
    const double s = angle < 1e-8 ? 0.5 - angle * angle / 48.0 : std::sin(half) / angle;
    return UnitQuaternion(Eigen::Quaterniond(std::cos(half), s * rv.x(), s * rv.y(), s * rv.z()));
  }

  /// Logarithmic map onto the shortest rotation vector.
  Vec3 to_rotation_vector() const {
    Eigen::Quaterniond q = q_;
    if (q.w() < 0.0) {
      q.coeffs() = -q.coeffs();
    }
    const Vec3 v = q.vec();
    const double n = v.norm();
    if (n < 1e-12) {
      return 2.0 * v / q.w();
    }
    return (2.0 * std::atan2(n, q.w()) / n) * v;
  }

  double w() const { return q_.w(); }
  double x() const { return q_.x(); }
  double y() const { return q_.y(); }
  double z() const { return q_.z(); }

  const Eigen::Quaterniond& eigen() const { return q_; }

  UnitQuaternion inverse() const { return UnitQuaternion(q_.conjugate()); }

  UnitQuaternion operator*(const UnitQuaternion& rhs) const { return UnitQuaternion(q_ * rhs.q_); }

  Vec3 rotate(const Vec3& v) const { return q_ * v; }

  friend bool operator==(const UnitQuaternion& a, const UnitQuaternion& b) {
    return a.q_.coeffs() == b.q_.coeffs();
  }

 private:
  Eigen::Quaterniond q_;
};

inline RotationMatrix quat_to_rotmat(const UnitQuaternion& q) {
  Eigen::Quaterniond e = q.eigen();
  if (std::abs(e.squaredNorm() - 1.0) > 1e-6) {
    e.normalize();
  }
  return e.toRotationMatrix();
}

/// Antisymmetric cross-product matrix: skew(a) * b == a.cross(b).
inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

/// First-order perturbation (I - [phi x]) C. Deliberately not re-orthonormalized.
inline RotationMatrix perturb_rotation(const RotationMatrix& c, const PhiAngle& phi) {
  return (Mat3::Identity() - skew(phi)) * c;
}

/// Removes an estimated attitude error from the nominal quaternion. The exact
/// map exp([phi x]) is applied on the navigation side, the inverse of
/// C_hat = exp(-[phi x]) C.
inline UnitQuaternion correct_attitude(const UnitQuaternion& q_hat, const PhiAngle& phi_est) {
  return UnitQuaternion::from_rotation_vector(phi_est) * q_hat;
}

/// Attitude error phi of an estimate with respect to the truth, with the same
/// sign convention as the error state (q_hat = exp(-phi) * q_true).
inline PhiAngle attitude_error(const UnitQuaternion& q_hat, const UnitQuaternion& q_true) {
  return (q_true * q_hat.inverse()).to_rotation_vector();
}

/// Yaw/pitch/roll (Z-Y-X) to quaternion. Pitch is positive nose-up in the
/// z-up navigation frame used throughout (body x forward, z up).
inline UnitQuaternion quat_from_euler(double yaw, double pitch, double roll) {
  const Eigen::Quaterniond q = Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
                               Eigen::AngleAxisd(-pitch, Vec3::UnitY()) *
                               Eigen::AngleAxisd(roll, Vec3::UnitX());
  return UnitQuaternion(q);
}

}  // namespace wcicl

#endif  // WCICL_ATTITUDE_HPP_
