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

#ifndef WCICL_INS_HPP_
#define WCICL_INS_HPP_

#include "wcicl/attitude.hpp"
#include "wcicl/common.hpp"

namespace wcicl {

/// Nominal navigation state of one agent, expressed at the IMU.
struct NominalState {
  Vec3 p = Vec3::Zero();   // [m]
  Vec3 v = Vec3::Zero();   // [m/s]
  UnitQuaternion q;        // q_b^n
  Vec3 bg = Vec3::Zero();  // gyro bias [rad/s]
  Vec3 ba = Vec3::Zero();  // accel bias [m/s^2]
};

/// Error-state covariance over [dp, dv, phi, dbg, dba].
using ErrorCovariance = Mat15;

struct ImuSample {
  Vec3 specific_force = Vec3::Zero();  // f_b [m/s^2]
  Vec3 angular_rate = Vec3::Zero();    // w_b [rad/s]
  double dt = 0.0;                     // [s]
};

/// Continuous-time IMU noise densities and turn-on bias spreads, SI units.
struct ImuNoiseModel {
  double gyro_arw = 0.0;           // [rad/sqrt(s)]
  double accel_vrw = 0.0;          // [m/s/sqrt(s)]
  double gyro_bias_sigma0 = 0.0;   // [rad/s]
  double accel_bias_sigma0 = 0.0;  // [m/s^2]
  double gravity = kStandardGravity;

  /// ADIS16465-class defaults: ARW 0.15 deg/sqrt(h), VRW 0.012 m/s/sqrt(h),
  /// gyro bias 2 deg/h, accel bias 300 ug.
  static ImuNoiseModel adis16465() {
    ImuNoiseModel m;
    m.gyro_arw = 0.15 * kDegToRad / 60.0;
    m.accel_vrw = 0.012 / 60.0;
    m.gyro_bias_sigma0 = 2.0 * kDegToRad / 3600.0;
    m.accel_bias_sigma0 = 300e-6 * kStandardGravity;
    return m;
  }

  static ImuNoiseModel noiseless() { return {}; }
};

inline Vec3 gravity_vector(double g) { return Vec3(0.0, 0.0, -g); }

/// One strapdown step: body-side attitude integration of the bias-corrected
/// rate, mid-step attitude for the velocity increment, trapezoidal position.
/// Earth rate and transport rate are ignored.
inline NominalState mechanize(const NominalState& x, const ImuSample& imu,
                              double gravity = kStandardGravity) {
  const Vec3 w = imu.angular_rate - x.bg;
  const Vec3 f = imu.specific_force - x.ba;
  const double dt = imu.dt;

  const UnitQuaternion q_mid = x.q * UnitQuaternion::from_rotation_vector(0.5 * dt * w);
  const Vec3 dv = (quat_to_rotmat(q_mid) * f + gravity_vector(gravity)) * dt;

  NominalState out = x;
  out.q = x.q * UnitQuaternion::from_rotation_vector(dt * w);
  out.p = x.p + x.v * dt + 0.5 * dv * dt;
  out.v = x.v + dv;
  return out;
}

struct ErrorTransition {
  Mat15 phi;
  Mat15 qd;
};

/// Continuous error dynamics F of the simplified INS error model. Position,
/// velocity and attitude errors are estimate minus truth; the bias errors are
/// the residual biases b - b_hat still present in the compensated IMU output,
/// which is what makes the bias blocks +C (accel) and -C (gyro).
inline Mat15 error_dynamics(const NominalState& x, const Vec3& specific_force_b) {
  const Mat3 c = quat_to_rotmat(x.q);
  const Vec3 f_n = c * (specific_force_b - x.ba);
  Mat15 f = Mat15::Zero();
  f.block<3, 3>(kPos, kVel) = Mat3::Identity();
  f.block<3, 3>(kVel, kAtt) = skew(f_n);
  f.block<3, 3>(kVel, kAccelBias) = c;
  f.block<3, 3>(kAtt, kGyroBias) = -c;
  return f;
}

/// First-order discretization Phi = I + F dt; biases are random constants, so
/// only velocity and attitude receive driving noise.
inline ErrorTransition error_transition(const NominalState& x, const ImuSample& imu,
                                        const ImuNoiseModel& noise) {
  ErrorTransition t;
  t.phi = Mat15::Identity() + error_dynamics(x, imu.specific_force) * imu.dt;
  t.qd = Mat15::Zero();
  const double va = noise.accel_vrw * noise.accel_vrw * imu.dt;
  const double vg = noise.gyro_arw * noise.gyro_arw * imu.dt;
  t.qd.block<3, 3>(kVel, kVel).diagonal().setConstant(va);
  t.qd.block<3, 3>(kAtt, kAtt).diagonal().setConstant(vg);
  return t;
}

inline ErrorCovariance propagate_covariance(const ErrorCovariance& p, const Mat15& phi,
                                            const Mat15& qd) {
  ErrorCovariance out = phi * p * phi.transpose() + qd;
  linalg::symmetrize(out);
  return out;
}

/// Linear map from the initial error state to the position error after a
/// straight constant-velocity horizon of t_a seconds.
inline Mat3x15 ins_error_sensitivity(const RotationMatrix& c_bn, const Vec3& f_b, double t_a) {
  if (t_a < 0.0) {
    throw std::invalid_argument("ins_error_sensitivity: horizon must be non-negative");
  }
  const Mat3 fx = skew(c_bn * f_b);
  const double t2 = t_a * t_a;
  const double t3 = t2 * t_a;
  Mat3x15 s;
  s.block<3, 3>(0, kPos) = Mat3::Identity();
  s.block<3, 3>(0, kVel) = Mat3::Identity() * t_a;
  s.block<3, 3>(0, kAtt) = 0.5 * fx * t2;
  s.block<3, 3>(0, kGyroBias) = -(1.0 / 6.0) * fx * c_bn * t3;
  s.block<3, 3>(0, kAccelBias) = 0.5 * c_bn * t2;
  return s;
}

/// W = S^T S, so tr(W P) is the mean-square position error after the horizon.
inline Mat15 wci_weight_matrix(const Mat3x15& s) { return s.transpose() * s; }

}  // namespace wcicl

#endif  // WCICL_INS_HPP_
