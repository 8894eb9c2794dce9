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

#ifndef WCICL_RANGING_HPP_
#define WCICL_RANGING_HPP_

#include "wcicl/attitude.hpp"
#include "wcicl/common.hpp"
#include "wcicl/ins.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace wcicl {

inline constexpr double kMinSeparation = 1e-6;  // [m]

/// Body-frame offset from the IMU to the ranging module.
struct LeverArm {
  Vec3 l_b = Vec3::Zero();
};

enum class RangeKind { AgentToAnchor, AgentToAgent };

struct RangeMeasurement {
  RangeKind kind = RangeKind::AgentToAnchor;
  int source_id = 0;  // measuring agent
  int target_id = 0;  // anchor index or other agent id
  double d_tilde = 0.0;
  double sigma_r = 0.0;
};

/// What an agent broadcasts each epoch: IMU position and attitude with the
/// diagonal of their nominal covariance blocks.
struct NeighborInfo {
  std::uint32_t agent_id = 0;
  Vec3 position = Vec3::Zero();
  UnitQuaternion attitude;
  Vec3 pos_var = Vec3::Zero();  // [m^2]
  Vec3 att_var = Vec3::Zero();  // [rad^2]
};

/// Stacked differential ranges z = d_hat - d_tilde with Jacobian and nominal
/// noise covariance.
struct RangeObservationBatch {
  VecX z;
  MatX h;          // rows x 15
  MatX r_nominal;  // rows x rows

  Eigen::Index rows() const { return z.size(); }
  bool empty() const { return z.size() == 0; }

  static RangeObservationBatch with_rows(Eigen::Index m) {
    RangeObservationBatch b;
    b.z = VecX::Zero(m);
    b.h = MatX::Zero(m, kErrorStateDim);
    b.r_nominal = MatX::Zero(m, m);
    return b;
  }
};

inline Vec3 ranging_module_position(const Vec3& p_imu, const RotationMatrix& c_bn,
                                    const LeverArm& l) {
  return p_imu + c_bn * l.l_b;
}

struct RangePrediction {
  double d_hat = 0.0;
  Vec3 r_hat = Vec3::Zero();  // unit vector from `other` toward `self`
};

inline RangePrediction predict_range_and_direction(const Vec3& p_self, const Vec3& p_other) {
  const Vec3 diff = p_self - p_other;
  const double d = diff.norm();
  if (!(d >= kMinSeparation)) {
    throw DegenerateGeometry("ranging modules closer than 1e-6 m");
  }
  return {d, diff / d};
}

struct AnchorRow {
  RowVec15 h = RowVec15::Zero();
  double d_hat = 0.0;
};

inline AnchorRow anchor_observation_row(const NominalState& x_hat, const LeverArm& l,
                                        const Vec3& anchor_pos) {
  const Mat3 c = quat_to_rotmat(x_hat.q);
  const Vec3 lever_n = c * l.l_b;
  const auto pred = predict_range_and_direction(x_hat.p + lever_n, anchor_pos);
  AnchorRow row;
  row.d_hat = pred.d_hat;
  row.h.segment<3>(kPos) = pred.r_hat.transpose();
  row.h.segment<3>(kAtt) = pred.r_hat.transpose() * skew(lever_n);
  return row;
}

struct AgentRow {
  RowVec15 h = RowVec15::Zero();
  Eigen::Matrix<double, 1, 7> g = Eigen::Matrix<double, 1, 7>::Zero();  // over [dp_j, phi_j, n_d]
  double d_hat = 0.0;
};

inline AgentRow agent_observation_row(const NominalState& x_hat_i, const NeighborInfo& info_j,
                                      const LeverArm& l) {
  const Vec3 lever_i = quat_to_rotmat(x_hat_i.q) * l.l_b;
  const Vec3 lever_j = quat_to_rotmat(info_j.attitude) * l.l_b;
  const auto pred = predict_range_and_direction(x_hat_i.p + lever_i, info_j.position + lever_j);
  const auto r = pred.r_hat.transpose();
  AgentRow row;
  row.d_hat = pred.d_hat;
  row.h.segment<3>(kPos) = r;
  row.h.segment<3>(kAtt) = r * skew(lever_i);
  row.g.segment<3>(0) = -r;
  row.g.segment<3>(3) = -r * skew(lever_j);
  row.g(6) = -1.0;
  return row;
}

/// G R' G^T with R' = diag(2 pos_var, 2 att_var, sigma_r^2).
inline double agent_row_nominal_variance(const Eigen::Matrix<double, 1, 7>& g,
                                         const NeighborInfo& info, double sigma_r) {
  Eigen::Matrix<double, 7, 1> r_diag;
  r_diag << 2.0 * info.pos_var, 2.0 * info.att_var, sigma_r * sigma_r;
  return (g.array().square().transpose() * r_diag.array()).sum();
}

inline RangeObservationBatch build_anchor_batch(const NominalState& x_hat, const LeverArm& l,
                                                std::span<const Vec3> anchors,
                                                std::span<const RangeMeasurement> measurements) {
  auto batch = RangeObservationBatch::with_rows(static_cast<Eigen::Index>(measurements.size()));
  for (std::size_t k = 0; k < measurements.size(); ++k) {
    const auto& m = measurements[k];
    if (m.kind != RangeKind::AgentToAnchor || m.target_id < 0 ||
        static_cast<std::size_t>(m.target_id) >= anchors.size()) {
      throw std::invalid_argument("build_anchor_batch: measurement does not match an anchor");
    }
    const auto row = anchor_observation_row(x_hat, l, anchors[m.target_id]);
    const auto i = static_cast<Eigen::Index>(k);
    batch.h.row(i) = row.h;
    batch.z(i) = row.d_hat - m.d_tilde;
    batch.r_nominal(i, i) = m.sigma_r * m.sigma_r;
  }
  return batch;
}

inline const NeighborInfo& find_neighbor(std::span<const NeighborInfo> infos, int agent_id) {
  for (const auto& info : infos) {
    if (static_cast<int>(info.agent_id) == agent_id) {
      return info;
    }
  }
  throw std::invalid_argument("no broadcast received from the ranged agent");
}

/// Stacks inter-agent ranges; cross-agent couplings are dropped, so the
/// nominal covariance is diagonal with row variances G_j R'_j G_j^T.
inline RangeObservationBatch build_agent_batch(const NominalState& x_hat, const LeverArm& l,
                                               std::span<const NeighborInfo> infos,
                                               std::span<const RangeMeasurement> measurements) {
  auto batch = RangeObservationBatch::with_rows(static_cast<Eigen::Index>(measurements.size()));
  for (std::size_t k = 0; k < measurements.size(); ++k) {
    const auto& m = measurements[k];
    if (m.kind != RangeKind::AgentToAgent) {
      throw std::invalid_argument("build_agent_batch: expected an inter-agent range");
    }
    const auto& info = find_neighbor(infos, m.target_id);
    const auto row = agent_observation_row(x_hat, info, l);
    const auto i = static_cast<Eigen::Index>(k);
    batch.h.row(i) = row.h;
    batch.z(i) = row.d_hat - m.d_tilde;
    batch.r_nominal(i, i) = agent_row_nominal_variance(row.g, info, m.sigma_r);
  }
  return batch;
}

/// Whether 2 diag(P) - P is PSD for a 3x3 covariance block, the condition under
/// which the doubled-diagonal inflation dominates the true noise covariance.
inline bool doubled_diagonal_dominates(const Mat3& p, double tol = 1e-12) {
  const Mat3 gap = 2.0 * Mat3(p.diagonal().asDiagonal()) - p;
  return linalg::min_eigenvalue(gap) >= -tol * std::max(1.0, p.diagonal().maxCoeff());
}

}  // namespace wcicl

#endif  // WCICL_RANGING_HPP_
