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

#ifndef WCICL_CCL_CENTER_HPP_
#define WCICL_CCL_CENTER_HPP_

#include "wcicl/dcl_agent.hpp"
#include "wcicl/ins.hpp"
#include "wcicl/ranging.hpp"

#include <span>
#include <vector>

namespace wcicl {

/// Joint error-state EKF over every agent, run at a computing center.
struct JointFilter {
  std::vector<NominalState> x_hat;
  MatX p;  // 15N x 15N

  int agents() const { return static_cast<int>(x_hat.size()); }

  static JointFilter from_agents(std::span<const NominalState> states,
                                 std::span<const ErrorCovariance> covs) {
    if (states.size() != covs.size()) {
      throw std::invalid_argument("JointFilter: state/covariance count mismatch");
    }
    JointFilter jf;
    jf.x_hat.assign(states.begin(), states.end());
    const auto n = static_cast<Eigen::Index>(states.size());
    jf.p = MatX::Zero(kErrorStateDim * n, kErrorStateDim * n);
    for (Eigen::Index i = 0; i < n; ++i) {
      jf.p.block<kErrorStateDim, kErrorStateDim>(kErrorStateDim * i, kErrorStateDim * i) = covs[i];
    }
    return jf;
  }

  Mat15 block(int i, int j) const {
    return p.block<kErrorStateDim, kErrorStateDim>(kErrorStateDim * i, kErrorStateDim * j);
  }
};

/// Applies per-agent transitions blockwise: P_ij <- Phi_i P_ij Phi_j^T, plus
/// Qd_i on the diagonal blocks.
inline void apply_block_transition(MatX& p, std::span<const Mat15> phi, std::span<const Mat15> qd) {
  const auto n = static_cast<Eigen::Index>(phi.size());
  constexpr int d = kErrorStateDim;
  // Left multiply every block-row, then right multiply every block-column.
  for (Eigen::Index i = 0; i < n; ++i) {
    p.middleRows(d * i, d) = (phi[i] * p.middleRows(d * i, d)).eval();
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    p.middleCols(d * j, d) = (p.middleCols(d * j, d) * phi[j].transpose()).eval();
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    p.block<d, d>(d * i, d * i) += qd[i];
  }
  linalg::symmetrize(p);
}

/// One IMU step for every agent.
inline JointFilter joint_predict(JointFilter jf, std::span<const ImuSample> samples,
                                 const ImuNoiseModel& noise) {
  if (samples.size() != jf.x_hat.size()) {
    throw std::invalid_argument("joint_predict: need one IMU sample per agent");
  }
  std::vector<Mat15> phi(samples.size());
  std::vector<Mat15> qd(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto t = error_transition(jf.x_hat[i], samples[i], noise);
    phi[i] = t.phi;
    qd[i] = t.qd;
    jf.x_hat[i] = mechanize(jf.x_hat[i], samples[i], noise.gravity);
  }
  apply_block_transition(jf.p, phi, qd);
  return jf;
}

/// Accumulates each agent's transition over several IMU steps so the joint
/// covariance is touched once per measurement epoch. Because process noise
/// enters only the diagonal blocks, the result equals step-by-step
/// joint_predict up to rounding.
class JointPropagation {
 public:
  explicit JointPropagation(int agents)
      : phi_(agents, Mat15::Identity()), qd_(agents, Mat15::Zero()) {}

  /// Mechanizes agent i's nominal state and folds its transition in.
  void step(JointFilter& jf, int i, const ImuSample& imu, const ImuNoiseModel& noise) {
    const auto t = error_transition(jf.x_hat[i], imu, noise);
    jf.x_hat[i] = mechanize(jf.x_hat[i], imu, noise.gravity);
    phi_[i] = t.phi * phi_[i];
    qd_[i] = t.phi * qd_[i] * t.phi.transpose() + t.qd;
  }

  void flush(JointFilter& jf) {
    apply_block_transition(jf.p, phi_, qd_);
    for (std::size_t i = 0; i < phi_.size(); ++i) {
      phi_[i].setIdentity();
      qd_[i].setZero();
    }
  }

 private:
  std::vector<Mat15> phi_;
  std::vector<Mat15> qd_;
};

/// Joint EKF update with every delivered range. Anchor rows touch one agent's
/// block. An inter-agent row touches both: the center holds both estimates,
/// so agent j's error enters through its own block instead of inflated noise.
inline JointFilter joint_update(JointFilter jf, const LeverArm& l, std::span<const Vec3> anchors,
                                std::span<const RangeMeasurement> measurements) {
  if (measurements.empty()) {
    return jf;
  }
  constexpr int d = kErrorStateDim;
  const auto m = static_cast<Eigen::Index>(measurements.size());
  const Eigen::Index n = jf.p.rows();
  MatX h = MatX::Zero(m, n);
  VecX z(m);
  VecX r(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto& meas = measurements[k];
    const int i = meas.source_id;
    if (i < 0 || i >= jf.agents()) {
      throw std::invalid_argument("joint_update: unknown measuring agent");
    }
    if (meas.kind == RangeKind::AgentToAnchor) {
      if (meas.target_id < 0 || static_cast<std::size_t>(meas.target_id) >= anchors.size()) {
        throw std::invalid_argument("joint_update: unknown anchor");
      }
      const auto row = anchor_observation_row(jf.x_hat[i], l, anchors[meas.target_id]);
      h.block<1, d>(k, d * i) = row.h;
      z(k) = row.d_hat - meas.d_tilde;
    } else {
      const int j = meas.target_id;
      if (j < 0 || j >= jf.agents() || j == i) {
        throw std::invalid_argument("joint_update: unknown ranged agent");
      }
      NeighborInfo info;
      info.agent_id = static_cast<std::uint32_t>(j);
      info.position = jf.x_hat[j].p;
      info.attitude = jf.x_hat[j].q;
      const auto row = agent_observation_row(jf.x_hat[i], info, l);
      h.block<1, d>(k, d * i) = row.h;
      h.block<1, 3>(k, d * j + kPos) = row.g.segment<3>(0);
      h.block<1, 3>(k, d * j + kAtt) = row.g.segment<3>(3);
      z(k) = row.d_hat - meas.d_tilde;
    }
    r(k) = meas.sigma_r * meas.sigma_r;
  }

  const MatX hp = h * jf.p;
  MatX s = hp * h.transpose();
  s.diagonal() += r;
  const Eigen::LDLT<MatX> ldlt(linalg::symmetrized(s));
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0.0).all()) {
    throw SingularCovariance("joint innovation covariance is not positive definite");
  }
  // K^T = S^-1 H P
  const MatX kt = ldlt.solve(hp);
  const VecX dx = kt.transpose() * z;
  jf.p.noalias() -= kt.transpose() * hp;
  linalg::symmetrize(jf.p);
  for (int i = 0; i < jf.agents(); ++i) {
    jf.x_hat[i] = apply_error_feedback(jf.x_hat[i], dx.segment<d>(d * i));
  }
  return jf;
}

/// No-cooperation step for one agent: prediction and anchor-only EKF update;
/// inter-agent ranges are discarded.
inline AgentFilter ncl_step(AgentFilter f, std::span<const ImuSample> imu,
                            std::span<const Vec3> anchors,
                            std::span<const RangeMeasurement> anchor_measurements) {
  for (const auto& s : imu) {
    f = predict(std::move(f), s);
  }
  const auto batch = build_anchor_batch(f.x_hat, f.lever, anchors, anchor_measurements);
  return independent_update(std::move(f), batch);
}

}  // namespace wcicl

#endif  // WCICL_CCL_CENTER_HPP_
