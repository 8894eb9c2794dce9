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

#ifndef WCICL_DCL_AGENT_HPP_
#define WCICL_DCL_AGENT_HPP_

#include "wcicl/ci_fusion.hpp"
#include "wcicl/ins.hpp"
#include "wcicl/ranging.hpp"

#include <array>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>

namespace wcicl {

/// Criterion used by the correlated (inter-agent) update.
struct FusionMethod {
  enum class Kind { CITrace, CIDet, WCI, NoCooperation };

  Kind kind = Kind::WCI;
  double t_a = 5.0;  // WCI horizon [s]

  static FusionMethod ci_trace() { return {Kind::CITrace, 0.0}; }
  static FusionMethod ci_det() { return {Kind::CIDet, 0.0}; }
  static FusionMethod wci(double t_a) {
    if (t_a < 0.0) {
      throw std::invalid_argument("WCI horizon must be non-negative");
    }
    return {Kind::WCI, t_a};
  }
  static FusionMethod no_cooperation() { return {Kind::NoCooperation, 0.0}; }
};

/// One agent's error-state filter. Each agent estimates only its own state.
struct AgentFilter {
  int id = 0;
  NominalState x_hat;
  ErrorCovariance p = ErrorCovariance::Identity();
  LeverArm lever;
  FusionMethod method;
  ImuNoiseModel noise;
  ImuSample last_imu;

  double last_omega = 1.0;  // omega* of the latest correlated update
  int skipped_updates = 0;  // correlated updates dropped at the upper omega clip
};

/// Folds an estimated error state into the nominal state. Position, velocity
/// and attitude errors are estimate minus truth; bias errors are the residual
/// biases (truth minus estimate), see error_dynamics.
inline NominalState apply_error_feedback(const NominalState& x, const Vec15& dx) {
  NominalState out = x;
  out.p -= dx.segment<3>(kPos);
  out.v -= dx.segment<3>(kVel);
  out.q = correct_attitude(x.q, dx.segment<3>(kAtt));
  out.bg += dx.segment<3>(kGyroBias);
  out.ba += dx.segment<3>(kAccelBias);
  return out;
}

inline AgentFilter predict(AgentFilter f, const ImuSample& imu) {
  const auto t = error_transition(f.x_hat, imu, f.noise);
  f.x_hat = mechanize(f.x_hat, imu, f.noise.gravity);
  f.p = propagate_covariance(f.p, t.phi, t.qd);
  f.last_imu = imu;
  return f;
}

/// EKF update with measurements whose noise is independent of the state.
inline AgentFilter independent_update(AgentFilter f, const RangeObservationBatch& batch) {
  if (batch.empty()) {
    return f;
  }
  const MatX p = f.p;
  const MatX pht = p * batch.h.transpose();
  const MatX s = batch.h * pht + batch.r_nominal;
  const MatX k = pht * linalg::spd_inverse(s, "innovation covariance");
  const Vec15 dx = k * batch.z;
  Mat15 p_post = p - k * pht.transpose();
  linalg::symmetrize(p_post);
  f.x_hat = apply_error_feedback(f.x_hat, dx);
  f.p = p_post;
  return f;
}

inline CostCriterion correlated_criterion(const AgentFilter& f) {
  switch (f.method.kind) {
    case FusionMethod::Kind::CITrace:
      return TraceCriterion{};
    case FusionMethod::Kind::CIDet:
      return DeterminantCriterion{};
    case FusionMethod::Kind::WCI: {
      // The raw measured specific force stands in for the true one.
      const Mat3x15 s =
          ins_error_sensitivity(quat_to_rotmat(f.x_hat.q), f.last_imu.specific_force, f.method.t_a);
      return WeightedTraceCriterion{MatX(wci_weight_matrix(s))};
    }
    case FusionMethod::Kind::NoCooperation:
      break;
  }
  throw std::logic_error("correlated_criterion: method does not fuse inter-agent ranges");
}

/// Covariance-intersection update with stacked inter-agent ranges: pick the
/// weighting criterion, minimize it over omega, then apply the KF-style CI
/// update and feed the error back.
inline AgentFilter correlated_update(AgentFilter f, const RangeObservationBatch& batch) {
  if (batch.empty() || f.method.kind == FusionMethod::Kind::NoCooperation) {
    return f;
  }
  const MatX p = f.p;
  const CorrelatedUpdateCost cost(p, batch.h, batch.r_nominal, correlated_criterion(f));
  const FusionWeight omega = minimize_weight(cost);
  f.last_omega = omega.value();
  if (omega.value() >= kOmegaMax) {
    ++f.skipped_updates;
    return f;
  }
  const auto upd = cost.update(omega.value(), batch.z);
  f.x_hat = apply_error_feedback(f.x_hat, upd.dx);
  f.p = upd.p_post;
  return f;
}

inline NeighborInfo make_broadcast(const AgentFilter& f) {
  NeighborInfo info;
  info.agent_id = static_cast<std::uint32_t>(f.id);
  info.position = f.x_hat.p;
  info.attitude = f.x_hat.q;
  info.pos_var = f.p.diagonal().segment<3>(kPos);
  info.att_var = f.p.diagonal().segment<3>(kAtt);
  return info;
}

// ---------------------------------------------------------------------------
// Broadcast wire format: little-endian u32 agent_id, then f64 position[3],
// quaternion[w, x, y, z], pos_var[3], att_var[3].

inline constexpr std::size_t kNeighborInfoWireSize = 108;
using NeighborInfoWire = std::array<std::byte, kNeighborInfoWireSize>;

namespace detail {

inline void put_u64(std::byte* out, std::uint64_t v) {
  for (int b = 0; b < 8; ++b) {
    out[b] = static_cast<std::byte>((v >> (8 * b)) & 0xffU);
  }
}

inline std::uint64_t get_u64(const std::byte* in) {
  std::uint64_t v = 0;
  for (int b = 0; b < 8; ++b) {
    v |= static_cast<std::uint64_t>(std::to_integer<unsigned>(in[b])) << (8 * b);
  }
  return v;
}

}  // namespace detail

inline NeighborInfoWire encode_neighbor_info(const NeighborInfo& info) {
  NeighborInfoWire out{};
  for (int b = 0; b < 4; ++b) {
    out[b] = static_cast<std::byte>((info.agent_id >> (8 * b)) & 0xffU);
  }
  const std::array<double, 13> values = {
      info.position.x(), info.position.y(), info.position.z(),
      info.attitude.w(), info.attitude.x(), info.attitude.y(), info.attitude.z(),
      info.pos_var.x(),  info.pos_var.y(),  info.pos_var.z(),
      info.att_var.x(),  info.att_var.y(),  info.att_var.z()};
  for (std::size_t k = 0; k < values.size(); ++k) {
    detail::put_u64(out.data() + 4 + 8 * k, std::bit_cast<std::uint64_t>(values[k]));
  }
  return out;
}

inline NeighborInfo decode_neighbor_info(std::span<const std::byte, kNeighborInfoWireSize> in) {
  NeighborInfo info;
  std::uint32_t id = 0;
  for (int b = 0; b < 4; ++b) {
    id |= static_cast<std::uint32_t>(std::to_integer<unsigned>(in[b])) << (8 * b);
  }
  info.agent_id = id;
  std::array<double, 13> v{};
  for (std::size_t k = 0; k < v.size(); ++k) {
    v[k] = std::bit_cast<double>(detail::get_u64(in.data() + 4 + 8 * k));
  }
  info.position = Vec3(v[0], v[1], v[2]);
  info.attitude = UnitQuaternion::from_normalized(v[3], v[4], v[5], v[6]);
  info.pos_var = Vec3(v[7], v[8], v[9]);
  info.att_var = Vec3(v[10], v[11], v[12]);
  return info;
}

}  // namespace wcicl

#endif  // WCICL_DCL_AGENT_HPP_
