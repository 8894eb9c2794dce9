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

#include "wcicl/ranging.hpp"

#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <random>
#include <vector>

namespace wcicl {
namespace {

NominalState random_pose(std::mt19937_64& rng) {
  NominalState x;
  x.p = oracle::random_vec3(rng, 20.0);
  x.q = UnitQuaternion(oracle::random_quaternion(rng));
  return x;
}

NeighborInfo info_from(const NominalState& x, std::uint32_t id, const Vec3& pv = Vec3::Zero(),
                       const Vec3& av = Vec3::Zero()) {
  NeighborInfo info;
  info.agent_id = id;
  info.position = x.p;
  info.attitude = x.q;
  info.pos_var = pv;
  info.att_var = av;
  return info;
}

double max_abs(const MatX& m) { return m.cwiseAbs().maxCoeff(); }

TEST(Ranging, ModulePosition) {
  EXPECT_EQ(ranging_module_position(Vec3(1, 2, 3), Mat3::Identity(), LeverArm{}), Vec3(1, 2, 3));
  const double h = std::sqrt(0.5);
  const Mat3 yaw90 = quat_to_rotmat(UnitQuaternion(h, 0.0, 0.0, h));
  const Vec3 out = ranging_module_position(Vec3::Zero(), yaw90, LeverArm{Vec3(1.0, 0.0, 0.0)});
  EXPECT_LT((out - Vec3(0.0, 1.0, 0.0)).norm(), 1e-15);
}

TEST(Ranging, RangeAndDirection) {
  const auto a = predict_range_and_direction(Vec3(3, 4, 0), Vec3::Zero());
  EXPECT_DOUBLE_EQ(a.d_hat, 5.0);
  EXPECT_LT((a.r_hat - Vec3(0.6, 0.8, 0.0)).norm(), 1e-15);
  const auto b = predict_range_and_direction(Vec3::Zero(), Vec3(3, 4, 0));
  EXPECT_EQ(b.r_hat, Vec3(-a.r_hat));
  EXPECT_THROW(predict_range_and_direction(Vec3(1, 1, 1), Vec3(1, 1, 1)), DegenerateGeometry);
  std::mt19937_64 rng(41);
  for (int k = 0; k < 100; ++k) {
    const auto r = predict_range_and_direction(oracle::random_vec3(rng), oracle::random_vec3(rng));
    EXPECT_NEAR(r.r_hat.norm(), 1.0, 1e-14);
  }
}

TEST(Ranging, AnchorRowWithoutLeverArm) {
  NominalState x;
  x.p = Vec3(3, 4, 0);
  x.q = UnitQuaternion(0.3, 0.1, 0.2, 0.9);
  const auto row = anchor_observation_row(x, LeverArm{}, Vec3::Zero());
  EXPECT_DOUBLE_EQ(row.d_hat, 5.0);
  EXPECT_LT((row.h.segment<3>(kPos).transpose() - Vec3(0.6, 0.8, 0.0)).norm(), 1e-15);
  EXPECT_EQ(row.h.segment<3>(kAtt), (Eigen::RowVector3d::Zero()));
}

TEST(Ranging, AnchorRowMatchesFiniteDifferences) {
  std::mt19937_64 rng(42);
  for (int k = 0; k < 50; ++k) {
    const NominalState x = random_pose(rng);
    const Vec3 lever = oracle::random_vec3(rng, 0.3);
    const Vec3 anchor = oracle::random_vec3(rng, 30.0);
    const RowVec15 numeric = oracle::numerical_anchor_row(x, lever, anchor);
    const RowVec15 analytic = anchor_observation_row(x, LeverArm{lever}, anchor).h;
    EXPECT_LE(max_abs(numeric - analytic), 1e-4 * max_abs(analytic)) << "sample " << k;
    EXPECT_EQ(analytic.segment<3>(kVel), (Eigen::RowVector3d::Zero()));
    EXPECT_EQ(analytic.tail<6>(), (Eigen::Matrix<double, 1, 6>::Zero()));
  }
}

TEST(Ranging, AgentRowMatchesFiniteDifferences) {
  std::mt19937_64 rng(43);
  for (int k = 0; k < 50; ++k) {
    const NominalState xi = random_pose(rng);
    const NominalState xj = random_pose(rng);
    const Vec3 lever = oracle::random_vec3(rng, 0.3);
    const auto numeric = oracle::numerical_agent_row(xi, xj, lever);
    const auto row = agent_observation_row(xi, info_from(xj, 2), LeverArm{lever});
    EXPECT_LE(max_abs(numeric.h - row.h), 1e-4 * max_abs(row.h)) << "sample " << k;
    EXPECT_LE(max_abs(numeric.g - row.g), 1e-4 * max_abs(row.g)) << "sample " << k;
    EXPECT_EQ(row.g.head<3>(), Eigen::RowVector3d(-row.h.segment<3>(kPos)));
    EXPECT_EQ(row.g(6), -1.0);
  }
}

TEST(Ranging, AgentRowWithoutLeverArmHasNoAttitudeTerms) {
  std::mt19937_64 rng(44);
  const auto row = agent_observation_row(random_pose(rng), info_from(random_pose(rng), 1), {});
  EXPECT_EQ(row.h.segment<3>(kAtt), (Eigen::RowVector3d::Zero()));
  EXPECT_EQ(row.g.segment<3>(3), (Eigen::RowVector3d::Zero()));
}

TEST(Ranging, InnovationSignFollowsInjectedError) {
  std::mt19937_64 rng(45);
  const NominalState truth = random_pose(rng);
  const Vec3 lever(0.1, -0.05, 0.02);
  const std::vector<Vec3> anchors = {Vec3(30, 0, 0), Vec3(0, 30, 0), Vec3(-30, 0, 5)};
  std::vector<RangeMeasurement> meas;
  for (int a = 0; a < 3; ++a) {
    const double d = (oracle::module_position(truth, lever) - anchors[a]).norm();
    meas.push_back({RangeKind::AgentToAnchor, 0, a, d, 0.1});
  }
  const auto perfect = build_anchor_batch(truth, LeverArm{lever}, anchors, meas);
  EXPECT_LT(perfect.z.norm(), 1e-12);
  Vec15 dx = Vec15::Zero();
  dx.segment<3>(kPos) = Vec3(0.01, -0.02, 0.005);
  dx.segment<3>(kAtt) = Vec3(1e-4, 2e-4, -1e-4);
  const auto shifted = build_anchor_batch(oracle::with_error(truth, dx), LeverArm{lever}, anchors, meas);
  const VecX predicted = perfect.h * dx;
  EXPECT_LT((shifted.z - predicted).norm(), 1e-3 * predicted.norm());
}

TEST(Ranging, AnchorBatchShapes) {
  NominalState x;
  x.p = Vec3(1, 2, 3);
  const std::vector<Vec3> anchors = {Vec3(10, 0, 0), Vec3(0, 10, 0)};
  const auto empty = build_anchor_batch(x, {}, anchors, {});
  EXPECT_TRUE(empty.empty());
  EXPECT_EQ(empty.h.rows(), 0);
  const std::vector<RangeMeasurement> one = {{RangeKind::AgentToAnchor, 0, 1, 8.0, 0.2}};
  const auto b = build_anchor_batch(x, {}, anchors, one);
  const auto row = anchor_observation_row(x, {}, anchors[1]);
  EXPECT_EQ(b.rows(), 1);
  EXPECT_EQ(RowVec15(b.h.row(0)), row.h);
  EXPECT_DOUBLE_EQ(b.z(0), row.d_hat - 8.0);
  EXPECT_DOUBLE_EQ(b.r_nominal(0, 0), 0.04);
  const std::vector<RangeMeasurement> bad = {{RangeKind::AgentToAnchor, 0, 5, 8.0, 0.2}};
  EXPECT_THROW(build_anchor_batch(x, {}, anchors, bad), std::invalid_argument);
}

TEST(Ranging, AgentBatchNominalVariance) {
  NominalState xi;
  NominalState xj;
  xj.p = Vec3(3, 4, 0);
  const std::vector<NeighborInfo> infos = {
      info_from(xj, 7, Vec3::Constant(0.5), Vec3::Constant(1e-4))};
  const std::vector<RangeMeasurement> meas = {{RangeKind::AgentToAgent, 0, 7, 5.0, 0.1}};
  // Isotropic variance, no lever arm: 2 v + sigma_r^2.
  const auto b = build_agent_batch(xi, {}, infos, meas);
  EXPECT_NEAR(b.r_nominal(0, 0), 2.0 * 0.5 + 0.01, 1e-15);
  EXPECT_NEAR(b.z(0), 0.0, 1e-15);

  const std::vector<NeighborInfo> exact = {info_from(xj, 7)};
  EXPECT_DOUBLE_EQ(build_agent_batch(xi, {}, exact, meas).r_nominal(0, 0), 0.1 * 0.1);

  const std::vector<RangeMeasurement> missing = {{RangeKind::AgentToAgent, 0, 3, 5.0, 0.1}};
  EXPECT_THROW(build_agent_batch(xi, {}, infos, missing), std::invalid_argument);
}

TEST(Ranging, NominalVarianceEqualsBruteForceProduct) {
  std::mt19937_64 rng(46);
  for (int k = 0; k < 50; ++k) {
    const NominalState xi = random_pose(rng);
    const NominalState xj = random_pose(rng);
    const Vec3 pv = oracle::random_vec3(rng).cwiseAbs();
    const Vec3 av = oracle::random_vec3(rng, 1e-3).cwiseAbs();
    const NeighborInfo info = info_from(xj, 1, pv, av);
    const auto row = agent_observation_row(xi, info, LeverArm{Vec3(0.2, 0.1, -0.1)});
    Eigen::Matrix<double, 7, 7> r = Eigen::Matrix<double, 7, 7>::Zero();
    r.diagonal() << 2.0 * pv, 2.0 * av, 0.09;
    const double brute = (row.g * r * row.g.transpose())(0, 0);
    EXPECT_NEAR(agent_row_nominal_variance(row.g, info, 0.3), brute, 1e-12 * brute);
  }
}

// When 2 diag(P) - P is PSD for the neighbor's position and attitude blocks,
// the nominal row variance dominates the one implied by the full blocks.
TEST(Ranging, NominalVarianceDominatesWhenDiagonalDoublingHolds) {
  std::mt19937_64 rng(47);
  int checked = 0;
  for (int k = 0; k < 400; ++k) {
    const Mat3 pp = oracle::random_spd(3, rng, 0.01, 1.0);
    const Mat3 pa = oracle::random_spd(3, rng, 1e-6, 1e-4);
    if (!doubled_diagonal_dominates(pp) || !doubled_diagonal_dominates(pa)) continue;
    ++checked;
    const NeighborInfo info =
        info_from(random_pose(rng), 1, pp.diagonal(), pa.diagonal());
    const auto row = agent_observation_row(random_pose(rng), info, LeverArm{Vec3(0.3, 0, 0)});
    Eigen::Matrix<double, 7, 7> r = Eigen::Matrix<double, 7, 7>::Zero();
    r.block<3, 3>(0, 0) = pp;
    r.block<3, 3>(3, 3) = pa;
    r(6, 6) = 0.01;
    const double actual = (row.g * r * row.g.transpose())(0, 0);
    EXPECT_GE(agent_row_nominal_variance(row.g, info, 0.1), actual - 1e-12);
  }
  EXPECT_GT(checked, 50);
}

TEST(Ranging, DiagonalDoublingCheck) {
  EXPECT_TRUE(doubled_diagonal_dominates(Mat3::Identity()));
  Mat3 two = Mat3::Identity();
  two(0, 1) = two(1, 0) = 0.99;
  EXPECT_TRUE(doubled_diagonal_dominates(two));
  EXPECT_FALSE(doubled_diagonal_dominates(Mat3::Ones()));
}

}  // namespace
}  // namespace wcicl
