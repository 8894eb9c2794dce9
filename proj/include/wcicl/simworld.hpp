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

#ifndef WCICL_SIMWORLD_HPP_
#define WCICL_SIMWORLD_HPP_

#include "wcicl/attitude.hpp"
#include "wcicl/common.hpp"
#include "wcicl/ins.hpp"
#include "wcicl/ranging.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

namespace wcicl {

// ---------------------------------------------------------------------------
// Trajectory profile

struct Accelerate {
  double accel = 0.0;  // [m/s^2], along the body x axis
  double duration = 0.0;
  friend bool operator==(const Accelerate&, const Accelerate&) = default;
};
/// Two constant-rate circles of opposite turn direction, each taking half the
/// duration, flown at the entry speed.
struct EightShape {
  double duration = 0.0;
  friend bool operator==(const EightShape&, const EightShape&) = default;
};
/// Constant pitch rate with speed preserved; positive is nose-up.
struct PitchRamp {
  double delta_deg = 0.0;
  double duration = 0.0;
  friend bool operator==(const PitchRamp&, const PitchRamp&) = default;
};
struct ConstantVelocity {
  double duration = 0.0;
  friend bool operator==(const ConstantVelocity&, const ConstantVelocity&) = default;
};
/// Constant yaw rate; a positive angle turns clockwise seen from above.
struct CircularTurn {
  double angle_deg = 0.0;
  double duration = 0.0;
  friend bool operator==(const CircularTurn&, const CircularTurn&) = default;
};
/// Linear deceleration from the entry speed to zero.
struct DecelerateToHover {
  double duration = 0.0;
  friend bool operator==(const DecelerateToHover&, const DecelerateToHover&) = default;
};

using TrajectorySegment = std::variant<Accelerate, EightShape, PitchRamp, ConstantVelocity,
                                       CircularTurn, DecelerateToHover>;

inline double segment_duration(const TrajectorySegment& s) {
  return std::visit([](const auto& seg) { return seg.duration; }, s);
}

/// Accelerate 0.4 m/s^2 for 10 s, figure-eight for 26 s, pitch up 15 deg in
/// 1 s, cruise 19 s, pitch back down in 1 s, cruise 13 s, 180 deg clockwise
/// turn over 20 s, cruise 20 s, decelerate to a hover over 10 s. 120 s total.
inline std::vector<TrajectorySegment> default_profile() {
  return {Accelerate{0.4, 10.0}, EightShape{26.0},        PitchRamp{15.0, 1.0},
          ConstantVelocity{19.0}, PitchRamp{-15.0, 1.0},   ConstantVelocity{13.0},
          CircularTurn{180.0, 20.0}, ConstantVelocity{20.0}, DecelerateToHover{10.0}};
}

inline double profile_duration(std::span<const TrajectorySegment> segments) {
  double t = 0.0;
  for (const auto& s : segments) {
    t += segment_duration(s);
  }
  return t;
}

/// Truth at IMU rate: states[k] is the state at t = k dt, imu[k] drives
/// states[k] to states[k + 1].
struct Trajectory {
  double dt = 0.0;
  std::vector<NominalState> states;
  std::vector<ImuSample> imu;

  std::size_t steps() const { return imu.size(); }
};

namespace detail {

inline void validate_segment(const TrajectorySegment& s) {
  const double dur = segment_duration(s);
  if (!(std::isfinite(dur) && dur > 0.0)) {
    throw InvalidSegment("trajectory segment duration must be positive");
  }
  if (const auto* a = std::get_if<Accelerate>(&s); a && !std::isfinite(a->accel)) {
    throw InvalidSegment("acceleration must be finite");
  }
  if (const auto* p = std::get_if<PitchRamp>(&s); p && !(std::abs(p->delta_deg) < 90.0)) {
    throw InvalidSegment("pitch ramp must stay below 90 deg");
  }
  if (const auto* c = std::get_if<CircularTurn>(&s); c && !std::isfinite(c->angle_deg)) {
    throw InvalidSegment("turn angle must be finite");
  }
}

}  // namespace detail

/// Flies the profile from x0 (its speed is taken along the body x axis). The
/// body rate is held constant over each IMU step and the specific force is the
/// exact inverse of the strapdown step, so mechanizing the clean samples
/// reproduces the truth up to rounding. Segment boundaries snap to the IMU grid.
inline Trajectory generate_truth(std::span<const TrajectorySegment> segments,
                                 const NominalState& x0, double imu_rate,
                                 double gravity = kStandardGravity) {
  if (!(imu_rate > 0.0)) {
    throw std::invalid_argument("generate_truth: IMU rate must be positive");
  }
  for (const auto& s : segments) {
    detail::validate_segment(s);
  }
  Trajectory tr;
  tr.dt = 1.0 / imu_rate;
  const double dt = tr.dt;
  const Vec3 g_n = gravity_vector(gravity);

  NominalState x = x0;
  x.bg.setZero();
  x.ba.setZero();
  const Vec3 fwd0 = quat_to_rotmat(x.q).col(0);
  double speed = x0.v.dot(fwd0);
  x.v = speed * fwd0;
  // Pitch of the body x axis above the horizontal plane.
  double pitch = std::asin(std::clamp(fwd0.z(), -1.0, 1.0));
  tr.states.push_back(x);

  for (const auto& seg : segments) {
    const auto n = static_cast<long>(std::llround(segment_duration(seg) * imu_rate));
    if (n < 1) {
      throw InvalidSegment("trajectory segment shorter than one IMU step");
    }
    const double speed0 = speed;
    for (long k = 0; k < n; ++k) {
      double accel = 0.0;
      double yaw_rate = 0.0;
      double pitch_rate = 0.0;
      if (const auto* a = std::get_if<Accelerate>(&seg)) {
        accel = a->accel;
      } else if (const auto* e = std::get_if<EightShape>(&seg)) {
        const double half = 0.5 * e->duration;
        yaw_rate = (2 * k < n ? 1.0 : -1.0) * 2.0 * std::numbers::pi / half;
      } else if (const auto* p = std::get_if<PitchRamp>(&seg)) {
        pitch_rate = p->delta_deg * kDegToRad / p->duration;
      } else if (const auto* c = std::get_if<CircularTurn>(&seg)) {
        yaw_rate = -c->angle_deg * kDegToRad / c->duration;
      } else if (const auto* d = std::get_if<DecelerateToHover>(&seg)) {
        accel = -speed0 / d->duration;
      }
      // Navigation-frame yaw about z and pitch about the body y axis.
      const Vec3 w_b(yaw_rate * std::sin(pitch), -pitch_rate, yaw_rate * std::cos(pitch));

      const UnitQuaternion q_mid = x.q * UnitQuaternion::from_rotation_vector(0.5 * dt * w_b);
      const UnitQuaternion q_next = x.q * UnitQuaternion::from_rotation_vector(dt * w_b);
      const double speed_next =
          std::get_if<DecelerateToHover>(&seg) && k == n - 1 ? 0.0 : speed0 + accel * (k + 1) * dt;
      const Vec3 v_next = speed_next * quat_to_rotmat(q_next).col(0);
      const Vec3 dv = v_next - x.v;

      ImuSample imu;
      imu.dt = dt;
      imu.angular_rate = w_b;
      imu.specific_force = quat_to_rotmat(q_mid).transpose() * (dv / dt - g_n);
      tr.imu.push_back(imu);

      x.p = x.p + x.v * dt + 0.5 * dv * dt;
      x.v = v_next;
      x.q = q_next;
      speed = speed_next;
      pitch += pitch_rate * dt;
      tr.states.push_back(x);
    }
  }
  return tr;
}

// ---------------------------------------------------------------------------
// Sensors and randomness

struct ImuBiases {
  Vec3 gyro = Vec3::Zero();   // [rad/s]
  Vec3 accel = Vec3::Zero();  // [m/s^2]
};

/// Independent stream per (seed, run, agent, purpose); toggling one stream's
/// consumers never shifts another's draws.
enum class RngStream : std::uint32_t {
  InitialPose = 0,
  InitialError = 1,
  ImuBias = 2,
  ImuNoise = 3,
  RangeNoise = 4,
  PacketLoss = 5,
};

inline std::mt19937_64 make_stream(std::uint64_t seed, int run, int agent, RngStream stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffU),
                    static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(run),
                    static_cast<std::uint32_t>(agent), static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

inline Vec3 gaussian_vec3(std::mt19937_64& rng, double sigma) {
  std::normal_distribution<double> n(0.0, 1.0);
  const double a = n(rng);
  const double b = n(rng);
  const double c = n(rng);
  return sigma * Vec3(a, b, c);
}

inline ImuBiases draw_imu_biases(const ImuNoiseModel& noise, std::mt19937_64& rng) {
  ImuBiases b;
  b.gyro = gaussian_vec3(rng, noise.gyro_bias_sigma0);
  b.accel = gaussian_vec3(rng, noise.accel_bias_sigma0);
  return b;
}

/// Adds the run's constant biases and white noise with per-sample standard
/// deviation density / sqrt(dt).
inline ImuSample corrupt_imu(const ImuSample& clean, const ImuBiases& biases,
                             const ImuNoiseModel& noise, std::mt19937_64& rng) {
  ImuSample out = clean;
  const double root_rate = clean.dt > 0.0 ? 1.0 / std::sqrt(clean.dt) : 0.0;
  const Vec3 wa = gaussian_vec3(rng, noise.accel_vrw * root_rate);
  const Vec3 wg = gaussian_vec3(rng, noise.gyro_arw * root_rate);
  out.specific_force += biases.accel + wa;
  out.angular_rate += biases.gyro + wg;
  return out;
}

// ---------------------------------------------------------------------------
// Scenario

struct WorldConfig {
  int agents = 8;
  std::vector<Vec3> anchors = {Vec3(100, 100, 0), Vec3(-100, 100, 100), Vec3(-100, -100, 0),
                               Vec3(100, -100, 100)};
  double sigma_r = 0.1;     // [m]
  double uwb_rate = 5.0;    // [Hz]
  LeverArm lever{Vec3(0.1, 0.0, 0.1)};
  double sigma_p0 = 0.3;    // [m]
  double sigma_v0 = 0.1;    // [m/s]
  double sigma_phi0 = 3.0;  // [deg]
  double t_a = 5.0;         // [s]
  int runs = 10;
  ImuNoiseModel imu_noise = ImuNoiseModel::adis16465();
  double imu_rate = 200.0;  // [Hz]
  std::uint64_t seed = 1;
  Vec3 start_box = Vec3(60.0, 60.0, 20.0);  // [m], centered at the origin
  std::vector<TrajectorySegment> segments = default_profile();

  friend bool operator==(const WorldConfig& a, const WorldConfig& b) {
    return a.agents == b.agents && a.anchors == b.anchors && a.sigma_r == b.sigma_r &&
           a.uwb_rate == b.uwb_rate && a.lever.l_b == b.lever.l_b && a.sigma_p0 == b.sigma_p0 &&
           a.sigma_v0 == b.sigma_v0 && a.sigma_phi0 == b.sigma_phi0 && a.t_a == b.t_a &&
           a.runs == b.runs && a.imu_noise.gyro_arw == b.imu_noise.gyro_arw &&
           a.imu_noise.accel_vrw == b.imu_noise.accel_vrw &&
           a.imu_noise.gyro_bias_sigma0 == b.imu_noise.gyro_bias_sigma0 &&
           a.imu_noise.accel_bias_sigma0 == b.imu_noise.accel_bias_sigma0 &&
           a.imu_noise.gravity == b.imu_noise.gravity && a.imu_rate == b.imu_rate &&
           a.seed == b.seed && a.start_box == b.start_box && a.segments == b.segments;
  }
};

inline void validate(const WorldConfig& c) {
  auto positive = [](double v, const char* what) {
    if (!(std::isfinite(v) && v > 0.0)) {
      throw std::invalid_argument(std::string(what) + " must be positive");
    }
  };
  auto non_negative = [](double v, const char* what) {
    if (!(std::isfinite(v) && v >= 0.0)) {
      throw std::invalid_argument(std::string(what) + " must be non-negative");
    }
  };
  if (c.agents < 1) {
    throw std::invalid_argument("agents must be at least 1");
  }
  if (c.runs < 1) {
    throw std::invalid_argument("runs must be at least 1");
  }
  positive(c.uwb_rate, "uwb_rate");
  positive(c.imu_rate, "imu_rate");
  non_negative(c.sigma_r, "sigma_r");
  positive(c.sigma_p0, "sigma_p0");
  positive(c.sigma_v0, "sigma_v0");
  positive(c.sigma_phi0, "sigma_phi0");
  non_negative(c.t_a, "t_a");
  non_negative(c.imu_noise.gyro_arw, "gyro_arw");
  non_negative(c.imu_noise.accel_vrw, "accel_vrw");
  non_negative(c.imu_noise.gyro_bias_sigma0, "gyro_bias");
  non_negative(c.imu_noise.accel_bias_sigma0, "accel_bias");
  positive(c.imu_noise.gravity, "gravity");
  for (int k = 0; k < 3; ++k) {
    non_negative(c.start_box[k], "start_box");
  }
  const double ratio = c.imu_rate / c.uwb_rate;
  if (std::abs(ratio - std::round(ratio)) > 1e-9) {
    throw std::invalid_argument("imu_rate must be an integer multiple of uwb_rate");
  }
  if (c.segments.empty()) {
    throw std::invalid_argument("trajectory needs at least one segment");
  }
  for (const auto& s : c.segments) {
    detail::validate_segment(s);
  }
}

/// Anchor ids per agent and inter-agent adjacency, 0-based.
struct ConnectivityMap {
  std::vector<std::vector<int>> anchors;
  std::vector<std::vector<int>> neighbors;
};

/// First agent sees no anchor, the last sees all four, agent k (1-based) in
/// between sees anchors (k mod 4) + 1 and ((k + 1) mod 4) + 1. The inter-agent
/// graph is complete.
inline ConnectivityMap build_connectivity(int agents, int anchor_count = 4) {
  if (agents < 1) {
    throw std::invalid_argument("build_connectivity: need at least one agent");
  }
  ConnectivityMap m;
  m.anchors.resize(agents);
  m.neighbors.resize(agents);
  for (int i = 0; i < agents; ++i) {
    const int k = i + 1;
    if (i == 0) {
      // no anchors
    } else if (i == agents - 1) {
      for (int a = 0; a < anchor_count; ++a) {
        m.anchors[i].push_back(a);
      }
    } else if (anchor_count > 0) {
      m.anchors[i] = {k % anchor_count, (k + 1) % anchor_count};
    }
    for (int j = 0; j < agents; ++j) {
      if (j != i) {
        m.neighbors[i].push_back(j);
      }
    }
  }
  return m;
}

struct PacketLoss {
  int agent = 0;  // 0-based
  double probability = 0.0;
  friend bool operator==(const PacketLoss&, const PacketLoss&) = default;
};
struct Offline {
  int agent = 0;
  friend bool operator==(const Offline&, const Offline&) = default;
};
struct Rejoin {
  int agent = 0;
  friend bool operator==(const Rejoin&, const Rejoin&) = default;
};
using WorldEvent = std::variant<PacketLoss, Offline, Rejoin>;

struct ScheduledEvent {
  double time = 0.0;
  WorldEvent event;
  friend bool operator==(const ScheduledEvent&, const ScheduledEvent&) = default;
};
using EventSchedule = std::vector<ScheduledEvent>;

/// Packet loss on agent 1's link to the center from 30 s, agent 1 offline
/// from 90 s and back at 110 s.
inline EventSchedule robustness_schedule() {
  return {{30.0, PacketLoss{0, 0.05}}, {90.0, Offline{0}}, {110.0, Rejoin{0}}};
}

/// Event effects in force at time t (events at exactly t apply).
struct ActiveEvents {
  std::vector<double> loss_probability;
  std::vector<bool> offline;
};

inline ActiveEvents active_events(const EventSchedule& schedule, int agents, double t) {
  ActiveEvents a;
  a.loss_probability.assign(agents, 0.0);
  a.offline.assign(agents, false);
  std::vector<const ScheduledEvent*> ordered;
  for (const auto& e : schedule) {
    ordered.push_back(&e);
  }
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto* x, const auto* y) { return x->time < y->time; });
  for (const auto* e : ordered) {
    if (e->time > t + 1e-9) {
      break;
    }
    std::visit(
        [&](const auto& ev) {
          using T = std::decay_t<decltype(ev)>;
          if (ev.agent < 0 || ev.agent >= agents) {
            return;
          }
          if constexpr (std::is_same_v<T, PacketLoss>) {
            a.loss_probability[ev.agent] = ev.probability;
          } else if constexpr (std::is_same_v<T, Offline>) {
            a.offline[ev.agent] = true;
          } else {
            a.offline[ev.agent] = false;
          }
        },
        e->event);
  }
  return a;
}

/// Ranges taken at one UWB epoch, grouped by the measuring agent.
struct EpochMeasurements {
  double time = 0.0;
  std::size_t step = 0;  // IMU index of the epoch
  std::vector<std::vector<RangeMeasurement>> anchor;
  std::vector<std::vector<RangeMeasurement>> agent;
  std::vector<bool> online;
  // Whether this interval's IMU data and the agent's own ranges reached the
  // computing center.
  std::vector<bool> delivered;

  std::size_t anchor_rows() const {
    std::size_t n = 0;
    for (const auto& v : anchor) n += v.size();
    return n;
  }
  std::size_t agent_rows() const {
    std::size_t n = 0;
    for (const auto& v : agent) n += v.size();
    return n;
  }
};

/// One Monte Carlo realization: truth, corrupted IMU streams and all epoch
/// measurements. Shared by every estimation method of the run.
struct World {
  WorldConfig config;
  ConnectivityMap connectivity;
  std::vector<Trajectory> truth;
  std::vector<std::vector<ImuSample>> imu;  // corrupted
  std::vector<ImuBiases> biases;
  std::vector<NominalState> initial_estimate;
  ErrorCovariance initial_cov = ErrorCovariance::Identity();
  std::vector<EpochMeasurements> epochs;

  int agents() const { return config.agents; }
  std::size_t steps_per_epoch() const {
    return static_cast<std::size_t>(std::llround(config.imu_rate / config.uwb_rate));
  }
};

inline ErrorCovariance initial_covariance(const WorldConfig& c) {
  Vec15 d;
  const double sp = c.sigma_p0;
  const double sv = c.sigma_v0;
  const double sa = c.sigma_phi0 * kDegToRad;
  const double sg = c.imu_noise.gyro_bias_sigma0;
  const double sb = c.imu_noise.accel_bias_sigma0;
  d << Vec3::Constant(sp * sp), Vec3::Constant(sv * sv), Vec3::Constant(sa * sa),
      Vec3::Constant(sg * sg), Vec3::Constant(sb * sb);
  // Keep the bias blocks invertible for a noiseless IMU model.
  for (int k = kGyroBias; k < kErrorStateDim; ++k) {
    d[k] = std::max(d[k], 1e-18);
  }
  return d.asDiagonal();
}

/// Ranges at one epoch. Noise is drawn for every potential link in a fixed
/// order, so connectivity and events never shift the streams.
inline EpochMeasurements run_epoch(const World& w, std::size_t step, const ActiveEvents& events,
                                   std::vector<std::mt19937_64>& range_rng,
                                   std::vector<std::mt19937_64>& loss_rng) {
  const int n = w.agents();
  const auto& cfg = w.config;
  EpochMeasurements e;
  e.step = step;
  e.time = static_cast<double>(step) / cfg.imu_rate;
  e.anchor.resize(n);
  e.agent.resize(n);
  e.online.assign(n, true);
  e.delivered.assign(n, true);

  std::vector<Vec3> module(n);
  for (int i = 0; i < n; ++i) {
    const auto& x = w.truth[i].states[step];
    module[i] = ranging_module_position(x.p, quat_to_rotmat(x.q), cfg.lever);
    e.online[i] = !events.offline[i];
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    const double u = uniform(loss_rng[i]);
    e.delivered[i] = e.online[i] && !(u < events.loss_probability[i]);

    std::vector<double> anchor_noise(cfg.anchors.size());
    for (auto& v : anchor_noise) v = cfg.sigma_r * gauss(range_rng[i]);
    std::vector<double> agent_noise(n);
    for (int j = 0; j < n; ++j) {
      agent_noise[j] = j == i ? 0.0 : cfg.sigma_r * gauss(range_rng[i]);
    }
    if (!e.online[i]) {
      continue;
    }
    for (int a : w.connectivity.anchors[i]) {
      const double d = (module[i] - cfg.anchors[a]).norm();
      e.anchor[i].push_back({RangeKind::AgentToAnchor, i, a, d + anchor_noise[a], cfg.sigma_r});
    }
    for (int j : w.connectivity.neighbors[i]) {
      if (events.offline[j]) {
        continue;
      }
      const double d = (module[i] - module[j]).norm();
      e.agent[i].push_back({RangeKind::AgentToAgent, i, j, d + agent_noise[j], cfg.sigma_r});
    }
  }
  return e;
}

/// Draws everything random for run `run` of a scenario.
inline World make_world(const WorldConfig& cfg, int run, const EventSchedule& schedule = {}) {
  validate(cfg);
  World w;
  w.config = cfg;
  w.connectivity = build_connectivity(cfg.agents, static_cast<int>(cfg.anchors.size()));
  w.initial_cov = initial_covariance(cfg);
  const int n = cfg.agents;

  for (int i = 0; i < n; ++i) {
    auto pose_rng = make_stream(cfg.seed, run, i, RngStream::InitialPose);
    std::uniform_real_distribution<double> unit(-0.5, 0.5);
    NominalState x0;
    const double px = unit(pose_rng);
    const double py = unit(pose_rng);
    const double pz = unit(pose_rng);
    x0.p = Vec3(px * cfg.start_box.x(), py * cfg.start_box.y(), pz * cfg.start_box.z());
    const double yaw = 2.0 * std::numbers::pi * unit(pose_rng);
    x0.q = quat_from_euler(yaw, 0.0, 0.0);
    w.truth.push_back(generate_truth(cfg.segments, x0, cfg.imu_rate, cfg.imu_noise.gravity));

    auto bias_rng = make_stream(cfg.seed, run, i, RngStream::ImuBias);
    w.biases.push_back(draw_imu_biases(cfg.imu_noise, bias_rng));
    auto noise_rng = make_stream(cfg.seed, run, i, RngStream::ImuNoise);
    std::vector<ImuSample> imu;
    imu.reserve(w.truth.back().imu.size());
    for (const auto& s : w.truth.back().imu) {
      imu.push_back(corrupt_imu(s, w.biases.back(), cfg.imu_noise, noise_rng));
    }
    w.imu.push_back(std::move(imu));

    // Initial estimate: x_hat = x + error, attitude through C_hat = exp(-[phi x]) C.
    auto err_rng = make_stream(cfg.seed, run, i, RngStream::InitialError);
    const auto& truth0 = w.truth.back().states.front();
    NominalState xh = truth0;
    xh.p += gaussian_vec3(err_rng, cfg.sigma_p0);
    xh.v += gaussian_vec3(err_rng, cfg.sigma_v0);
    const Vec3 phi = gaussian_vec3(err_rng, cfg.sigma_phi0 * kDegToRad);
    xh.q = UnitQuaternion::from_rotation_vector(-phi) * truth0.q;
    xh.bg.setZero();
    xh.ba.setZero();
    w.initial_estimate.push_back(xh);
  }

  std::vector<std::mt19937_64> range_rng;
  std::vector<std::mt19937_64> loss_rng;
  for (int i = 0; i < n; ++i) {
    range_rng.push_back(make_stream(cfg.seed, run, i, RngStream::RangeNoise));
    loss_rng.push_back(make_stream(cfg.seed, run, i, RngStream::PacketLoss));
  }
  const std::size_t per_epoch = w.steps_per_epoch();
  const std::size_t total = w.truth.front().steps();
  for (std::size_t step = per_epoch; step <= total; step += per_epoch) {
    const double t = static_cast<double>(step) / cfg.imu_rate;
    w.epochs.push_back(run_epoch(w, step, active_events(schedule, n, t), range_rng, loss_rng));
  }
  return w;
}

}  // namespace wcicl

#endif  // WCICL_SIMWORLD_HPP_
