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

#ifndef WCICL_EXPERIMENT_HPP_
#define WCICL_EXPERIMENT_HPP_

#include "wcicl/ccl_center.hpp"
#include "wcicl/dcl_agent.hpp"
#include "wcicl/metrics.hpp"
#include "wcicl/simworld.hpp"

#include <algorithm>
#include <chrono>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace wcicl {

enum class Method { NCL, EKF, CITrace, CIDet, WCI };

inline constexpr std::array<Method, 5> kAllMethods = {Method::NCL, Method::EKF, Method::CITrace,
                                                      Method::CIDet, Method::WCI};

inline std::string_view method_name(Method m) {
  switch (m) {
    case Method::NCL: return "NCL";
    case Method::EKF: return "EKF";
    case Method::CITrace: return "CI-trace";
    case Method::CIDet: return "CI-det";
    case Method::WCI: return "WCI";
  }
  return "?";
}

inline std::optional<Method> parse_method(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "ncl") return Method::NCL;
  if (lower == "ekf" || lower == "ccl") return Method::EKF;
  if (lower == "ci-trace") return Method::CITrace;
  if (lower == "ci-det") return Method::CIDet;
  if (lower == "wci") return Method::WCI;
  return std::nullopt;
}

inline bool is_ci_method(Method m) {
  return m == Method::CITrace || m == Method::CIDet || m == Method::WCI;
}

enum class UpdateMode { Concurrent, Sequential };

inline std::string_view update_mode_name(UpdateMode m) {
  return m == UpdateMode::Concurrent ? "concurrent" : "sequential";
}

/// How the center propagates an agent whose IMU data did not arrive.
enum class LossPolicy {
  ZeroOrderHold,  // repeat the last delivered IMU sample
  Freeze,         // leave the agent's estimate and covariance untouched
};

inline std::string_view loss_policy_name(LossPolicy p) {
  return p == LossPolicy::ZeroOrderHold ? "zoh" : "freeze";
}

struct RunOptions {
  UpdateMode update_mode = UpdateMode::Concurrent;
  LossPolicy loss_policy = LossPolicy::ZeroOrderHold;
  double t_a = 5.0;
};

inline FusionMethod fusion_method(Method m, double t_a) {
  switch (m) {
    case Method::CITrace: return FusionMethod::ci_trace();
    case Method::CIDet: return FusionMethod::ci_det();
    case Method::WCI: return FusionMethod::wci(t_a);
    default: return FusionMethod::no_cooperation();
  }
}

namespace detail {

inline NominalState truth_with_biases(const World& w, int agent, std::size_t step) {
  NominalState x = w.truth[agent].states[step];
  x.bg = w.biases[agent].gyro;
  x.ba = w.biases[agent].accel;
  return x;
}

inline void log_epoch(RunLog& log, const World& w, const EpochMeasurements& e, int agent,
                      const NominalState& x_hat, const Mat15& p,
                      const std::array<double, 5>& traces_before, double omega) {
  log.errors.push_back(state_error(x_hat, truth_with_biases(w, agent, e.step)));
  log.covs.push_back(p);
  const auto after = component_traces(p);
  std::array<double, 5> delta{};
  for (int c = 0; c < 5; ++c) {
    delta[c] = after[c] - traces_before[c];
  }
  log.trace_delta.push_back(delta);
  log.omega.push_back(omega);
}

}  // namespace detail

/// Runs one distributed method (or NCL) over a world. Every agent predicts to
/// the epoch, broadcasts are snapshotted, then each agent applies its anchor
/// update followed by its inter-agent update.
inline RunLog simulate_distributed(const World& w, Method method, const RunOptions& opt) {
  const int n = w.agents();
  const auto& cfg = w.config;
  std::vector<AgentFilter> filters(n);
  for (int i = 0; i < n; ++i) {
    auto& f = filters[i];
    f.id = i;
    f.x_hat = w.initial_estimate[i];
    f.p = w.initial_cov;
    f.lever = cfg.lever;
    f.method = fusion_method(method, opt.t_a);
    f.noise = cfg.imu_noise;
    f.last_imu = w.imu[i].front();
  }
  RunLog log(n);
  std::size_t step = 0;
  std::vector<NeighborInfo> infos(n);
  for (const auto& e : w.epochs) {
    for (int i = 0; i < n; ++i) {
      for (std::size_t s = step; s < e.step; ++s) {
        filters[i] = predict(std::move(filters[i]), w.imu[i][s]);
      }
    }
    step = e.step;
    for (int i = 0; i < n; ++i) {
      infos[i] = make_broadcast(filters[i]);
    }
    log.times.push_back(e.time);
    for (int i = 0; i < n; ++i) {
      auto& f = filters[i];
      const auto before = component_traces(f.p);
      const bool cooperative = method != Method::NCL;
      if (opt.update_mode == UpdateMode::Concurrent) {
        f = independent_update(std::move(f),
                               build_anchor_batch(f.x_hat, f.lever, cfg.anchors, e.anchor[i]));
        if (cooperative) {
          f = correlated_update(std::move(f),
                                build_agent_batch(f.x_hat, f.lever, infos, e.agent[i]));
        }
      } else {
        for (const auto& m : e.anchor[i]) {
          f = independent_update(std::move(f),
                                 build_anchor_batch(f.x_hat, f.lever, cfg.anchors, {&m, 1}));
        }
        if (cooperative) {
          for (const auto& m : e.agent[i]) {
            f = correlated_update(std::move(f), build_agent_batch(f.x_hat, f.lever, infos, {&m, 1}));
          }
        }
      }
      detail::log_epoch(log, w, e, i, f.x_hat, f.p, before,
                        cooperative ? f.last_omega : std::numeric_limits<double>::quiet_NaN());
    }
  }
  return log;
}

/// Runs the centralized joint EKF over a world. Data from agents whose link to
/// the center failed this epoch is missing: their IMU interval is replaced per
/// the loss policy and the ranges they measured are dropped.
inline RunLog simulate_centralized(const World& w, const RunOptions& opt) {
  const int n = w.agents();
  const auto& cfg = w.config;
  std::vector<ErrorCovariance> covs(n, w.initial_cov);
  JointFilter jf = JointFilter::from_agents(w.initial_estimate, covs);
  JointPropagation prop(n);
  std::vector<ImuSample> held(n);
  for (int i = 0; i < n; ++i) {
    held[i] = w.imu[i].front();
  }
  RunLog log(n);
  std::size_t step = 0;
  std::vector<RangeMeasurement> rows;
  for (const auto& e : w.epochs) {
    for (int i = 0; i < n; ++i) {
      const bool delivered = e.delivered[i];
      if (!delivered && opt.loss_policy == LossPolicy::Freeze) {
        continue;
      }
      for (std::size_t s = step; s < e.step; ++s) {
        prop.step(jf, i, delivered ? w.imu[i][s] : held[i], cfg.imu_noise);
      }
      if (delivered && e.step > step) {
        held[i] = w.imu[i][e.step - 1];
      }
    }
    step = e.step;
    prop.flush(jf);

    std::vector<std::array<double, 5>> before(n);
    for (int i = 0; i < n; ++i) {
      before[i] = component_traces(jf.block(i, i));
    }
    rows.clear();
    for (int i = 0; i < n; ++i) {
      if (e.delivered[i]) {
        rows.insert(rows.end(), e.anchor[i].begin(), e.anchor[i].end());
      }
    }
    for (int i = 0; i < n; ++i) {
      if (e.delivered[i]) {
        rows.insert(rows.end(), e.agent[i].begin(), e.agent[i].end());
      }
    }
    if (opt.update_mode == UpdateMode::Concurrent) {
      jf = joint_update(std::move(jf), cfg.lever, cfg.anchors, rows);
    } else {
      for (const auto& m : rows) {
        jf = joint_update(std::move(jf), cfg.lever, cfg.anchors, {&m, 1});
      }
    }
    log.times.push_back(e.time);
    for (int i = 0; i < n; ++i) {
      detail::log_epoch(log, w, e, i, jf.x_hat[i], jf.block(i, i), before[i],
                        std::numeric_limits<double>::quiet_NaN());
    }
  }
  return log;
}

inline RunLog simulate(const World& w, Method method, const RunOptions& opt) {
  return method == Method::EKF ? simulate_centralized(w, opt)
                               : simulate_distributed(w, method, opt);
}

// ---------------------------------------------------------------------------
// Monte Carlo

struct MethodResult {
  Method method = Method::WCI;
  TimeSeries series;
  MatX corr_gap;  // agent 1
};

struct MonteCarloSpec {
  WorldConfig world;
  std::vector<Method> methods;
  EventSchedule events;
  RunOptions options;
  int workers = 0;  // 0 picks the hardware concurrency
};

/// Runs every method on the same seeded worlds. Runs execute in parallel
/// batches but are folded into the statistics in run order, so results do not
/// depend on the worker count.
inline std::vector<MethodResult> run_monte_carlo(const MonteCarloSpec& spec) {
  validate(spec.world);
  const int n = spec.world.agents;
  std::vector<MetricAccumulator> acc(spec.methods.size(), MetricAccumulator(n, 0));
  const int workers =
      std::max(1, spec.workers > 0 ? spec.workers
                                   : static_cast<int>(std::thread::hardware_concurrency()));
  auto run_one = [&spec](int run) {
    const World w = make_world(spec.world, run, spec.events);
    std::vector<RunLog> logs;
    for (Method m : spec.methods) {
      logs.push_back(simulate(w, m, spec.options));
    }
    return logs;
  };
  for (int first = 0; first < spec.world.runs; first += workers) {
    const int last = std::min(spec.world.runs, first + workers);
    std::vector<std::vector<RunLog>> batch;
    if (workers == 1) {
      batch.push_back(run_one(first));
    } else {
      std::vector<std::future<std::vector<RunLog>>> futures;
      for (int r = first; r < last; ++r) {
        futures.push_back(std::async(std::launch::async, run_one, r));
      }
      for (auto& f : futures) {
        batch.push_back(f.get());
      }
    }
    for (const auto& logs : batch) {
      for (std::size_t m = 0; m < logs.size(); ++m) {
        acc[m].add(logs[m]);
      }
    }
  }
  std::vector<MethodResult> out;
  for (std::size_t m = 0; m < spec.methods.size(); ++m) {
    MethodResult r;
    r.method = spec.methods[m];
    r.series = acc[m].series();
    r.corr_gap = acc[m].mean_correlation_gap();
    out.push_back(std::move(r));
  }
  return out;
}

/// Time-averaged statistics for agent 1 and for agents 2..N, in report units.
struct GroupSummary {
  std::array<double, 5> rmse{};
  std::array<double, 5> std{};
  std::array<double, 5> nees{};
};

struct MethodSummary {
  Method method = Method::WCI;
  GroupSummary first;   // agent 1
  GroupSummary others;  // agents 2..N (empty when N = 1)
};

inline GroupSummary summarize_group(const TimeSeries& ts, int first, int last, double from_time,
                                    double to_time = 1e300) {
  GroupSummary g;
  for (auto c : kAllComponents) {
    const int k = static_cast<int>(c);
    const double scale = component_unit_scale(c);
    g.rmse[k] = scale * group_average(ts, ts.rmse, first, last, c, from_time, to_time);
    g.std[k] = scale * group_average(ts, ts.std, first, last, c, from_time, to_time);
    g.nees[k] = group_average(ts, ts.nees, first, last, c, from_time, to_time);
  }
  return g;
}

inline MethodSummary summarize(const MethodResult& r, double skip_transient = 0.0) {
  MethodSummary s;
  s.method = r.method;
  s.first = summarize_group(r.series, 0, 0, skip_transient);
  if (r.series.agents > 1) {
    s.others = summarize_group(r.series, 1, r.series.agents - 1, skip_transient);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Experiment variants

struct SweepPoint {
  double t_a = 0.0;
  MethodResult result;
};

/// WCI over a list of horizons; every point reuses the same seeded worlds.
inline std::vector<SweepPoint> run_ta_sweep(MonteCarloSpec spec, std::span<const double> t_a) {
  spec.methods = {Method::WCI};
  std::vector<SweepPoint> out;
  for (double ta : t_a) {
    spec.options.t_a = ta;
    out.push_back({ta, run_monte_carlo(spec).front()});
  }
  return out;
}

struct ScenarioComparison {
  std::vector<MethodResult> baseline;
  std::vector<MethodResult> variant;
};

/// The configured event schedule against the same worlds without events.
inline ScenarioComparison run_robustness(MonteCarloSpec spec) {
  ScenarioComparison c;
  c.variant = run_monte_carlo(spec);
  spec.events.clear();
  c.baseline = run_monte_carlo(spec);
  return c;
}

/// Concurrent (baseline) against sequential (variant) updates.
inline ScenarioComparison run_update_modes(MonteCarloSpec spec) {
  ScenarioComparison c;
  spec.options.update_mode = UpdateMode::Concurrent;
  c.baseline = run_monte_carlo(spec);
  spec.options.update_mode = UpdateMode::Sequential;
  c.variant = run_monte_carlo(spec);
  return c;
}

// ---------------------------------------------------------------------------
// Complexity benchmark

struct BenchPoint {
  int agents = 0;
  double dcl_seconds = 0.0;
  double ccl_seconds = 0.0;
};

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Times WCI over every agent (serially, i.e. the total DCL work) and the
/// centralized EKF for each swarm size. World generation is not timed.
inline std::vector<BenchPoint> run_benchmark(WorldConfig cfg, std::span<const int> sizes,
                                             const RunOptions& opt) {
  std::vector<BenchPoint> out;
  for (int n : sizes) {
    cfg.agents = n;
    const World w = make_world(cfg, 0);
    BenchPoint b;
    b.agents = n;
    const auto t0 = std::chrono::steady_clock::now();
    (void)simulate_distributed(w, Method::WCI, opt);
    const auto t1 = std::chrono::steady_clock::now();
    (void)simulate_centralized(w, opt);
    const auto t2 = std::chrono::steady_clock::now();
    b.dcl_seconds = std::chrono::duration<double>(t1 - t0).count();
    b.ccl_seconds = std::chrono::duration<double>(t2 - t1).count();
    out.push_back(b);
  }
  return out;
}

/// Short profile for timing: accelerate for 4 s, then a 6 s figure-eight.
inline std::vector<TrajectorySegment> bench_profile() {
  return {Accelerate{0.4, 4.0}, EightShape{6.0}};
}

}  // namespace wcicl

#endif  // WCICL_EXPERIMENT_HPP_
