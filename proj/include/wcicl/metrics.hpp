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

#ifndef WCICL_METRICS_HPP_
#define WCICL_METRICS_HPP_

#include "wcicl/attitude.hpp"
#include "wcicl/common.hpp"
#include "wcicl/ins.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wcicl {

enum class Component { Position = 0, Velocity = 1, Attitude = 2, GyroBias = 3, AccelBias = 4 };

inline constexpr std::array<Component, 5> kAllComponents = {
    Component::Position, Component::Velocity, Component::Attitude, Component::GyroBias,
    Component::AccelBias};

inline constexpr int component_offset(Component c) { return 3 * static_cast<int>(c); }

inline std::string_view component_name(Component c) {
  switch (c) {
    case Component::Position: return "position";
    case Component::Velocity: return "velocity";
    case Component::Attitude: return "attitude";
    case Component::GyroBias: return "gyro_bias";
    case Component::AccelBias: return "accel_bias";
  }
  return "?";
}

/// SI-to-report scale: m, m/s, deg, deg/h, ug.
inline double component_unit_scale(Component c) {
  switch (c) {
    case Component::Attitude: return kRadToDeg;
    case Component::GyroBias: return kRadToDeg * 3600.0;
    case Component::AccelBias: return 1e6 / kStandardGravity;
    default: return 1.0;
  }
}

inline std::string_view component_unit(Component c) {
  switch (c) {
    case Component::Position: return "m";
    case Component::Velocity: return "m/s";
    case Component::Attitude: return "deg";
    case Component::GyroBias: return "deg/h";
    case Component::AccelBias: return "ug";
  }
  return "";
}

/// Estimation error in error-state coordinates: estimate minus truth for
/// position, velocity and attitude, residual bias (truth minus estimate) for
/// the biases.
inline Vec15 state_error(const NominalState& x_hat, const NominalState& x_true) {
  Vec15 e;
  e.segment<3>(kPos) = x_hat.p - x_true.p;
  e.segment<3>(kVel) = x_hat.v - x_true.v;
  e.segment<3>(kAtt) = attitude_error(x_hat.q, x_true.q);
  e.segment<3>(kGyroBias) = x_true.bg - x_hat.bg;
  e.segment<3>(kAccelBias) = x_true.ba - x_hat.ba;
  return e;
}

/// sqrt(mean over runs of |e_sel|^2).
inline double rmse(std::span<const Vec15> errors, Component c) {
  double s = 0.0;
  for (const auto& e : errors) {
    s += e.segment<3>(component_offset(c)).squaredNorm();
  }
  return std::sqrt(s / static_cast<double>(errors.size()));
}

/// sqrt(mean over runs of tr(P_sel)).
inline double std_metric(std::span<const Mat15> covs, Component c) {
  double s = 0.0;
  for (const auto& p : covs) {
    s += p.block<3, 3>(component_offset(c), component_offset(c)).trace();
  }
  return std::sqrt(s / static_cast<double>(covs.size()));
}

inline double mahalanobis_sq(const Vec3& e, const Mat3& p) {
  const Eigen::LLT<Mat3> llt(p);
  if (llt.info() != Eigen::Success) {
    throw SingularCovariance("component covariance is not positive definite");
  }
  return e.dot(llt.solve(e));
}

/// mean over runs of e_sel^T P_sel^-1 e_sel.
inline double nees(std::span<const Vec15> errors, std::span<const Mat15> covs, Component c) {
  if (errors.size() != covs.size()) {
    throw std::invalid_argument("nees: error/covariance count mismatch");
  }
  const int o = component_offset(c);
  double s = 0.0;
  for (std::size_t k = 0; k < errors.size(); ++k) {
    s += mahalanobis_sq(errors[k].segment<3>(o), covs[k].block<3, 3>(o, o));
  }
  return s / static_cast<double>(errors.size());
}

inline MatX correlation_matrix(const MatX& p) {
  const VecX inv_sd = p.diagonal().cwiseSqrt().cwiseInverse();
  return inv_sd.asDiagonal() * p * inv_sd.asDiagonal();
}

/// Element-wise |rho_nominal - rho_actual|.
inline MatX correlation_gap(const MatX& p_nominal, const MatX& p_actual) {
  return (correlation_matrix(p_nominal) - correlation_matrix(p_actual)).cwiseAbs();
}

// ---------------------------------------------------------------------------
// Logs

/// One method on one Monte Carlo run: per epoch, per agent error, nominal
/// covariance, change of each component's covariance trace across the epoch's
/// updates, and the latest omega*.
struct RunLog {
  int agents = 0;
  std::vector<double> times;
  std::vector<Vec15> errors;  // index epoch * agents + agent
  std::vector<Mat15> covs;
  std::vector<std::array<double, 5>> trace_delta;
  std::vector<double> omega;

  explicit RunLog(int n = 0) : agents(n) {}

  std::size_t epochs() const { return times.size(); }
  std::size_t index(std::size_t epoch, int agent) const {
    return epoch * static_cast<std::size_t>(agents) + static_cast<std::size_t>(agent);
  }
};

inline std::array<double, 5> component_traces(const Mat15& p) {
  std::array<double, 5> t{};
  for (auto c : kAllComponents) {
    const int o = component_offset(c);
    t[static_cast<int>(c)] = p.block<3, 3>(o, o).trace();
  }
  return t;
}

/// Per-epoch Monte Carlo statistics of one method, in SI units.
struct TimeSeries {
  int agents = 0;
  std::vector<double> times;
  // index (epoch * agents + agent) * 5 + component
  std::vector<double> rmse;
  std::vector<double> std;
  std::vector<double> nees;
  std::vector<double> trace_delta;  // mean over runs

  std::size_t index(std::size_t epoch, int agent, Component c) const {
    return (epoch * static_cast<std::size_t>(agents) + static_cast<std::size_t>(agent)) * 5 +
           static_cast<std::size_t>(c);
  }
};

/// Streams run logs into sums so that memory does not grow with the number of
/// runs. The correlation analysis follows one agent.
class MetricAccumulator {
 public:
  MetricAccumulator(int agents, int corr_agent = 0) : agents_(agents), corr_agent_(corr_agent) {}

  void add(const RunLog& log) {
    if (runs_ == 0) {
      times_ = log.times;
      const std::size_t cells = log.errors.size() * 5;
      sq_err_.assign(cells, 0.0);
      trace_.assign(cells, 0.0);
      nees_.assign(cells, 0.0);
      delta_.assign(cells, 0.0);
      corr_err_.assign(log.epochs(), Mat15::Zero());
      corr_nom_.assign(log.epochs(), Mat15::Zero());
    } else if (log.times != times_ || log.agents != agents_) {
      throw std::invalid_argument("MetricAccumulator: logs are not aligned");
    }
    for (std::size_t k = 0; k < log.epochs(); ++k) {
      for (int a = 0; a < agents_; ++a) {
        const std::size_t idx = log.index(k, a);
        const Vec15& e = log.errors[idx];
        const Mat15& p = log.covs[idx];
        for (auto c : kAllComponents) {
          const int o = component_offset(c);
          const std::size_t cell = idx * 5 + static_cast<std::size_t>(c);
          sq_err_[cell] += e.segment<3>(o).squaredNorm();
          trace_[cell] += p.block<3, 3>(o, o).trace();
          nees_[cell] += mahalanobis_sq(e.segment<3>(o), p.block<3, 3>(o, o));
          delta_[cell] += log.trace_delta[idx][static_cast<int>(c)];
        }
      }
      const std::size_t ci = log.index(k, corr_agent_);
      corr_err_[k] += log.errors[ci] * log.errors[ci].transpose();
      corr_nom_[k] += log.covs[ci];
    }
    ++runs_;
  }

  int runs() const { return runs_; }

  TimeSeries series() const {
    TimeSeries ts;
    ts.agents = agents_;
    ts.times = times_;
    const double n = static_cast<double>(runs_);
    ts.rmse.resize(sq_err_.size());
    ts.std.resize(sq_err_.size());
    ts.nees.resize(sq_err_.size());
    ts.trace_delta.resize(sq_err_.size());
    for (std::size_t i = 0; i < sq_err_.size(); ++i) {
      ts.rmse[i] = std::sqrt(sq_err_[i] / n);
      ts.std[i] = std::sqrt(trace_[i] / n);
      ts.nees[i] = nees_[i] / n;
      ts.trace_delta[i] = delta_[i] / n;
    }
    return ts;
  }

  /// Correlation gap of the tracked agent, averaged over epochs from
  /// `from_time` on. The actual covariance is E[e e^T] across runs and the
  /// nominal one the run-mean of P.
  MatX mean_correlation_gap(double from_time = 0.0) const {
    MatX acc = MatX::Zero(kErrorStateDim, kErrorStateDim);
    int count = 0;
    const double n = static_cast<double>(runs_);
    for (std::size_t k = 0; k < times_.size(); ++k) {
      if (times_[k] < from_time) {
        continue;
      }
      acc += correlation_gap(MatX(corr_nom_[k] / n), MatX(corr_err_[k] / n));
      ++count;
    }
    return count > 0 ? MatX(acc / count) : acc;
  }

 private:
  int agents_;
  int corr_agent_;
  int runs_ = 0;
  std::vector<double> times_;
  std::vector<double> sq_err_;
  std::vector<double> trace_;
  std::vector<double> nees_;
  std::vector<double> delta_;
  std::vector<Mat15> corr_err_;
  std::vector<Mat15> corr_nom_;
};

/// Time average over epochs at or after `from_time` of one statistic for one
/// agent.
inline double time_average(const TimeSeries& ts, const std::vector<double>& values, int agent,
                           Component c, double from_time = 0.0, double to_time = 1e300) {
  double s = 0.0;
  int count = 0;
  for (std::size_t k = 0; k < ts.times.size(); ++k) {
    if (ts.times[k] < from_time || ts.times[k] > to_time) {
      continue;
    }
    s += values[ts.index(k, agent, c)];
    ++count;
  }
  return count > 0 ? s / count : 0.0;
}

/// Mean of the per-agent time averages over agents [first, last].
inline double group_average(const TimeSeries& ts, const std::vector<double>& values, int first,
                            int last, Component c, double from_time = 0.0,
                            double to_time = 1e300) {
  double s = 0.0;
  for (int a = first; a <= last; ++a) {
    s += time_average(ts, values, a, c, from_time, to_time);
  }
  return s / (last - first + 1);
}

// ---------------------------------------------------------------------------
// CSV

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("not a number: " + std::string(s));
  }
  return v;
}

inline constexpr std::string_view kTimeseriesHeader = "time,agent,method,component,rmse,std,nees";
inline constexpr std::string_view kTraceDeltaHeader = "time,agent,component,delta";
inline constexpr std::string_view kCorrGapHeader = "row,col,gap";

/// Appends timeseries rows; agents are written 1-based and values in SI units.
inline void write_timeseries_rows(std::ostream& out, const TimeSeries& ts, std::string_view method) {
  for (std::size_t k = 0; k < ts.times.size(); ++k) {
    for (int a = 0; a < ts.agents; ++a) {
      for (auto c : kAllComponents) {
        const std::size_t i = ts.index(k, a, c);
        out << format_double(ts.times[k]) << ',' << (a + 1) << ',' << method << ','
            << component_name(c) << ',' << format_double(ts.rmse[i]) << ','
            << format_double(ts.std[i]) << ',' << format_double(ts.nees[i]) << '\n';
      }
    }
  }
}

inline void write_trace_delta(std::ostream& out, const TimeSeries& ts) {
  out << kTraceDeltaHeader << '\n';
  for (std::size_t k = 0; k < ts.times.size(); ++k) {
    for (int a = 0; a < ts.agents; ++a) {
      for (auto c : kAllComponents) {
        out << format_double(ts.times[k]) << ',' << (a + 1) << ',' << component_name(c) << ','
            << format_double(ts.trace_delta[ts.index(k, a, c)]) << '\n';
      }
    }
  }
}

inline void write_corrgap(std::ostream& out, const MatX& gap) {
  out << kCorrGapHeader << '\n';
  for (Eigen::Index r = 0; r < gap.rows(); ++r) {
    for (Eigen::Index c = 0; c < gap.cols(); ++c) {
      out << r << ',' << c << ',' << format_double(gap(r, c)) << '\n';
    }
  }
}

struct TimeseriesRow {
  double time = 0.0;
  int agent = 0;
  std::string method;
  std::string component;
  double rmse = 0.0;
  double std = 0.0;
  double nees = 0.0;
};

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) {
      break;
    }
    start = pos + 1;
  }
  return out;
}

inline std::vector<TimeseriesRow> read_timeseries(std::istream& in) {
  std::vector<TimeseriesRow> rows;
  std::string line;
  if (!std::getline(in, line) || line != kTimeseriesHeader) {
    throw std::invalid_argument("timeseries.csv: unexpected header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 7) {
      throw std::invalid_argument("timeseries.csv: expected 7 fields");
    }
    TimeseriesRow r;
    r.time = parse_double(f[0]);
    r.agent = static_cast<int>(parse_double(f[1]));
    r.method = std::string(f[2]);
    r.component = std::string(f[3]);
    r.rmse = parse_double(f[4]);
    r.std = parse_double(f[5]);
    r.nees = parse_double(f[6]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace wcicl

#endif  // WCICL_METRICS_HPP_
