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

// Scenario files: '#' comments, [section] headers, `key = value` lines.
// Repeated keys (anchor, segment, event) accumulate in order; the first
// occurrence replaces the built-in default list. Agent ids are 1-based.
// Units follow the usual datasheet conventions (deg, deg/sqrt(h), ug, ...).

#ifndef WCICL_CONFIG_HPP_
#define WCICL_CONFIG_HPP_

#include "wcicl/experiment.hpp"
#include "wcicl/metrics.hpp"
#include "wcicl/simworld.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace wcicl {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(int line, const std::string& what)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct ExperimentConfig {
  WorldConfig world;
  std::vector<Method> methods = {kAllMethods.begin(), kAllMethods.end()};
  EventSchedule events = robustness_schedule();
  UpdateMode update_mode = UpdateMode::Concurrent;
  LossPolicy loss_policy = LossPolicy::ZeroOrderHold;
  double skip_transient = 0.0;  // [s]
  std::vector<double> sweep_ta = {1.0, 5.0, 20.0};
  std::vector<int> bench_sizes = {4, 8, 16, 32};

  friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

namespace config_detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == ',')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != ',') ++i;
    if (i > start) {
      out.push_back(s.substr(start, i - start));
    }
  }
  return out;
}

inline double number(std::string_view s, int line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ConfigError(line, "expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

inline long long integer(std::string_view s, int line) {
  long long v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError(line, "expected an integer, got '" + std::string(s) + "'");
  }
  return v;
}

inline std::vector<double> numbers(std::string_view s, std::size_t count, int line) {
  const auto w = words(s);
  if (count > 0 && w.size() != count) {
    throw ConfigError(line, "expected " + std::to_string(count) + " numbers");
  }
  std::vector<double> out;
  for (auto x : w) out.push_back(number(x, line));
  return out;
}

inline Vec3 vec3(std::string_view s, int line) {
  const auto v = numbers(s, 3, line);
  return Vec3(v[0], v[1], v[2]);
}

inline int agent_id(std::string_view s, int line) {
  const long long id = integer(s, line);
  if (id < 1) {
    throw ConfigError(line, "agent ids start at 1");
  }
  return static_cast<int>(id - 1);
}

inline TrajectorySegment segment(std::string_view s, int line) {
  const auto w = words(s);
  if (w.empty()) {
    throw ConfigError(line, "empty segment");
  }
  auto args = [&](std::size_t n) {
    if (w.size() != n + 1) {
      throw ConfigError(line, "segment '" + std::string(w[0]) + "' takes " + std::to_string(n) +
                                  " values");
    }
  };
  const std::string_view kind = w[0];
  TrajectorySegment seg;
  if (kind == "accelerate") {
    args(2);
    seg = Accelerate{number(w[1], line), number(w[2], line)};
  } else if (kind == "eight") {
    args(1);
    seg = EightShape{number(w[1], line)};
  } else if (kind == "pitch") {
    args(2);
    seg = PitchRamp{number(w[1], line), number(w[2], line)};
  } else if (kind == "cruise") {
    args(1);
    seg = ConstantVelocity{number(w[1], line)};
  } else if (kind == "turn") {
    args(2);
    seg = CircularTurn{number(w[1], line), number(w[2], line)};
  } else if (kind == "hover") {
    args(1);
    seg = DecelerateToHover{number(w[1], line)};
  } else {
    throw ConfigError(line, "unknown segment '" + std::string(kind) + "'");
  }
  try {
    detail::validate_segment(seg);
  } catch (const InvalidSegment& e) {
    throw ConfigError(line, e.what());
  }
  return seg;
}

inline ScheduledEvent event(std::string_view s, int line) {
  const auto w = words(s);
  if (w.size() < 3) {
    throw ConfigError(line, "event needs a kind, a time and an agent");
  }
  ScheduledEvent e;
  e.time = number(w[1], line);
  const int agent = agent_id(w[2], line);
  if (w[0] == "packet_loss") {
    if (w.size() != 4) {
      throw ConfigError(line, "packet_loss takes time, agent and probability");
    }
    const double p = number(w[3], line);
    if (p < 0.0 || p > 1.0) {
      throw ConfigError(line, "probability must lie in [0, 1]");
    }
    e.event = PacketLoss{agent, p};
  } else if (w[0] == "offline" || w[0] == "rejoin") {
    if (w.size() != 3) {
      throw ConfigError(line, std::string(w[0]) + " takes time and agent");
    }
    e.event = w[0] == "offline" ? WorldEvent(Offline{agent}) : WorldEvent(Rejoin{agent});
  } else {
    throw ConfigError(line, "unknown event '" + std::string(w[0]) + "'");
  }
  return e;
}

inline std::string vec3_text(const Vec3& v) {
  return format_double(v.x()) + " " + format_double(v.y()) + " " + format_double(v.z());
}

inline std::string segment_text(const TrajectorySegment& s) {
  return std::visit(
      [](const auto& seg) -> std::string {
        using T = std::decay_t<decltype(seg)>;
        if constexpr (std::is_same_v<T, Accelerate>) {
          return "accelerate " + format_double(seg.accel) + " " + format_double(seg.duration);
        } else if constexpr (std::is_same_v<T, EightShape>) {
          return "eight " + format_double(seg.duration);
        } else if constexpr (std::is_same_v<T, PitchRamp>) {
          return "pitch " + format_double(seg.delta_deg) + " " + format_double(seg.duration);
        } else if constexpr (std::is_same_v<T, ConstantVelocity>) {
          return "cruise " + format_double(seg.duration);
        } else if constexpr (std::is_same_v<T, CircularTurn>) {
          return "turn " + format_double(seg.angle_deg) + " " + format_double(seg.duration);
        } else {
          return "hover " + format_double(seg.duration);
        }
      },
      s);
}

inline std::string event_text(const ScheduledEvent& e) {
  return std::visit(
      [&e](const auto& ev) -> std::string {
        using T = std::decay_t<decltype(ev)>;
        const std::string common = format_double(e.time) + " " + std::to_string(ev.agent + 1);
        if constexpr (std::is_same_v<T, PacketLoss>) {
          return "packet_loss " + common + " " + format_double(ev.probability);
        } else if constexpr (std::is_same_v<T, Offline>) {
          return "offline " + common;
        } else {
          return "rejoin " + common;
        }
      },
      e.event);
}

// Datasheet units <-> SI.
inline constexpr double kArwScale = kDegToRad / 60.0;          // deg/sqrt(h) -> rad/sqrt(s)
inline constexpr double kVrwScale = 1.0 / 60.0;                // m/s/sqrt(h) -> m/s/sqrt(s)
inline constexpr double kGyroBiasScale = kDegToRad / 3600.0;  // deg/h -> rad/s
inline constexpr double kAccelBiasScale = 1e-6 * kStandardGravity;  // ug -> m/s^2

/// Datasheet value x with x * scale == si exactly when one exists nearby, so
/// that serialized configs parse back to identical SI values.
inline double unscale(double si, double scale) {
  double x = si / scale;
  double lo = x;
  double hi = x;
  for (int k = 0; k < 8; ++k) {
    if (lo * scale == si) return lo;
    if (hi * scale == si) return hi;
    lo = std::nextafter(lo, -std::numeric_limits<double>::infinity());
    hi = std::nextafter(hi, std::numeric_limits<double>::infinity());
  }
  return x;
}

}  // namespace config_detail

inline ExperimentConfig parse_config(std::istream& in) {
  using namespace config_detail;
  ExperimentConfig cfg;
  std::string section;
  std::set<std::string> replaced;
  std::set<std::string> seen;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view text = raw;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) {
      text = text.substr(0, hash);
    }
    text = trim(text);
    if (text.empty()) {
      continue;
    }
    if (text.front() == '[') {
      if (text.back() != ']') {
        throw ConfigError(line, "unterminated section header");
      }
      section = std::string(trim(text.substr(1, text.size() - 2)));
      if (section != "world" && section != "imu" && section != "trajectory" &&
          section != "events" && section != "experiment") {
        throw ConfigError(line, "unknown section [" + section + "]");
      }
      continue;
    }
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(line, "expected 'key = value'");
    }
    if (section.empty()) {
      throw ConfigError(line, "key outside of a section");
    }
    const std::string key(trim(text.substr(0, eq)));
    const std::string_view value = trim(text.substr(eq + 1));
    const std::string qualified = section + "." + key;
    const bool repeatable = qualified == "world.anchor" || qualified == "trajectory.segment" ||
                            qualified == "events.event";
    if (!repeatable && !seen.insert(qualified).second) {
      throw ConfigError(line, "duplicate key '" + key + "'");
    }
    auto& w = cfg.world;
    auto first_use = [&](auto& list) {
      if (replaced.insert(qualified).second) {
        list.clear();
      }
    };
    if (qualified == "world.agents") {
      const long long v = integer(value, line);
      if (v < 1 || v > 4096) throw ConfigError(line, "agents must lie in [1, 4096]");
      w.agents = static_cast<int>(v);
    } else if (qualified == "world.anchor") {
      first_use(w.anchors);
      w.anchors.push_back(vec3(value, line));
    } else if (qualified == "world.sigma_r") {
      w.sigma_r = number(value, line);
    } else if (qualified == "world.uwb_rate") {
      w.uwb_rate = number(value, line);
    } else if (qualified == "world.imu_rate") {
      w.imu_rate = number(value, line);
    } else if (qualified == "world.lever") {
      w.lever.l_b = vec3(value, line);
    } else if (qualified == "world.sigma_p0") {
      w.sigma_p0 = number(value, line);
    } else if (qualified == "world.sigma_v0") {
      w.sigma_v0 = number(value, line);
    } else if (qualified == "world.sigma_phi0") {
      w.sigma_phi0 = number(value, line);
    } else if (qualified == "world.t_a") {
      w.t_a = number(value, line);
    } else if (qualified == "world.runs") {
      const long long v = integer(value, line);
      if (v < 1) throw ConfigError(line, "runs must be at least 1");
      w.runs = static_cast<int>(v);
    } else if (qualified == "world.seed") {
      std::uint64_t v = 0;
      const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
      if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
        throw ConfigError(line, "seed must be an unsigned integer");
      }
      w.seed = v;
    } else if (qualified == "world.start_box") {
      w.start_box = vec3(value, line);
    } else if (qualified == "imu.gyro_arw") {
      w.imu_noise.gyro_arw = number(value, line) * kArwScale;
    } else if (qualified == "imu.accel_vrw") {
      w.imu_noise.accel_vrw = number(value, line) * kVrwScale;
    } else if (qualified == "imu.gyro_bias") {
      w.imu_noise.gyro_bias_sigma0 = number(value, line) * kGyroBiasScale;
    } else if (qualified == "imu.accel_bias") {
      w.imu_noise.accel_bias_sigma0 = number(value, line) * kAccelBiasScale;
    } else if (qualified == "imu.gravity") {
      w.imu_noise.gravity = number(value, line);
    } else if (qualified == "trajectory.segment") {
      first_use(w.segments);
      w.segments.push_back(segment(value, line));
    } else if (qualified == "events.event") {
      first_use(cfg.events);
      cfg.events.push_back(event(value, line));
    } else if (qualified == "events.none") {
      if (value != "true") throw ConfigError(line, "events.none only accepts 'true'");
      cfg.events.clear();
      replaced.insert("events.event");
    } else if (qualified == "experiment.methods") {
      cfg.methods.clear();
      for (auto name : words(value)) {
        const auto m = parse_method(name);
        if (!m) throw ConfigError(line, "unknown method '" + std::string(name) + "'");
        cfg.methods.push_back(*m);
      }
      if (cfg.methods.empty()) throw ConfigError(line, "no methods given");
    } else if (qualified == "experiment.update_mode") {
      if (value == "concurrent") {
        cfg.update_mode = UpdateMode::Concurrent;
      } else if (value == "sequential") {
        cfg.update_mode = UpdateMode::Sequential;
      } else {
        throw ConfigError(line, "update_mode must be concurrent or sequential");
      }
    } else if (qualified == "experiment.loss_policy") {
      if (value == "zoh") {
        cfg.loss_policy = LossPolicy::ZeroOrderHold;
      } else if (value == "freeze") {
        cfg.loss_policy = LossPolicy::Freeze;
      } else {
        throw ConfigError(line, "loss_policy must be zoh or freeze");
      }
    } else if (qualified == "experiment.skip_transient") {
      cfg.skip_transient = number(value, line);
      if (cfg.skip_transient < 0.0) throw ConfigError(line, "skip_transient must be >= 0");
    } else if (qualified == "experiment.sweep_ta") {
      cfg.sweep_ta = numbers(value, 0, line);
      for (double t : cfg.sweep_ta) {
        if (t < 0.0) throw ConfigError(line, "T_a values must be non-negative");
      }
    } else if (qualified == "experiment.bench_sizes") {
      cfg.bench_sizes.clear();
      for (auto x : words(value)) {
        const long long v = integer(x, line);
        if (v < 1 || v > 4096) throw ConfigError(line, "bench sizes must lie in [1, 4096]");
        cfg.bench_sizes.push_back(static_cast<int>(v));
      }
    } else {
      throw ConfigError(line, "unknown key '" + key + "' in [" + section + "]");
    }
  }
  try {
    validate(cfg.world);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(0, e.what());
  }
  for (const auto& e : cfg.events) {
    const int agent = std::visit([](const auto& ev) { return ev.agent; }, e.event);
    if (agent >= cfg.world.agents) {
      throw ConfigError(0, "event refers to agent " + std::to_string(agent + 1) +
                               " but there are only " + std::to_string(cfg.world.agents));
    }
  }
  return cfg;
}

inline ExperimentConfig parse_config_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_config(in);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError(0, "cannot open config file '" + path + "'");
  }
  return parse_config(in);
}

inline std::string serialize_config(const ExperimentConfig& cfg) {
  using namespace config_detail;
  const auto& w = cfg.world;
  std::ostringstream o;
  o << "[world]\n";
  o << "agents = " << w.agents << "\n";
  for (const auto& a : w.anchors) o << "anchor = " << vec3_text(a) << "\n";
  o << "sigma_r = " << format_double(w.sigma_r) << "\n";
  o << "uwb_rate = " << format_double(w.uwb_rate) << "\n";
  o << "imu_rate = " << format_double(w.imu_rate) << "\n";
  o << "lever = " << vec3_text(w.lever.l_b) << "\n";
  o << "sigma_p0 = " << format_double(w.sigma_p0) << "\n";
  o << "sigma_v0 = " << format_double(w.sigma_v0) << "\n";
  o << "sigma_phi0 = " << format_double(w.sigma_phi0) << "\n";
  o << "t_a = " << format_double(w.t_a) << "\n";
  o << "runs = " << w.runs << "\n";
  o << "seed = " << w.seed << "\n";
  o << "start_box = " << vec3_text(w.start_box) << "\n";
  o << "\n[imu]\n";
  o << "gyro_arw = " << format_double(unscale(w.imu_noise.gyro_arw, kArwScale)) << "\n";
  o << "accel_vrw = " << format_double(unscale(w.imu_noise.accel_vrw, kVrwScale)) << "\n";
  o << "gyro_bias = " << format_double(unscale(w.imu_noise.gyro_bias_sigma0, kGyroBiasScale)) << "\n";
  o << "accel_bias = " << format_double(unscale(w.imu_noise.accel_bias_sigma0, kAccelBiasScale)) << "\n";
  o << "gravity = " << format_double(w.imu_noise.gravity) << "\n";
  o << "\n[trajectory]\n";
  for (const auto& s : w.segments) o << "segment = " << segment_text(s) << "\n";
  o << "\n[events]\n";
  if (cfg.events.empty()) o << "none = true\n";
  for (const auto& e : cfg.events) o << "event = " << event_text(e) << "\n";
  o << "\n[experiment]\n";
  o << "methods =";
  for (std::size_t i = 0; i < cfg.methods.size(); ++i) {
    o << (i == 0 ? " " : ", ") << method_name(cfg.methods[i]);
  }
  o << "\n";
  o << "update_mode = " << update_mode_name(cfg.update_mode) << "\n";
  o << "loss_policy = " << loss_policy_name(cfg.loss_policy) << "\n";
  o << "skip_transient = " << format_double(cfg.skip_transient) << "\n";
  o << "sweep_ta =";
  for (double t : cfg.sweep_ta) o << " " << format_double(t);
  o << "\n";
  o << "bench_sizes =";
  for (int n : cfg.bench_sizes) o << " " << n;
  o << "\n";
  return o.str();
}

}  // namespace wcicl

#endif  // WCICL_CONFIG_HPP_
