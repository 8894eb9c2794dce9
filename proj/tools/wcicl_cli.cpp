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

// Command-line driver: Monte Carlo runs, T_a sweep, robustness scenario,
// update-mode comparison and the scaling benchmark. Writes CSV only.

#include "wcicl/config.hpp"
#include "wcicl/experiment.hpp"
#include "wcicl/metrics.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace wcicl;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CliArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string methods;
  std::string out = "out";
  std::optional<int> runs;
  std::optional<double> skip_transient;
  std::string update_mode;
};

ExperimentConfig resolve(const CliArgs& a) {
  ExperimentConfig cfg = a.config.empty() ? ExperimentConfig{} : load_config(a.config);
  if (a.seed) cfg.world.seed = *a.seed;
  if (a.runs) {
    if (*a.runs < 1) throw ConfigError(0, "--runs must be at least 1");
    cfg.world.runs = *a.runs;
  }
  if (a.skip_transient) {
    if (*a.skip_transient < 0.0) throw ConfigError(0, "--skip-transient must be >= 0");
    cfg.skip_transient = *a.skip_transient;
  }
  if (!a.methods.empty()) {
    cfg.methods.clear();
    for (auto name : config_detail::words(a.methods)) {
      const auto m = parse_method(name);
      if (!m) throw ConfigError(0, "unknown method '" + std::string(name) + "'");
      cfg.methods.push_back(*m);
    }
  }
  if (!a.update_mode.empty()) {
    if (a.update_mode == "concurrent") {
      cfg.update_mode = UpdateMode::Concurrent;
    } else if (a.update_mode == "sequential") {
      cfg.update_mode = UpdateMode::Sequential;
    } else {
      throw ConfigError(0, "--update-mode must be concurrent or sequential");
    }
  }
  return cfg;
}

MonteCarloSpec make_spec(const ExperimentConfig& cfg, bool with_events) {
  MonteCarloSpec s;
  s.world = cfg.world;
  s.methods = cfg.methods;
  if (with_events) s.events = cfg.events;
  s.options.update_mode = cfg.update_mode;
  s.options.loss_policy = cfg.loss_policy;
  s.options.t_a = cfg.world.t_a;
  return s;
}

std::ofstream open_out(const fs::path& p) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

void write_summary_row(std::ostream& o, std::string_view prefix, std::string_view group,
                       const GroupSummary& g) {
  for (auto c : kAllComponents) {
    const int k = static_cast<int>(c);
    o << prefix << group << ',' << component_name(c) << ',' << component_unit(c) << ','
      << format_double(g.rmse[k]) << ',' << format_double(g.std[k]) << ','
      << format_double(g.nees[k]) << '\n';
  }
}

void print_table(const std::vector<MethodSummary>& rows, int agents) {
  const char* groups[2] = {"agent 1", "agents 2-N"};
  for (int gi = 0; gi < (agents > 1 ? 2 : 1); ++gi) {
    std::printf("\n%s%s\n", groups[gi],
                gi == 1 ? (" (N = " + std::to_string(agents) + ")").c_str() : "");
    std::printf("%-9s %-5s", "method", "stat");
    for (auto c : kAllComponents) {
      std::printf(" %12s", (std::string(component_name(c)) + "[" +
                            std::string(component_unit(c)) + "]")
                               .c_str());
    }
    std::printf("\n");
    for (const auto& r : rows) {
      const GroupSummary& g = gi == 0 ? r.first : r.others;
      const std::array<const std::array<double, 5>*, 3> stats = {&g.rmse, &g.std, &g.nees};
      const char* names[3] = {"RMSE", "STD", "NEES"};
      for (int s = 0; s < 3; ++s) {
        std::printf("%-9s %-5s", s == 0 ? std::string(method_name(r.method)).c_str() : "",
                    names[s]);
        for (double v : *stats[s]) std::printf(" %12.4g", v);
        std::printf("\n");
      }
    }
  }
}

int cmd_run(const ExperimentConfig& cfg, const fs::path& out) {
  const auto results = run_monte_carlo(make_spec(cfg, false));
  auto ts = open_out(out / "timeseries.csv");
  ts << kTimeseriesHeader << '\n';
  auto summary = open_out(out / "summary.csv");
  summary << "method,group,component,unit,rmse,std,nees\n";
  std::vector<MethodSummary> rows;
  for (const auto& r : results) {
    const std::string name(method_name(r.method));
    write_timeseries_rows(ts, r.series, name);
    auto td = open_out(out / name / "trace_delta.csv");
    write_trace_delta(td, r.series);
    auto cg = open_out(out / name / "corrgap.csv");
    write_corrgap(cg, r.corr_gap);
    rows.push_back(summarize(r, cfg.skip_transient));
    write_summary_row(summary, name + ",", "agent1", rows.back().first);
    if (cfg.world.agents > 1) write_summary_row(summary, name + ",", "others", rows.back().others);
  }
  print_table(rows, cfg.world.agents);
  return 0;
}

int cmd_sweep_ta(const ExperimentConfig& cfg, const fs::path& out) {
  const auto points = run_ta_sweep(make_spec(cfg, false), cfg.sweep_ta);
  auto o = open_out(out / "sweep_ta.csv");
  o << "t_a,group,component,unit,rmse,std,nees\n";
  std::printf("%8s %-7s %12s %12s %12s\n", "T_a[s]", "group", "pos STD[m]", "att STD[deg]",
              "pos RMSE[m]");
  for (const auto& p : points) {
    const auto s = summarize(p.result, cfg.skip_transient);
    const std::string prefix = format_double(p.t_a) + ",";
    write_summary_row(o, prefix, "agent1", s.first);
    if (cfg.world.agents > 1) write_summary_row(o, prefix, "others", s.others);
    for (int g = 0; g < (cfg.world.agents > 1 ? 2 : 1); ++g) {
      const auto& gs = g == 0 ? s.first : s.others;
      std::printf("%8g %-7s %12.4g %12.4g %12.4g\n", p.t_a, g == 0 ? "agent1" : "others",
                  gs.std[0], gs.std[2], gs.rmse[0]);
    }
  }
  return 0;
}

double position_rmse_window(const MethodResult& r, int first, int last, double t0, double t1) {
  return group_average(r.series, r.series.rmse, first, last, Component::Position, t0, t1);
}

int cmd_robustness(const ExperimentConfig& cfg, const fs::path& out) {
  const auto cmp = run_robustness(make_spec(cfg, true));
  const int n = cfg.world.agents;
  auto o = open_out(out / "robustness.csv");
  o << "time,scenario,method,group,position_rmse\n";
  auto emit = [&](const std::vector<MethodResult>& results, std::string_view scenario) {
    for (const auto& r : results) {
      const auto& ts = r.series;
      for (std::size_t k = 0; k < ts.times.size(); ++k) {
        const double a1 = ts.rmse[ts.index(k, 0, Component::Position)];
        o << format_double(ts.times[k]) << ',' << scenario << ',' << method_name(r.method)
          << ",agent1," << format_double(a1) << '\n';
        if (n > 1) {
          double s = 0.0;
          for (int a = 1; a < n; ++a) s += ts.rmse[ts.index(k, a, Component::Position)];
          o << format_double(ts.times[k]) << ',' << scenario << ',' << method_name(r.method)
            << ",others," << format_double(s / (n - 1)) << '\n';
        }
      }
    }
  };
  emit(cmp.baseline, "baseline");
  emit(cmp.variant, "events");

  auto sum = open_out(out / "robustness_summary.csv");
  sum << "method,group,t0,t1,baseline,events,ratio\n";
  std::printf("%-9s %-7s %6s %6s %12s %12s %8s\n", "method", "group", "t0", "t1", "baseline[m]",
              "events[m]", "ratio");
  for (std::size_t m = 0; m < cmp.baseline.size(); ++m) {
    struct Window {
      const char* group;
      int first;
      int last;
      double t0;
      double t1;
    };
    std::vector<Window> windows = {{"agent1", 0, 0, 90.0, 110.0}};
    if (n > 1) {
      windows.push_back({"others", 1, n - 1, 30.0, 90.0});
      windows.push_back({"others", 1, n - 1, 30.0, 120.0});
    }
    for (const auto& w : windows) {
      const double b = position_rmse_window(cmp.baseline[m], w.first, w.last, w.t0, w.t1);
      const double e = position_rmse_window(cmp.variant[m], w.first, w.last, w.t0, w.t1);
      const std::string name(method_name(cmp.baseline[m].method));
      sum << name << ',' << w.group << ',' << format_double(w.t0) << ',' << format_double(w.t1)
          << ',' << format_double(b) << ',' << format_double(e) << ',' << format_double(e / b)
          << '\n';
      std::printf("%-9s %-7s %6g %6g %12.4g %12.4g %8.3f\n", name.c_str(), w.group, w.t0, w.t1, b,
                  e, e / b);
    }
  }
  return 0;
}

int cmd_update_mode(const ExperimentConfig& cfg, const fs::path& out) {
  const auto cmp = run_update_modes(make_spec(cfg, false));
  auto o = open_out(out / "update_mode.csv");
  o << "mode,method,group,component,unit,rmse,std,nees\n";
  std::printf("%-11s %-9s %12s %12s\n", "mode", "method", "pos RMSE[m]", "pos STD[m]");
  auto emit = [&](const std::vector<MethodResult>& results, std::string_view mode) {
    for (const auto& r : results) {
      const auto s = summarize(r, cfg.skip_transient);
      const std::string prefix = std::string(mode) + "," + std::string(method_name(r.method)) + ",";
      write_summary_row(o, prefix, "agent1", s.first);
      if (cfg.world.agents > 1) write_summary_row(o, prefix, "others", s.others);
      const auto all = summarize_group(r.series, 0, cfg.world.agents - 1, cfg.skip_transient);
      std::printf("%-11s %-9s %12.4g %12.4g\n", std::string(mode).c_str(),
                  std::string(method_name(r.method)).c_str(), all.rmse[0], all.std[0]);
    }
  };
  emit(cmp.baseline, "concurrent");
  emit(cmp.variant, "sequential");
  return 0;
}

int cmd_bench(const ExperimentConfig& cfg, const fs::path& out) {
  WorldConfig w = cfg.world;
  w.segments = bench_profile();
  RunOptions opt;
  opt.t_a = w.t_a;
  opt.update_mode = cfg.update_mode;
  const auto points = run_benchmark(w, cfg.bench_sizes, opt);
  auto o = open_out(out / "bench.csv");
  o << "agents,dcl_seconds,ccl_seconds\n";
  std::vector<double> x, dcl, ccl;
  std::printf("%8s %12s %12s\n", "agents", "DCL[s]", "CCL[s]");
  for (const auto& p : points) {
    o << p.agents << ',' << format_double(p.dcl_seconds) << ',' << format_double(p.ccl_seconds)
      << '\n';
    std::printf("%8d %12.4f %12.4f\n", p.agents, p.dcl_seconds, p.ccl_seconds);
    x.push_back(p.agents);
    dcl.push_back(p.dcl_seconds);
    ccl.push_back(p.ccl_seconds);
  }
  if (points.size() >= 2) {
    const double sd = loglog_slope(x, dcl);
    const double sc = loglog_slope(x, ccl);
    auto s = open_out(out / "bench_slopes.csv");
    s << "method,slope\nDCL," << format_double(sd) << "\nCCL," << format_double(sc) << '\n';
    std::printf("log-log slope: DCL %.3f, CCL %.3f\n", sd, sc);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Range-based cooperative localization workbench"};
  app.require_subcommand(1);
  app.fallthrough();
  CliArgs args;
  app.add_option("--config", args.config, "Scenario file");
  app.add_option("--seed", args.seed, "Base seed");
  app.add_option("--methods", args.methods, "Comma-separated: NCL,EKF,CI-trace,CI-det,WCI");
  app.add_option("--out", args.out, "Output directory")->capture_default_str();
  app.add_option("--runs", args.runs, "Monte Carlo runs");
  app.add_option("--skip-transient", args.skip_transient, "Seconds excluded from averages");
  app.add_option("--update-mode", args.update_mode, "concurrent or sequential");

  auto* run = app.add_subcommand("run", "Monte Carlo runs of every requested method");
  auto* sweep = app.add_subcommand("sweep-ta", "WCI over the configured T_a values");
  auto* robust = app.add_subcommand("robustness", "Packet loss / offline scenario vs baseline");
  auto* bench = app.add_subcommand("bench", "DCL and CCL processing time vs swarm size");
  auto* mode = app.add_subcommand("update-mode", "Concurrent vs sequential updates");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    const ExperimentConfig cfg = resolve(args);
    const fs::path out = args.out;
    if (run->parsed()) return cmd_run(cfg, out);
    if (sweep->parsed()) return cmd_sweep_ta(cfg, out);
    if (robust->parsed()) return cmd_robustness(cfg, out);
    if (bench->parsed()) return cmd_bench(cfg, out);
    if (mode->parsed()) return cmd_update_mode(cfg, out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const SingularCovariance& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const DegenerateGeometry& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
