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

// Acceptance suite. Prints one PASS/FAIL line per criterion followed by the
// measured quantities, and exits non-zero if any criterion fails. Pass
// criterion numbers as arguments to run a subset.

#include "wcicl/config.hpp"
#include "wcicl/experiment.hpp"

#include "support/oracles.hpp"

#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace wcicl {
namespace {

class Report {
 public:
  void check(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4))) {
    char buf[512];
    va_list args;
    va_start(args, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, args);
    va_end(args);
    lines_.push_back(std::string(ok ? "    ok    " : "    FAIL  ") + buf);
    pass_ = pass_ && ok;
  }
  void note(const std::string& s) { lines_.push_back("          " + s); }
  bool pass() const { return pass_; }
  const std::vector<std::string>& lines() const { return lines_; }

 private:
  bool pass_ = true;
  std::vector<std::string> lines_;
};

struct Criterion {
  int id;
  const char* name;
  std::function<void(Report&)> run;
};

GaussianEstimate zero_mean(const MatX& p) { return {VecX::Zero(p.rows()), p}; }

MatX diag(std::initializer_list<double> v) {
  VecX d(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) d(i++) = x;
  return d.asDiagonal();
}

MonteCarloSpec default_spec(int runs, std::vector<Method> methods) {
  const ExperimentConfig cfg;
  MonteCarloSpec s;
  s.world = cfg.world;
  s.world.runs = runs;
  s.methods = std::move(methods);
  s.options.t_a = cfg.world.t_a;
  s.options.loss_policy = cfg.loss_policy;
  s.workers = 1;
  return s;
}

const MethodResult& find(const std::vector<MethodResult>& rs, Method m) {
  for (const auto& r : rs) {
    if (r.method == m) return r;
  }
  throw std::logic_error("method missing from results");
}

// All agents, report units.
GroupSummary whole_swarm(const MethodResult& r) {
  return summarize_group(r.series, 0, r.series.agents - 1, 0.0);
}

constexpr int kPosC = static_cast<int>(Component::Position);
constexpr int kAttC = static_cast<int>(Component::Attitude);

// ---------------------------------------------------------------------------

void scale_imbalance(Report& rep) {
  const MatX p1 = diag({1.0, 0.01});
  const MatX p2 = diag({1.09, 0.001});
  auto fuse = [&](double w) { return ci_fuse(zero_mean(p1), zero_mean(p2), FusionWeight(w)).cov; };
  const double w_tr = optimize_omega(TraceCriterion{}, fuse).value();
  const double w_det = optimize_omega(DeterminantCriterion{}, fuse).value();
  const double rel = std::abs(fuse(w_tr).trace() - p1.trace()) / p1.trace();
  rep.check(rel < 0.01, "trace criterion: omega %.5f, |tr(P) - tr(P1)| / tr(P1) = %.5f < 0.01",
            w_tr, rel);
  rep.check(w_det < 0.5, "determinant criterion: omega %.5f < 0.5", w_det);
}

void correlation_mismatch(Report& rep) {
  const MatX p1 = (MatX(2, 2) << 1.0, 0.008, 0.008, 0.0001).finished();
  const MatX h = (MatX(1, 2) << 1.0, 0.0).finished();
  const MatX p2 = MatX::Constant(1, 1, 0.25);
  auto fuse = [&](double w) {
    return ci_fuse_partial(zero_mean(p1), h, zero_mean(p2), FusionWeight(w)).cov;
  };
  const FusionWeight w = optimize_omega(TraceCriterion{}, fuse);
  const double nominal = correlation(fuse(w.value()), 0, 1);
  const double actual =
      correlation(actual_fused_covariance(p1, p2, MatX::Zero(2, 1), p1, p2, w, h), 0, 1);
  rep.note("trace-optimal omega " + std::to_string(w.value()));
  rep.check(std::abs(nominal - 0.08) <= 0.02, "nominal correlation %.4f in 0.08 +- 0.02", nominal);
  rep.check(std::abs(actual - 0.55) <= 0.05, "actual correlation %.4f in 0.55 +- 0.05", actual);
}

void consistency(Report& rep) {
  std::mt19937_64 rng(20261016);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> dim(2, 15);
  double worst = std::numeric_limits<double>::infinity();
  int failures = 0;
  for (int k = 0; k < 1000; ++k) {
    const Eigen::Index n = dim(rng);
    const MatX p1 = oracle::random_spd(n, rng, 1e-3, 10.0);
    const MatX p2 = oracle::random_spd(n, rng, 1e-3, 10.0);
    const MatX p12 = oracle::admissible_cross_covariance(p1, p2, u(rng), rng);
    FusionWeight w(kOmegaMin);
    if (k % 2 == 0) {
      w = FusionWeight(u(rng));
    } else {
      // WCI weight from a random PSD (possibly rank-deficient) weighting.
      const Eigen::Index rank = 1 + static_cast<Eigen::Index>(u(rng) * static_cast<double>(n));
      std::normal_distribution<double> g(0.0, 1.0);
      MatX a(std::min(rank, n), n);
      for (Eigen::Index i = 0; i < a.size(); ++i) a(i) = g(rng);
      const MatX wmat = a.transpose() * a;
      auto fuse = [&](double x) { return ci_fuse(zero_mean(p1), zero_mean(p2), FusionWeight(x)).cov; };
      w = optimize_omega(WeightedTraceCriterion{wmat}, fuse);
    }
    const MatX nominal = ci_fuse(zero_mean(p1), zero_mean(p2), w).cov;
    const MatX actual = actual_fused_covariance(p1, p2, p12, p1, p2, w);
    const double m = linalg::min_eigenvalue(MatX(nominal - actual));
    worst = std::min(worst, m);
    if (m < -1e-9) ++failures;
  }
  rep.check(failures == 0, "min eigenvalue of P_nominal - P_actual over 1000 instances: %.3e",
            worst);
}

void weighted_trace_ordering(Report& rep) {
  std::mt19937_64 rng(20261017);
  std::uniform_int_distribution<int> dim(2, 15);
  int bad = 0;
  double smallest = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 1000; ++k) {
    const Eigen::Index n = dim(rng);
    const MatX w = oracle::random_spd(n, rng, 1e-3, 10.0);
    const MatX p2 = oracle::random_spd(n, rng);
    const MatX p1 = p2 + oracle::random_spd(n, rng, 1e-6, 1.0);
    const double t = (w * (p1 - p2)).trace();
    smallest = std::min(smallest, t);
    if (!(t > 0.0)) ++bad;
  }
  rep.check(bad == 0, "1000 ordered pairs: min tr(W (P1 - P2)) = %.3e > 0", smallest);

  // Indefinite W with a direction x of non-positive curvature: the gap x x^T
  // is then not ranked as an increase.
  int counter = 0;
  double largest = -std::numeric_limits<double>::infinity();
  for (int k = 0; k < 100; ++k) {
    const Eigen::Index n = dim(rng);
    std::normal_distribution<double> g(0.0, 1.0);
    VecX x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = g(rng);
    x.normalize();
    const MatX base = oracle::random_spd(n, rng);
    const double curv = x.dot(base * x);
    const MatX w = base - (curv + 0.5 + 0.5 * (k % 7)) * x * x.transpose();
    const double t = (w * x * x.transpose()).trace();
    largest = std::max(largest, t);
    if (t <= 0.0) ++counter;
  }
  rep.check(counter == 100, "100 indefinite-W counterexamples: max tr(W x x^T) = %.3e <= 0",
            largest);
}

void table_ordering(Report& rep) {
  const auto results = run_monte_carlo(
      default_spec(5, {Method::EKF, Method::CITrace, Method::CIDet, Method::WCI}));
  const auto ekf = summarize(find(results, Method::EKF));
  const auto trace = summarize(find(results, Method::CITrace));
  const auto det = summarize(find(results, Method::CIDet));
  const auto wci = summarize(find(results, Method::WCI));
  const std::array<const MethodSummary*, 3> dcl = {&trace, &det, &wci};

  for (const auto* s : dcl) {
    const std::string name(method_name(s->method));
    rep.check(ekf.first.rmse[kPosC] <= s->first.rmse[kPosC],
              "agent 1 position RMSE: EKF %.4g <= %s %.4g m", ekf.first.rmse[kPosC], name.c_str(),
              s->first.rmse[kPosC]);
    rep.check(ekf.others.rmse[kPosC] <= s->others.rmse[kPosC],
              "agents 2-8 position RMSE: EKF %.4g <= %s %.4g m", ekf.others.rmse[kPosC],
              name.c_str(), s->others.rmse[kPosC]);
  }
  const double att_ratio = trace.first.rmse[kAttC] / wci.first.rmse[kAttC];
  rep.check(att_ratio > 3.0, "agent 1 attitude RMSE CI-trace / WCI = %.4g / %.4g = %.3f > 3",
            trace.first.rmse[kAttC], wci.first.rmse[kAttC], att_ratio);
  const double pos1 = det.first.rmse[kPosC] / wci.first.rmse[kPosC];
  const double pos2 = det.others.rmse[kPosC] / wci.others.rmse[kPosC];
  rep.check(pos1 > 1.5, "agent 1 position RMSE CI-det / WCI = %.4g / %.4g = %.3f > 1.5",
            det.first.rmse[kPosC], wci.first.rmse[kPosC], pos1);
  rep.check(pos2 > 1.5, "agents 2-8 position RMSE CI-det / WCI = %.4g / %.4g = %.3f > 1.5",
            det.others.rmse[kPosC], wci.others.rmse[kPosC], pos2);
  for (auto c : kAllComponents) {
    const int k = static_cast<int>(c);
    rep.check(wci.first.nees[k] < 3.0, "WCI agent 1 %s NEES %.4g < 3",
              std::string(component_name(c)).c_str(), wci.first.nees[k]);
  }
  // Conservatism: geometric mean of STD / RMSE over components and groups.
  for (const auto* s : dcl) {
    double log_sum = 0.0;
    int count = 0;
    for (const GroupSummary* g : {&s->first, &s->others}) {
      for (int k = 0; k < 5; ++k) {
        log_sum += std::log(g->std[k] / g->rmse[k]);
        ++count;
      }
    }
    const double gm = std::exp(log_sum / count);
    rep.check(gm >= 1.0, "%s mean STD / RMSE (geometric, 10 entries) = %.3f >= 1",
              std::string(method_name(s->method)).c_str(), gm);
  }
}

void horizon_sweep(Report& rep) {
  const std::vector<double> ta = {1.0, 5.0, 20.0};
  const auto points = run_ta_sweep(default_spec(3, {Method::WCI}), ta);
  std::vector<double> pos;
  std::vector<double> att;
  for (const auto& p : points) {
    const auto g = whole_swarm(p.result);
    pos.push_back(g.std[kPosC]);
    att.push_back(g.std[kAttC]);
    char buf[160];
    std::snprintf(buf, sizeof buf, "T_a %4.1f s: position STD %.4g m, attitude STD %.4g deg",
                  p.t_a, g.std[kPosC], g.std[kAttC]);
    rep.note(buf);
  }
  for (std::size_t i = 1; i < ta.size(); ++i) {
    rep.check(pos[i] >= pos[i - 1], "position STD non-decreasing from T_a %.0f to %.0f",
              ta[i - 1], ta[i]);
    rep.check(att[i] <= att[i - 1], "attitude STD non-increasing from T_a %.0f to %.0f",
              ta[i - 1], ta[i]);
  }
}

void update_modes(Report& rep) {
  const auto cmp = run_update_modes(default_spec(3, {Method::WCI, Method::EKF}));
  const auto wc = whole_swarm(find(cmp.baseline, Method::WCI));
  const auto ws = whole_swarm(find(cmp.variant, Method::WCI));
  rep.check(wc.std[kPosC] < ws.std[kPosC], "WCI position STD concurrent %.4g < sequential %.4g m",
            wc.std[kPosC], ws.std[kPosC]);
  const auto ec = whole_swarm(find(cmp.baseline, Method::EKF));
  const auto es = whole_swarm(find(cmp.variant, Method::EKF));
  const double rel = std::abs(ec.rmse[kPosC] - es.rmse[kPosC]) / ec.rmse[kPosC];
  rep.check(rel < 0.01, "EKF position RMSE concurrent %.5g vs sequential %.5g m: %.3f%% < 1%%",
            ec.rmse[kPosC], es.rmse[kPosC], 100.0 * rel);
}

void robustness(Report& rep) {
  MonteCarloSpec spec = default_spec(3, {Method::CITrace, Method::CIDet, Method::WCI, Method::EKF});
  spec.events = ExperimentConfig{}.events;
  const auto cmp = run_robustness(spec);
  const int last = spec.world.agents - 1;
  auto window = [&](const std::vector<MethodResult>& rs, Method m, double t0, double t1) {
    const auto& r = find(rs, m);
    return group_average(r.series, r.series.rmse, 1, last, Component::Position, t0, t1);
  };
  for (Method m : {Method::CITrace, Method::CIDet, Method::WCI}) {
    const double b = window(cmp.baseline, m, 30.0, 90.0);
    const double e = window(cmp.variant, m, 30.0, 90.0);
    rep.check(std::abs(e / b - 1.0) <= 0.2,
              "%s agents 2-8 position RMSE 30-90 s: events %.4g vs baseline %.4g m (ratio %.3f)",
              std::string(method_name(m)).c_str(), e, b, e / b);
  }
  const double b = window(cmp.baseline, Method::EKF, 30.0, 120.0);
  const double e = window(cmp.variant, Method::EKF, 30.0, 120.0);
  rep.check(e > 1.2 * b, "EKF agents 2-8 position RMSE 30-120 s: events %.4g vs baseline %.4g m "
            "(ratio %.3f > 1.2)", e, b, e / b);
}

void complexity(Report& rep) {
  WorldConfig cfg;
  cfg.segments = bench_profile();
  const std::vector<int> sizes = {4, 8, 16, 32};
  RunOptions opt;
  opt.t_a = cfg.t_a;
  const auto points = run_benchmark(cfg, sizes, opt);
  std::vector<double> x, dcl, ccl;
  for (const auto& p : points) {
    x.push_back(p.agents);
    dcl.push_back(p.dcl_seconds);
    ccl.push_back(p.ccl_seconds);
    char buf[120];
    std::snprintf(buf, sizeof buf, "N = %2d: DCL %.3f s, CCL %.3f s", p.agents, p.dcl_seconds,
                  p.ccl_seconds);
    rep.note(buf);
  }
  const double sd = loglog_slope(x, dcl);
  const double sc = loglog_slope(x, ccl);
  rep.check(sd < 1.3, "DCL log-log slope %.3f < 1.3", sd);
  rep.check(sc > 2.0, "CCL log-log slope %.3f > 2.0", sc);
}

double max_abs(const MatX& m) { return m.cwiseAbs().maxCoeff(); }

void numerical_hygiene(Report& rep) {
  std::mt19937_64 rng(20261018);
  double worst_f = 0.0, worst_h = 0.0, worst_ha = 0.0, worst_g = 0.0;
  for (int k = 0; k < 50; ++k) {
    NominalState x;
    x.p = oracle::random_vec3(rng, 20.0);
    x.v = oracle::random_vec3(rng, 2.0);
    x.q = UnitQuaternion(oracle::random_quaternion(rng));
    x.bg = oracle::random_vec3(rng, 1e-4);
    x.ba = oracle::random_vec3(rng, 1e-2);
    const Vec3 f_true = Vec3(0.0, 0.0, kStandardGravity) + oracle::random_vec3(rng, 2.0);
    const Vec3 w_true = oracle::random_vec3(rng, 0.3);
    const Mat15 fa = error_dynamics(x, f_true + x.ba);
    worst_f = std::max(worst_f, max_abs(oracle::numerical_error_dynamics(x, f_true, w_true) - fa) /
                                    max_abs(fa));

    const Vec3 lever = oracle::random_vec3(rng, 0.3);
    const Vec3 anchor = oracle::random_vec3(rng, 30.0);
    const RowVec15 ha = anchor_observation_row(x, LeverArm{lever}, anchor).h;
    worst_ha = std::max(worst_ha,
                        max_abs(oracle::numerical_anchor_row(x, lever, anchor) - ha) / max_abs(ha));

    NominalState xj;
    xj.p = oracle::random_vec3(rng, 20.0);
    xj.q = UnitQuaternion(oracle::random_quaternion(rng));
    NeighborInfo info;
    info.agent_id = 1;
    info.position = xj.p;
    info.attitude = xj.q;
    const auto row = agent_observation_row(x, info, LeverArm{lever});
    const auto num = oracle::numerical_agent_row(x, xj, lever);
    worst_h = std::max(worst_h, max_abs(num.h - row.h) / max_abs(row.h));
    worst_g = std::max(worst_g, max_abs(num.g - row.g) / max_abs(row.g));
  }
  rep.check(worst_f <= 1e-4, "INS F vs finite differences: max relative error %.2e", worst_f);
  rep.check(worst_ha <= 1e-4, "anchor H vs finite differences: max relative error %.2e", worst_ha);
  rep.check(worst_h <= 1e-4, "agent H vs finite differences: max relative error %.2e", worst_h);
  rep.check(worst_g <= 1e-4, "agent G vs finite differences: max relative error %.2e", worst_g);

  const World w = make_world(WorldConfig{}, 0);
  double closure = 0.0;
  for (const auto& tr : w.truth) {
    NominalState x = tr.states.front();
    for (std::size_t k = 0; k < tr.steps(); ++k) {
      x = mechanize(x, tr.imu[k]);
      closure = std::max(closure, (x.p - tr.states[k + 1].p).norm());
    }
  }
  rep.check(closure < 1e-3, "truth/IMU closure over %.0f s, all agents: %.2e m < 1e-3",
            w.truth.front().steps() / w.config.imu_rate, closure);

  auto hash = [](const std::vector<MethodResult>& rs) {
    std::ostringstream o;
    o << kTimeseriesHeader << '\n';
    for (const auto& r : rs) write_timeseries_rows(o, r.series, method_name(r.method));
    return oracle::fnv1a(o.str());
  };
  MonteCarloSpec spec = default_spec(2, {kAllMethods.begin(), kAllMethods.end()});
  const auto h1 = hash(run_monte_carlo(spec));
  spec.workers = 2;
  const auto h2 = hash(run_monte_carlo(spec));
  rep.check(h1 == h2, "same seed, 1 vs 2 workers: CSV hash %016llx vs %016llx",
            static_cast<unsigned long long>(h1), static_cast<unsigned long long>(h2));
}

}  // namespace
}  // namespace wcicl

int main(int argc, char** argv) {
  using namespace wcicl;
  const std::vector<Criterion> all = {
      {1, "scale imbalance fools the trace criterion", scale_imbalance},
      {2, "nominal vs actual correlation after CI", correlation_mismatch},
      {3, "CI/WCI consistency Monte Carlo", consistency},
      {4, "weighted-trace ordering property", weighted_trace_ordering},
      {5, "method ordering on the default scenario", table_ordering},
      {6, "WCI horizon sweep trend", horizon_sweep},
      {7, "concurrent vs sequential updates", update_modes},
      {8, "robustness to packet loss and dropout", robustness},
      {9, "complexity scaling", complexity},
      {10, "numerical hygiene", numerical_hygiene},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failed = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.contains(c.id)) continue;
    Report rep;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(rep);
    } catch (const std::exception& e) {
      rep.check(false, "exception: %s", e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] %d %s (%.1f s)\n", rep.pass() ? "PASS" : "FAIL", c.id, c.name, secs);
    for (const auto& l : rep.lines()) std::printf("%s\n", l.c_str());
    std::fflush(stdout);
    if (!rep.pass()) ++failed;
  }
  std::printf("%d criteria failed\n", failed);
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
