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

#ifndef WCICL_CI_FUSION_HPP_
#define WCICL_CI_FUSION_HPP_

#include "wcicl/common.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <type_traits>
#include <utility>
#include <variant>

namespace wcicl {

struct GaussianEstimate {
  VecX mean;
  MatX cov;  // nominal covariance
};

/// Convex-combination weight of covariance intersection, omega in [0, 1].
class FusionWeight {
 public:
  explicit FusionWeight(double omega) : omega_(omega) {
    if (!(omega >= 0.0 && omega <= 1.0)) {
      throw std::invalid_argument("FusionWeight: omega must lie in [0, 1]");
    }
  }
  double value() const { return omega_; }

 private:
  double omega_;
};

struct TraceCriterion {};
struct DeterminantCriterion {};
struct WeightedTraceCriterion {
  MatX weight;  // symmetric PSD
};
using CostCriterion = std::variant<TraceCriterion, DeterminantCriterion, WeightedTraceCriterion>;

/// Search domain for omega. The KF-style form divides by omega and 1 - omega,
/// so the closed boundaries are left to the caller.
inline constexpr double kOmegaMin = 1e-6;
inline constexpr double kOmegaMax = 1.0 - 1e-6;

// ---------------------------------------------------------------------------
// Fusion rules

/// Full-observation covariance intersection.
inline GaussianEstimate ci_fuse(const GaussianEstimate& e1, const GaussianEstimate& e2,
                                FusionWeight w) {
  if (e1.mean.size() != e2.mean.size() || e1.cov.rows() != e2.cov.rows()) {
    throw std::invalid_argument("ci_fuse: dimension mismatch");
  }
  const double omega = w.value();
  if (omega == 1.0) {
    return e1;
  }
  if (omega == 0.0) {
    return e2;
  }
  const MatX i1 = linalg::spd_inverse(e1.cov, "P1");
  const MatX i2 = linalg::spd_inverse(e2.cov, "P2");
  GaussianEstimate out;
  out.cov = linalg::spd_inverse(omega * i1 + (1.0 - omega) * i2, "fused information");
  out.mean = out.cov * (omega * i1 * e1.mean + (1.0 - omega) * i2 * e2.mean);
  return out;
}

/// Covariance intersection where the second source observes H x only.
inline GaussianEstimate ci_fuse_partial(const GaussianEstimate& e1, const MatX& h,
                                        const GaussianEstimate& e2, FusionWeight w) {
  if (h.cols() != e1.mean.size() || h.rows() != e2.mean.size()) {
    throw std::invalid_argument("ci_fuse_partial: dimension mismatch");
  }
  const double omega = w.value();
  if (omega == 1.0) {
    return e1;
  }
  const MatX i2 = linalg::spd_inverse(e2.cov, "P2");
  const MatX ht_i2 = h.transpose() * i2;
  MatX info = (1.0 - omega) * ht_i2 * h;
  VecX eta = (1.0 - omega) * ht_i2 * e2.mean;
  if (omega > 0.0) {
    const MatX i1 = linalg::spd_inverse(e1.cov, "P1");
    info += omega * i1;
    eta += omega * i1 * e1.mean;
  }
  GaussianEstimate out;
  out.cov = linalg::spd_inverse(info, "fused information");
  out.mean = out.cov * eta;
  return out;
}

struct KfStyleUpdate {
  VecX dx;
  MatX p_post;
  MatX gain;
};

/// Kalman-gain form of partial-observation covariance intersection: the prior
/// is inflated by 1/omega and the measurement noise by 1/(1 - omega).
inline KfStyleUpdate kf_style_ci_update(const MatX& p_prior, const MatX& h, const MatX& r_nom,
                                        const VecX& z, FusionWeight w) {
  const double omega = w.value();
  if (!(omega > 0.0 && omega < 1.0)) {
    throw std::invalid_argument("kf_style_ci_update: omega must lie in (0, 1)");
  }
  const MatX p1 = p_prior / omega;
  const MatX p1_ht = p1 * h.transpose();
  const MatX s = h * p1_ht + r_nom / (1.0 - omega);
  KfStyleUpdate out;
  out.gain = p1_ht * linalg::spd_inverse(s, "innovation covariance");
  out.dx = out.gain * z;
  out.p_post = p1 - out.gain * p1_ht.transpose();
  linalg::symmetrize(out.p_post);
  return out;
}

// ---------------------------------------------------------------------------
// Cost criteria

inline double evaluate_cost(const CostCriterion& c, const MatX& p) {
  return std::visit(
      [&p](const auto& crit) -> double {
        using T = std::decay_t<decltype(crit)>;
        if constexpr (std::is_same_v<T, TraceCriterion>) {
          return p.trace();
        } else if constexpr (std::is_same_v<T, DeterminantCriterion>) {
          return p.determinant();
        } else {
          return (crit.weight * p).trace();
        }
      },
      c);
}

/// Order-preserving surrogate of evaluate_cost used for minimization: the
/// determinant is replaced by its logarithm so tiny bias variances do not
/// underflow. Returns NaN when the determinant is not positive.
inline double objective_value(const CostCriterion& c, const MatX& p) {
  if (std::holds_alternative<DeterminantCriterion>(c)) {
    const Eigen::LLT<MatX> llt(linalg::symmetrized(p));
    if (llt.info() != Eigen::Success) {
      return std::numeric_limits<double>::quiet_NaN();
    }
    return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  }
  return evaluate_cost(c, p);
}

// ---------------------------------------------------------------------------
// Weight optimization

namespace detail {

inline bool better_or_tied(double candidate, double incumbent) {
  // Ties go to the candidate, which is always the larger omega in our scans.
  const double tol = 1e-12 * std::max(1.0, std::abs(incumbent));
  return candidate <= incumbent + tol;
}

template <typename CostFn>
double safe_cost(CostFn& cost, double omega) {
  const double v = cost(omega);
  return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

}  // namespace detail

inline constexpr int kOmegaGridPoints = 101;
inline constexpr double kOmegaTolerance = 1e-5;

/// Minimizes a scalar cost over omega in [kOmegaMin, kOmegaMax]: a 101-point
/// grid locates the basin, golden-section search refines it to 1e-5. Non-finite
/// costs are excluded; ties resolve toward the larger omega.
template <typename CostFn>
FusionWeight minimize_weight(CostFn&& cost) {
  std::array<double, kOmegaGridPoints> grid{};
  std::array<double, kOmegaGridPoints> values{};
  const double step = (kOmegaMax - kOmegaMin) / (kOmegaGridPoints - 1);
  int best = -1;
  for (int k = 0; k < kOmegaGridPoints; ++k) {
    grid[k] = k == kOmegaGridPoints - 1 ? kOmegaMax : kOmegaMin + k * step;
    values[k] = detail::safe_cost(cost, grid[k]);
    if (std::isfinite(values[k]) && (best < 0 || detail::better_or_tied(values[k], values[best]))) {
      best = k;
    }
  }
  if (best < 0) {
    return FusionWeight(kOmegaMax);
  }

  double a = grid[std::max(best - 1, 0)];
  double b = grid[std::min(best + 1, kOmegaGridPoints - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = detail::safe_cost(cost, c);
  double fd = detail::safe_cost(cost, d);
  while (b - a > kOmegaTolerance) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = detail::safe_cost(cost, c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = detail::safe_cost(cost, d);
    }
  }
  const double refined = 0.5 * (a + b);
  const double refined_cost = detail::safe_cost(cost, refined);

  double omega = grid[best];
  double omega_cost = values[best];
  if (refined_cost < omega_cost ||
      (refined > omega && detail::better_or_tied(refined_cost, omega_cost))) {
    omega = refined;
    omega_cost = refined_cost;
  }
  return FusionWeight(omega);
}

/// omega* = argmin cost(P(omega)) for a fusion rule given as a closure.
template <typename FuseFn>
FusionWeight optimize_omega(const CostCriterion& criterion, FuseFn&& fuse) {
  return minimize_weight([&](double omega) { return objective_value(criterion, fuse(omega)); });
}

/// Cost of the KF-style CI update as a function of omega, in information form so
/// that construction is O(m n^2 + n^3) and each evaluation O(n) for m rows.
/// With P = L L^T, J = H^T R^-1 H and L^T J L = V diag(lambda) V^T:
///   P(omega)         = L V diag(1 / (omega + (1-omega) lambda_k)) V^T L^T
///   tr(W P(omega))   = sum_k c_k / (omega + (1-omega) lambda_k),  c_k = (V^T L^T W L V)_kk
///   log det P(omega) = log det P - sum_k log(omega + (1-omega) lambda_k)
class CorrelatedUpdateCost {
 public:
  CorrelatedUpdateCost(const MatX& p, const MatX& h, const MatX& r, const CostCriterion& criterion)
      : determinant_(std::holds_alternative<DeterminantCriterion>(criterion)) {
    if (h.cols() != p.rows() || h.rows() != r.rows()) {
      throw std::invalid_argument("CorrelatedUpdateCost: dimension mismatch");
    }
    const Eigen::LLT<MatX> p_llt(linalg::symmetrized(p));
    if (p_llt.info() != Eigen::Success) {
      throw SingularCovariance("prior covariance is not positive definite");
    }
    // H^T R^-1, cheap when R is diagonal (the usual stacked-range case).
    if (r.isDiagonal(0.0)) {
      const VecX d = r.diagonal();
      if (!(d.array() > 0.0).all()) {
        throw SingularCovariance("measurement covariance is not positive definite");
      }
      ht_rinv_ = h.transpose() * d.cwiseInverse().asDiagonal();
    } else {
      const Eigen::LLT<MatX> r_llt(linalg::symmetrized(r));
      if (r_llt.info() != Eigen::Success) {
        throw SingularCovariance("measurement covariance is not positive definite");
      }
      ht_rinv_ = r_llt.solve(h).transpose();
    }
    const MatX l = p_llt.matrixL();
    const MatX j = ht_rinv_ * h;
    const Eigen::SelfAdjointEigenSolver<MatX> es(linalg::symmetrized(MatX(l.transpose() * j * l)));
    lambda_ = es.eigenvalues().cwiseMax(0.0);
    m_ = l * es.eigenvectors();
    logdet_p_ = 2.0 * p_llt.matrixLLT().diagonal().array().log().sum();
    if (const auto* wt = std::get_if<WeightedTraceCriterion>(&criterion)) {
      c_ = (m_.transpose() * wt->weight * m_).diagonal();
    } else {
      c_ = m_.colwise().squaredNorm().transpose();
    }
  }

  double operator()(double omega) const {
    const VecX denom = omega + (1.0 - omega) * lambda_.array();
    if (determinant_) {
      return logdet_p_ - denom.array().log().sum();
    }
    return (c_.array() / denom.array()).sum();
  }

  /// The KF-style CI update at this omega, computed in information form; equal
  /// to kf_style_ci_update up to rounding.
  KfStyleUpdate update(double omega, const VecX& z) const {
    if (!(omega > 0.0 && omega < 1.0)) {
      throw std::invalid_argument("CorrelatedUpdateCost::update: omega must lie in (0, 1)");
    }
    const VecX scale = (omega + (1.0 - omega) * lambda_.array()).inverse();
    KfStyleUpdate out;
    out.p_post = m_ * scale.asDiagonal() * m_.transpose();
    linalg::symmetrize(out.p_post);
    out.gain = (1.0 - omega) * out.p_post * ht_rinv_;
    out.dx = out.gain * z;
    return out;
  }

 private:
  bool determinant_;
  double logdet_p_ = 0.0;
  MatX ht_rinv_;
  MatX m_;
  VecX lambda_;
  VecX c_;
};

// ---------------------------------------------------------------------------
// Analysis

/// Actual error covariance of a CI estimate built from nominal P1, P2 when the
/// true covariances are P1*, P2* and the true cross-covariance is P12*. The
/// second source observes H x; pass H = I for the full-observation case.
inline MatX actual_fused_covariance(const MatX& p1_star, const MatX& p2_star,
                                    const MatX& p12_star, const MatX& p1, const MatX& p2,
                                    FusionWeight w, const MatX& h) {
  const double omega = w.value();
  const Eigen::Index n = p1.rows();
  MatX a = MatX::Zero(n, n);
  MatX info = MatX::Zero(n, n);
  if (omega > 0.0) {
    const MatX i1 = linalg::spd_inverse(p1, "P1");
    a = omega * i1;
    info += a;
  }
  const MatX b = (1.0 - omega) * h.transpose() * linalg::spd_inverse(p2, "P2");
  info += b * h;
  const MatX p = linalg::spd_inverse(info, "fused information");
  const MatX inner = a * p1_star * a.transpose() + a * p12_star * b.transpose() +
                     b * p12_star.transpose() * a.transpose() + b * p2_star * b.transpose();
  MatX out = p * inner * p;
  linalg::symmetrize(out);
  return out;
}

inline MatX actual_fused_covariance(const MatX& p1_star, const MatX& p2_star,
                                    const MatX& p12_star, const MatX& p1, const MatX& p2,
                                    FusionWeight w) {
  return actual_fused_covariance(p1_star, p2_star, p12_star, p1, p2, w,
                                 MatX::Identity(p1.rows(), p1.cols()));
}

/// Correlation coefficient between components i and j of a covariance.
inline double correlation(const MatX& p, Eigen::Index i, Eigen::Index j) {
  return p(i, j) / std::sqrt(p(i, i) * p(j, j));
}

}  // namespace wcicl

#endif  // WCICL_CI_FUSION_HPP_
