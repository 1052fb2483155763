#pragma once

// Regular Kalman filter iteration, two-point initialization, NIS and the
// slip variant that re-initializes on a negative horizontal-velocity spike.
//
// Filter states are values: every step takes a state and returns a new one.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include "slipkf/errors.hpp"
#include "slipkf/model.hpp"

namespace slipkf {

struct FilterState {
  Vec4 x_hat = Vec4::Zero();
  Mat4 p = Mat4::Identity();
  /// Number of steps taken since initialization.
  std::uint64_t k = 0;
  /// Step index of the most recent (re)initialization; drives the refractory window.
  std::uint64_t last_reset_k = 0;

  StateVector estimate() const { return StateVector::from_vec(x_hat); }
};

/// Innovation quantities of a regular step; absent on slip resets.
struct Innovation {
  Vec2 predicted_measurement = Vec2::Zero();
  Vec2 residual = Vec2::Zero();
  Mat2 cov = Mat2::Zero();
  double nis = 0.0;
};

struct StepOutput {
  FilterState state;
  std::optional<Innovation> innovation;
  bool reset = false;
};

namespace detail {

inline constexpr double kDeterminantFloor = 1e-300;
inline constexpr double kMaxConditionNumber = 1e12;

// Closed-form inverse of a symmetric 2x2 innovation covariance. Rejects
// non-PD or badly conditioned matrices as filter divergence.
inline Mat2 invert_innovation_cov(const Mat2& s) {
  if (!s.allFinite()) throw Error(ErrorKind::kFilterDivergence, "innovation covariance is not finite");
  const double a = s(0, 0);
  const double b = 0.5 * (s(0, 1) + s(1, 0));
  const double d = s(1, 1);
  const double det = a * d - b * b;
  if (!(a > 0.0) || !(det > kDeterminantFloor)) {
    throw Error(ErrorKind::kFilterDivergence, "innovation covariance is not positive definite");
  }
  // Eigenvalues of a symmetric 2x2: mean +- radius.
  const double mean = 0.5 * (a + d);
  const double radius = std::hypot(0.5 * (a - d), b);
  const double lo = mean - radius;
  const double hi = mean + radius;
  if (!(lo > 0.0) || hi / lo > kMaxConditionNumber) {
    throw Error(ErrorKind::kFilterDivergence, "innovation covariance is numerically singular");
  }
  Mat2 inv;
  inv << d / det, -b / det, -b / det, a / det;
  return inv;
}

inline void require_finite(const FilterState& state) {
  if (!state.x_hat.allFinite() || !state.p.allFinite()) {
    throw Error(ErrorKind::kInvalidState, "filter state contains non-finite values");
  }
}

inline void require_finite(const Measurement& z) {
  if (!std::isfinite(z.z_x) || !std::isfinite(z.z_y)) {
    throw Error(ErrorKind::kInvalidState, "measurement contains non-finite values");
  }
}

}  // namespace detail

/// Initial estimate from the first two measurements: position from the
/// second, velocity from their finite difference, covariance gamma * I.
inline FilterState two_point_init(const Measurement& z1, const Measurement& z2, double delta_t, double gamma) {
  if (!(std::isfinite(delta_t) && delta_t > 0.0)) throw Error(ErrorKind::kInvalidConfig, "delta_t must be > 0");
  if (!(std::isfinite(gamma) && gamma > 0.0)) throw Error(ErrorKind::kInvalidConfig, "gamma must be > 0");
  detail::require_finite(z1);
  detail::require_finite(z2);

  FilterState state;
  state.x_hat << z2.z_x, (z2.z_x - z1.z_x) / delta_t, z2.z_y, (z2.z_y - z1.z_y) / delta_t;
  state.p = gamma * Mat4::Identity();
  return state;
}

inline double nis(const Vec2& innovation, const Mat2& innovation_cov) {
  return innovation.dot(detail::invert_innovation_cov(innovation_cov) * innovation);
}

inline StepOutput kf_step(const FilterState& state, const Measurement& z, const ProcessModel& process,
                          const MeasurementModel& meas) {
  detail::require_finite(state);
  detail::require_finite(z);

  const Vec4 x_pred = process.f * state.x_hat;
  const Mat4 p_pred = process.f * state.p * process.f.transpose() + process.q;
  const Mat2 s = meas.r + meas.h * p_pred * meas.h.transpose();
  const Mat2 s_inv = detail::invert_innovation_cov(s);
  const Vec2 z_pred = meas.h * x_pred;
  const Vec2 residual = z.z() - z_pred;
  const Eigen::Matrix<double, 4, 2> gain = p_pred * meas.h.transpose() * s_inv;

  StepOutput out;
  out.state.x_hat = x_pred + gain * residual;
  const Mat4 p_post = p_pred - gain * s * gain.transpose();
  out.state.p = 0.5 * (p_post + p_post.transpose());
  out.state.k = state.k + 1;
  out.state.last_reset_k = state.last_reset_k;
  out.innovation = Innovation{z_pred, residual, s, residual.dot(s_inv * residual)};
  out.reset = false;

  if (!out.state.x_hat.allFinite() || !out.state.p.allFinite()) {
    throw Error(ErrorKind::kFilterDivergence, "posterior is not finite");
  }
  return out;
}

/// True when the slip trigger is armed and the current velocity estimate is
/// strictly below the threshold.
inline bool slip_triggered(const FilterState& state, const ModelConfig& config) {
  const bool in_refractory = state.k - state.last_reset_k < config.refractory_samples;
  return !in_refractory && state.x_hat(idx::kXDot) < config.slip_threshold;
}

/// One slip-filter iteration. When the current x velocity estimate is below
/// the slip threshold the whole iteration is replaced by a re-initialization
/// at the new measurement: position from z, x velocity set to the typical
/// reading rate, y velocity carried over, covariance reset to gamma * I.
inline StepOutput slip_kf_step(const FilterState& state, const Measurement& z, const ProcessModel& process,
                               const MeasurementModel& meas, const ModelConfig& config) {
  detail::require_finite(state);
  if (!slip_triggered(state, config)) return kf_step(state, z, process, meas);

  detail::require_finite(z);
  StepOutput out;
  out.state.x_hat << z.z_x, config.reinit_x_velocity, z.z_y, state.x_hat(idx::kYDot);
  out.state.p = config.gamma * Mat4::Identity();
  out.state.k = state.k + 1;
  out.state.last_reset_k = out.state.k;
  out.reset = true;
  return out;
}

}  // namespace slipkf
