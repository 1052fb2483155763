#pragma once

// Constant-velocity state-space model of reading eye-gaze.
//
// Coordinates are page units: x in page-widths (0 = left edge of the text
// region, 1 = right edge), y in page-heights (0 = top, increasing downward).
// The state is ordered [x, x_dot, y, y_dot] everywhere.

#include <cmath>
#include <cstddef>

#include <Eigen/Dense>

#include "slipkf/errors.hpp"

namespace slipkf {

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using Mat24 = Eigen::Matrix<double, 2, 4>;

namespace idx {
inline constexpr Eigen::Index kX = 0;
inline constexpr Eigen::Index kXDot = 1;
inline constexpr Eigen::Index kY = 2;
inline constexpr Eigen::Index kYDot = 3;
}  // namespace idx

struct StateVector {
  double x = 0.0;
  double x_dot = 0.0;
  double y = 0.0;
  double y_dot = 0.0;

  static StateVector from_vec(const Vec4& v) { return {v(idx::kX), v(idx::kXDot), v(idx::kY), v(idx::kYDot)}; }
  Vec4 vec() const { return Vec4(x, x_dot, y, y_dot); }
  bool finite() const { return std::isfinite(x) && std::isfinite(x_dot) && std::isfinite(y) && std::isfinite(y_dot); }

  friend bool operator==(const StateVector&, const StateVector&) = default;
};

struct Measurement {
  double t = 0.0;
  double z_x = 0.0;
  double z_y = 0.0;

  Vec2 z() const { return Vec2(z_x, z_y); }
  bool finite() const { return std::isfinite(t) && std::isfinite(z_x) && std::isfinite(z_y); }

  friend bool operator==(const Measurement&, const Measurement&) = default;
};

/// Mean velocity extent/traverse_seconds, perturbed by noise_fraction per
/// sample, turned into a white-acceleration intensity:
///   sqrt(dt^2 * q) = v * noise_fraction  =>  q = (v * noise_fraction / dt)^2
inline double derive_noise_intensity(double extent, double traverse_seconds, double noise_fraction, double delta_t) {
  const auto positive = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!positive(extent) || !positive(traverse_seconds) || !positive(noise_fraction) || !positive(delta_t)) {
    throw Error(ErrorKind::kInvalidConfig, "derive_noise_intensity requires strictly positive finite inputs");
  }
  const double velocity = extent / traverse_seconds;
  const double per_step = velocity * noise_fraction / delta_t;
  return per_step * per_step;
}

namespace defaults {
inline constexpr double kDeltaT = 1.0 / 64.0;
/// Typical reading rate, page-widths per second; also the slip re-init velocity.
inline constexpr double kReadingVelocity = 0.2 / 3.0;
/// One line pitch (25-line page) per 15 s line change, page-heights per second.
inline constexpr double kVerticalVelocity = (1.0 / 25.0) / 15.0;
inline constexpr double kNoiseFraction = 0.03;
inline constexpr double kQx = (kReadingVelocity * kNoiseFraction / kDeltaT) * (kReadingVelocity * kNoiseFraction / kDeltaT);
inline constexpr double kQy =
    (kVerticalVelocity * kNoiseFraction / kDeltaT) * (kVerticalVelocity * kNoiseFraction / kDeltaT);
inline constexpr double kSigmaX = 0.01;
inline constexpr double kSigmaY = 0.005;
inline constexpr double kGamma = 1.0;
inline constexpr double kSlipThreshold = -0.5;
inline constexpr std::size_t kRefractorySamples = 16;
}  // namespace defaults

struct ModelConfig {
  double delta_t = defaults::kDeltaT;
  double q_x = defaults::kQx;
  double q_y = defaults::kQy;
  double sigma_x = defaults::kSigmaX;
  double sigma_y = defaults::kSigmaY;
  double gamma = defaults::kGamma;
  double slip_threshold = defaults::kSlipThreshold;
  double reinit_x_velocity = defaults::kReadingVelocity;
  std::size_t refractory_samples = defaults::kRefractorySamples;

  /// Throws Error(kInvalidConfig) naming the first offending field.
  void validate() const {
    const auto fail = [](const char* msg) { throw Error(ErrorKind::kInvalidConfig, msg); };
    if (!(std::isfinite(delta_t) && delta_t > 0.0)) fail("delta_t must be finite and > 0");
    if (!(std::isfinite(q_x) && q_x >= 0.0)) fail("q_x must be finite and >= 0");
    if (!(std::isfinite(q_y) && q_y >= 0.0)) fail("q_y must be finite and >= 0");
    if (!(std::isfinite(sigma_x) && sigma_x > 0.0)) fail("sigma_x must be finite and > 0");
    if (!(std::isfinite(sigma_y) && sigma_y > 0.0)) fail("sigma_y must be finite and > 0");
    if (!(std::isfinite(gamma) && gamma > 0.0)) fail("gamma must be finite and > 0");
    // -inf is accepted: it disables the slip trigger entirely.
    if (!(slip_threshold < 0.0)) fail("slip_threshold must be < 0");
    if (!(std::isfinite(reinit_x_velocity) && reinit_x_velocity > 0.0)) fail("reinit_x_velocity must be finite and > 0");
  }
};

struct ProcessModel {
  Mat4 f = Mat4::Identity();
  Mat4 q = Mat4::Zero();
};

struct MeasurementModel {
  Mat24 h = Mat24::Zero();
  Mat2 r = Mat2::Identity();
};

inline Mat4 build_transition_matrix(double delta_t) {
  if (!(std::isfinite(delta_t) && delta_t > 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "delta_t must be finite and > 0");
  }
  Mat4 f = Mat4::Identity();
  f(idx::kX, idx::kXDot) = delta_t;
  f(idx::kY, idx::kYDot) = delta_t;
  return f;
}

/// Discrete white-noise-acceleration covariance, one 2x2 block per axis:
///   q * [[dt^4/4, dt^3/2], [dt^3/2, dt^2]]
inline Mat4 build_process_noise_cov(double delta_t, double q_x, double q_y) {
  if (!(std::isfinite(delta_t) && delta_t > 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "delta_t must be finite and > 0");
  }
  if (!(std::isfinite(q_x) && q_x >= 0.0) || !(std::isfinite(q_y) && q_y >= 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "process noise intensities must be finite and >= 0");
  }
  const double dt2 = delta_t * delta_t;
  const double dt3 = dt2 * delta_t;
  const double dt4 = dt2 * dt2;
  Mat2 block;
  block << dt4 / 4.0, dt3 / 2.0, dt3 / 2.0, dt2;

  Mat4 q = Mat4::Zero();
  q.block<2, 2>(idx::kX, idx::kX) = q_x * block;
  q.block<2, 2>(idx::kY, idx::kY) = q_y * block;
  return q;
}

inline MeasurementModel build_measurement_model(double sigma_x, double sigma_y) {
  if (!(std::isfinite(sigma_x) && sigma_x > 0.0) || !(std::isfinite(sigma_y) && sigma_y > 0.0)) {
    throw Error(ErrorKind::kInvalidConfig, "measurement noise stds must be finite and > 0");
  }
  MeasurementModel m;
  m.h(0, idx::kX) = 1.0;
  m.h(1, idx::kY) = 1.0;
  m.r = Mat2::Zero();
  m.r(0, 0) = sigma_x * sigma_x;
  m.r(1, 1) = sigma_y * sigma_y;
  return m;
}

inline ProcessModel build_process_model(const ModelConfig& config) {
  config.validate();
  return {build_transition_matrix(config.delta_t), build_process_noise_cov(config.delta_t, config.q_x, config.q_y)};
}

inline MeasurementModel build_measurement_model(const ModelConfig& config) {
  config.validate();
  return build_measurement_model(config.sigma_x, config.sigma_y);
}

}  // namespace slipkf
