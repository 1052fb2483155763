#pragma once

// Synthetic reading-gaze traces with ground truth.
//
// Reading mode: within a line the gaze holds piecewise-constant fixations
// that step left to right; a line return sweeps x linearly back to the next
// line's first fixation while y moves down one line pitch. Linear-Gaussian
// mode draws directly from the filter's own model.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "slipkf/errors.hpp"
#include "slipkf/model.hpp"
#include "slipkf/tracker.hpp"

namespace slipkf {

enum class SimMode { kReading, kLinearGaussian };

struct SimConfig {
  int n_lines = 25;
  double seconds_per_line = 10.0;
  /// Fractional standard deviation of each line's reading duration.
  double line_time_jitter = 0.1;
  double saccades_per_line = 10.0;
  /// Landing-position jitter of each fixation (page-widths).
  double fixation_noise = 0.01;
  double sigma_x = defaults::kSigmaX;
  double sigma_y = defaults::kSigmaY;
  double delta_t = defaults::kDeltaT;
  double return_duration = 0.15;
  /// Distance of the first and last fixation from the text edges.
  double margin = 0.05;
  std::uint64_t seed = 1;
  SimMode mode = SimMode::kReading;

  void validate() const {
    const auto fail = [](const char* msg) { throw Error(ErrorKind::kInvalidConfig, msg); };
    const auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
    if (n_lines < 1) fail("n_lines must be >= 1");
    if (!(std::isfinite(seconds_per_line) && seconds_per_line > 0.0)) fail("seconds_per_line must be > 0");
    if (!finite_nonneg(line_time_jitter)) fail("line_time_jitter must be >= 0");
    if (!(std::isfinite(saccades_per_line) && saccades_per_line >= 1.0)) fail("saccades_per_line must be >= 1");
    if (!finite_nonneg(fixation_noise)) fail("fixation_noise must be >= 0");
    if (!finite_nonneg(sigma_x) || !finite_nonneg(sigma_y)) fail("measurement noise stds must be >= 0");
    if (!(std::isfinite(delta_t) && delta_t > 0.0)) fail("delta_t must be > 0");
    if (!(std::isfinite(return_duration) && return_duration >= delta_t)) fail("return_duration must be >= delta_t");
    if (!(std::isfinite(margin) && margin >= 0.0 && margin < 0.5)) fail("margin must be in [0, 0.5)");
  }
};

struct SimulatedPage {
  PageTrace trace;
  /// Noiseless state per sample.
  std::vector<StateVector> truth;
  /// First sample index of each line-return sweep (n_lines - 1 entries).
  std::vector<std::size_t> return_onsets;
  /// Samples per return sweep.
  std::size_t return_samples = 0;
};

namespace detail {

struct LineLayout {
  std::vector<double> positions;
  std::vector<std::size_t> durations;  // samples per fixation, sums to the line length
};

inline LineLayout layout_line(const SimConfig& cfg, std::size_t n_samples, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double jittered = cfg.saccades_per_line * (1.0 + 0.2 * normal(rng));
  const std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(std::lround(std::max(jittered, 1.0))), 1,
                                                std::max<std::size_t>(n_samples, 1));

  LineLayout out;
  const double lo = cfg.margin;
  const double hi = 1.0 - cfg.margin;
  for (std::size_t j = 0; j < k; ++j) {
    const double base = k == 1 ? lo : lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(k - 1);
    double pos = base + cfg.fixation_noise * normal(rng);
    pos = std::clamp(pos, lo, hi);
    if (!out.positions.empty()) pos = std::max(pos, out.positions.back());
    out.positions.push_back(pos);
  }
  // Endpoints pinned so sweeps start and end at the margins.
  out.positions.front() = lo;
  if (k > 1) out.positions.back() = hi;

  // Fixation durations: random partition of n_samples into k non-empty runs.
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> weights(k);
  double total = 0.0;
  for (auto& w : weights) {
    w = 0.25 + uniform(rng);
    total += w;
  }
  std::size_t assigned = 0;
  out.durations.resize(k);
  for (std::size_t j = 0; j + 1 < k; ++j) {
    const std::size_t remaining_runs = k - j - 1;
    const auto want = static_cast<std::size_t>(std::lround(static_cast<double>(n_samples) * weights[j] / total));
    out.durations[j] = std::clamp<std::size_t>(want, 1, n_samples - assigned - remaining_runs);
    assigned += out.durations[j];
  }
  out.durations[k - 1] = n_samples - assigned;
  return out;
}

}  // namespace detail

inline SimulatedPage simulate_reading(const SimConfig& cfg) {
  cfg.validate();
  if (cfg.mode != SimMode::kReading) throw Error(ErrorKind::kInvalidConfig, "simulate_reading requires reading mode");

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  SimulatedPage page;
  page.trace.page_id = "sim-" + std::to_string(cfg.seed);
  std::vector<int> labels;
  page.return_samples = static_cast<std::size_t>(std::max<long>(1, std::lround(cfg.return_duration / cfg.delta_t)));

  const double pitch = 1.0 / static_cast<double>(cfg.n_lines);
  const auto line_y = [&](int line) { return (static_cast<double>(line) - 0.5) * pitch; };
  const auto push = [&](double x, double x_dot, double y, double y_dot, int label) {
    page.truth.push_back({x, x_dot, y, y_dot});
    labels.push_back(label);
  };

  double last_x = cfg.margin;
  for (int line = 1; line <= cfg.n_lines; ++line) {
    const double duration = cfg.seconds_per_line * std::max(0.2, 1.0 + cfg.line_time_jitter * normal(rng));
    const auto n_samples = static_cast<std::size_t>(std::max<long>(2, std::lround(duration / cfg.delta_t)));
    const detail::LineLayout layout = detail::layout_line(cfg, n_samples, rng);

    if (line > 1) {
      page.return_onsets.push_back(page.truth.size());
      const double x_from = last_x;
      const double x_to = layout.positions.front();
      const double y_from = line_y(line - 1);
      const double y_to = line_y(line);
      const double sweep_seconds = static_cast<double>(page.return_samples) * cfg.delta_t;
      const double vx = (x_to - x_from) / sweep_seconds;
      const double vy = (y_to - y_from) / sweep_seconds;
      for (std::size_t i = 1; i <= page.return_samples; ++i) {
        const double frac = static_cast<double>(i) / static_cast<double>(page.return_samples);
        // The sweep's last sample lands on the first fixation, at rest.
        const bool landed = i == page.return_samples;
        push(x_from + (x_to - x_from) * frac, landed ? 0.0 : vx, y_from + (y_to - y_from) * frac,
             landed ? 0.0 : vy, line);
      }
    }
    for (std::size_t j = 0; j < layout.positions.size(); ++j) {
      for (std::size_t i = 0; i < layout.durations[j]; ++i) push(layout.positions[j], 0.0, line_y(line), 0.0, line);
    }
    last_x = layout.positions.back();
  }

  page.trace.samples.reserve(page.truth.size());
  for (std::size_t i = 0; i < page.truth.size(); ++i) {
    const auto& s = page.truth[i];
    page.trace.samples.push_back({static_cast<double>(i) * cfg.delta_t, s.x + cfg.sigma_x * normal(rng),
                                  s.y + cfg.sigma_y * normal(rng)});
  }
  page.trace.labels = std::move(labels);
  return page;
}

/// Factor L with L * L^T = cov for a symmetric PSD matrix (rank-deficient
/// allowed, negative round-off eigenvalues clipped to zero).
template <int N>
Eigen::Matrix<double, N, N> psd_factor(const Eigen::Matrix<double, N, N>& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> eig(cov);
  const Eigen::Matrix<double, N, 1> root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.asDiagonal();
}

/// Draws x(k+1) = F x(k) + w, z(k) = H x(k) + v with w ~ N(0, Q), v ~ N(0, R).
/// Sample k carries timestamp k * delta_t; no labels.
inline SimulatedPage simulate_linear_gaussian(const SimConfig& cfg, const ProcessModel& process,
                                              const MeasurementModel& meas, std::size_t n,
                                              const StateVector& initial = {0.05, defaults::kReadingVelocity, 0.5,
                                                                            0.0}) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto draw4 = [&] { return Vec4(normal(rng), normal(rng), normal(rng), normal(rng)); };
  const auto draw2 = [&] { return Vec2(normal(rng), normal(rng)); };

  const Mat4 q_root = psd_factor<4>(process.q);
  const Mat2 r_root = psd_factor<2>(meas.r);

  SimulatedPage page;
  page.trace.page_id = "lg-" + std::to_string(cfg.seed);
  page.truth.reserve(n);
  page.trace.samples.reserve(n);
  Vec4 x = initial.vec();
  for (std::size_t k = 0; k < n; ++k) {
    if (k > 0) x = process.f * x + q_root * draw4();
    const Vec2 z = meas.h * x + r_root * draw2();
    page.truth.push_back(StateVector::from_vec(x));
    page.trace.samples.push_back({static_cast<double>(k) * cfg.delta_t, z(0), z(1)});
  }
  return page;
}

/// Dispatches on cfg.mode. Linear-Gaussian pages use the default model with
/// the config's sampling interval and measurement noise, and last
/// n_lines * seconds_per_line seconds.
inline SimulatedPage simulate_page(const SimConfig& cfg) {
  if (cfg.mode == SimMode::kReading) return simulate_reading(cfg);
  cfg.validate();
  ModelConfig model;
  model.delta_t = cfg.delta_t;
  model.sigma_x = cfg.sigma_x > 0.0 ? cfg.sigma_x : defaults::kSigmaX;
  model.sigma_y = cfg.sigma_y > 0.0 ? cfg.sigma_y : defaults::kSigmaY;
  const auto n = static_cast<std::size_t>(
      std::max<long>(3, std::lround(cfg.n_lines * cfg.seconds_per_line / cfg.delta_t)));
  return simulate_linear_gaussian(cfg, build_process_model(model), build_measurement_model(model), n);
}

}  // namespace slipkf
